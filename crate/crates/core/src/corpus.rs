//! Seeded random generators for test corpora.
//!
//! Every generator is a pure function of its seed; `REVERSA_SEED` overrides
//! the default seed.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::semigroup::{self, gcd, GeneratorSet};
use crate::sequence::{
    classify, Cardinal, CardinalSpec, Classification, Count, Entry, ValueFamily,
};
use crate::structures::FiniteBinaryStructure;
use crate::witness::{self, NonRevCase};

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// The seed from `REVERSA_SEED`, or the default.
pub fn seed_from_env() -> u64 {
    std::env::var("REVERSA_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn finite_count(rng: &mut ChaCha8Rng) -> Count {
    Count::Fin(rng.gen_range(1..=4))
}

fn count(rng: &mut ChaCha8Rng, infinite_weight: f64) -> Count {
    if rng.gen_bool(infinite_weight) {
        Count::Inf
    } else {
        finite_count(rng)
    }
}

/// Singles, progressions and alephs, all with finite multiplicity.
fn finite_to_one_entries(rng: &mut ChaCha8Rng) -> Vec<Entry> {
    let mut entries = Vec::new();
    for _ in 0..rng.gen_range(0..=4) {
        entries.push(Entry::fin(rng.gen_range(1..=30), finite_count(rng)));
    }
    for _ in 0..rng.gen_range(0..=2) {
        entries.push(Entry::ap(
            rng.gen_range(1..=12),
            rng.gen_range(1..=6),
            finite_count(rng),
        ));
    }
    if rng.gen_bool(0.3) {
        entries.push(Entry::single(
            Cardinal::Aleph(rng.gen_range(0..=2)),
            finite_count(rng),
        ));
    }
    if entries.is_empty() {
        entries.push(Entry::fin(rng.gen_range(1..=30), finite_count(rng)));
    }
    entries
}

/// A random independent set of size 1..=3 below 25.
fn independent_set(rng: &mut ChaCha8Rng) -> GeneratorSet {
    loop {
        let n = rng.gen_range(1..=3);
        let k = GeneratorSet::new((0..n).map(|_| rng.gen_range(2..=24))).expect("positive");
        if semigroup::is_independent(&k).expect("small") {
            return k;
        }
    }
}

/// A sequence on which construction `case` applies.
pub fn non_reversible_spec(rng: &mut ChaCha8Rng, case: NonRevCase) -> CardinalSpec {
    loop {
        let mut entries = Vec::new();
        match case {
            NonRevCase::InfCardLeq => {
                entries.push(Entry::single(
                    Cardinal::Aleph(rng.gen_range(0..=2)),
                    count(rng, 0.3),
                ));
                if rng.gen_bool(0.6) {
                    entries.push(Entry::fin(rng.gen_range(1..=30), Count::Inf));
                } else {
                    entries.push(Entry::single(
                        Cardinal::Aleph(rng.gen_range(0..=2)),
                        Count::Inf,
                    ));
                }
                entries.extend(finite_to_one_entries(rng));
            }
            NonRevCase::InfCardGt => {
                entries.push(Entry::single(
                    Cardinal::Aleph(rng.gen_range(0..=3)),
                    Count::Inf,
                ));
                entries.extend(finite_to_one_entries(rng));
            }
            NonRevCase::DependentK => {
                if rng.gen_bool(0.25) {
                    entries.push(Entry::ap(
                        rng.gen_range(1..=10),
                        rng.gen_range(1..=5),
                        Count::Inf,
                    ));
                } else {
                    let a = rng.gen_range(1..=12);
                    let b = rng.gen_range(1..=12);
                    let sum = if rng.gen_bool(0.5) {
                        a + b
                    } else {
                        a * rng.gen_range(2..=4)
                    };
                    for v in [a, b, sum] {
                        entries.push(Entry::fin(v, Count::Inf));
                    }
                }
                entries.extend(
                    finite_to_one_entries(rng)
                        .into_iter()
                        .filter(|e| !matches!(e.family, ValueFamily::Single(Cardinal::Aleph(_)))),
                );
            }
            NonRevCase::DivisibleTail => {
                let k = independent_set(rng);
                let d = semigroup::gcd_of(&k).expect("non-empty");
                entries.extend(k.iter().map(|g| Entry::fin(g, Count::Inf)));
                let step = rng.gen_range(1..=6);
                let g = gcd(step, d);
                let first = g * rng.gen_range(1..=8);
                entries.push(Entry::ap(first, step, finite_count(rng)));
                for _ in 0..rng.gen_range(0..=2) {
                    entries.push(Entry::fin(rng.gen_range(1..=30), finite_count(rng)));
                }
            }
        }
        let spec = CardinalSpec::new(entries).expect("valid entries");
        if witness::applicable(&spec, case).unwrap_or(false) {
            return spec;
        }
    }
}

/// A reversible sequence: finite-to-one, or with an independent `K` and
/// finitely many values divisible by `gcd(K)`.
pub fn reversible_spec(rng: &mut ChaCha8Rng) -> CardinalSpec {
    loop {
        let entries = if rng.gen_bool(0.4) {
            finite_to_one_entries(rng)
        } else {
            let k = independent_set(rng);
            let d = semigroup::gcd_of(&k).expect("non-empty");
            let mut entries: Vec<Entry> = k.iter().map(|g| Entry::fin(g, Count::Inf)).collect();
            for _ in 0..rng.gen_range(0..=3) {
                entries.push(Entry::fin(rng.gen_range(1..=40), finite_count(rng)));
            }
            if d > 1 && rng.gen_bool(0.6) {
                // gcd(step, d) must not divide first
                let step = d * rng.gen_range(1..=2);
                let first = rng.gen_range(1..=20);
                if first % gcd(step, d) != 0 {
                    entries.push(Entry::ap(first, step, finite_count(rng)));
                }
            }
            entries
        };
        let spec = CardinalSpec::new(entries).expect("valid entries");
        if classify(&spec)
            .map(Classification::is_reversible)
            .unwrap_or(false)
        {
            return spec;
        }
    }
}

/// Any sequence, reversible or not.
pub fn any_spec(rng: &mut ChaCha8Rng) -> CardinalSpec {
    match rng.gen_range(0..6) {
        0 | 1 => reversible_spec(rng),
        2 => non_reversible_spec(rng, NonRevCase::InfCardLeq),
        3 => non_reversible_spec(rng, NonRevCase::DependentK),
        4 => non_reversible_spec(rng, NonRevCase::DivisibleTail),
        _ => {
            let entries = (0..rng.gen_range(1..=5))
                .map(|_| {
                    let family = if rng.gen_bool(0.25) {
                        ValueFamily::Ap {
                            first: rng.gen_range(1..=12),
                            step: rng.gen_range(1..=6),
                        }
                    } else {
                        ValueFamily::Single(Cardinal::Fin(rng.gen_range(1..=20)))
                    };
                    Entry::new(family, count(rng, 0.5))
                })
                .collect();
            CardinalSpec::new(entries).expect("valid entries")
        }
    }
}

/// The same sequence with entries shuffled and some entries split into
/// pieces describing the same multiset.
pub fn perturb(rng: &mut ChaCha8Rng, spec: &CardinalSpec) -> CardinalSpec {
    let mut entries = Vec::new();
    for e in spec.entries() {
        let split = rng.gen_bool(0.5);
        match (e.family, e.mult) {
            (family, Count::Fin(m)) if split && m >= 2 => {
                let a = rng.gen_range(1..m);
                entries.push(Entry::new(family, Count::Fin(a)));
                entries.push(Entry::new(family, Count::Fin(m - a)));
            }
            (family, Count::Inf) if split => {
                entries.push(Entry::new(family, Count::Inf));
                let extra = if rng.gen_bool(0.5) {
                    Count::Inf
                } else {
                    finite_count(rng)
                };
                entries.push(Entry::new(family, extra));
            }
            (ValueFamily::Ap { first, step }, mult) if split => {
                entries.push(Entry::ap(first, 2 * step, mult));
                entries.push(Entry::ap(first + step, 2 * step, mult));
            }
            _ => entries.push(*e),
        }
    }
    entries.shuffle(rng);
    CardinalSpec::new(entries).expect("valid entries")
}

pub fn digraph(rng: &mut ChaCha8Rng, max_vertices: usize) -> FiniteBinaryStructure {
    let n = rng.gen_range(1..=max_vertices);
    let density: f64 = rng.gen_range(0.0..=1.0);
    let edges: BTreeSet<(usize, usize)> = (0..n)
        .flat_map(|u| (0..n).map(move |v| (u, v)))
        .filter(|_| rng.gen_bool(density))
        .collect();
    FiniteBinaryStructure::new(n, edges).expect("edges in range")
}

/// A partial function with domain inside `0..=max_index`.
pub fn prefix(rng: &mut ChaCha8Rng, max_index: u64, max_value: u64) -> BTreeMap<u64, u64> {
    let size = rng.gen_range(0..=max_index + 1);
    (0..size)
        .map(|_| (rng.gen_range(0..=max_index), rng.gen_range(1..=max_value)))
        .collect()
}

/// `per_case` sequences for each construction, in construction order.
pub fn non_reversible_corpus(
    seed: u64,
    per_case: usize,
) -> Result<Vec<(CardinalSpec, NonRevCase)>> {
    let mut rng = rng(seed);
    let mut out = Vec::new();
    for case in NonRevCase::ALL {
        for _ in 0..per_case {
            out.push((non_reversible_spec(&mut rng, case), case));
        }
    }
    Ok(out)
}

pub fn reversible_corpus(seed: u64, n: usize) -> Vec<CardinalSpec> {
    let mut rng = rng(seed);
    (0..n).map(|_| reversible_spec(&mut rng)).collect()
}
