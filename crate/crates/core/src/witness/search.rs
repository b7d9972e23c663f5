//! Exhaustive search for certificates inside a bounded template space.
//!
//! The space: at most `max_tracks` tracks drawn from value templates derived
//! from the sequence, each with one rule whose numeric parameters are at
//! most `max_param`. Candidates are screened with an allocation-free
//! evaluator over the first few positions and survivors go through the full
//! verifier.
//!
//! Rules that can never take part in an accepted certificate are skipped:
//! - a finite-valued identity track either receives nothing (and can be
//!   dropped, leaving a smaller certificate in the space) or receives an
//!   extra summand and breaks the equation;
//! - a collapse on a finite value sends at least two copies of it to
//!   position 0;
//! - on an affine track every rule other than the shift has a member of
//!   strictly larger value in the preimage of every late position;
//! - a finite-valued track with a non-identity rule has a self member at
//!   every position `j ≥ 1`, so only position 0 can absorb a head.

use std::collections::BTreeMap;

use itertools::Itertools;

use super::{Indexing, Periodicity, Point, Track, TrackRule, ValueRule, Verifier, WitnessMap};
use crate::error::Result;
use crate::sequence::{Cardinal, CardinalSpec, ValueFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBounds {
    pub max_tracks: usize,
    pub max_param: u64,
    /// Positions screened before the full verifier runs.
    pub screen: u64,
    /// Depth handed to the full verifier.
    pub depth: u64,
}

impl Default for SearchBounds {
    fn default() -> Self {
        Self {
            max_tracks: 3,
            max_param: 5,
            screen: 12,
            depth: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub found: Option<WitnessMap>,
    pub candidates: u64,
    pub screened_out: u64,
}

/// A candidate track before rules are attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Template {
    indexing: Indexing,
    values: ValueRule,
}

impl Template {
    fn is_finite_valued(&self) -> bool {
        !matches!(self.values, ValueRule::Const(Cardinal::Aleph(_)))
    }

    fn len(&self) -> Option<u64> {
        match self.indexing {
            Indexing::Omega => None,
            Indexing::Finite(n) => Some(n),
        }
    }
}

/// Rule with track references by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rule {
    Identity,
    Shift,
    Collapse { heads: u64, shift: u64 },
    Head { heads: u64, track: usize, pos: u64 },
    Fold { chain: usize, head: u64, rate: u64 },
}

const ALEPH_BASE: u64 = 1 << 63;

fn encode(c: Cardinal) -> u64 {
    match c {
        Cardinal::Fin(n) => n.min(ALEPH_BASE - 1),
        Cardinal::Aleph(k) => ALEPH_BASE + k as u64,
    }
}

fn add(a: u64, b: u64) -> Option<u64> {
    if a >= ALEPH_BASE || b >= ALEPH_BASE {
        Some(a.max(b))
    } else {
        a.checked_add(b).filter(|&s| s < ALEPH_BASE)
    }
}

fn value_at(t: &Template, pos: u64) -> Option<u64> {
    match t.values {
        ValueRule::Const(c) => Some(encode(c)),
        ValueRule::Affine { first, step } => step
            .checked_mul(pos)
            .and_then(|x| x.checked_add(first))
            .filter(|&v| v < ALEPH_BASE),
    }
}

/// Sum and size of the preimage of `(ti, j)`, or `None` on overflow.
fn preimage_sum(ts: &[Template], rules: &[Rule], ti: usize, j: u64) -> Option<(u64, u32)> {
    let mut sum = 0u64;
    let mut n = 0u32;
    let mut push = |si: usize, pos: u64, sum: &mut u64| -> Option<()> {
        *sum = add(*sum, value_at(&ts[si], pos)?)?;
        n += 1;
        Some(())
    };
    for (si, rule) in rules.iter().enumerate() {
        let same = si == ti;
        match *rule {
            Rule::Identity => {
                if same {
                    push(si, j, &mut sum)?;
                }
            }
            Rule::Shift => {
                if same && j >= 1 {
                    push(si, j - 1, &mut sum)?;
                }
            }
            Rule::Collapse { heads, shift } => {
                if same {
                    if j == 0 {
                        for l in 0..heads {
                            push(si, l, &mut sum)?;
                        }
                    }
                    if j + shift >= heads {
                        push(si, j + shift, &mut sum)?;
                    }
                }
            }
            Rule::Head { heads, track, pos } => {
                if track == ti && pos == j {
                    for l in 0..heads {
                        push(si, l, &mut sum)?;
                    }
                }
                if same {
                    push(si, j + heads, &mut sum)?;
                }
            }
            Rule::Fold { chain, head, rate } => {
                if same {
                    push(si, 2 * j + 1, &mut sum)?;
                }
                if chain == ti {
                    for u in super::fold_feeders(j, head, rate) {
                        push(si, 2 * u, &mut sum)?;
                    }
                }
            }
        }
    }
    Some((sum, n))
}

/// Checks surjectivity and the equation on the first `screen` positions.
fn screen(ts: &[Template], rules: &[Rule], screen: u64) -> bool {
    let mut collision = false;
    for j in 0..screen {
        for (ti, t) in ts.iter().enumerate() {
            if t.len().is_some_and(|n| j >= n) {
                continue;
            }
            let Some((sum, n)) = preimage_sum(ts, rules, ti, j) else {
                return false;
            };
            if n == 0 || Some(sum) != value_at(t, j) {
                return false;
            }
            collision |= n >= 2;
        }
    }
    collision || rules.iter().any(|r| !matches!(r, Rule::Identity))
}

fn templates(spec: &CardinalSpec) -> Vec<Template> {
    let mut out = Vec::new();
    let omega = |values| Template {
        indexing: Indexing::Omega,
        values,
    };
    for e in spec.entries() {
        match (e.family, e.mult.is_infinite()) {
            (ValueFamily::Single(c), true) => out.push(omega(ValueRule::Const(c))),
            // Finite-valued identity tracks never help; see module docs.
            (ValueFamily::Single(c), false) if c.is_infinite() => out.push(Template {
                indexing: Indexing::Finite(1),
                values: ValueRule::Const(c),
            }),
            (ValueFamily::Single(_), false) => {}
            (ValueFamily::Ap { first, step }, infinite) => {
                if infinite {
                    out.push(omega(ValueRule::Const(Cardinal::Fin(first))));
                    out.push(omega(ValueRule::Const(Cardinal::Fin(first + step))));
                }
                for s in 0..=1 {
                    for t in 1..=2 {
                        out.push(omega(ValueRule::Affine {
                            first: first + step * s,
                            step: step * t,
                        }));
                    }
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

fn rule_options(ts: &[Template], ti: usize, max: u64) -> Vec<Rule> {
    let t = &ts[ti];
    if t.indexing != Indexing::Omega {
        return if t.is_finite_valued() {
            Vec::new()
        } else {
            vec![Rule::Identity]
        };
    }
    if matches!(t.values, ValueRule::Affine { .. }) {
        return vec![Rule::Shift];
    }
    let mut out = vec![Rule::Shift];
    if !t.is_finite_valued() {
        out.push(Rule::Identity);
        for heads in 2..=max {
            for shift in 0..=heads {
                out.push(Rule::Collapse { heads, shift });
            }
        }
    }
    for (oi, other) in ts.iter().enumerate() {
        if oi == ti {
            continue;
        }
        let last = match (other.len(), other.is_finite_valued()) {
            (_, true) => 0,
            (Some(n), false) => (n - 1).min(max),
            (None, false) => max,
        };
        for pos in 0..=last {
            for heads in 1..=max {
                out.push(Rule::Head {
                    heads,
                    track: oi,
                    pos,
                });
            }
        }
        if other.indexing == Indexing::Omega {
            for head in 0..=max {
                for rate in 1..=max {
                    out.push(Rule::Fold {
                        chain: oi,
                        head,
                        rate,
                    });
                }
            }
        }
    }
    out
}

fn materialize(spec_hash: &str, ts: &[Template], rules: &[Rule]) -> WitnessMap {
    let id = |i: usize| format!("t{i}");
    let tracks = ts
        .iter()
        .enumerate()
        .map(|(i, t)| Track {
            id: id(i),
            indexing: t.indexing,
            values: t.values,
        })
        .collect();
    let mut stage: BTreeMap<u64, u64> = BTreeMap::new();
    let mut folds = false;
    let rules = rules
        .iter()
        .enumerate()
        .map(|(i, r)| match *r {
            Rule::Identity => TrackRule::Identity,
            Rule::Shift => TrackRule::SuccessorShift,
            Rule::Collapse { heads, shift } => TrackRule::CollapseShift { heads, shift },
            Rule::Head { heads, track, pos } => TrackRule::HeadToExternal {
                heads,
                target: Point::new(id(track), pos),
            },
            Rule::Fold { chain, head, rate } => {
                folds = true;
                if let ValueRule::Const(Cardinal::Fin(v)) = ts[i].values {
                    *stage.entry(v).or_insert(0) += rate;
                }
                TrackRule::EvenOddFold {
                    chain: id(chain),
                    head,
                    rate,
                }
            }
        })
        .collect();
    WitnessMap {
        spec_hash: spec_hash.to_string(),
        tracks,
        rules,
        periodicity: folds.then_some(Periodicity {
            start: 1,
            period: 1,
            stage,
        }),
    }
}

/// Searches the bounded template space for a certificate accepted by the
/// verifier.
pub fn search(spec: &CardinalSpec, bounds: SearchBounds) -> Result<SearchOutcome> {
    let verifier = Verifier::new(spec)?;
    let pool = templates(verifier.spec());
    let mut outcome = SearchOutcome {
        found: None,
        candidates: 0,
        screened_out: 0,
    };
    for size in 1..=bounds.max_tracks {
        for combo in (0..pool.len()).combinations_with_replacement(size) {
            let ts: Vec<Template> = combo.iter().map(|&i| pool[i]).collect();
            let probe = materialize(verifier.hash(), &ts, &vec![Rule::Identity; ts.len()]);
            if verifier.check_values(&probe).is_err() {
                continue;
            }
            let options: Vec<Vec<Rule>> = (0..ts.len())
                .map(|i| rule_options(&ts, i, bounds.max_param))
                .collect();
            if options.iter().any(Vec::is_empty) {
                continue;
            }
            for rules in options.iter().multi_cartesian_product() {
                let rules: Vec<Rule> = rules.into_iter().copied().collect();
                outcome.candidates += 1;
                if !screen(&ts, &rules, bounds.screen) {
                    outcome.screened_out += 1;
                    continue;
                }
                let w = materialize(verifier.hash(), &ts, &rules);
                if verifier.verify(&w, bounds.depth).is_ok() {
                    outcome.found = Some(w);
                    return Ok(outcome);
                }
            }
        }
    }
    Ok(outcome)
}
