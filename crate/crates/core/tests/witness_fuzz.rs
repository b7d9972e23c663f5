//! Mutated certificates: whatever the verifier still accepts must satisfy the
//! value equation when checked point by point through the forward map.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use reversa::corpus;
use reversa::sequence::{Cardinal, CardinalSpec};
use reversa::witness::{
    build_witness, verify_witness, Indexing, NonRevCase, Point, Reject, TrackRule, ValueRule,
    WitnessMap,
};

/// Targets checked pointwise on each track.
const WINDOW: u64 = 30;

fn bump(rng: &mut ChaCha8Rng, x: u64) -> u64 {
    if x > 0 && rng.gen_bool(0.5) {
        x - 1
    } else {
        x + 1
    }
}

fn mutate(rng: &mut ChaCha8Rng, w: &WitnessMap) -> WitnessMap {
    let mut m = w.clone();
    let t = rng.gen_range(0..m.tracks.len());
    match rng.gen_range(0..8) {
        0 => match &mut m.tracks[t].values {
            ValueRule::Const(Cardinal::Fin(v)) => *v = bump(rng, *v).max(1),
            ValueRule::Const(Cardinal::Aleph(a)) => *a += 1,
            ValueRule::Affine { first, step } => {
                if rng.gen_bool(0.5) {
                    *first = bump(rng, *first).max(1)
                } else {
                    *step = bump(rng, *step).max(1)
                }
            }
        },
        1 => match &mut m.rules[t] {
            TrackRule::CollapseShift { heads, shift } => {
                if rng.gen_bool(0.5) {
                    *heads = bump(rng, *heads)
                } else {
                    *shift = bump(rng, *shift)
                }
            }
            TrackRule::HeadToExternal { heads, target } => {
                if rng.gen_bool(0.5) {
                    *heads = bump(rng, *heads)
                } else {
                    target.pos = bump(rng, target.pos)
                }
            }
            TrackRule::EvenOddFold { head, rate, .. } => {
                if rng.gen_bool(0.5) {
                    *head = bump(rng, *head)
                } else {
                    *rate = bump(rng, *rate).max(1)
                }
            }
            other => *other = TrackRule::SuccessorShift,
        },
        2 => m.rules[t] = TrackRule::Identity,
        3 if m.tracks.len() > 1 => {
            let u = rng.gen_range(0..m.tracks.len());
            m.rules.swap(t, u);
        }
        4 if m.tracks.len() > 1 => {
            m.tracks.remove(t);
            m.rules.remove(t);
        }
        5 => {
            m.tracks[t].indexing = match m.tracks[t].indexing {
                Indexing::Omega => Indexing::Finite(rng.gen_range(1..4)),
                Indexing::Finite(n) => {
                    if rng.gen_bool(0.5) {
                        Indexing::Omega
                    } else {
                        Indexing::Finite(bump(rng, n).max(1))
                    }
                }
            }
        }
        6 => match &mut m.periodicity {
            Some(p) => match rng.gen_range(0..3) {
                0 => p.start = bump(rng, p.start),
                1 => p.period = bump(rng, p.period).max(1),
                _ => {
                    if let Some(c) = p.stage.values_mut().next() {
                        *c = bump(rng, *c);
                    }
                }
            },
            None => m.rules[t] = TrackRule::ChainAdvance,
        },
        _ => {
            let id = format!("{}-copy", m.tracks[t].id);
            let mut copy = m.tracks[t].clone();
            copy.id = id;
            m.tracks.push(copy);
            m.rules.push(m.rules[t].clone());
        }
    }
    m
}

/// Largest position whose image can land inside the window.
fn horizon(w: &WitnessMap) -> u64 {
    let mut h = 4 * WINDOW + 64;
    for r in &w.rules {
        match r {
            TrackRule::CollapseShift { heads, shift } => h = h.max(WINDOW + heads + shift + 8),
            TrackRule::HeadToExternal { heads, .. } => h = h.max(WINDOW + 2 * heads + 8),
            TrackRule::EvenOddFold { head, rate, .. } => {
                h = h.max(2 * (head + rate * (WINDOW + 2)) + 8)
            }
            _ => {}
        }
    }
    h
}

/// Pointwise check over the window: each finite-valued target point is hit,
/// and the values of its preimages sum to its own value.
fn pointwise(w: &WitnessMap) -> Result<(), String> {
    let h = horizon(w);
    let mut sums: BTreeMap<Point, (u64, u64)> = BTreeMap::new();
    for t in &w.tracks {
        let end = match t.indexing {
            Indexing::Omega => h,
            Indexing::Finite(n) => n.min(h),
        };
        for pos in 0..end {
            let p = Point::new(t.id.clone(), pos);
            let q = w.apply(&p).map_err(|e| format!("apply {p}: {e}"))?;
            let v = match t.value_at(pos).map_err(|e| e.to_string())? {
                Cardinal::Fin(v) => v,
                Cardinal::Aleph(_) => u64::MAX,
            };
            let e = sums.entry(q).or_insert((0, 0));
            e.0 = e.0.saturating_add(v);
            e.1 += 1;
        }
    }
    for t in &w.tracks {
        let end = match t.indexing {
            Indexing::Omega => WINDOW,
            Indexing::Finite(n) => n.min(WINDOW),
        };
        for pos in 0..end {
            let Cardinal::Fin(v) = t.value_at(pos).map_err(|e| e.to_string())? else {
                continue;
            };
            let p = Point::new(t.id.clone(), pos);
            match sums.get(&p) {
                None => return Err(format!("{p} has no preimage")),
                Some(&(sum, _)) if sum != v => {
                    return Err(format!("{p}: value {v}, preimage sum {sum}"))
                }
                _ => {}
            }
        }
    }
    Ok(())
}

fn corpus_certificates(seed: u64, per_case: usize) -> Vec<(CardinalSpec, WitnessMap)> {
    corpus::non_reversible_corpus(seed, per_case)
        .unwrap()
        .into_iter()
        .map(|(s, case)| {
            let w = build_witness(&s, case).unwrap();
            (s, w)
        })
        .collect()
}

#[test]
fn accepted_mutants_satisfy_the_equation_pointwise() {
    let certs = corpus_certificates(corpus::seed_from_env(), 15);
    let mut rng = corpus::rng(corpus::seed_from_env() ^ 0xf022);
    let (mut rejected, mut accepted) = (0, 0);
    for (spec, w) in &certs {
        pointwise(w).unwrap_or_else(|e| panic!("{spec}: original certificate: {e}"));
        for _ in 0..40 {
            let m = mutate(&mut rng, w);
            match verify_witness(spec, &m, 200) {
                Err(_) => rejected += 1,
                Ok(report) => {
                    accepted += 1;
                    pointwise(&m).unwrap_or_else(|e| panic!("{spec}: accepted forgery {m:?}: {e}"));
                    let c = &report.collision;
                    assert!(c.preimages.len() >= 2);
                    for p in &c.preimages {
                        assert_eq!(m.apply(p).unwrap(), c.point, "{spec}: bad collision");
                    }
                }
            }
        }
    }
    assert!(
        rejected > accepted,
        "rejected {rejected}, accepted {accepted}"
    );
}

#[test]
fn certificates_do_not_transfer_between_sequences() {
    let certs = corpus_certificates(corpus::seed_from_env() ^ 1, 10);
    for (i, (spec, _)) in certs.iter().enumerate() {
        let (other_spec, other) = &certs[(i + 7) % certs.len()];
        if other_spec.canonical_hash().unwrap() == spec.canonical_hash().unwrap() {
            continue;
        }
        let err = verify_witness(spec, other, 100).unwrap_err();
        assert!(matches!(err, Reject::StructureMismatch { .. }), "{err:?}");
    }
}

#[test]
fn forged_hash_is_rejected_even_for_a_valid_map() {
    for (spec, mut w) in corpus_certificates(corpus::seed_from_env() ^ 2, 5) {
        w.spec_hash = w.spec_hash.chars().rev().collect();
        assert!(matches!(
            verify_witness(&spec, &w, 100),
            Err(Reject::StructureMismatch { .. })
        ));
    }
}

#[test]
fn certificate_survives_rewriting_the_sequence() {
    let mut rng = corpus::rng(corpus::seed_from_env() ^ 3);
    for case in NonRevCase::ALL {
        for _ in 0..20 {
            let spec = corpus::non_reversible_spec(&mut rng, case);
            let w = build_witness(&spec, case).unwrap();
            let variant = corpus::perturb(&mut rng, &spec);
            verify_witness(&variant, &w, 300)
                .unwrap_or_else(|r| panic!("{spec} vs {variant}: {r}"));
        }
    }
}

/// Every ±1 change of a rule parameter, where the rule feeds finite-valued
/// points. Infinite targets absorb a changed head count, so those are left
/// to the pointwise test above.
fn parameter_mutants(w: &WitnessMap) -> Vec<(String, WitnessMap)> {
    let finite_valued = |id: &str| {
        w.tracks
            .iter()
            .find(|t| t.id == id)
            .is_some_and(|t| !matches!(t.values, ValueRule::Const(Cardinal::Aleph(_))))
    };
    let mut out = Vec::new();
    for (i, rule) in w.rules.iter().enumerate() {
        let mut push = |label: String, rule: TrackRule| {
            let mut m = w.clone();
            m.rules[i] = rule;
            out.push((label, m));
        };
        for delta in [-1i64, 1] {
            let moved = |x: u64| x.checked_add_signed(delta);
            match rule {
                TrackRule::HeadToExternal { heads, target } if finite_valued(&target.track) => {
                    if let Some(h) = moved(*heads).filter(|&h| h > 0) {
                        push(
                            format!("heads {delta:+}"),
                            TrackRule::HeadToExternal {
                                heads: h,
                                target: target.clone(),
                            },
                        );
                    }
                    if let Some(pos) = moved(target.pos) {
                        let target = Point::new(target.track.clone(), pos);
                        push(
                            format!("target {delta:+}"),
                            TrackRule::HeadToExternal {
                                heads: *heads,
                                target,
                            },
                        );
                    }
                }
                TrackRule::EvenOddFold { chain, head, rate } if finite_valued(chain) => {
                    if let Some(h) = moved(*head) {
                        push(
                            format!("head {delta:+}"),
                            TrackRule::EvenOddFold {
                                chain: chain.clone(),
                                head: h,
                                rate: *rate,
                            },
                        );
                    }
                    if let Some(r) = moved(*rate).filter(|&r| r > 0) {
                        push(
                            format!("rate {delta:+}"),
                            TrackRule::EvenOddFold {
                                chain: chain.clone(),
                                head: *head,
                                rate: r,
                            },
                        );
                    }
                }
                _ => {}
            }
        }
    }
    out
}

#[test]
fn unit_parameter_changes_are_rejected() {
    let mut checked = 0;
    for (spec, w) in corpus_certificates(corpus::seed_from_env() ^ 4, 25) {
        for (label, m) in parameter_mutants(&w) {
            assert!(
                verify_witness(&spec, &m, 1000).is_err(),
                "{spec}: certificate with {label} accepted"
            );
            checked += 1;
        }
    }
    assert!(checked > 100, "only {checked} mutants");
}
