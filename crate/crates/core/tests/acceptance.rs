//! Acceptance gate: one pass/fail line per criterion, each under its time
//! budget. Runs with a custom harness so the lines are always printed.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use reversa::baire;
use reversa::corpus;
use reversa::dsl::{parse_seq, parse_union};
use reversa::semigroup::{self, gcd, GeneratorSet};
use reversa::sequence::{classify, decide, Classification, Verdict};
use reversa::structures::{brute_reversible, decide_union, UnionPath, UnionVerdict, UnknownReason};
use reversa::witness::search::{search, SearchBounds};
use reversa::witness::{build_witness, verify_witness, NonRevCase, WitnessMap, DEFAULT_DEPTH};

type Check = Result<String, String>;
type Expectation = fn(&UnionVerdict) -> bool;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn reversible(text: &str) -> Result<bool, String> {
    let spec = parse_seq(text).map_err(|e| format!("{text}: {e}"))?;
    Ok(classify(&spec).map_err(|e| e.to_string())?.is_reversible())
}

fn reference_verdicts() -> Check {
    let cases = [
        ("seq { 1 x 1; 3 x 2; 8 x 1 }", true),
        ("seq { ap(1,1) x 1 }", true),
        ("seq { 2 x inf; 5 x inf }", true),
        ("seq { 2 x inf; 5 x inf; 3 x 4; 7 x 1; 11 x 2 }", true),
        ("seq { 2 x inf; 5 x inf; ap(1,1) x 1 }", false),
        ("seq { 2 x inf; 5 x inf; ap(3,7) x 2 }", false),
        ("seq { 4 x inf; 10 x inf }", true),
        ("seq { 4 x inf; 10 x inf; ap(1,2) x 1 }", true),
        (
            "seq { 4 x inf; 10 x inf; ap(1,2) x 3; 6 x 1; 12 x 2 }",
            true,
        ),
        ("seq { 4 x inf; 10 x inf; ap(2,2) x 1 }", false),
        ("seq { 4 x inf; 10 x inf; ap(6,4) x 1 }", false),
    ];
    for (text, expected) in cases {
        let got = reversible(text)?;
        ensure(got == expected, || {
            format!("{text}: expected reversible={expected}, got {got}")
        })?;
    }
    Ok(format!("{} reference sequences", cases.len()))
}

/// Whether some element of `k` is a non-negative combination of the others,
/// by enumerating coefficient vectors.
fn dependent_by_enumeration(k: &[u64]) -> bool {
    fn reach(target: u64, gens: &[u64]) -> bool {
        match gens.split_first() {
            None => target == 0,
            Some((&g, rest)) => (0..=target / g).any(|c| reach(target - c * g, rest)),
        }
    }
    k.iter().enumerate().any(|(i, &n)| {
        let others: Vec<u64> = k
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &g)| g)
            .collect();
        !others.is_empty() && reach(n, &others)
    })
}

fn independence_oracle() -> Check {
    let mut sets = 0;
    for mask in 1u32..(1 << 15) {
        if mask.count_ones() > 4 {
            continue;
        }
        let k: Vec<u64> = (1..=15).filter(|&i| mask & (1 << (i - 1)) != 0).collect();
        sets += 1;
        let fast = semigroup::is_independent(&GeneratorSet::new(k.iter().copied()).unwrap())
            .map_err(|e| e.to_string())?;
        let slow = !dependent_by_enumeration(&k);
        ensure(fast == slow, || {
            format!("{k:?}: independent={fast}, oracle says {slow}")
        })?;
    }
    ensure(sets == 1940, || format!("enumerated {sets} sets"))?;
    Ok(format!("{sets} generating sets agree"))
}

fn witness_soundness() -> Check {
    let corpus =
        corpus::non_reversible_corpus(corpus::seed_from_env(), 60).map_err(|e| e.to_string())?;
    ensure(corpus.len() >= 200, || {
        format!("corpus has {} specs", corpus.len())
    })?;
    let mut per_case = BTreeMap::new();
    for (spec, case) in &corpus {
        let w = build_witness(spec, *case).map_err(|e| format!("{spec} ({}): {e}", case.code()))?;
        verify_witness(spec, &w, DEFAULT_DEPTH)
            .map_err(|r| format!("{spec} ({}): rejected: {r}", case.code()))?;
        let text = serde_json::to_string(&w).map_err(|e| e.to_string())?;
        let back: WitnessMap = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        ensure(back == w, || {
            format!("{spec}: JSON round trip changed the certificate")
        })?;
        verify_witness(spec, &back, DEFAULT_DEPTH)
            .map_err(|r| format!("{spec} ({}): rejected after round trip: {r}", case.code()))?;
        *per_case.entry(case.code()).or_insert(0) += 1;
    }
    ensure(per_case.len() == NonRevCase::ALL.len(), || {
        format!("cases covered: {per_case:?}")
    })?;
    Ok(format!(
        "{} certificates accepted at depth {DEFAULT_DEPTH}, {per_case:?}",
        corpus.len()
    ))
}

fn no_witness_for_reversible() -> Check {
    let specs = corpus::reversible_corpus(corpus::seed_from_env() ^ 0xa4, 100);
    let bounds = SearchBounds::default();
    // The same search must find certificates where they exist.
    for text in [
        "seq { 1 x inf; 2 x inf }",
        "seq { aleph 0 x inf }",
        "seq { 2 x inf; 5 x inf; ap(1,1) x 1 }",
    ] {
        let spec = parse_seq(text).map_err(|e| e.to_string())?;
        let out = search(&spec, bounds).map_err(|e| format!("{text}: {e}"))?;
        let w = out
            .found
            .ok_or_else(|| format!("{text}: search found no certificate"))?;
        verify_witness(&spec, &w, DEFAULT_DEPTH).map_err(|r| format!("{text}: {r}"))?;
    }
    let mut candidates = 0;
    for spec in &specs {
        ensure(
            classify(spec).map_err(|e| e.to_string())?.is_reversible(),
            || format!("{spec} is not reversible"),
        )?;
        let out = search(spec, bounds).map_err(|e| format!("{spec}: {e}"))?;
        if let Some(w) = out.found {
            return Err(format!(
                "{spec}: search produced an accepted certificate {w:?}"
            ));
        }
        candidates += out.candidates;
    }
    Ok(format!(
        "{} specs, {candidates} candidates (tracks <= {}, params <= {}), none accepted",
        specs.len(),
        bounds.max_tracks,
        bounds.max_param
    ))
}

/// Smallest `c` such that every `n >= c` is a combination of `a` and `b`.
fn conductor_by_table(a: u64, b: u64) -> u64 {
    let limit = (a * b) as usize;
    let mut reach = vec![false; limit + 1];
    reach[0] = true;
    for n in 1..=limit {
        reach[n] = (n >= a as usize && reach[n - a as usize])
            || (n >= b as usize && reach[n - b as usize]);
    }
    (0..=limit)
        .rev()
        .find(|&n| !reach[n])
        .map_or(0, |n| n as u64 + 1)
}

fn conductor_law() -> Check {
    let mut pairs = 0;
    for a in 2..30u64 {
        for b in a + 1..=30 {
            if gcd(a, b) != 1 {
                continue;
            }
            pairs += 1;
            let k = GeneratorSet::new([a, b]).unwrap();
            let c = semigroup::conductor(&k).map_err(|e| e.to_string())?;
            let expected = a * b - a - b + 1;
            ensure(c == expected, || {
                format!("conductor({{{a},{b}}}) = {c}, expected {expected}")
            })?;
            let table = conductor_by_table(a, b);
            ensure(table == expected, || {
                format!("table conductor({{{a},{b}}}) = {table}")
            })?;
        }
    }
    Ok(format!("{pairs} coprime pairs"))
}

fn finite_structures() -> Check {
    let mut rng = corpus::rng(corpus::seed_from_env() ^ 0xa6);
    let mut permutations = 0;
    for _ in 0..500 {
        let s = corpus::digraph(&mut rng, 6);
        let report = brute_reversible(&s, 6).map_err(|e| e.to_string())?;
        ensure(report.reversible, || {
            format!("counterexample {:?}", report.counterexample)
        })?;
        permutations += report.permutations;
    }
    Ok(format!(
        "500 digraphs, {permutations} permutations, no counterexample"
    ))
}

fn union_fixtures() -> Check {
    let fixtures: [(&str, Expectation); 4] = [
        (
            "union { kgraph(3) x inf; kgraph(5) x inf; kgraph(6) x 1; kgraph(8) x 1 }",
            |v| {
                matches!(
                    v,
                    UnionVerdict::Reversible {
                        path: UnionPath::RichFamily
                    }
                )
            },
        ),
        ("union { ordinal(aleph 0) x inf }", |v| {
            matches!(
                v,
                UnionVerdict::NotReversible {
                    path: UnionPath::RichFamily,
                    ..
                }
            )
        }),
        (
            "union { chain(finite, ap(1,1)) x 1; chain(omega, aleph 0) x 2 }",
            |v| {
                matches!(
                    v,
                    UnionVerdict::Reversible {
                        path: UnionPath::TournamentSufficient
                    }
                )
            },
        ),
        ("union { chain(omega-times-n, aleph 0) x inf }", |v| {
            matches!(
                v,
                UnionVerdict::Unknown {
                    reason: UnknownReason::TournamentInconclusive
                }
            )
        }),
    ];
    for (text, expected) in fixtures {
        let u = parse_union(text).map_err(|e| format!("{text}: {e}"))?;
        let v = decide_union(&u).map_err(|e| format!("{text}: {e}"))?;
        ensure(expected(&v), || format!("{text}: got {v:?}"))?;
        if let UnionVerdict::Unknown { reason } = v {
            ensure(!reason.explanation().is_empty(), || {
                "unknown verdict without explanation".into()
            })?;
        }
    }
    Ok("4 fixtures".into())
}

fn composition_counterexample() -> Check {
    let (outer, inner) = baire::composition_counterexample();
    for (name, f) in [("outer", &outer), ("inner", &inner)] {
        let spec = f.compile_to_spec().map_err(|e| e.to_string())?;
        ensure(
            decide(&spec).map_err(|e| e.to_string())?.is_reversible(),
            || format!("{name} {f} is not reversible"),
        )?;
    }
    let h = baire::compose(&outer, &inner).map_err(|e| e.to_string())?;
    let spec = h.compile_to_spec().map_err(|e| e.to_string())?;
    let verdict = decide(&spec).map_err(|e| e.to_string())?;
    let Verdict::NotReversible { case, witness } = &verdict else {
        return Err(format!("composite {h} decided reversible"));
    };
    verify_witness(&spec, witness, DEFAULT_DEPTH).map_err(|r| r.to_string())?;
    let k = spec.k_of();
    for g in [2, 3, 5] {
        ensure(k.contains(g), || format!("K = {k} lacks {g}"))?;
    }
    Ok(format!(
        "composite {spec} not reversible ({}), K = {k}",
        case.code()
    ))
}

fn density_construction() -> Check {
    let mut rng = corpus::rng(corpus::seed_from_env() ^ 0xa9);
    for _ in 0..100 {
        let prefix = corpus::prefix(&mut rng, 9, 20);
        let f = baire::extend_to_reversible(&prefix).map_err(|e| format!("{prefix:?}: {e}"))?;
        for (&i, &v) in &prefix {
            let got = f.eval(i).map_err(|e| e.to_string())?;
            ensure(got == v, || {
                format!("{prefix:?}: f({i}) = {got}, prefix says {v}")
            })?;
        }
        let spec = f.compile_to_spec().map_err(|e| e.to_string())?;
        ensure(
            classify(&spec).map_err(|e| e.to_string())?.is_reversible(),
            || format!("extension {f} of {prefix:?} is not reversible"),
        )?;
    }
    Ok("100 prefixes extended".into())
}

fn normalization_invariance() -> Check {
    let mut rng = corpus::rng(corpus::seed_from_env() ^ 0xa10);
    let mut seen = BTreeMap::new();
    for _ in 0..200 {
        let spec = corpus::any_spec(&mut rng);
        let class: Classification = classify(&spec).map_err(|e| format!("{spec}: {e}"))?;
        *seen.entry(class.is_reversible()).or_insert(0) += 1;
        for _ in 0..5 {
            let variant = corpus::perturb(&mut rng, &spec);
            let other = classify(&variant).map_err(|e| format!("{variant}: {e}"))?;
            ensure(other == class, || {
                format!("{spec} -> {class:?} but {variant} -> {other:?}")
            })?;
        }
    }
    Ok(format!("200 specs x 5 variants, reversible/not: {seen:?}"))
}

struct Criterion {
    id: &'static str,
    name: &'static str,
    budget: Duration,
    run: fn() -> Check,
}

fn main() -> ExitCode {
    // Ignore libtest flags such as `--nocapture` passed by `cargo test`.
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let secs = Duration::from_secs;
    let criteria = [
        Criterion {
            id: "A1",
            name: "reference verdicts",
            budget: secs(1),
            run: reference_verdicts,
        },
        Criterion {
            id: "A2",
            name: "independence oracle",
            budget: secs(10),
            run: independence_oracle,
        },
        Criterion {
            id: "A3",
            name: "witness soundness",
            budget: secs(60),
            run: witness_soundness,
        },
        Criterion {
            id: "A4",
            name: "no witness for reversible",
            budget: secs(120),
            run: no_witness_for_reversible,
        },
        Criterion {
            id: "A5",
            name: "conductor law",
            budget: secs(5),
            run: conductor_law,
        },
        Criterion {
            id: "A6",
            name: "finite structures",
            budget: secs(30),
            run: finite_structures,
        },
        Criterion {
            id: "A7",
            name: "union fixtures",
            budget: secs(1),
            run: union_fixtures,
        },
        Criterion {
            id: "A8",
            name: "composition counterexample",
            budget: secs(1),
            run: composition_counterexample,
        },
        Criterion {
            id: "A9",
            name: "density construction",
            budget: secs(5),
            run: density_construction,
        },
        Criterion {
            id: "A10",
            name: "normalization invariance",
            budget: secs(10),
            run: normalization_invariance,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        if !filter.is_empty() && !filter.iter().any(|f| c.id.eq_ignore_ascii_case(f)) {
            continue;
        }
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let outcome = match result {
            Ok(_) if elapsed > c.budget => {
                Err(format!("took {elapsed:.2?}, budget {:?}", c.budget))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("{} PASS {} ({elapsed:.2?}): {detail}", c.id, c.name),
            Err(why) => {
                failed += 1;
                println!("{} FAIL {} ({elapsed:.2?}): {why}", c.id, c.name);
            }
        }
    }
    println!("seed {}", corpus::seed_from_env());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
