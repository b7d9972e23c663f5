//! Piecewise total functions `ℕ → ℕ∖{0}` read as integer sequences.
//!
//! A function is a finite list of pieces. Each piece owns an index set (an
//! arithmetic progression or a finite set) and maps the `t`-th element of
//! that set, in increasing order, to a constant or to `a + b·t`. Indices
//! start at 0, values at 1.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::semigroup::{lcm, solve_congruence};
use crate::sequence::{CardinalSpec, Count, Entry, MAX_PERIOD};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Ap {
        first: u64,
        step: u64,
    },
    /// Sorted, duplicate-free.
    Finite(Vec<u64>),
}

impl Domain {
    pub fn finite(indices: impl IntoIterator<Item = u64>) -> Self {
        let set: BTreeSet<u64> = indices.into_iter().collect();
        Domain::Finite(set.into_iter().collect())
    }

    /// Position of `i` inside the domain.
    fn rank(&self, i: u64) -> Option<u64> {
        match self {
            Domain::Ap { first, step } => {
                (i >= *first && (i - first).is_multiple_of(*step)).then(|| (i - first) / step)
            }
            Domain::Finite(v) => v.binary_search(&i).ok().map(|r| r as u64),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Ap { first, step } => write!(f, "ap({first},{step})"),
            Domain::Finite(v) => {
                let parts: Vec<String> = v.iter().map(u64::to_string).collect();
                write!(f, "{{{}}}", parts.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PieceRule {
    Const(u64),
    /// `t ↦ a + b·t`.
    Affine {
        a: u64,
        b: u64,
    },
}

impl PieceRule {
    fn at(self, t: u64) -> Option<u64> {
        match self {
            PieceRule::Const(v) => Some(v),
            PieceRule::Affine { a, b } => b.checked_mul(t)?.checked_add(a),
        }
    }
}

impl fmt::Display for PieceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PieceRule::Const(v) => write!(f, "const {v}"),
            PieceRule::Affine { a, b } => write!(f, "affine({a},{b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Piece {
    pub domain: Domain,
    pub rule: PieceRule,
}

impl Piece {
    pub fn new(domain: Domain, rule: PieceRule) -> Self {
        Self { domain, rule }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BaireFunc {
    pieces: Vec<Piece>,
}

impl BaireFunc {
    /// Checks that the domains partition ℕ and every value is at least 1.
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        let bad = |msg: String| Err(Error::MalformedFunction(msg));
        let mut period = 1u64;
        let mut head = 0u64;
        for p in &pieces {
            match &p.domain {
                Domain::Ap { step: 0, .. } => {
                    return bad("progression step must be positive".into())
                }
                Domain::Ap { first, step } => {
                    period = lcm(period, *step)?;
                    if period > MAX_PERIOD {
                        return Err(Error::TooLarge(format!(
                            "common period exceeds {MAX_PERIOD}"
                        )));
                    }
                    head = head.max(*first);
                }
                Domain::Finite(v) => {
                    if v.is_empty() {
                        return bad("empty finite domain".into());
                    }
                    if v.windows(2).any(|w| w[0] >= w[1]) {
                        return bad("finite domains must be sorted and distinct".into());
                    }
                    head = head.max(v[v.len() - 1]);
                }
            }
            let min_value = match p.rule {
                PieceRule::Const(v) => v,
                PieceRule::Affine { a, .. } => a,
            };
            if min_value == 0 {
                return bad(format!("piece {} takes the value 0", p.domain));
            }
        }
        // Membership in every progression is periodic past the head.
        let end = head
            .checked_add(period)
            .and_then(|x| x.checked_add(1))
            .ok_or(Error::Overflow)?;
        if end > crate::sequence::MAX_EXPANSION {
            return Err(Error::TooLarge("partition check range too large".into()));
        }
        for i in 0..end {
            let owners = pieces.iter().filter(|p| p.domain.rank(i).is_some()).count();
            if owners != 1 {
                return bad(format!("index {i} is covered {owners} times"));
            }
        }
        Ok(Self { pieces })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn eval(&self, i: u64) -> Result<u64> {
        for p in &self.pieces {
            if let Some(t) = p.domain.rank(i) {
                return p.rule.at(t).ok_or(Error::Overflow);
            }
        }
        unreachable!("domains partition ℕ")
    }

    /// The value multiset of the function as a sequence description.
    pub fn compile_to_spec(&self) -> Result<CardinalSpec> {
        let mut entries = Vec::new();
        for p in &self.pieces {
            match (&p.domain, p.rule) {
                (Domain::Ap { .. }, PieceRule::Const(v) | PieceRule::Affine { a: v, b: 0 }) => {
                    entries.push(Entry::fin(v, Count::Inf))
                }
                (Domain::Ap { .. }, PieceRule::Affine { a, b }) => {
                    entries.push(Entry::ap(a, b, Count::Fin(1)))
                }
                (Domain::Finite(v), rule) => {
                    for t in 0..v.len() as u64 {
                        entries.push(Entry::fin(
                            rule.at(t).ok_or(Error::Overflow)?,
                            Count::Fin(1),
                        ));
                    }
                }
            }
        }
        CardinalSpec::new(entries)?.normalize()
    }
}

impl fmt::Display for BaireFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pieces {{ ")?;
        for (i, p) in self.pieces.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{} -> {}", p.domain, p.rule)?;
        }
        write!(f, " }}")
    }
}

/// `outer ∘ inner`.
pub fn compose(outer: &BaireFunc, inner: &BaireFunc) -> Result<BaireFunc> {
    let mut pieces = Vec::new();
    let mut points: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
    for p in &inner.pieces {
        match (&p.domain, p.rule) {
            (Domain::Finite(idx), rule) => {
                for (t, &i) in idx.iter().enumerate() {
                    let w = rule.at(t as u64).ok_or(Error::Overflow)?;
                    points.entry(outer.eval(w)?).or_default().insert(i);
                }
            }
            (Domain::Ap { .. }, PieceRule::Const(w) | PieceRule::Affine { a: w, b: 0 }) => {
                pieces.push(Piece::new(
                    p.domain.clone(),
                    PieceRule::Const(outer.eval(w)?),
                ));
            }
            (&Domain::Ap { first, step }, PieceRule::Affine { a, b }) => {
                split_progression(outer, (first, step), (a, b), &mut pieces, &mut points)?;
            }
        }
    }
    pieces.extend(points.into_iter().map(|(v, idx)| {
        Piece::new(
            Domain::Finite(idx.into_iter().collect()),
            PieceRule::Const(v),
        )
    }));
    BaireFunc::new(pieces).map_err(|e| match e {
        Error::MalformedFunction(m) => Error::NotAlignable(m),
        other => other,
    })
}

/// Splits the inner piece `first + step·t ↦ a + b·t` (b ≥ 1) against the
/// outer pieces: on each outer progression the hit times `t` form a
/// progression, found by solving a linear congruence.
fn split_progression(
    outer: &BaireFunc,
    (first, step): (u64, u64),
    (a, b): (u64, u64),
    pieces: &mut Vec<Piece>,
    points: &mut BTreeMap<u64, BTreeSet<u64>>,
) -> Result<()> {
    let index_of = |t: u64| -> Result<u64> {
        step.checked_mul(t)
            .and_then(|x| x.checked_add(first))
            .ok_or(Error::Overflow)
    };
    for q in &outer.pieces {
        match &q.domain {
            Domain::Finite(vals) => {
                for &w in vals {
                    if w >= a && (w - a) % b == 0 {
                        let t = (w - a) / b;
                        points
                            .entry(outer.eval(w)?)
                            .or_default()
                            .insert(index_of(t)?);
                    }
                }
            }
            &Domain::Ap {
                first: f2,
                step: s2,
            } => {
                // a + b·t ≡ f2 (mod s2) and a + b·t ≥ f2
                let c = (f2 % s2 + s2 - a % s2) % s2;
                let Some((t0, period)) = solve_congruence(b, c, s2) else {
                    continue;
                };
                let t_min = if f2 > a { (f2 - a).div_ceil(b) } else { 0 };
                let t_start = if t0 >= t_min {
                    t0
                } else {
                    t0 + (t_min - t0).div_ceil(period) * period
                };
                let w0 = b
                    .checked_mul(t_start)
                    .and_then(|x| x.checked_add(a))
                    .ok_or(Error::Overflow)?;
                let u0 = (w0 - f2) / s2;
                let du = b.checked_mul(period).ok_or(Error::Overflow)? / s2;
                let rule = match q.rule {
                    PieceRule::Const(v) => PieceRule::Const(v),
                    PieceRule::Affine { a: a2, b: b2 } => PieceRule::Affine {
                        a: b2
                            .checked_mul(u0)
                            .and_then(|x| x.checked_add(a2))
                            .ok_or(Error::Overflow)?,
                        b: b2.checked_mul(du).ok_or(Error::Overflow)?,
                    },
                };
                let domain = Domain::Ap {
                    first: index_of(t_start)?,
                    step: step.checked_mul(period).ok_or(Error::Overflow)?,
                };
                pieces.push(Piece::new(domain, rule));
            }
        }
    }
    Ok(())
}

/// Extends a finite partial function to a finite-to-one total one: indices
/// missing below the largest prefix index get fresh values above every
/// prefix value, and the tail continues with fresh increasing values.
pub fn extend_to_reversible(prefix: &BTreeMap<u64, u64>) -> Result<BaireFunc> {
    if let Some((i, _)) = prefix.iter().find(|(_, &v)| v == 0) {
        return Err(Error::MalformedFunction(format!(
            "prefix value at {i} is 0"
        )));
    }
    let Some((&last, _)) = prefix.iter().next_back() else {
        return BaireFunc::new(vec![Piece::new(
            Domain::Ap { first: 0, step: 1 },
            PieceRule::Affine { a: 1, b: 1 },
        )]);
    };
    let mut fresh = prefix.values().copied().max().unwrap_or(0);
    let mut by_value: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for i in 0..=last {
        let v = match prefix.get(&i) {
            Some(&v) => v,
            None => {
                fresh = fresh.checked_add(1).ok_or(Error::Overflow)?;
                fresh
            }
        };
        by_value.entry(v).or_default().push(i);
    }
    let mut pieces: Vec<Piece> = by_value
        .into_iter()
        .map(|(v, idx)| Piece::new(Domain::Finite(idx), PieceRule::Const(v)))
        .collect();
    pieces.push(Piece::new(
        Domain::Ap {
            first: last + 1,
            step: 1,
        },
        PieceRule::Affine {
            a: fresh.checked_add(1).ok_or(Error::Overflow)?,
            b: 1,
        },
    ));
    BaireFunc::new(pieces)
}

/// The pair `(φ, ψ)` of reversible functions whose composite `φ ∘ ψ` is not
/// reversible: `φ` sends 2 to 2, the set `A` to 3 and `B` to 5, where
/// `A = {1 mod 4} ∪ {evens ≥ 4}` and `B = {0} ∪ {3 mod 4}`; `ψ` sends the
/// residue class 0 mod 3 to 2 and maps the classes 1 and 2 mod 3
/// increasingly onto the odd parts of `A` and `B`.
pub fn composition_counterexample() -> (BaireFunc, BaireFunc) {
    let ap = |first, step| Domain::Ap { first, step };
    let phi = BaireFunc::new(vec![
        Piece::new(Domain::finite([2]), PieceRule::Const(2)),
        Piece::new(ap(1, 4), PieceRule::Const(3)),
        Piece::new(ap(4, 2), PieceRule::Const(3)),
        Piece::new(Domain::finite([0]), PieceRule::Const(5)),
        Piece::new(ap(3, 4), PieceRule::Const(5)),
    ])
    .expect("fixed partition");
    let psi = BaireFunc::new(vec![
        Piece::new(ap(0, 3), PieceRule::Const(2)),
        Piece::new(ap(1, 3), PieceRule::Affine { a: 1, b: 4 }),
        Piece::new(ap(2, 3), PieceRule::Affine { a: 3, b: 4 }),
    ])
    .expect("fixed partition");
    (phi, psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::{decide, Cardinal};
    use proptest::prelude::*;

    fn ap(first: u64, step: u64) -> Domain {
        Domain::Ap { first, step }
    }

    /// Multiplicity of `v` among `f(0..n)`.
    fn hits(f: &BaireFunc, v: u64, n: u64) -> u64 {
        (0..n).filter(|&i| f.eval(i).unwrap() == v).count() as u64
    }

    fn check_multiplicities(f: &BaireFunc) {
        let spec = f.compile_to_spec().unwrap();
        let period = f
            .pieces()
            .iter()
            .filter_map(|p| match p.domain {
                Domain::Ap { step, .. } => Some(step),
                _ => None,
            })
            .fold(1, |acc, s| lcm(acc, s).unwrap());
        let n = 100 * period + 200;
        for v in 1..=100 {
            let (small, large) = (hits(f, v, n), hits(f, v, 2 * n));
            match spec.multiplicity(Cardinal::Fin(v)) {
                Count::Inf => assert!(large > small, "value {v} should repeat forever"),
                Count::Fin(m) => assert_eq!((small, large), (m, m), "value {v}"),
            }
        }
    }

    #[test]
    fn compile_examples() {
        let f = BaireFunc::new(vec![
            Piece::new(ap(0, 2), PieceRule::Const(2)),
            Piece::new(ap(1, 2), PieceRule::Affine { a: 1, b: 2 }),
        ])
        .unwrap();
        assert_eq!(
            f.compile_to_spec().unwrap().to_string(),
            "seq { 2 x inf; ap(1,2) x 1 }"
        );
        check_multiplicities(&f);

        let id =
            BaireFunc::new(vec![Piece::new(ap(0, 1), PieceRule::Affine { a: 1, b: 1 })]).unwrap();
        let spec = id.compile_to_spec().unwrap();
        assert_eq!(spec.to_string(), "seq { ap(1,1) x 1 }");
        assert!(spec.is_finite_to_one());
    }

    #[test]
    fn partition_is_checked() {
        assert!(BaireFunc::new(vec![Piece::new(ap(0, 2), PieceRule::Const(1))]).is_err());
        assert!(BaireFunc::new(vec![
            Piece::new(ap(0, 1), PieceRule::Const(1)),
            Piece::new(Domain::finite([3]), PieceRule::Const(1)),
        ])
        .is_err());
        assert!(BaireFunc::new(vec![Piece::new(ap(0, 1), PieceRule::Const(0))]).is_err());
    }

    #[test]
    fn counterexample_verdicts() {
        let (phi, psi) = composition_counterexample();
        let phi_spec = phi.compile_to_spec().unwrap();
        assert_eq!(phi_spec.to_string(), "seq { 2 x 1; 3 x inf; 5 x inf }");
        assert!(decide(&phi_spec).unwrap().is_reversible());
        assert!(decide(&psi.compile_to_spec().unwrap())
            .unwrap()
            .is_reversible());
        let comp = compose(&phi, &psi).unwrap();
        let spec = comp.compile_to_spec().unwrap();
        assert_eq!(spec.k_of().to_string(), "{2,3,5}");
        assert!(!decide(&spec).unwrap().is_reversible());
        for i in 0..10_000 {
            assert_eq!(
                comp.eval(i).unwrap(),
                phi.eval(psi.eval(i).unwrap()).unwrap()
            );
        }
        check_multiplicities(&phi);
        check_multiplicities(&psi);
        check_multiplicities(&comp);
    }

    #[test]
    fn compose_identities() {
        let id =
            BaireFunc::new(vec![Piece::new(ap(0, 1), PieceRule::Affine { a: 1, b: 1 })]).unwrap();
        let (phi, _) = composition_counterexample();
        // id is i ↦ i + 1, so compose against a shifted copy.
        let c = compose(&phi, &id).unwrap();
        for i in 0..1000 {
            assert_eq!(c.eval(i).unwrap(), phi.eval(i + 1).unwrap());
        }
        let five = BaireFunc::new(vec![Piece::new(ap(0, 1), PieceRule::Const(5))]).unwrap();
        let c = compose(&five, &phi).unwrap();
        assert!((0..1000).all(|i| c.eval(i).unwrap() == 5));
    }

    #[test]
    fn extension_examples() {
        let f = extend_to_reversible(&BTreeMap::from([(0, 7), (3, 7)])).unwrap();
        let values: Vec<u64> = (0..8).map(|i| f.eval(i).unwrap()).collect();
        assert_eq!(values, vec![7, 8, 9, 7, 10, 11, 12, 13]);
        let spec = f.compile_to_spec().unwrap();
        assert_eq!(spec.multiplicity(Cardinal::Fin(7)), Count::Fin(2));
        assert!(decide(&spec).unwrap().is_reversible());

        let f = extend_to_reversible(&BTreeMap::new()).unwrap();
        assert!(f.compile_to_spec().unwrap().is_finite_to_one());

        let f = extend_to_reversible(&BTreeMap::from([(0, 1), (1, 1), (2, 1)])).unwrap();
        let spec = f.compile_to_spec().unwrap();
        assert_eq!(spec.multiplicity(Cardinal::Fin(1)), Count::Fin(3));
        assert!(decide(&spec).unwrap().is_reversible());
    }

    fn func() -> impl Strategy<Value = BaireFunc> {
        let rule = prop_oneof![
            (1u64..12).prop_map(PieceRule::Const),
            (1u64..12, 0u64..4).prop_map(|(a, b)| PieceRule::Affine { a, b }),
        ];
        (
            1u64..=4,
            proptest::collection::vec(rule, 4),
            proptest::collection::btree_set(0u64..12, 0..4),
        )
            .prop_map(|(m, rules, exceptional)| {
                let mut pieces = Vec::new();
                let mut finite: Vec<u64> = Vec::new();
                for r in 0..m {
                    // residue class r mod m, minus the exceptional indices
                    let start = (r..).step_by(m as usize).find(|i| *i > 12).unwrap();
                    pieces.push(Piece::new(ap(start, m), rules[r as usize % 4]));
                    finite.extend(
                        (r..start)
                            .step_by(m as usize)
                            .filter(|i| !exceptional.contains(i)),
                    );
                }
                if !finite.is_empty() {
                    pieces.push(Piece::new(Domain::finite(finite), rules[0]));
                }
                if !exceptional.is_empty() {
                    pieces.push(Piece::new(Domain::finite(exceptional), rules[1]));
                }
                BaireFunc::new(pieces).unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn compile_counts_exactly(f in func()) {
            check_multiplicities(&f);
        }

        #[test]
        fn compose_is_pointwise(f in func(), g in func()) {
            let c = compose(&f, &g).unwrap();
            for i in 0..10_000u64 {
                prop_assert_eq!(c.eval(i).unwrap(), f.eval(g.eval(i).unwrap()).unwrap());
            }
        }

        #[test]
        fn extension_agrees_and_is_finite_to_one(
            prefix in proptest::collection::btree_map(0u64..=10, 1u64..=20, 0..=10)
        ) {
            let f = extend_to_reversible(&prefix).unwrap();
            for (&i, &v) in &prefix {
                prop_assert_eq!(f.eval(i).unwrap(), v);
            }
            prop_assert!(f.compile_to_spec().unwrap().is_finite_to_one());
        }
    }
}
