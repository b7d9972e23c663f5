//! Finite descriptions of index-set sequences of non-zero cardinals and the
//! top-level reversibility decision.
//!
//! A sequence is described by its value multiset: each entry contributes a
//! family of values (one cardinal, or an arithmetic progression of naturals)
//! with a multiplicity that is either finite or countably infinite. Only the
//! finite/infinite dichotomy of multiplicities matters for reversibility.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::semigroup::{self, gcd, lcm, GeneratorSet};
use crate::witness::{self, NonRevCase, WitnessMap};

/// Largest common period of the progressions in one description.
pub const MAX_PERIOD: u64 = 1 << 20;
/// Largest number of explicit values expanded while normalizing.
pub const MAX_EXPANSION: u64 = 1 << 22;

/// A non-zero cardinal: a positive natural or `aleph k` (`aleph 0` = ω).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cardinal {
    Fin(u64),
    Aleph(u32),
}

impl Cardinal {
    pub const OMEGA: Cardinal = Cardinal::Aleph(0);

    pub fn is_infinite(self) -> bool {
        matches!(self, Cardinal::Aleph(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Cardinal::Fin(n) => Some(n),
            Cardinal::Aleph(_) => None,
        }
    }

    /// Cardinal addition: exact on naturals, `κ + λ = max(κ, λ)` otherwise.
    pub fn checked_add(self, other: Cardinal) -> Result<Cardinal> {
        match (self, other) {
            (Cardinal::Fin(a), Cardinal::Fin(b)) => {
                a.checked_add(b).map(Cardinal::Fin).ok_or(Error::Overflow)
            }
            (a, b) => Ok(a.max(b)),
        }
    }
}

impl fmt::Display for Cardinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cardinal::Fin(n) => write!(f, "{n}"),
            Cardinal::Aleph(k) => write!(f, "aleph {k}"),
        }
    }
}

/// A multiplicity: finite, or countably infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Count {
    Fin(u64),
    Inf,
}

impl Count {
    pub const ZERO: Count = Count::Fin(0);

    pub fn is_zero(self) -> bool {
        self == Count::ZERO
    }

    pub fn is_infinite(self) -> bool {
        self == Count::Inf
    }

    pub fn checked_add(self, other: Count) -> Result<Count> {
        match (self, other) {
            (Count::Fin(a), Count::Fin(b)) => {
                a.checked_add(b).map(Count::Fin).ok_or(Error::Overflow)
            }
            _ => Ok(Count::Inf),
        }
    }
}

impl Add for Count {
    type Output = Count;

    /// Saturates on overflow; use [`Count::checked_add`] to detect it.
    fn add(self, other: Count) -> Count {
        match (self, other) {
            (Count::Fin(a), Count::Fin(b)) => Count::Fin(a.saturating_add(b)),
            _ => Count::Inf,
        }
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Count::Fin(n) => write!(f, "{n}"),
            Count::Inf => write!(f, "inf"),
        }
    }
}

/// A set of values contributed by one entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueFamily {
    Single(Cardinal),
    /// `{first + step·t : t ≥ 0}`.
    Ap {
        first: u64,
        step: u64,
    },
}

impl ValueFamily {
    pub fn contains(&self, value: Cardinal) -> bool {
        match (*self, value) {
            (ValueFamily::Single(c), v) => c == v,
            (ValueFamily::Ap { first, step }, Cardinal::Fin(v)) => {
                v >= first && (v - first) % step == 0
            }
            (ValueFamily::Ap { .. }, Cardinal::Aleph(_)) => false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ValueFamily::Single(Cardinal::Fin(0)) => {
                Err(Error::Malformed("values must be non-zero cardinals".into()))
            }
            ValueFamily::Ap { first, step } if first == 0 || step == 0 => Err(Error::Malformed(
                "progression start and step must be positive".into(),
            )),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ValueFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueFamily::Single(c) => write!(f, "{c}"),
            ValueFamily::Ap { first, step } => write!(f, "ap({first},{step})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Entry {
    pub family: ValueFamily,
    pub mult: Count,
}

impl Entry {
    pub fn new(family: ValueFamily, mult: Count) -> Self {
        Self { family, mult }
    }

    pub fn single(value: Cardinal, mult: Count) -> Self {
        Self::new(ValueFamily::Single(value), mult)
    }

    pub fn fin(value: u64, mult: Count) -> Self {
        Self::single(Cardinal::Fin(value), mult)
    }

    pub fn ap(first: u64, step: u64, mult: Count) -> Self {
        Self::new(ValueFamily::Ap { first, step }, mult)
    }
}

/// A possibly infinite set of positive naturals: finitely many singles plus
/// finitely many arithmetic progressions `(first, step)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ValueSetDescriptor {
    singles: BTreeSet<u64>,
    aps: BTreeSet<(u64, u64)>,
}

impl ValueSetDescriptor {
    pub fn new<S, A>(singles: S, aps: A) -> Self
    where
        S: IntoIterator<Item = u64>,
        A: IntoIterator<Item = (u64, u64)>,
    {
        Self {
            singles: singles.into_iter().collect(),
            aps: aps.into_iter().collect(),
        }
    }

    pub fn finite<S: IntoIterator<Item = u64>>(singles: S) -> Self {
        Self::new(singles, [])
    }

    pub fn singles(&self) -> &BTreeSet<u64> {
        &self.singles
    }

    pub fn aps(&self) -> &BTreeSet<(u64, u64)> {
        &self.aps
    }

    pub fn is_infinite(&self) -> bool {
        !self.aps.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.singles.is_empty() && self.aps.is_empty()
    }

    pub fn contains(&self, v: u64) -> bool {
        self.singles.contains(&v)
            || self
                .aps
                .iter()
                .any(|&(first, step)| v >= first && (v - first).is_multiple_of(step))
    }

    /// Drops singles covered by a progression and progressions covered by
    /// another progression.
    pub fn normalized(&self) -> Self {
        let aps: Vec<(u64, u64)> = self.aps.iter().copied().collect();
        let covered = |inner: (u64, u64), outer: (u64, u64)| {
            inner.0 >= outer.0
                && inner.1.is_multiple_of(outer.1)
                && (inner.0 - outer.0).is_multiple_of(outer.1)
        };
        let kept: BTreeSet<(u64, u64)> = aps
            .iter()
            .enumerate()
            .filter(|&(i, &a)| {
                !aps.iter()
                    .enumerate()
                    .any(|(j, &b)| j != i && covered(a, b) && (!covered(b, a) || j < i))
            })
            .map(|(_, &a)| a)
            .collect();
        let probe = Self::new([], kept.iter().copied());
        let singles = self
            .singles
            .iter()
            .copied()
            .filter(|&v| !probe.contains(v))
            .collect();
        Self { singles, aps: kept }
    }

    /// The finite part as a generating set, or `None` when infinite.
    pub fn as_generator_set(&self) -> Option<GeneratorSet> {
        if self.is_infinite() {
            None
        } else {
            GeneratorSet::new(self.singles.iter().copied()).ok()
        }
    }

    /// gcd of all described values; `None` when empty.
    pub fn gcd(&self) -> Option<u64> {
        let from_aps = self.aps.iter().map(|&(first, step)| gcd(first, step));
        self.singles.iter().copied().chain(from_aps).reduce(gcd)
    }

    /// Number of distinct described values divisible by `d`.
    ///
    /// A progression `first + step·t` meets `dℕ` infinitely often iff
    /// `gcd(step, d)` divides `first`, and otherwise never.
    pub fn count_divisible(&self, d: u64) -> DivisibleCount {
        assert!(d >= 1, "divisor must be positive");
        let normalized = self.normalized();
        if normalized
            .aps
            .iter()
            .any(|&(first, step)| first % gcd(step, d) == 0)
        {
            return DivisibleCount::Infinite;
        }
        DivisibleCount::Fin(normalized.singles.iter().filter(|&&v| v % d == 0).count() as u64)
    }
}

impl fmt::Display for ValueSetDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .singles
            .iter()
            .map(|v| v.to_string())
            .chain(self.aps.iter().map(|(a, b)| format!("ap({a},{b})")))
            .collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DivisibleCount {
    Fin(u64),
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReasonCode {
    /// Every value occurs only finitely often.
    FiniteToOne,
    /// All values finite, `K` independent, finitely many values divisible by
    /// `gcd(K)`.
    IndependentKFiniteDivisibles,
}

impl ReasonCode {
    pub fn code(self) -> &'static str {
        match self {
            ReasonCode::FiniteToOne => "finite-to-one",
            ReasonCode::IndependentKFiniteDivisibles => "independent-k-finite-divisibles",
        }
    }
}

/// Verdict class without the certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Reversible(ReasonCode),
    NotReversible(NonRevCase),
}

impl Classification {
    pub fn is_reversible(self) -> bool {
        matches!(self, Classification::Reversible(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Reversible(ReasonCode),
    NotReversible {
        case: NonRevCase,
        witness: WitnessMap,
    },
}

impl Verdict {
    pub fn is_reversible(&self) -> bool {
        matches!(self, Verdict::Reversible(_))
    }

    pub fn classification(&self) -> Classification {
        match self {
            Verdict::Reversible(r) => Classification::Reversible(*r),
            Verdict::NotReversible { case, .. } => Classification::NotReversible(*case),
        }
    }
}

/// Tallied multiplicities of a description before canonicalization.
struct Tally {
    finite: BTreeMap<u64, Count>,
    alephs: BTreeMap<u32, Count>,
    aps: BTreeMap<(u64, u64), Count>,
}

impl Tally {
    fn of(entries: &[Entry]) -> Result<Self> {
        let mut t = Tally {
            finite: BTreeMap::new(),
            alephs: BTreeMap::new(),
            aps: BTreeMap::new(),
        };
        for e in entries {
            let slot = match e.family {
                ValueFamily::Single(Cardinal::Fin(v)) => t.finite.entry(v).or_insert(Count::ZERO),
                ValueFamily::Single(Cardinal::Aleph(k)) => t.alephs.entry(k).or_insert(Count::ZERO),
                ValueFamily::Ap { first, step } => {
                    t.aps.entry((first, step)).or_insert(Count::ZERO)
                }
            };
            *slot = slot.checked_add(e.mult)?;
        }
        Ok(t)
    }

    fn finite_mult(&self, v: u64) -> Result<Count> {
        let mut m = self.finite.get(&v).copied().unwrap_or(Count::ZERO);
        for (&(first, step), &c) in &self.aps {
            if v >= first && (v - first).is_multiple_of(step) {
                m = m.checked_add(c)?;
            }
        }
        Ok(m)
    }
}

/// A finite description of a sequence of non-zero cardinals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CardinalSpec {
    entries: Vec<Entry>,
}

impl CardinalSpec {
    pub fn new(entries: Vec<Entry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Malformed(
                "a sequence needs at least one entry".into(),
            ));
        }
        for e in &entries {
            e.family.validate()?;
            if e.mult.is_zero() {
                return Err(Error::Malformed("multiplicities must be at least 1".into()));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Canonical form: value families pairwise disjoint, each progression of
    /// minimal period and earliest possible start, leftover values as
    /// singles, entries sorted.
    pub fn normalize(&self) -> Result<CardinalSpec> {
        let tally = Tally::of(&self.entries)?;
        let mut out: Vec<Entry> = Vec::new();

        if tally.aps.is_empty() {
            out.extend(tally.finite.iter().map(|(&v, &c)| Entry::fin(v, c)));
        } else {
            let mut period = 1u64;
            for &(_, step) in tally.aps.keys() {
                period = lcm(period, step)?;
                if period > MAX_PERIOD {
                    return Err(Error::TooLarge(format!(
                        "common period exceeds {MAX_PERIOD}"
                    )));
                }
            }
            let max_first = tally.aps.keys().map(|&(first, _)| first).max().unwrap_or(1);
            let max_single = tally.finite.keys().next_back().copied().unwrap_or(0);
            let threshold = max_first.max(max_single.checked_add(1).ok_or(Error::Overflow)?);

            // Multiplicity of every value v ≥ threshold with v ≡ rho (mod period).
            let tails = (0..period)
                .map(|rho| {
                    tally
                        .aps
                        .iter()
                        .filter(|(&(first, step), _)| rho % step == first % step)
                        .try_fold(Count::ZERO, |acc, (_, &c)| acc.checked_add(c))
                })
                .collect::<Result<Vec<Count>>>()?;
            let p = (1..=period)
                .filter(|p| period.is_multiple_of(*p))
                .find(|&p| (0..period).all(|rho| tails[rho as usize] == tails[(rho % p) as usize]))
                .unwrap_or(period);

            // Per residue class mod p: start of the canonical progression.
            let mut starts: BTreeMap<u64, u64> = BTreeMap::new();
            let mut walked = 0u64;
            for class in 0..p {
                let tail = tails[class as usize];
                if tail.is_zero() {
                    continue;
                }
                let mut start = threshold + (class + p - threshold % p) % p;
                while start > p && tally.finite_mult(start - p)? == tail {
                    start -= p;
                    walked += 1;
                    if walked > MAX_EXPANSION {
                        return Err(Error::TooLarge(
                            "normalization expands too many values".into(),
                        ));
                    }
                }
                starts.insert(class, start);
                out.push(Entry::ap(start, p, tail));
            }

            let covered = |v: u64| starts.get(&(v % p)).is_some_and(|&s| v >= s);
            let mut candidates: BTreeSet<u64> = tally.finite.keys().copied().collect();
            let mut expanded = 0u64;
            for &(first, step) in tally.aps.keys() {
                let mut v = first;
                while v < threshold {
                    candidates.insert(v);
                    expanded += 1;
                    if expanded > MAX_EXPANSION {
                        return Err(Error::TooLarge(
                            "normalization expands too many values".into(),
                        ));
                    }
                    v += step;
                }
            }
            for v in candidates {
                if covered(v) {
                    continue;
                }
                let m = tally.finite_mult(v)?;
                if !m.is_zero() {
                    out.push(Entry::fin(v, m));
                }
            }
        }
        out.extend(
            tally
                .alephs
                .iter()
                .map(|(&k, &c)| Entry::single(Cardinal::Aleph(k), c)),
        );
        out.sort_by_key(|a| a.family);
        Ok(CardinalSpec { entries: out })
    }

    /// Total multiplicity of `value` (sum over all entries containing it).
    pub fn multiplicity(&self, value: Cardinal) -> Count {
        self.entries
            .iter()
            .filter(|e| e.family.contains(value))
            .fold(Count::ZERO, |acc, e| acc + e.mult)
    }

    /// Expects a normalized spec.
    pub fn is_finite_to_one(&self) -> bool {
        self.entries.iter().all(|e| !e.mult.is_infinite())
    }

    pub fn has_aleph(&self) -> bool {
        self.entries
            .iter()
            .any(|e| matches!(e.family, ValueFamily::Single(Cardinal::Aleph(_))))
    }

    pub fn alephs(&self) -> impl Iterator<Item = (u32, Count)> + '_ {
        self.entries.iter().filter_map(|e| match e.family {
            ValueFamily::Single(Cardinal::Aleph(k)) => Some((k, e.mult)),
            _ => None,
        })
    }

    /// The finite values of infinite multiplicity. Expects a normalized spec.
    pub fn k_of(&self) -> ValueSetDescriptor {
        let mut singles = BTreeSet::new();
        let mut aps = BTreeSet::new();
        for e in self.entries.iter().filter(|e| e.mult.is_infinite()) {
            match e.family {
                ValueFamily::Single(Cardinal::Fin(v)) => {
                    singles.insert(v);
                }
                ValueFamily::Ap { first, step } => {
                    aps.insert((first, step));
                }
                ValueFamily::Single(Cardinal::Aleph(_)) => {}
            }
        }
        ValueSetDescriptor { singles, aps }
    }

    /// All distinct finite values.
    pub fn finite_values(&self) -> ValueSetDescriptor {
        let mut singles = BTreeSet::new();
        let mut aps = BTreeSet::new();
        for e in &self.entries {
            match e.family {
                ValueFamily::Single(Cardinal::Fin(v)) => {
                    singles.insert(v);
                }
                ValueFamily::Ap { first, step } => {
                    aps.insert((first, step));
                }
                ValueFamily::Single(Cardinal::Aleph(_)) => {}
            }
        }
        ValueSetDescriptor { singles, aps }
    }

    /// `self ≤ other` pointwise on multiplicities. Both must be normalized.
    pub fn is_submultiset_of(&self, other: &CardinalSpec) -> Result<bool> {
        for (k, c) in self.alephs() {
            if c > other.multiplicity(Cardinal::Aleph(k)) {
                return Ok(false);
            }
        }
        let mut period = 1u64;
        let mut threshold = 1u64;
        for e in self.entries.iter().chain(&other.entries) {
            match e.family {
                ValueFamily::Ap { first, step } => {
                    period = lcm(period, step)?;
                    threshold = threshold.max(first);
                }
                ValueFamily::Single(Cardinal::Fin(v)) => threshold = threshold.max(v + 1),
                ValueFamily::Single(Cardinal::Aleph(_)) => {}
            }
        }
        if period > MAX_PERIOD {
            return Err(Error::TooLarge(format!(
                "common period exceeds {MAX_PERIOD}"
            )));
        }
        let end = threshold.checked_add(period).ok_or(Error::Overflow)?;
        if end - 1 > MAX_EXPANSION {
            // Compare only the values that occur in self.
            let mut probe: BTreeSet<u64> = BTreeSet::new();
            for e in &self.entries {
                match e.family {
                    ValueFamily::Single(Cardinal::Fin(v)) => {
                        probe.insert(v);
                    }
                    ValueFamily::Ap { .. } => {
                        return Err(Error::TooLarge("comparison range too large".into()));
                    }
                    ValueFamily::Single(Cardinal::Aleph(_)) => {}
                }
            }
            return Ok(probe.into_iter().all(|v| {
                self.multiplicity(Cardinal::Fin(v)) <= other.multiplicity(Cardinal::Fin(v))
            }));
        }
        Ok((1..end).all(|v| {
            let v = Cardinal::Fin(v);
            self.multiplicity(v) <= other.multiplicity(v)
        }))
    }

    /// Multiplies every finite value by `c`.
    pub fn scaled(&self, c: u64) -> Result<CardinalSpec> {
        let entries = self
            .entries
            .iter()
            .map(|e| {
                let family = match e.family {
                    ValueFamily::Single(Cardinal::Fin(v)) => {
                        ValueFamily::Single(Cardinal::Fin(v.checked_mul(c).ok_or(Error::Overflow)?))
                    }
                    ValueFamily::Ap { first, step } => ValueFamily::Ap {
                        first: first.checked_mul(c).ok_or(Error::Overflow)?,
                        step: step.checked_mul(c).ok_or(Error::Overflow)?,
                    },
                    other => other,
                };
                Ok(Entry::new(family, e.mult))
            })
            .collect::<Result<Vec<_>>>()?;
        CardinalSpec::new(entries)
    }

    /// Hex SHA-256 of the canonical text of the normalized spec.
    pub fn canonical_hash(&self) -> Result<String> {
        let text = self.normalize()?.to_string();
        let digest = Sha256::digest(text.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}

impl fmt::Display for CardinalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "seq {{ ")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{} x {}", e.family, e.mult)?;
        }
        write!(f, " }}")
    }
}

pub fn normalize(spec: &CardinalSpec) -> Result<CardinalSpec> {
    spec.normalize()
}

pub fn is_finite_to_one(spec: &CardinalSpec) -> bool {
    spec.is_finite_to_one()
}

pub fn k_of(spec: &CardinalSpec) -> ValueSetDescriptor {
    spec.k_of()
}

pub fn count_divisible(values: &ValueSetDescriptor, d: u64) -> DivisibleCount {
    values.count_divisible(d)
}

/// Classifies the sequence without building a certificate.
pub fn classify(spec: &CardinalSpec) -> Result<Classification> {
    let spec = spec.normalize()?;
    if spec.is_finite_to_one() {
        return Ok(Classification::Reversible(ReasonCode::FiniteToOne));
    }
    if spec.has_aleph() {
        return Ok(Classification::NotReversible(NonRevCase::InfCardLeq));
    }
    let k = spec.k_of();
    assert!(
        !k.is_empty(),
        "a non-finite-to-one sequence of naturals has non-empty K"
    );
    let Some(generators) = k.as_generator_set() else {
        return Ok(Classification::NotReversible(NonRevCase::DependentK));
    };
    if !semigroup::is_independent(&generators)? {
        return Ok(Classification::NotReversible(NonRevCase::DependentK));
    }
    let d = semigroup::gcd_of(&generators)?;
    match spec.finite_values().count_divisible(d) {
        DivisibleCount::Fin(_) => Ok(Classification::Reversible(
            ReasonCode::IndependentKFiniteDivisibles,
        )),
        DivisibleCount::Infinite => Ok(Classification::NotReversible(NonRevCase::DivisibleTail)),
    }
}

/// Decides reversibility; non-reversible verdicts carry a certificate.
pub fn decide(spec: &CardinalSpec) -> Result<Verdict> {
    match classify(spec)? {
        Classification::Reversible(reason) => Ok(Verdict::Reversible(reason)),
        Classification::NotReversible(case) => Ok(Verdict::NotReversible {
            case,
            witness: witness::build_witness(spec, case)?,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Count::{Fin as N, Inf};

    fn spec(entries: &[Entry]) -> CardinalSpec {
        CardinalSpec::new(entries.to_vec()).unwrap()
    }

    /// Multiplicity of v by direct summation over the raw entries.
    fn brute_mult(entries: &[Entry], v: u64) -> Count {
        entries
            .iter()
            .filter(|e| e.family.contains(Cardinal::Fin(v)))
            .fold(Count::ZERO, |a, e| a + e.mult)
    }

    #[test]
    fn normalize_examples() {
        let s = spec(&[Entry::fin(3, N(2)), Entry::fin(3, N(5))])
            .normalize()
            .unwrap();
        assert_eq!(s.entries(), &[Entry::fin(3, N(7))]);
        let s = spec(&[Entry::fin(3, Inf), Entry::fin(3, N(1))])
            .normalize()
            .unwrap();
        assert_eq!(s.entries(), &[Entry::fin(3, Inf)]);
        let raw = [Entry::ap(2, 2, N(1)), Entry::fin(4, N(1))];
        let s = spec(&raw).normalize().unwrap();
        for v in 1..40 {
            assert_eq!(s.multiplicity(Cardinal::Fin(v)), brute_mult(&raw, v));
        }
        assert_eq!(
            s.entries(),
            &[
                Entry::fin(2, N(1)),
                Entry::fin(4, N(2)),
                Entry::ap(6, 2, N(1))
            ]
        );
    }

    #[test]
    fn normalize_merges_complementary_progressions() {
        let s = spec(&[Entry::ap(1, 2, N(1)), Entry::ap(2, 2, N(1))])
            .normalize()
            .unwrap();
        assert_eq!(s.entries(), &[Entry::ap(1, 1, N(1))]);
        let s = spec(&[Entry::ap(2, 2, Inf), Entry::fin(4, N(3))])
            .normalize()
            .unwrap();
        assert_eq!(s.entries(), &[Entry::ap(2, 2, Inf)]);
    }

    #[test]
    fn finite_to_one_examples() {
        let omega = Entry::single(Cardinal::OMEGA, Inf);
        assert!(!spec(&[omega]).normalize().unwrap().is_finite_to_one());
        let s = spec(&[Entry::ap(1, 1, N(1)), Entry::single(Cardinal::OMEGA, N(2))]);
        assert!(s.normalize().unwrap().is_finite_to_one());
        assert!(!spec(&[Entry::fin(2, Inf)])
            .normalize()
            .unwrap()
            .is_finite_to_one());
    }

    #[test]
    fn k_of_examples() {
        let s = spec(&[
            Entry::fin(3, Inf),
            Entry::fin(5, Inf),
            Entry::fin(6, N(1)),
            Entry::fin(8, N(2)),
        ]);
        assert_eq!(
            s.normalize().unwrap().k_of(),
            ValueSetDescriptor::finite([3, 5])
        );
        assert!(spec(&[Entry::ap(1, 1, N(1))]).k_of().is_empty());
        let k = spec(&[Entry::ap(2, 2, Inf)]).normalize().unwrap().k_of();
        assert_eq!(k, ValueSetDescriptor::new([], [(2, 2)]));
    }

    #[test]
    fn count_divisible_examples() {
        let v = ValueSetDescriptor::new([4, 10], [(3, 2)]);
        assert_eq!(v.count_divisible(2), DivisibleCount::Fin(2));
        let v = ValueSetDescriptor::new([], [(2, 2)]);
        assert_eq!(v.count_divisible(2), DivisibleCount::Infinite);
        let v = ValueSetDescriptor::finite([3, 5, 6, 8]);
        assert_eq!(v.count_divisible(1), DivisibleCount::Fin(4));
    }

    #[test]
    fn decide_examples() {
        let rev = |es: &[Entry]| decide(&spec(es)).unwrap().is_reversible();
        assert!(rev(&[
            Entry::fin(2, Inf),
            Entry::fin(5, Inf),
            Entry::fin(7, N(3))
        ]));
        assert!(!rev(&[
            Entry::fin(4, Inf),
            Entry::fin(10, Inf),
            Entry::ap(2, 2, N(1))
        ]));
        assert!(!rev(&[Entry::fin(1, Inf), Entry::fin(2, Inf)]));
        assert!(!rev(&[Entry::single(Cardinal::OMEGA, Inf)]));
        assert!(rev(&[
            Entry::fin(3, Inf),
            Entry::fin(5, Inf),
            Entry::fin(6, N(1)),
            Entry::fin(8, N(1)),
        ]));
    }

    #[test]
    fn decide_routes_cases() {
        let case = |es: &[Entry]| classify(&spec(es)).unwrap();
        assert_eq!(
            case(&[Entry::fin(1, Inf), Entry::fin(2, Inf)]),
            Classification::NotReversible(NonRevCase::DependentK)
        );
        assert_eq!(
            case(&[Entry::ap(3, 3, Inf)]),
            Classification::NotReversible(NonRevCase::DependentK)
        );
        assert_eq!(
            case(&[Entry::fin(2, Inf), Entry::ap(2, 2, N(1))]),
            Classification::NotReversible(NonRevCase::DivisibleTail)
        );
        assert_eq!(
            case(&[Entry::fin(2, Inf), Entry::single(Cardinal::Aleph(3), N(1))]),
            Classification::NotReversible(NonRevCase::InfCardLeq)
        );
        assert_eq!(
            case(&[
                Entry::fin(4, Inf),
                Entry::fin(10, Inf),
                Entry::ap(1, 2, N(1))
            ]),
            Classification::Reversible(ReasonCode::IndependentKFiniteDivisibles)
        );
    }

    #[test]
    fn cardinal_order_and_sum() {
        assert!(Cardinal::Fin(1_000_000) < Cardinal::OMEGA);
        assert!(Cardinal::Aleph(0) < Cardinal::Aleph(1));
        assert_eq!(
            Cardinal::OMEGA.checked_add(Cardinal::OMEGA),
            Ok(Cardinal::OMEGA)
        );
        assert_eq!(
            Cardinal::Fin(3).checked_add(Cardinal::Aleph(2)),
            Ok(Cardinal::Aleph(2))
        );
        assert_eq!(
            Cardinal::Fin(u64::MAX).checked_add(Cardinal::Fin(1)),
            Err(Error::Overflow)
        );
    }

    #[test]
    fn rejects_empty_and_zero() {
        assert!(CardinalSpec::new(vec![]).is_err());
        assert!(CardinalSpec::new(vec![Entry::fin(0, N(1))]).is_err());
        assert!(CardinalSpec::new(vec![Entry::fin(3, N(0))]).is_err());
        assert!(CardinalSpec::new(vec![Entry::ap(3, 0, N(1))]).is_err());
    }

    fn entry() -> impl Strategy<Value = Entry> {
        let count = prop_oneof![3 => (1u64..4).prop_map(N), 1 => Just(Inf)];
        prop_oneof![
            (1u64..30, count.clone()).prop_map(|(v, c)| Entry::fin(v, c)),
            (1u64..12, 1u64..7, count).prop_map(|(a, b, c)| Entry::ap(a, b, c)),
        ]
    }

    proptest! {
        #[test]
        fn normalize_preserves_multiplicities(es in proptest::collection::vec(entry(), 1..6)) {
            let s = spec(&es).normalize().unwrap();
            for v in 1..200 {
                prop_assert_eq!(s.multiplicity(Cardinal::Fin(v)), brute_mult(&es, v));
            }
            // families pairwise disjoint
            for v in 1..200 {
                let hits = s.entries().iter().filter(|e| e.family.contains(Cardinal::Fin(v))).count();
                prop_assert!(hits <= 1);
            }
            prop_assert_eq!(s.normalize().unwrap(), s.clone());
        }

        #[test]
        fn scaling_preserves_verdict(es in proptest::collection::vec(entry(), 1..5), c in 1u64..5) {
            let s = spec(&es);
            let a = classify(&s).unwrap().is_reversible();
            let b = classify(&s.scaled(c).unwrap()).unwrap().is_reversible();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn agrees_with_characterization(es in proptest::collection::vec(entry(), 1..5)) {
            let s = spec(&es).normalize().unwrap();
            let k = s.k_of();
            let expected = if s.is_finite_to_one() {
                true
            } else if let Some(g) = k.as_generator_set() {
                let d = semigroup::gcd_of(&g).unwrap();
                semigroup::is_independent(&g).unwrap()
                    && s.finite_values().count_divisible(d) != DivisibleCount::Infinite
            } else {
                false
            };
            prop_assert_eq!(classify(&s).unwrap().is_reversible(), expected);
        }
    }
}
