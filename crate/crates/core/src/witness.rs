//! Certificates of non-reversibility and their verification.
//!
//! A certificate is a non-injective surjection `f: I → I` satisfying
//! `κ_j = Σ_{i ∈ f⁻¹[{j}]} κ_i` for every `j`. The index set is realized as
//! a finite list of tracks (finite or ω-indexed runs of index points with a
//! value rule) plus an implicit rest track on which `f` is the identity.
//! Each track carries one rule from a small closed vocabulary whose forward
//! map and preimages are computable from the rule parameters, so the
//! verifier can check the equation exactly at every position: explicitly up
//! to a depth, and symbolically (as an affine identity in the position)
//! beyond it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::semigroup::{self, gcd, lcm, solve_congruence, Semigroup};
use crate::sequence::{Cardinal, CardinalSpec, Count, Entry, ValueFamily};

pub mod search;

/// Id of the implicit identity track.
pub const REST: &str = "rest";
pub const DEFAULT_DEPTH: u64 = 1000;

/// Which construction produced a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonRevCase {
    /// Some value `κ₀` repeats infinitely often and `κ₀ ≤ κ_{i*}` for an
    /// infinite `κ_{i*}`: the ω-run of `κ₀` shifts down into `i*`.
    InfCardLeq,
    /// An infinite value repeats infinitely often: its ω-run collapses its
    /// first two points.
    InfCardGt,
    /// The set of infinitely repeated values is not independent.
    DependentK,
    /// Infinitely many values are divisible by `gcd(K)`.
    DivisibleTail,
}

impl NonRevCase {
    pub const ALL: [NonRevCase; 4] = [
        NonRevCase::InfCardLeq,
        NonRevCase::InfCardGt,
        NonRevCase::DependentK,
        NonRevCase::DivisibleTail,
    ];

    pub fn code(self) -> &'static str {
        match self {
            NonRevCase::InfCardLeq => "inf-card-leq",
            NonRevCase::InfCardGt => "inf-card-gt",
            NonRevCase::DependentK => "dependent-k",
            NonRevCase::DivisibleTail => "divisible-tail",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Indexing {
    Omega,
    Finite(u64),
}

/// Value carried by the point at position `t` of a track.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueRule {
    Const(Cardinal),
    /// `first + step·t`.
    Affine {
        first: u64,
        step: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Track {
    pub id: String,
    pub indexing: Indexing,
    pub values: ValueRule,
}

impl Track {
    pub fn omega(id: impl Into<String>, values: ValueRule) -> Self {
        Self {
            id: id.into(),
            indexing: Indexing::Omega,
            values,
        }
    }

    pub fn finite(id: impl Into<String>, len: u64, values: ValueRule) -> Self {
        Self {
            id: id.into(),
            indexing: Indexing::Finite(len),
            values,
        }
    }

    fn in_range(&self, pos: u64) -> bool {
        match self.indexing {
            Indexing::Omega => true,
            Indexing::Finite(n) => pos < n,
        }
    }

    pub fn value_at(&self, pos: u64) -> Result<Cardinal> {
        match self.values {
            ValueRule::Const(c) => Ok(c),
            ValueRule::Affine { first, step } => step
                .checked_mul(pos)
                .and_then(|x| x.checked_add(first))
                .map(Cardinal::Fin)
                .ok_or(Error::Overflow),
        }
    }
}

/// An index point: a position on a named track.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub track: String,
    pub pos: u64,
}

impl Point {
    pub fn new(track: impl Into<String>, pos: u64) -> Self {
        Self {
            track: track.into(),
            pos,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.track, self.pos)
    }
}

/// Forward map of a track, position by position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum TrackRule {
    Identity,
    /// `l ↦ l + 1`.
    SuccessorShift,
    /// `r ↦ r + 1` on a chain of consumption stages.
    ChainAdvance,
    /// `l < heads ↦ 0`, `l ≥ heads ↦ l − shift`; requires `shift ≤ heads`.
    CollapseShift {
        heads: u64,
        shift: u64,
    },
    /// `l < heads ↦ target`, `l ≥ heads ↦ l − heads`.
    HeadToExternal {
        heads: u64,
        target: Point,
    },
    /// Odd `2t+1 ↦ t`; even `2u ↦` stage `s(u)` of `chain`, where
    /// `s(u) = 0` for `u < head` and `1 + ⌊(u − head)/rate⌋` otherwise.
    EvenOddFold {
        chain: String,
        head: u64,
        rate: u64,
    },
}

/// Declares that from stage `start` on, every `period` stages the chain
/// consumes the same multiset of values (`value → count`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Periodicity {
    pub start: u64,
    pub period: u64,
    pub stage: BTreeMap<u64, u64>,
}

/// A finitely described surjection of the index set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WitnessMap {
    /// Canonical hash of the sequence this certificate targets.
    pub spec_hash: String,
    pub tracks: Vec<Track>,
    pub rules: Vec<TrackRule>,
    pub periodicity: Option<Periodicity>,
}

impl WitnessMap {
    fn track(&self, id: &str) -> Result<(usize, &Track)> {
        self.tracks
            .iter()
            .enumerate()
            .find(|(_, t)| t.id == id)
            .ok_or_else(|| Error::UnknownTrack(id.to_string()))
    }

    fn check_point(&self, p: &Point) -> Result<Option<usize>> {
        if p.track == REST {
            return Ok(None);
        }
        let (i, t) = self.track(&p.track)?;
        if !t.in_range(p.pos) {
            return Err(Error::PositionOutOfRange {
                track: p.track.clone(),
                pos: p.pos,
            });
        }
        Ok(Some(i))
    }

    /// Value of a track point; `None` for rest points.
    pub fn value_of(&self, p: &Point) -> Result<Option<Cardinal>> {
        match self.check_point(p)? {
            None => Ok(None),
            Some(i) => self.tracks[i].value_at(p.pos).map(Some),
        }
    }

    /// The forward map.
    pub fn apply(&self, p: &Point) -> Result<Point> {
        let Some(i) = self.check_point(p)? else {
            return Ok(p.clone());
        };
        let id = &self.tracks[i].id;
        let rule = self
            .rules
            .get(i)
            .ok_or_else(|| Error::Malformed(format!("track `{id}` has no rule")))?;
        let l = p.pos;
        let to = |pos: u64| Point::new(id.clone(), pos);
        Ok(match rule {
            TrackRule::Identity => p.clone(),
            TrackRule::SuccessorShift | TrackRule::ChainAdvance => to(l + 1),
            TrackRule::CollapseShift { heads, shift } => {
                if l < *heads {
                    to(0)
                } else {
                    to(l - shift)
                }
            }
            TrackRule::HeadToExternal { heads, target } => {
                if l < *heads {
                    target.clone()
                } else {
                    to(l - heads)
                }
            }
            TrackRule::EvenOddFold { chain, head, rate } => {
                if l % 2 == 1 {
                    to(l / 2)
                } else {
                    Point::new(chain.clone(), fold_stage(l / 2, *head, *rate))
                }
            }
        })
    }

    /// The exact preimage of `p`.
    pub fn preimage(&self, p: &Point) -> Result<Vec<Point>> {
        let Some(ti) = self.check_point(p)? else {
            return Ok(vec![p.clone()]);
        };
        let j = p.pos;
        let mut out = Vec::new();
        for (si, (src, rule)) in self.tracks.iter().zip(&self.rules).enumerate() {
            let same = si == ti;
            let at = |pos: u64| Point::new(src.id.clone(), pos);
            match rule {
                TrackRule::Identity => {
                    if same {
                        out.push(at(j));
                    }
                }
                TrackRule::SuccessorShift | TrackRule::ChainAdvance => {
                    if same && j >= 1 {
                        out.push(at(j - 1));
                    }
                }
                TrackRule::CollapseShift { heads, shift } => {
                    if same {
                        if j == 0 {
                            out.extend((0..*heads).map(at));
                        }
                        let l = j + shift;
                        if l >= *heads {
                            out.push(at(l));
                        }
                    }
                }
                TrackRule::HeadToExternal { heads, target } => {
                    if target == p {
                        out.extend((0..*heads).map(at));
                    }
                    if same {
                        out.push(at(j + heads));
                    }
                }
                TrackRule::EvenOddFold { chain, head, rate } => {
                    if same {
                        out.push(at(2 * j + 1));
                    }
                    if *chain == p.track {
                        out.extend(fold_feeders(j, *head, *rate).map(|u| at(2 * u)));
                    }
                }
            }
        }
        Ok(out)
    }
}

fn fold_stage(u: u64, head: u64, rate: u64) -> u64 {
    if u < head {
        0
    } else {
        1 + (u - head) / rate
    }
}

/// Even-half indices `u` (position `2u`) consumed at stage `r`.
fn fold_feeders(r: u64, head: u64, rate: u64) -> std::ops::Range<u64> {
    if r == 0 {
        0..head
    } else {
        let lo = head + (r - 1) * rate;
        lo..lo + rate
    }
}

/// Why a certificate was rejected.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "reason")]
pub enum Reject {
    #[error("not surjective: {point} has no preimage")]
    NotSurjective { point: Point },
    #[error("injective: no index point has two preimages")]
    Injective,
    #[error("equation fails at {point}: value {expected}, preimage sum {actual}")]
    EquationFails {
        point: Point,
        expected: String,
        actual: String,
    },
    #[error("structure mismatch: {detail}")]
    StructureMismatch { detail: String },
    #[error("periodicity broken: {detail}")]
    PeriodicityBroken { detail: String },
}

impl Reject {
    pub fn code(&self) -> &'static str {
        match self {
            Reject::NotSurjective { .. } => "not-surjective",
            Reject::Injective => "injective",
            Reject::EquationFails { .. } => "equation-fails",
            Reject::StructureMismatch { .. } => "structure-mismatch",
            Reject::PeriodicityBroken { .. } => "periodicity-broken",
        }
    }
}

fn mismatch(detail: impl Into<String>) -> Reject {
    Reject::StructureMismatch {
        detail: detail.into(),
    }
}

fn broken(detail: impl Into<String>) -> Reject {
    Reject::PeriodicityBroken {
        detail: detail.into(),
    }
}

/// A point together with two or more of its preimages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Collision {
    pub point: Point,
    pub preimages: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub accepted: bool,
    pub depth: u64,
    /// Positions `0..=checked_through` were checked pointwise; later
    /// positions were checked as an identity in the position.
    pub checked_through: u64,
    pub collision: Collision,
}

/// Verifies certificates against one sequence, caching its canonical form.
pub struct Verifier {
    spec: CardinalSpec,
    hash: String,
}

impl Verifier {
    pub fn new(spec: &CardinalSpec) -> Result<Self> {
        Ok(Self {
            spec: spec.normalize()?,
            hash: spec.canonical_hash()?,
        })
    }

    pub fn spec(&self) -> &CardinalSpec {
        &self.spec
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn verify(&self, w: &WitnessMap, depth: u64) -> Result<VerificationReport, Reject> {
        if w.spec_hash != self.hash {
            return Err(mismatch("certificate targets a different sequence"));
        }
        self.verify_map(w, depth)
    }

    /// All checks except the sequence hash.
    pub fn verify_map(&self, w: &WitnessMap, depth: u64) -> Result<VerificationReport, Reject> {
        let depth = depth.max(1);
        check_well_formed(w)?;
        self.check_values(w)?;

        let tail_from = tail_bound(w);
        let through = depth.max(tail_from);
        let mut collision: Option<Collision> = None;
        for (ti, track) in w.tracks.iter().enumerate() {
            let last = match track.indexing {
                Indexing::Omega => through,
                Indexing::Finite(n) => (n - 1).min(through),
            };
            for pos in 0..=last {
                let point = Point::new(track.id.clone(), pos);
                let pre = w.preimage(&point).map_err(|e| mismatch(e.to_string()))?;
                if pre.is_empty() {
                    return Err(Reject::NotSurjective { point });
                }
                let expected = track.value_at(pos).map_err(|e| mismatch(e.to_string()))?;
                let mut sum: Option<Cardinal> = None;
                for q in &pre {
                    let v = w
                        .value_of(q)
                        .map_err(|e| mismatch(e.to_string()))?
                        .ok_or_else(|| mismatch("a rest point maps onto a track"))?;
                    sum = Some(match sum {
                        None => v,
                        Some(s) => s.checked_add(v).map_err(|e| mismatch(e.to_string()))?,
                    });
                }
                let sum = sum.expect("non-empty preimage");
                if sum != expected {
                    return Err(Reject::EquationFails {
                        point,
                        expected: expected.to_string(),
                        actual: sum.to_string(),
                    });
                }
                if collision.is_none() && pre.len() >= 2 {
                    collision = Some(Collision {
                        point,
                        preimages: pre,
                    });
                }
            }
            if track.indexing == Indexing::Omega {
                if let Some(c) = check_tail(w, ti, through + 1)? {
                    if collision.is_none() {
                        collision = Some(c);
                    }
                }
            }
        }
        check_periodicity(w)?;
        let collision = collision.ok_or(Reject::Injective)?;
        Ok(VerificationReport {
            accepted: true,
            depth,
            checked_through: through,
            collision,
        })
    }

    /// The multiset of values on the tracks must fit inside the sequence;
    /// whatever is left over forms the rest track.
    fn check_values(&self, w: &WitnessMap) -> Result<(), Reject> {
        let mut entries = Vec::new();
        for t in &w.tracks {
            match (t.indexing, t.values) {
                (Indexing::Omega, ValueRule::Const(c)) => {
                    entries.push(Entry::single(c, Count::Inf))
                }
                (Indexing::Finite(n), ValueRule::Const(c)) => {
                    entries.push(Entry::single(c, Count::Fin(n)))
                }
                (Indexing::Omega, ValueRule::Affine { first, step: 0 }) => {
                    entries.push(Entry::fin(first, Count::Inf))
                }
                (Indexing::Omega, ValueRule::Affine { first, step }) => {
                    entries.push(Entry::ap(first, step, Count::Fin(1)))
                }
                (Indexing::Finite(n), ValueRule::Affine { first, step }) => {
                    if n > crate::sequence::MAX_EXPANSION {
                        return Err(mismatch("finite track too long"));
                    }
                    for pos in 0..n {
                        let v = t.value_at(pos).map_err(|e| mismatch(e.to_string()))?;
                        entries.push(Entry::single(v, Count::Fin(1)));
                    }
                    let _ = (first, step);
                }
            }
        }
        let used = CardinalSpec::new(entries)
            .and_then(|s| s.normalize())
            .map_err(|e| mismatch(format!("track values: {e}")))?;
        match used.is_submultiset_of(&self.spec) {
            Ok(true) => Ok(()),
            Ok(false) => Err(mismatch(
                "track values are not a sub-multiset of the sequence",
            )),
            Err(e) => Err(mismatch(e.to_string())),
        }
    }
}

/// Verifies `w` against `spec`, pointwise through `depth` and symbolically
/// beyond.
pub fn verify_witness(
    spec: &CardinalSpec,
    w: &WitnessMap,
    depth: u64,
) -> Result<VerificationReport, Reject> {
    let verifier = Verifier::new(spec).map_err(|e| mismatch(e.to_string()))?;
    verifier.verify(w, depth)
}

pub fn apply(w: &WitnessMap, p: &Point) -> Result<Point> {
    w.apply(p)
}

pub fn preimage(w: &WitnessMap, p: &Point) -> Result<Vec<Point>> {
    w.preimage(p)
}

fn check_well_formed(w: &WitnessMap) -> Result<(), Reject> {
    if w.tracks.is_empty() {
        return Err(Reject::Injective);
    }
    if w.rules.len() != w.tracks.len() {
        return Err(mismatch("one rule per track required"));
    }
    let mut ids = BTreeSet::new();
    for t in &w.tracks {
        if t.id == REST || !ids.insert(t.id.as_str()) {
            return Err(mismatch(format!(
                "invalid or duplicate track id `{}`",
                t.id
            )));
        }
        if t.indexing == Indexing::Finite(0) {
            return Err(mismatch(format!("track `{}` is empty", t.id)));
        }
        match t.values {
            ValueRule::Const(Cardinal::Fin(0)) | ValueRule::Affine { first: 0, .. } => {
                return Err(mismatch(format!("track `{}` carries the value 0", t.id)));
            }
            _ => {}
        }
    }
    let omega = |id: &str| {
        w.tracks
            .iter()
            .any(|t| t.id == id && t.indexing == Indexing::Omega)
    };
    for (t, rule) in w.tracks.iter().zip(&w.rules) {
        if *rule != TrackRule::Identity && t.indexing != Indexing::Omega {
            return Err(mismatch(format!(
                "finite track `{}` must use the identity",
                t.id
            )));
        }
        match rule {
            TrackRule::CollapseShift { heads, shift } => {
                if *heads == 0 || shift > heads {
                    return Err(mismatch(format!(
                        "collapse on `{}` needs 0 < shift ≤ heads",
                        t.id
                    )));
                }
            }
            TrackRule::HeadToExternal { heads, target } => {
                if *heads == 0 {
                    return Err(mismatch(format!(
                        "head count on `{}` must be positive",
                        t.id
                    )));
                }
                if target.track == REST {
                    return Err(mismatch("targets must lie on a declared track"));
                }
                w.check_point(target).map_err(|e| mismatch(e.to_string()))?;
            }
            TrackRule::EvenOddFold { chain, rate, .. } => {
                if *rate == 0 {
                    return Err(mismatch(format!(
                        "fold on `{}` needs a positive rate",
                        t.id
                    )));
                }
                if *chain == t.id || !omega(chain) {
                    return Err(mismatch(format!(
                        "fold on `{}` needs another ω-track as chain",
                        t.id
                    )));
                }
            }
            _ => {}
        }
    }
    Ok(())
}

/// From this position on, every ω-track's preimage pattern is uniform.
fn tail_bound(w: &WitnessMap) -> u64 {
    w.rules
        .iter()
        .map(|r| match r {
            TrackRule::CollapseShift { heads, .. } => *heads,
            TrackRule::HeadToExternal { target, .. } => target.pos + 1,
            _ => 1,
        })
        .max()
        .unwrap_or(1)
}

/// A finite value as an affine function `c0 + c1·j` of the position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Linear {
    c0: i128,
    c1: i128,
}

enum SymValue {
    Finite(Linear),
    Infinite(u32),
}

fn symbolic_value(values: ValueRule, alpha: i128, beta: i128) -> SymValue {
    match values {
        ValueRule::Const(Cardinal::Fin(c)) => SymValue::Finite(Linear {
            c0: c as i128,
            c1: 0,
        }),
        ValueRule::Const(Cardinal::Aleph(k)) => SymValue::Infinite(k),
        ValueRule::Affine { first, step } => SymValue::Finite(Linear {
            c0: first as i128 + step as i128 * beta,
            c1: step as i128 * alpha,
        }),
    }
}

/// Checks positions `j ≥ from` of ω-track `ti` at once. Each preimage member
/// is `(track, α·j + β)`, so both sides of the equation are affine in `j`.
fn check_tail(w: &WitnessMap, ti: usize, from: u64) -> Result<Option<Collision>, Reject> {
    let target = &w.tracks[ti];
    let mut members: Vec<(usize, i128, i128)> = Vec::new();
    for (si, (src, rule)) in w.tracks.iter().zip(&w.rules).enumerate() {
        let same = si == ti;
        match rule {
            TrackRule::Identity if same => members.push((si, 1, 0)),
            TrackRule::SuccessorShift | TrackRule::ChainAdvance if same => {
                members.push((si, 1, -1))
            }
            TrackRule::CollapseShift { shift, .. } if same => members.push((si, 1, *shift as i128)),
            TrackRule::HeadToExternal { heads, .. } if same => {
                members.push((si, 1, *heads as i128))
            }
            TrackRule::EvenOddFold { chain, head, rate } => {
                if same {
                    members.push((si, 2, 1));
                }
                if *chain == target.id {
                    let (head, rate) = (*head as i128, *rate as i128);
                    members.extend((0..rate).map(|i| (si, 2 * rate, 2 * (head - rate + i))));
                }
            }
            _ => {}
        }
        let _ = src;
    }
    let at = |j: u64| Point::new(target.id.clone(), j);
    if members.is_empty() {
        return Err(Reject::NotSurjective { point: at(from) });
    }

    let mut finite = Linear { c0: 0, c1: 0 };
    let mut infinite: Option<u32> = None;
    for &(si, alpha, beta) in &members {
        match symbolic_value(w.tracks[si].values, alpha, beta) {
            SymValue::Finite(l) => {
                finite.c0 += l.c0;
                finite.c1 += l.c1;
            }
            SymValue::Infinite(k) => infinite = Some(infinite.map_or(k, |m| m.max(k))),
        }
    }
    let holds = match (symbolic_value(target.values, 1, 0), infinite) {
        (SymValue::Finite(expected), None) => expected == finite,
        (SymValue::Infinite(k), Some(m)) => k == m,
        _ => false,
    };
    if !holds {
        // Two affine functions that differ agree at most once.
        let j = (from..from + 2)
            .find(|&j| !eval_holds(w, ti, j))
            .unwrap_or(from);
        return Err(Reject::EquationFails {
            point: at(j),
            expected: target
                .value_at(j)
                .map(|v| v.to_string())
                .unwrap_or_default(),
            actual: "(sum over the uniform tail)".into(),
        });
    }
    if members.len() >= 2 {
        let point = at(from);
        let preimages = w.preimage(&point).map_err(|e| mismatch(e.to_string()))?;
        return Ok(Some(Collision { point, preimages }));
    }
    Ok(None)
}

fn eval_holds(w: &WitnessMap, ti: usize, j: u64) -> bool {
    let p = Point::new(w.tracks[ti].id.clone(), j);
    let Ok(pre) = w.preimage(&p) else {
        return false;
    };
    let Ok(expected) = w.tracks[ti].value_at(j) else {
        return false;
    };
    let mut sum: Option<Cardinal> = None;
    for q in &pre {
        let Ok(Some(v)) = w.value_of(q) else {
            return false;
        };
        sum = match sum {
            None => Some(v),
            Some(s) => s.checked_add(v).ok(),
        };
        if sum.is_none() {
            return false;
        }
    }
    sum == Some(expected)
}

/// Recomputes the consumption multiset at two stages and compares it with
/// the declared certificate. Stages past `max(start, 1)` consume exactly
/// `rate` points per fold, so constant-valued feeders make them copies.
fn check_periodicity(w: &WitnessMap) -> Result<(), Reject> {
    let folds: Vec<(usize, &String, u64, u64)> = w
        .rules
        .iter()
        .enumerate()
        .filter_map(|(i, r)| match r {
            TrackRule::EvenOddFold { chain, head, rate } => Some((i, chain, *head, *rate)),
            _ => None,
        })
        .collect();
    let Some(cert) = &w.periodicity else {
        if folds.is_empty() {
            return Ok(());
        }
        return Err(broken("consuming rules require a periodicity certificate"));
    };
    if folds.is_empty() {
        return Err(broken("certificate given but no track is consumed"));
    }
    if cert.period == 0 {
        return Err(broken("period must be positive"));
    }
    if folds.iter().any(|f| f.1 != folds[0].1) {
        return Err(broken("all consumption must feed a single chain"));
    }
    let stage_multiset = |r: u64| -> Result<BTreeMap<u64, u64>, Reject> {
        let mut m = BTreeMap::new();
        for &(i, _, head, rate) in &folds {
            let n = fold_feeders(r, head, rate).count() as u64;
            if n == 0 {
                continue;
            }
            match w.tracks[i].values {
                ValueRule::Const(Cardinal::Fin(v)) => *m.entry(v).or_insert(0) += n,
                _ => return Err(broken("consumed tracks must carry a constant finite value")),
            }
        }
        Ok(m)
    };
    for r in [cert.start, cert.start + cert.period] {
        if stage_multiset(r)? != cert.stage {
            return Err(broken(format!(
                "stage {r} does not consume the declared multiset"
            )));
        }
    }
    Ok(())
}

/// Whether construction `case` applies to `spec`.
pub fn applicable(spec: &CardinalSpec, case: NonRevCase) -> Result<bool> {
    let s = spec.normalize()?;
    Ok(match case {
        NonRevCase::InfCardLeq => s.has_aleph() && !s.is_finite_to_one(),
        NonRevCase::InfCardGt => s.alephs().any(|(_, c)| c.is_infinite()),
        NonRevCase::DependentK => {
            let k = s.k_of();
            match k.as_generator_set() {
                None => true,
                Some(g) => !g.is_empty() && !semigroup::is_independent(&g)?,
            }
        }
        NonRevCase::DivisibleTail => match s.k_of().as_generator_set() {
            Some(g) if !g.is_empty() => {
                let d = semigroup::gcd_of(&g)?;
                divisible_family(&s, d).is_some()
            }
            _ => false,
        },
    })
}

/// Builds the certificate of construction `case`.
pub fn build_witness(spec: &CardinalSpec, case: NonRevCase) -> Result<WitnessMap> {
    if !applicable(spec, case)? {
        return Err(Error::NotApplicable(case.code().to_string()));
    }
    let s = spec.normalize()?;
    let spec_hash = spec.canonical_hash()?;
    let (tracks, rules, periodicity) = match case {
        NonRevCase::InfCardLeq => infinite_leq(&s),
        NonRevCase::InfCardGt => infinite_gt(&s),
        NonRevCase::DependentK => dependent_k(&s)?,
        NonRevCase::DivisibleTail => divisible_tail(&s)?,
    };
    Ok(WitnessMap {
        spec_hash,
        tracks,
        rules,
        periodicity,
    })
}

type Parts = (Vec<Track>, Vec<TrackRule>, Option<Periodicity>);

/// Smallest value of infinite multiplicity (finite values first).
fn least_repeated(s: &CardinalSpec) -> Option<Cardinal> {
    s.entries()
        .iter()
        .filter(|e| e.mult.is_infinite())
        .map(|e| match e.family {
            ValueFamily::Single(c) => c,
            ValueFamily::Ap { first, .. } => Cardinal::Fin(first),
        })
        .min()
}

fn infinite_leq(s: &CardinalSpec) -> Parts {
    let star = s.alephs().map(|(k, _)| k).max().expect("aleph present");
    let repeated = least_repeated(s).expect("non-finite-to-one");
    let tracks = vec![
        Track::finite("star", 1, ValueRule::Const(Cardinal::Aleph(star))),
        Track::omega("run", ValueRule::Const(repeated)),
    ];
    let rules = vec![
        TrackRule::Identity,
        TrackRule::HeadToExternal {
            heads: 1,
            target: Point::new("star", 0),
        },
    ];
    (tracks, rules, None)
}

fn infinite_gt(s: &CardinalSpec) -> Parts {
    let k = s
        .alephs()
        .filter(|(_, c)| c.is_infinite())
        .map(|(k, _)| k)
        .max()
        .expect("repeated aleph present");
    let tracks = vec![Track::omega("run", ValueRule::Const(Cardinal::Aleph(k)))];
    let rules = vec![TrackRule::CollapseShift { heads: 2, shift: 1 }];
    (tracks, rules, None)
}

fn dependent_k(s: &CardinalSpec) -> Result<Parts> {
    let (m, dec) = semigroup::find_dependent(&s.k_of())?;
    let mut tracks = vec![Track::omega("target", ValueRule::Const(Cardinal::Fin(m)))];
    let mut rules = vec![TrackRule::SuccessorShift];
    for (&g, &c) in dec.coefficients() {
        tracks.push(Track::omega(
            format!("gen-{g}"),
            ValueRule::Const(Cardinal::Fin(g)),
        ));
        rules.push(TrackRule::HeadToExternal {
            heads: c,
            target: Point::new("target", 0),
        });
    }
    Ok((tracks, rules, None))
}

/// A progression of the sequence's values meeting `dℕ` infinitely often,
/// returned as its sub-progression of multiples of `d`.
fn divisible_family(s: &CardinalSpec, d: u64) -> Option<(u64, u64)> {
    s.finite_values()
        .normalized()
        .aps()
        .iter()
        .find_map(|&(first, step)| {
            let (t0, _) = solve_congruence(step, (d - first % d) % d, d)?;
            let sub_first = first.checked_add(step.checked_mul(t0)?)?;
            let sub_step = lcm(step, d).ok()?;
            Some((sub_first, sub_step))
        })
}

/// The chain `q_r = q₀ + δ·r` is laid on a sub-progression of the
/// sequence's multiples of `d`, above `max K` and inside `<K>`. Stage 0
/// consumes a decomposition of `q₀`; every later stage consumes a
/// decomposition of `δ` that uses every generator at least once, so all
/// even positions of every generator track are eventually consumed.
fn divisible_tail(s: &CardinalSpec) -> Result<Parts> {
    let k = s
        .k_of()
        .as_generator_set()
        .ok_or_else(|| Error::NotApplicable("divisible-tail".into()))?;
    let sg = Semigroup::new(&k)?;
    let d = sg.gcd();
    let (sub_first, sub_step) =
        divisible_family(s, d).ok_or_else(|| Error::NotApplicable("divisible-tail".into()))?;
    let max_k = k.largest().expect("non-empty");
    let mut q0 = sub_first;
    while q0 <= max_k || !sg.contains(q0) {
        q0 = q0.checked_add(sub_step).ok_or(Error::Overflow)?;
    }
    let total: u64 = k
        .iter()
        .try_fold(0u64, |a, g| a.checked_add(g))
        .ok_or(Error::Overflow)?;
    let mut delta = sub_step;
    while delta < total || (delta > total && !sg.contains(delta - total)) {
        delta = delta.checked_add(sub_step).ok_or(Error::Overflow)?;
    }
    let first = sg.decompose(q0)?;
    let extra = if delta > total {
        sg.decompose(delta - total)?
    } else {
        Default::default()
    };

    let mut tracks = vec![Track::omega(
        "chain",
        ValueRule::Affine {
            first: q0,
            step: delta,
        },
    )];
    let mut rules = vec![TrackRule::ChainAdvance];
    let mut stage = BTreeMap::new();
    for g in k.iter() {
        let rate = 1 + extra.coefficient(g);
        stage.insert(g, rate);
        tracks.push(Track::omega(
            format!("gen-{g}"),
            ValueRule::Const(Cardinal::Fin(g)),
        ));
        rules.push(TrackRule::EvenOddFold {
            chain: "chain".into(),
            head: first.coefficient(g),
            rate,
        });
    }
    debug_assert_eq!(gcd(delta, d), d);
    Ok((
        tracks,
        rules,
        Some(Periodicity {
            start: 1,
            period: 1,
            stage,
        }),
    ))
}
