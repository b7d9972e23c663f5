//! Arithmetic in the additive semigroup `<K>` generated by a finite set of
//! positive integers.
//!
//! `<K>` is the set of sums of one or more elements of `K` (repetition
//! allowed), so `0` is never a member and `<{}>` is empty. Membership is
//! decided with the Apéry table of the gcd-normalized generators taken
//! modulo the smallest one, which also yields the conductor directly.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequence::ValueSetDescriptor;

/// Upper bound on the smallest normalized generator, i.e. on the size of
/// the Apéry table.
pub const MAX_APERY_MODULUS: u64 = 1 << 20;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: u64, b: u64) -> Result<u64> {
    if a == 0 || b == 0 {
        return Ok(0);
    }
    (a / gcd(a, b)).checked_mul(b).ok_or(Error::Overflow)
}

/// Solves `a·t ≡ c (mod m)` for `t ≥ 0`: returns the least solution and the
/// modulus of the solution class, or `None` when unsolvable.
pub fn solve_congruence(a: u64, c: u64, m: u64) -> Option<(u64, u64)> {
    assert!(m > 0, "modulus must be positive");
    let (a, c, m) = (a as i128 % m as i128, c as i128 % m as i128, m as i128);
    let (g, x, _) = ext_gcd(a, m);
    if c % g != 0 {
        return None;
    }
    let step = m / g;
    let t = ((x % step) * ((c / g) % step)).rem_euclid(step);
    Some((t as u64, step as u64))
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// A finite set of positive integers.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GeneratorSet {
    elements: BTreeSet<u64>,
}

impl GeneratorSet {
    pub fn new<I: IntoIterator<Item = u64>>(elements: I) -> Result<Self> {
        let elements: BTreeSet<u64> = elements.into_iter().collect();
        if elements.contains(&0) {
            return Err(Error::Malformed("generators must be positive".into()));
        }
        Ok(Self { elements })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = u64> + '_ {
        self.elements.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn has(&self, n: u64) -> bool {
        self.elements.contains(&n)
    }

    pub fn largest(&self) -> Option<u64> {
        self.elements.last().copied()
    }

    /// The set with `n` removed.
    pub fn without(&self, n: u64) -> Self {
        let mut elements = self.elements.clone();
        elements.remove(&n);
        Self { elements }
    }

    /// The set `{c·k : k ∈ K}`.
    pub fn scaled(&self, c: u64) -> Result<Self> {
        let elements = self
            .iter()
            .map(|k| k.checked_mul(c).ok_or(Error::Overflow))
            .collect::<Result<BTreeSet<_>>>()?;
        Self::new(elements)
    }
}

impl FromIterator<u64> for GeneratorSet {
    /// Zeros are dropped.
    fn from_iter<I: IntoIterator<Item = u64>>(iter: I) -> Self {
        Self {
            elements: iter.into_iter().filter(|&k| k > 0).collect(),
        }
    }
}

impl fmt::Display for GeneratorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, k) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, "}}")
    }
}

/// A representation `n = Σ count·generator` with every count positive.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Decomposition {
    coefficients: BTreeMap<u64, u64>,
}

impl Decomposition {
    pub fn from_counts<I: IntoIterator<Item = (u64, u64)>>(counts: I) -> Self {
        let mut coefficients = BTreeMap::new();
        for (g, c) in counts {
            if c > 0 {
                *coefficients.entry(g).or_insert(0) += c;
            }
        }
        Self { coefficients }
    }

    pub fn coefficients(&self) -> &BTreeMap<u64, u64> {
        &self.coefficients
    }

    pub fn coefficient(&self, generator: u64) -> u64 {
        self.coefficients.get(&generator).copied().unwrap_or(0)
    }

    /// Number of summands, counted with repetition.
    pub fn summands(&self) -> u64 {
        self.coefficients.values().sum()
    }

    /// The decomposed value; `None` on overflow.
    pub fn total(&self) -> Option<u64> {
        self.coefficients
            .iter()
            .try_fold(0u64, |acc, (&g, &c)| acc.checked_add(g.checked_mul(c)?))
    }
}

/// Membership oracle and conductor for `<K>`, `K` non-empty.
#[derive(Debug, Clone)]
pub struct Semigroup {
    generators: GeneratorSet,
    gcd: u64,
    /// Smallest generator divided by the gcd.
    modulus: u64,
    /// `apery[r]`: least element of `<K/d> ∪ {0}` congruent to `r` modulo
    /// `modulus`.
    apery: Vec<u128>,
}

impl Semigroup {
    pub fn new(generators: &GeneratorSet) -> Result<Self> {
        let d = gcd_of(generators)?;
        let normalized: Vec<u64> = generators.iter().map(|g| g / d).collect();
        let modulus = normalized[0];
        if modulus > MAX_APERY_MODULUS {
            return Err(Error::TooLarge(format!(
                "smallest normalized generator {modulus} exceeds {MAX_APERY_MODULUS}"
            )));
        }
        let m = modulus as usize;
        let mut apery = vec![u128::MAX; m];
        apery[0] = 0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0u128, 0usize)));
        while let Some(Reverse((dist, r))) = heap.pop() {
            if dist > apery[r] {
                continue;
            }
            for &g in &normalized[1..] {
                let next = (r + (g % modulus) as usize) % m;
                let cand = dist + g as u128;
                if cand < apery[next] {
                    apery[next] = cand;
                    heap.push(Reverse((cand, next)));
                }
            }
        }
        Ok(Self {
            generators: generators.clone(),
            gcd: d,
            modulus,
            apery,
        })
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.generators
    }

    pub fn gcd(&self) -> u64 {
        self.gcd
    }

    /// `n ∈ <K> ∪ {0}`.
    pub fn contains_or_zero(&self, n: u64) -> bool {
        if !n.is_multiple_of(self.gcd) {
            return false;
        }
        let m = n / self.gcd;
        m as u128 >= self.apery[(m % self.modulus) as usize]
    }

    pub fn contains(&self, n: u64) -> bool {
        n > 0 && self.contains_or_zero(n)
    }

    /// Minimal `M ≥ 1` with `[dM, ∞) ∩ dℕ ⊆ <K>`.
    pub fn conductor(&self) -> Result<u64> {
        let max = self.apery.iter().copied().max().unwrap_or(0);
        let c = (max + 1).saturating_sub(self.modulus as u128).max(1);
        u64::try_from(c).map_err(|_| Error::Overflow)
    }

    /// Deterministic decomposition of `n`: the coefficient of the largest
    /// generator is maximized first, then the next largest, and so on.
    pub fn decompose(&self, n: u64) -> Result<Decomposition> {
        if !self.contains(n) {
            return Err(Error::NotRepresentable(n));
        }
        let gens: Vec<u64> = self.generators.iter().rev().collect();
        // suffixes[i] decides membership in <gens[i..]> ∪ {0}
        let suffixes = (0..gens.len())
            .map(|i| Semigroup::new(&GeneratorSet::new(gens[i..].iter().copied())?))
            .collect::<Result<Vec<_>>>()?;
        let mut rest = n;
        let mut counts = Vec::new();
        for (i, &g) in gens.iter().enumerate() {
            if rest == 0 {
                break;
            }
            let Some(next) = suffixes.get(i + 1) else {
                debug_assert_eq!(rest % g, 0);
                counts.push((g, rest / g));
                rest = 0;
                break;
            };
            let mut c = rest / g;
            loop {
                let remainder = rest - c * g;
                if next.contains_or_zero(remainder) {
                    counts.push((g, c));
                    rest = remainder;
                    break;
                }
                // c = 0 always succeeds because rest ∈ <gens[i..]> ∪ {0}
                c -= 1;
            }
        }
        debug_assert_eq!(rest, 0);
        Ok(Decomposition::from_counts(counts))
    }
}

pub fn gcd_of(k: &GeneratorSet) -> Result<u64> {
    k.iter().reduce(gcd).ok_or(Error::EmptySet)
}

/// `n ∈ <K>`; always false for the empty set.
pub fn contains(k: &GeneratorSet, n: u64) -> Result<bool> {
    if k.is_empty() || n == 0 {
        return Ok(false);
    }
    Ok(Semigroup::new(k)?.contains(n))
}

/// `∀ n ∈ K: n ∉ <K ∖ {n}>`.
pub fn is_independent(k: &GeneratorSet) -> Result<bool> {
    for n in k.iter() {
        if contains(&k.without(n), n)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn conductor(k: &GeneratorSet) -> Result<u64> {
    Semigroup::new(k)?.conductor()
}

pub fn decompose(k: &GeneratorSet, n: u64) -> Result<Decomposition> {
    if k.is_empty() {
        return Err(Error::NotRepresentable(n));
    }
    Semigroup::new(k)?.decompose(n)
}

/// Finds an element of the described set together with a decomposition over
/// other elements of the set.
///
/// For infinite sets a finite subset `K'` with the same gcd is extracted
/// (the set's singles plus the first two terms of each progression); every
/// multiple of the gcd past the conductor of `K'` lies in `<K'>`, and the
/// progressions supply such a multiple outside `K'`.
pub fn find_dependent(values: &ValueSetDescriptor) -> Result<(u64, Decomposition)> {
    let values = values.normalized();
    if !values.is_infinite() {
        let k = GeneratorSet::new(values.singles().iter().copied())?;
        for n in k.iter() {
            let others = k.without(n);
            if contains(&others, n)? {
                return Ok((n, decompose(&others, n)?));
            }
        }
        return Err(Error::IsIndependent);
    }

    let mut basis: BTreeSet<u64> = values.singles().clone();
    for &(first, step) in values.aps() {
        basis.insert(first);
        basis.insert(first.checked_add(step).ok_or(Error::Overflow)?);
    }
    let basis = GeneratorSet::new(basis)?;
    let sg = Semigroup::new(&basis)?;
    let bound = sg
        .gcd()
        .checked_mul(sg.conductor()?)
        .ok_or(Error::Overflow)?;
    let mut best: Option<u64> = None;
    for &(first, step) in values.aps() {
        let mut n = if first >= bound {
            first
        } else {
            let steps = (bound - first).div_ceil(step);
            first
                .checked_add(steps.checked_mul(step).ok_or(Error::Overflow)?)
                .ok_or(Error::Overflow)?
        };
        while basis.has(n) {
            n = n.checked_add(step).ok_or(Error::Overflow)?;
        }
        best = Some(best.map_or(n, |b| b.min(n)));
    }
    let n = best.expect("infinite descriptor has a progression");
    Ok((n, sg.decompose(n)?))
}
