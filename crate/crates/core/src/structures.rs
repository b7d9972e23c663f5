//! Disconnected binary structures.
//!
//! Finite structures are handled directly (components, exhaustive
//! condensation scan). Infinite disjoint unions are described by a catalog
//! of component kinds and decided through their sequence of component
//! sizes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequence::{self, Cardinal, CardinalSpec, Count, Entry, ValueFamily, Verdict};
use crate::witness::WitnessMap;

pub const DEFAULT_BRUTE_BOUND: usize = 8;

/// A finite set of named vertices with a binary relation (loops allowed).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteBinaryStructure {
    vertices: Vec<String>,
    edges: BTreeSet<(usize, usize)>,
}

impl FiniteBinaryStructure {
    /// Vertices are `0..n`.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let edges: BTreeSet<_> = edges.into_iter().collect();
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= n || v >= n) {
            return Err(Error::Malformed(format!(
                "edge ({u},{v}) leaves the vertex set"
            )));
        }
        Ok(Self {
            vertices: (0..n).map(|i| i.to_string()).collect(),
            edges,
        })
    }

    /// Parses an edge list: one `u v` pair per line, a lone name declares an
    /// isolated vertex, `#` starts a comment.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        let mut vertices = Vec::new();
        let mut edges = BTreeSet::new();
        let mut id = |name: &str| -> usize {
            *index.entry(name.to_string()).or_insert_with(|| {
                vertices.push(name.to_string());
                vertices.len() - 1
            })
        };
        for (line_no, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = content.split_whitespace().collect();
            match tokens.as_slice() {
                [] => {}
                [v] => {
                    id(v);
                }
                [u, v] => {
                    let (u, v) = (id(u), id(v));
                    edges.insert((u, v));
                }
                _ => {
                    let col = content.find(tokens[2]).unwrap_or(0) + 1;
                    return Err(Error::Parse {
                        line: line_no + 1,
                        col,
                        msg: "expected `u v`".into(),
                    });
                }
            }
        }
        Ok(Self { vertices, edges })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let root = self.find(p);
        self.0[x] = root;
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

/// Classes of the least equivalence relation containing the edges, each
/// sorted, ordered by smallest member.
pub fn components(s: &FiniteBinaryStructure) -> Vec<Vec<usize>> {
    let mut uf = UnionFind((0..s.len()).collect());
    for &(u, v) in &s.edges {
        uf.union(u, v);
    }
    let mut blocks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..s.len() {
        blocks.entry(uf.find(v)).or_default().push(v);
    }
    blocks.into_values().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BruteReport {
    pub reversible: bool,
    pub permutations: u64,
    /// Permutations `f` with `f[ρ] ⊆ ρ`.
    pub condensations: u64,
    /// A bijection with `f[ρ] ⊊ ρ`, as `vertex → image`.
    pub counterexample: Option<BTreeMap<String, String>>,
}

/// Scans every permutation `f` of the vertices: the structure is reversible
/// iff `f[ρ] ⊆ ρ` always forces `f[ρ] = ρ`.
pub fn brute_reversible(s: &FiniteBinaryStructure, bound: usize) -> Result<BruteReport> {
    let n = s.len();
    if n > bound {
        return Err(Error::TooLarge(format!(
            "{n} vertices exceed the bound {bound}"
        )));
    }
    let mut report = BruteReport {
        reversible: true,
        permutations: 0,
        condensations: 0,
        counterexample: None,
    };
    for f in (0..n).permutations(n) {
        report.permutations += 1;
        let image: BTreeSet<(usize, usize)> = s.edges.iter().map(|&(u, v)| (f[u], f[v])).collect();
        if !image.is_subset(&s.edges) {
            continue;
        }
        report.condensations += 1;
        if image != s.edges && report.counterexample.is_none() {
            report.reversible = false;
            report.counterexample = Some(
                (0..n)
                    .map(|v| (s.vertices[v].clone(), s.vertices[f[v]].clone()))
                    .collect(),
            );
        }
    }
    if n == 0 {
        report.permutations = 1;
        report.condensations = 1;
    }
    Ok(report)
}

/// A catalog component, sized by a value family (so one entry can stand for
/// a whole run of sizes).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ComponentKind {
    /// A set with the full relation.
    FullRelation {
        size: ValueFamily,
    },
    CompleteGraph {
        size: ValueFamily,
    },
    /// A well order of type at most ω.
    Ordinal {
        size: ValueFamily,
    },
    /// A linear order with an opaque order-type name.
    LinearOrder {
        tag: String,
        size: ValueFamily,
    },
    /// A two-element antichain below a chain of the given size.
    AntichainPlusChain {
        chain: ValueFamily,
    },
}

impl ComponentKind {
    fn family_code(&self) -> &'static str {
        match self {
            ComponentKind::FullRelation { .. } => "full",
            ComponentKind::CompleteGraph { .. } => "kgraph",
            ComponentKind::Ordinal { .. } => "ordinal",
            ComponentKind::LinearOrder { .. } => "chain",
            ComponentKind::AntichainPlusChain { .. } => "a2chain",
        }
    }

    /// Size of the component(s) as a value family.
    pub fn cardinality(&self) -> Result<ValueFamily> {
        Ok(match self {
            ComponentKind::FullRelation { size }
            | ComponentKind::CompleteGraph { size }
            | ComponentKind::Ordinal { size }
            | ComponentKind::LinearOrder { size, .. } => *size,
            ComponentKind::AntichainPlusChain { chain } => match *chain {
                ValueFamily::Single(Cardinal::Fin(k)) => {
                    ValueFamily::Single(Cardinal::Fin(k.checked_add(2).ok_or(Error::Overflow)?))
                }
                ValueFamily::Single(c) => ValueFamily::Single(c),
                ValueFamily::Ap { first, step } => ValueFamily::Ap {
                    first: first.checked_add(2).ok_or(Error::Overflow)?,
                    step,
                },
            },
        })
    }

    fn is_tournament(&self) -> bool {
        matches!(
            self,
            ComponentKind::Ordinal { .. } | ComponentKind::LinearOrder { .. }
        )
    }

    pub fn validate(&self) -> Result<()> {
        let size = match self {
            ComponentKind::FullRelation { size }
            | ComponentKind::CompleteGraph { size }
            | ComponentKind::Ordinal { size }
            | ComponentKind::LinearOrder { size, .. } => size,
            ComponentKind::AntichainPlusChain { chain } => chain,
        };
        size.validate()?;
        let bounded = matches!(
            self,
            ComponentKind::Ordinal { .. } | ComponentKind::AntichainPlusChain { .. }
        );
        if bounded && matches!(size, ValueFamily::Single(Cardinal::Aleph(k)) if *k > 0) {
            return Err(Error::OrdinalTooLarge);
        }
        Ok(())
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentKind::LinearOrder { tag, size } => write!(f, "chain({tag}, {size})"),
            ComponentKind::AntichainPlusChain { chain } => write!(f, "a2chain({chain})"),
            ComponentKind::FullRelation { size }
            | ComponentKind::CompleteGraph { size }
            | ComponentKind::Ordinal { size } => write!(f, "{}({size})", self.family_code()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UnionComponent {
    pub kind: ComponentKind,
    pub mult: Count,
}

/// A disjoint union of catalog components with multiplicities.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UnionSpec {
    components: Vec<UnionComponent>,
}

impl UnionSpec {
    pub fn new(components: Vec<UnionComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Malformed(
                "a union needs at least one component".into(),
            ));
        }
        for c in &components {
            c.kind.validate()?;
            if c.mult.is_zero() {
                return Err(Error::Malformed("multiplicities must be at least 1".into()));
            }
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[UnionComponent] {
        &self.components
    }

    /// The sequence of component sizes.
    pub fn cardinal_spec(&self) -> Result<CardinalSpec> {
        let entries = self
            .components
            .iter()
            .map(|c| Ok(Entry::new(c.kind.cardinality()?, c.mult)))
            .collect::<Result<Vec<_>>>()?;
        CardinalSpec::new(entries)
    }
}

impl fmt::Display for UnionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "union {{ ")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{} x {}", c.kind, c.mult)?;
        }
        write!(f, " }}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnionPath {
    /// Single catalog family rich for monomorphisms: the size sequence
    /// decides exactly.
    RichFamily,
    /// All components are linear orders: a reversible size sequence suffices.
    TournamentSufficient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnknownReason {
    /// Components come from different catalog families.
    MixedKinds,
    /// Linear-order components whose size sequence is not reversible; the
    /// union may still be reversible.
    TournamentInconclusive,
}

impl UnknownReason {
    pub fn code(self) -> &'static str {
        match self {
            UnknownReason::MixedKinds => "mixed-kinds",
            UnknownReason::TournamentInconclusive => "tournament-inconclusive",
        }
    }

    pub fn explanation(self) -> &'static str {
        match self {
            UnknownReason::MixedKinds => {
                "components come from different catalog families; no size-sequence criterion applies"
            }
            UnknownReason::TournamentInconclusive => {
                "linear-order components with a non-reversible size sequence; reversibility of the size sequence is only sufficient for unions of linear orders"
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "verdict")]
pub enum UnionVerdict {
    Reversible {
        path: UnionPath,
    },
    /// Only on the rich-family path; the certificate acts on component
    /// indices.
    NotReversible {
        path: UnionPath,
        witness: WitnessMap,
    },
    Unknown {
        reason: UnknownReason,
    },
}

pub fn decide_union(u: &UnionSpec) -> Result<UnionVerdict> {
    let families: BTreeSet<&str> = u.components.iter().map(|c| c.kind.family_code()).collect();
    let spec = u.cardinal_spec()?;
    if families.len() == 1 && !families.contains("chain") {
        return Ok(match sequence::decide(&spec)? {
            Verdict::Reversible(_) => UnionVerdict::Reversible {
                path: UnionPath::RichFamily,
            },
            Verdict::NotReversible { witness, .. } => UnionVerdict::NotReversible {
                path: UnionPath::RichFamily,
                witness,
            },
        });
    }
    if u.components.iter().all(|c| c.kind.is_tournament()) {
        return Ok(if sequence::classify(&spec)?.is_reversible() {
            UnionVerdict::Reversible {
                path: UnionPath::TournamentSufficient,
            }
        } else {
            UnionVerdict::Unknown {
                reason: UnknownReason::TournamentInconclusive,
            }
        });
    }
    Ok(UnionVerdict::Unknown {
        reason: UnknownReason::MixedKinds,
    })
}

/// The equivalence relation whose classes have sizes `a₀ < a₁ < …`
/// followed by the progression `tail`, each size once.
pub fn increasing_blocks_union(sizes: &[u64], tail: (u64, u64)) -> Result<UnionSpec> {
    let (first, step) = tail;
    if sizes.contains(&0) || first == 0 {
        return Err(Error::Malformed("block sizes must be at least 1".into()));
    }
    if step == 0
        || sizes.windows(2).any(|w| w[0] >= w[1])
        || sizes.last().is_some_and(|&m| first <= m)
    {
        return Err(Error::NotIncreasing);
    }
    let block = |size| UnionComponent {
        kind: ComponentKind::FullRelation { size },
        mult: Count::Fin(1),
    };
    let mut components: Vec<_> = sizes
        .iter()
        .map(|&a| block(ValueFamily::Single(Cardinal::Fin(a))))
        .collect();
    components.push(block(ValueFamily::Ap { first, step }));
    UnionSpec::new(components)
}
