//! Arenas: explicit finite graphs and lazily generated infinite ones.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use crate::error::ArenaError;
use crate::vertex::{Player, VertexId};
use crate::weight::Weight;

pub const DEFAULT_VERTEX_CAP: usize = 1_000_000;

/// A weighted edge. The derived order is `(from, to, weight)`, so sorting
/// the edges leaving one vertex orders them by `(to, weight)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub from: VertexId,
    pub to: VertexId,
    pub weight: Weight,
}

impl Edge {
    pub fn new(from: VertexId, weight: impl Into<Weight>, to: VertexId) -> Self {
        Edge {
            from,
            to,
            weight: weight.into(),
        }
    }

    pub fn is_self_loop(&self) -> bool {
        self.from == self.to
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -({})-> {}", self.from, self.weight, self.to)
    }
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Owner and ordered outgoing edges of one vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expansion {
    pub owner: Player,
    pub edges: Vec<Edge>,
}

impl Expansion {
    pub fn new(owner: Player, mut edges: Vec<Edge>) -> Self {
        edges.sort();
        edges.dedup();
        Expansion { owner, edges }
    }

    /// True for the absorbing pattern: a single weight-0 self-loop.
    pub fn is_sink(&self) -> bool {
        self.edges.len() == 1 && self.edges[0].is_self_loop() && self.edges[0].weight.is_zero()
    }

    pub fn find(&self, to: &VertexId, weight: Option<&Weight>) -> Option<&Edge> {
        self.edges
            .iter()
            .find(|e| &e.to == to && weight.is_none_or(|w| &e.weight == w))
    }
}

pub trait Arena: Send + Sync {
    fn name(&self) -> &str;

    /// Default initial vertex.
    fn start(&self) -> &VertexId;

    fn expand(&self, v: &VertexId) -> Result<Arc<Expansion>, ArenaError>;

    /// Expansion bypassing any cache; used to probe determinism.
    fn expand_fresh(&self, v: &VertexId) -> Result<Arc<Expansion>, ArenaError> {
        self.expand(v)
    }

    fn as_explicit(&self) -> Option<&ExplicitArena> {
        None
    }

    /// Declared upper bound on out-degree, if any.
    fn branching_bound(&self) -> Option<usize> {
        None
    }

    fn owner(&self, v: &VertexId) -> Result<Player, ArenaError> {
        Ok(self.expand(v)?.owner)
    }
}

pub type ArenaRef = Arc<dyn Arena>;

/// A finite arena held in memory. Construction does not enforce the
/// arena invariants; call [`validate`] or [`ExplicitArena::check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitArena {
    name: String,
    owners: BTreeMap<VertexId, Player>,
    expansions: BTreeMap<VertexId, Arc<Expansion>>,
    start: VertexId,
}

#[derive(Clone, Debug, Default)]
pub struct ExplicitBuilder {
    name: String,
    owners: BTreeMap<VertexId, Player>,
    edges: BTreeMap<VertexId, Vec<Edge>>,
    start: Option<VertexId>,
    cap: Option<usize>,
}

impl ExplicitBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        ExplicitBuilder {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn cap(mut self, cap: usize) -> Self {
        self.cap = Some(cap);
        self
    }

    pub fn vertex(&mut self, v: VertexId, owner: Player) -> &mut Self {
        self.owners.insert(v, owner);
        self
    }

    pub fn edge(&mut self, from: VertexId, weight: impl Into<Weight>, to: VertexId) -> &mut Self {
        self.edges
            .entry(from.clone())
            .or_default()
            .push(Edge::new(from, weight, to));
        self
    }

    pub fn start(&mut self, v: VertexId) -> &mut Self {
        self.start = Some(v);
        self
    }

    pub fn has_start(&self) -> bool {
        self.start.is_some()
    }

    /// Assembles the arena. Fails only on a missing start vertex, an edge
    /// leaving an undeclared vertex, or the vertex cap; blocking and
    /// dangling targets are left for validation to report.
    pub fn build(self) -> Result<ExplicitArena, ArenaError> {
        let cap = self.cap.unwrap_or(DEFAULT_VERTEX_CAP);
        if self.owners.len() > cap {
            return Err(ArenaError::TooLarge(cap));
        }
        let start = self.start.ok_or(ArenaError::NoStart)?;
        if !self.owners.contains_key(&start) {
            return Err(ArenaError::UnknownVertex(start));
        }
        for from in self.edges.keys() {
            if !self.owners.contains_key(from) {
                return Err(ArenaError::UnknownVertex(from.clone()));
            }
        }
        let mut edges = self.edges;
        let expansions = self
            .owners
            .iter()
            .map(|(v, &owner)| {
                let list = edges.remove(v).unwrap_or_default();
                (v.clone(), Arc::new(Expansion::new(owner, list)))
            })
            .collect();
        Ok(ExplicitArena {
            name: self.name,
            owners: self.owners,
            expansions,
            start,
        })
    }
}

impl ExplicitArena {
    pub fn builder(name: impl Into<String>) -> ExplicitBuilder {
        ExplicitBuilder::new(name)
    }

    pub fn vertices(&self) -> impl Iterator<Item = (&VertexId, Player)> {
        self.owners.iter().map(|(v, &p)| (v, p))
    }

    pub fn vertex_count(&self) -> usize {
        self.owners.len()
    }

    pub fn contains(&self, v: &VertexId) -> bool {
        self.owners.contains_key(v)
    }

    pub fn edges_of(&self, v: &VertexId) -> &[Edge] {
        self.expansions
            .get(v)
            .map(|x| x.edges.as_slice())
            .unwrap_or(&[])
    }

    pub fn all_edges(&self) -> impl Iterator<Item = &Edge> {
        self.expansions.values().flat_map(|x| x.edges.iter())
    }

    pub fn edge_count(&self) -> usize {
        self.expansions.values().map(|x| x.edges.len()).sum()
    }

    pub fn with_start(&self, start: VertexId) -> Result<ExplicitArena, ArenaError> {
        if !self.contains(&start) {
            return Err(ArenaError::UnknownVertex(start));
        }
        let mut copy = self.clone();
        copy.start = start;
        Ok(copy)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// First invariant violation, if any.
    pub fn check(&self) -> Result<(), ArenaError> {
        match validate_explicit(self).violations.into_iter().next() {
            None => Ok(()),
            Some(Violation::Blocking(v)) => Err(ArenaError::Blocking(v)),
            Some(Violation::Dangling { from, to }) => Err(ArenaError::Dangling { from, to }),
            Some(other) => Err(ArenaError::Invalid(other.to_string())),
        }
    }

    /// Maximum absolute weight and the common denominator of all weights.
    pub fn weight_bounds(&self) -> (Weight, num_bigint::BigInt) {
        let max = self
            .all_edges()
            .map(|e| e.weight.abs())
            .max()
            .unwrap_or_else(Weight::zero);
        let den = Weight::common_denominator(self.all_edges().map(|e| &e.weight));
        (max, den)
    }

    /// Applies `f` to every weight.
    pub fn map_weights(&self, f: impl Fn(&Weight) -> Weight) -> ExplicitArena {
        let mut b = ExplicitArena::builder(self.name.clone());
        for (v, p) in self.vertices() {
            b.vertex(v.clone(), p);
            for e in self.edges_of(v) {
                b.edge(e.from.clone(), f(&e.weight), e.to.clone());
            }
        }
        b.start(self.start.clone());
        b.build().expect("same shape as a built arena")
    }
}

impl Arena for ExplicitArena {
    fn name(&self) -> &str {
        &self.name
    }

    fn start(&self) -> &VertexId {
        &self.start
    }

    fn expand(&self, v: &VertexId) -> Result<Arc<Expansion>, ArenaError> {
        self.expansions
            .get(v)
            .cloned()
            .ok_or_else(|| ArenaError::UnknownVertex(v.clone()))
    }

    fn as_explicit(&self) -> Option<&ExplicitArena> {
        Some(self)
    }

    fn branching_bound(&self) -> Option<usize> {
        self.expansions.values().map(|x| x.edges.len()).max()
    }
}

type Expander = dyn Fn(&VertexId) -> Result<Expansion, ArenaError> + Send + Sync;

/// A lazily expanded, possibly infinite arena.
pub struct GeneratedArena {
    name: String,
    start: VertexId,
    expander: Arc<Expander>,
    cache: Option<RwLock<HashMap<VertexId, Arc<Expansion>>>>,
    branching: Option<usize>,
}

impl GeneratedArena {
    pub fn new(
        name: impl Into<String>,
        start: VertexId,
        expander: impl Fn(&VertexId) -> Result<Expansion, ArenaError> + Send + Sync + 'static,
    ) -> Self {
        GeneratedArena {
            name: name.into(),
            start,
            expander: Arc::new(expander),
            cache: Some(RwLock::new(HashMap::new())),
            branching: None,
        }
    }

    pub fn without_cache(mut self) -> Self {
        self.cache = None;
        self
    }

    pub fn with_branching_bound(mut self, bound: usize) -> Self {
        self.branching = Some(bound);
        self
    }

    /// Same generator, different initial vertex.
    pub fn restarted(&self, start: VertexId) -> Self {
        GeneratedArena {
            name: self.name.clone(),
            start,
            expander: self.expander.clone(),
            cache: self.cache.as_ref().map(|_| RwLock::new(HashMap::new())),
            branching: self.branching,
        }
    }
}

impl fmt::Debug for GeneratedArena {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratedArena")
            .field("name", &self.name)
            .field("start", &self.start)
            .finish()
    }
}

impl Arena for GeneratedArena {
    fn name(&self) -> &str {
        &self.name
    }

    fn start(&self) -> &VertexId {
        &self.start
    }

    fn expand(&self, v: &VertexId) -> Result<Arc<Expansion>, ArenaError> {
        let Some(cache) = &self.cache else {
            return self.expand_fresh(v);
        };
        if let Some(x) = cache.read().get(v) {
            return Ok(x.clone());
        }
        let x = self.expand_fresh(v)?;
        // Concurrent writers store equal values, so the race is benign.
        cache.write().entry(v.clone()).or_insert_with(|| x.clone());
        Ok(x)
    }

    fn expand_fresh(&self, v: &VertexId) -> Result<Arc<Expansion>, ArenaError> {
        let mut x = (self.expander)(v)?;
        x.edges.sort();
        x.edges.dedup();
        Ok(Arc::new(x))
    }

    fn branching_bound(&self) -> Option<usize> {
        self.branching
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    Blocking(VertexId),
    Dangling { from: VertexId, to: VertexId },
    ForeignEdge { vertex: VertexId, edge: String },
    Nondeterministic(VertexId),
    Expansion { vertex: VertexId, error: String },
    BranchingBound { vertex: VertexId, degree: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Blocking(v) => write!(f, "blocking vertex `{v}`"),
            Violation::Dangling { from, to } => {
                write!(f, "dangling edge `{from}` -> `{to}`")
            }
            Violation::ForeignEdge { vertex, edge } => {
                write!(f, "edge `{edge}` listed under `{vertex}`")
            }
            Violation::Nondeterministic(v) => {
                write!(f, "nondeterministic expansion at `{v}`")
            }
            Violation::Expansion { vertex, error } => {
                write!(f, "expansion of `{vertex}` failed: {error}")
            }
            Violation::BranchingBound { vertex, degree } => {
                write!(f, "`{vertex}` has {degree} edges, above the declared bound")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub explored: usize,
    /// Whether the exploration stopped at the depth limit with unexplored
    /// vertices left.
    pub truncated: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn validate_explicit(a: &ExplicitArena) -> ValidationReport {
    let mut report = ValidationReport {
        explored: a.vertex_count(),
        ..Default::default()
    };
    for (v, _) in a.vertices() {
        let edges = a.edges_of(v);
        if edges.is_empty() {
            report.violations.push(Violation::Blocking(v.clone()));
        }
        for e in edges {
            if !a.contains(&e.to) {
                report.violations.push(Violation::Dangling {
                    from: v.clone(),
                    to: e.to.clone(),
                });
            }
        }
    }
    report
}

/// Checks the arena invariants. Explicit arenas are checked entirely;
/// other arenas are explored breadth-first to `depth` from their start,
/// expanding each vertex twice to detect nondeterminism.
pub fn validate(arena: &dyn Arena, depth: usize) -> ValidationReport {
    if let Some(a) = arena.as_explicit() {
        return validate_explicit(a);
    }
    let mut report = ValidationReport::default();
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(arena.start().clone());
    queue.push_back((arena.start().clone(), 0usize));
    while let Some((v, d)) = queue.pop_front() {
        report.explored += 1;
        let (first, second) = match (arena.expand_fresh(&v), arena.expand_fresh(&v)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => {
                report.violations.push(Violation::Expansion {
                    vertex: v.clone(),
                    error: e.to_string(),
                });
                continue;
            }
        };
        if first != second {
            report.violations.push(Violation::Nondeterministic(v.clone()));
        }
        if first.edges.is_empty() {
            report.violations.push(Violation::Blocking(v.clone()));
        }
        if let Some(bound) = arena.branching_bound() {
            if first.edges.len() > bound {
                report.violations.push(Violation::BranchingBound {
                    vertex: v.clone(),
                    degree: first.edges.len(),
                });
            }
        }
        for e in &first.edges {
            if e.from != v {
                report.violations.push(Violation::ForeignEdge {
                    vertex: v.clone(),
                    edge: e.to_string(),
                });
            }
            if seen.contains(&e.to) {
                continue;
            }
            if d < depth {
                seen.insert(e.to.clone());
                queue.push_back((e.to.clone(), d + 1));
            } else {
                report.truncated = true;
            }
        }
    }
    report
}

/// Vertices reachable from `v0` within `depth` steps, grouped by the
/// first level at which they are reached.
pub fn reachable_levels(
    arena: &dyn Arena,
    v0: &VertexId,
    depth: usize,
) -> Result<Vec<Vec<VertexId>>, ArenaError> {
    let mut seen = BTreeSet::new();
    seen.insert(v0.clone());
    let mut levels = vec![vec![v0.clone()]];
    for _ in 0..depth {
        let mut next = BTreeSet::new();
        for v in levels.last().unwrap() {
            for e in &arena.expand(v)?.edges {
                if seen.insert(e.to.clone()) {
                    next.insert(e.to.clone());
                }
            }
        }
        if next.is_empty() {
            break;
        }
        levels.push(next.into_iter().collect());
    }
    Ok(levels)
}

/// Materializes the part of `arena` reachable within `depth` steps.
/// Vertices on the boundary keep their edges even when the targets were
/// not explored, so the result may contain dangling edges.
pub fn explore_explicit(
    arena: &dyn Arena,
    v0: &VertexId,
    depth: usize,
) -> Result<ExplicitArena, ArenaError> {
    let levels = reachable_levels(arena, v0, depth)?;
    let mut b = ExplicitArena::builder(arena.name().to_string());
    for v in levels.iter().flatten() {
        let x = arena.expand(v)?;
        b.vertex(v.clone(), x.owner);
        for e in &x.edges {
            b.edge(e.from.clone(), e.weight.clone(), e.to.clone());
        }
    }
    b.start(v0.clone());
    b.build()
}

/// Like [`explore_explicit`], but a boundary vertex with an edge leaving
/// the explored part becomes a sink, so the result is a closed arena.
pub fn truncate(arena: &dyn Arena, v0: &VertexId, depth: usize) -> Result<ExplicitArena, ArenaError> {
    let levels = reachable_levels(arena, v0, depth)?;
    let seen: BTreeSet<&VertexId> = levels.iter().flatten().collect();
    let mut b = ExplicitArena::builder(format!("{}_depth{depth}", arena.name()));
    for v in levels.iter().flatten() {
        let x = arena.expand(v)?;
        b.vertex(v.clone(), x.owner);
        if x.edges.iter().all(|e| seen.contains(&e.to)) {
            for e in &x.edges {
                b.edge(e.from.clone(), e.weight.clone(), e.to.clone());
            }
        } else {
            b.edge(v.clone(), 0, v.clone());
        }
    }
    b.start(v0.clone());
    b.build()
}

/// DOT rendering of the region reachable within `depth` steps.
pub fn to_dot(arena: &dyn Arena, v0: &VertexId, depth: usize) -> Result<String, ArenaError> {
    let levels = reachable_levels(arena, v0, depth)?;
    let mut out = String::from("digraph arena {\n");
    for v in levels.iter().flatten() {
        let x = arena.expand(v)?;
        let shape = match x.owner {
            Player::One => "circle",
            Player::Two => "box",
        };
        out.push_str(&format!(
            "  \"{v}\" [label=\"{v}|{}\", shape={shape}];\n",
            x.owner
        ));
    }
    for v in levels.iter().flatten() {
        for e in &arena.expand(v)?.edges {
            out.push_str(&format!(
                "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
                e.from, e.to, e.weight
            ));
        }
    }
    out.push_str("}\n");
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepEncoding {
    /// Every explored history from the origin to a vertex has the same
    /// length. `unexplored` lists vertices seen only at the depth limit,
    /// whose status is inconclusive.
    Encoded {
        lengths: BTreeMap<VertexId, u64>,
        unexplored: Vec<VertexId>,
    },
    /// Two histories reaching `vertex` with different lengths.
    Counterexample {
        vertex: VertexId,
        first: Vec<Edge>,
        second: Vec<Edge>,
    },
}

/// Decides whether all histories from `v0` of length at most `depth`
/// reaching the same vertex have the same length. Sink vertices (a single
/// weight-0 self-loop) are left out: nothing is decided there, so their
/// step count carries no information.
pub fn encodes_step_count(
    arena: &dyn Arena,
    v0: &VertexId,
    depth: usize,
) -> Result<StepEncoding, ArenaError> {
    // Breadth-first over vertices per level keeps one witness path each.
    let mut first_seen: BTreeMap<VertexId, (u64, Vec<Edge>)> = BTreeMap::new();
    first_seen.insert(v0.clone(), (0, Vec::new()));
    let mut level: BTreeMap<VertexId, Vec<Edge>> = BTreeMap::new();
    level.insert(v0.clone(), Vec::new());
    for step in 1..=depth as u64 {
        let mut next: BTreeMap<VertexId, Vec<Edge>> = BTreeMap::new();
        for (v, path) in &level {
            for e in &arena.expand(v)?.edges {
                if next.contains_key(&e.to) || arena.expand(&e.to)?.is_sink() {
                    continue;
                }
                let mut p = path.clone();
                p.push(e.clone());
                if let Some((n, witness)) = first_seen.get(&e.to) {
                    if *n != step {
                        return Ok(StepEncoding::Counterexample {
                            vertex: e.to.clone(),
                            first: witness.clone(),
                            second: p,
                        });
                    }
                } else {
                    first_seen.insert(e.to.clone(), (step, p.clone()));
                }
                next.insert(e.to.clone(), p);
            }
        }
        if next.is_empty() {
            break;
        }
        level = next;
    }
    let unexplored = if depth > 0 {
        level
            .keys()
            .filter(|v| first_seen.get(*v).map(|x| x.0) == Some(depth as u64))
            .cloned()
            .collect()
    } else {
        vec![v0.clone()]
    };
    Ok(StepEncoding::Encoded {
        lengths: first_seen.into_iter().map(|(v, (n, _))| (v, n)).collect(),
        unexplored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(name: &str) -> VertexId {
        VertexId::named(name)
    }

    #[test]
    fn self_loop_is_valid_sink() {
        let mut b = ExplicitArena::builder("loop");
        b.vertex(v("a"), Player::One).edge(v("a"), 0, v("a")).start(v("a"));
        let a = b.build().unwrap();
        assert!(validate(&a, 0).is_valid());
        assert!(a.expand(&v("a")).unwrap().is_sink());
    }

    #[test]
    fn blocking_vertex_reported() {
        let mut b = ExplicitArena::builder("dead");
        b.vertex(v("a"), Player::One).start(v("a"));
        let a = b.build().unwrap();
        let report = validate(&a, 0);
        assert_eq!(report.violations, vec![Violation::Blocking(v("a"))]);
        assert!(report.violations[0].to_string().contains("blocking vertex"));
    }

    #[test]
    fn edges_sorted_by_target_then_weight() {
        let mut b = ExplicitArena::builder("order");
        b.vertex(v("a"), Player::One)
            .vertex(v("b"), Player::One)
            .edge(v("a"), 3, v("b"))
            .edge(v("a"), -1, v("b"))
            .edge(v("a"), 7, v("a"))
            .edge(v("b"), 0, v("b"))
            .start(v("a"));
        let a = b.build().unwrap();
        let ws: Vec<String> = a.edges_of(&v("a")).iter().map(|e| e.weight.to_string()).collect();
        assert_eq!(ws, ["7", "-1", "3"]);
    }

    #[test]
    fn diamond_is_a_counterexample() {
        let mut b = ExplicitArena::builder("diamond");
        for name in ["a", "b", "c"] {
            b.vertex(v(name), Player::One);
        }
        b.edge(v("a"), 0, v("c"))
            .edge(v("a"), 0, v("b"))
            .edge(v("b"), 0, v("c"))
            .edge(v("c"), 1, v("c"))
            .start(v("a"));
        let a = b.build().unwrap();
        assert!(matches!(
            encodes_step_count(&a, &v("a"), 4).unwrap(),
            StepEncoding::Counterexample { .. }
        ));
    }

    #[test]
    fn generator_cache_is_transparent() {
        let make = || {
            GeneratedArena::new("nat", VertexId::new("n", &[0]), |x| {
                let n = x.param(0);
                Ok(Expansion::new(
                    Player::One,
                    vec![Edge::new(x.clone(), 1, VertexId::new("n", &[n + 1]))],
                ))
            })
        };
        let cached = make();
        let plain = make().without_cache();
        for i in 0..5 {
            let x = VertexId::new("n", &[i]);
            assert_eq!(cached.expand(&x).unwrap(), plain.expand(&x).unwrap());
            assert_eq!(cached.expand(&x).unwrap(), plain.expand(&x).unwrap());
        }
        let report = validate(&cached, 10);
        assert!(report.is_valid());
        assert!(report.truncated);
    }
}
