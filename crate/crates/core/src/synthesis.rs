//! Finite-arena value solvers and the constructive upper bounds: turning
//! a winning strategy into a step counter, the safe strategy for
//! total-payoff limsup, bubble synthesis for prefix-independent
//! objectives, and step counter plus one bit for total-payoff limsup ≥ 0.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::arena::{Arena, Edge, ExplicitArena};
use crate::certificate::{Certificate, Claim};
use crate::engine::{explore_consistent, koenig_bound, KoenigOutcome};
use crate::error::{GameError, Result};
use crate::format::write_strategy;
use crate::history::History;
use crate::memory::ModeTable;
use crate::objective::{compare_states, Family, Lasso, LimitMode, OpenSub, PayoffKind, PrefixOrder};
use crate::strategy::{Fallback, Memory, Strategy};
use crate::vertex::{Player, VertexId};
use crate::weight::{Extended, Weight};

/// Objective families the finite solver handles (limsup, threshold free).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ValueFamily {
    MeanPayoff,
    TotalPayoffSup,
}

impl ValueFamily {
    fn kind(self) -> PayoffKind {
        match self {
            ValueFamily::MeanPayoff => PayoffKind::Mean,
            ValueFamily::TotalPayoffSup => PayoffKind::Total,
        }
    }
}

impl fmt::Display for ValueFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueFamily::MeanPayoff => "mp",
            ValueFamily::TotalPayoffSup => "tpsup",
        })
    }
}

impl FromStr for ValueFamily {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mp" | "MP" => Ok(ValueFamily::MeanPayoff),
            "tpsup" | "TPsup" | "tp" => Ok(ValueFamily::TotalPayoffSup),
            other => Err(GameError::Domain(format!("unknown value family `{other}`"))),
        }
    }
}

/// Per-vertex values of a finite arena, with a memoryless optimal
/// strategy for Player 1 when one was found.
#[derive(Clone, Debug)]
pub struct ValueMap {
    pub family: ValueFamily,
    pub values: BTreeMap<VertexId, Extended>,
    pub witness: Option<Strategy>,
}

impl ValueMap {
    pub fn get(&self, v: &VertexId) -> Option<&Extended> {
        self.values.get(v)
    }

    /// Vertices with value ≥ 0, the winning region of the `≥ 0` objective.
    pub fn winning(&self) -> BTreeSet<VertexId> {
        let zero = Extended::Finite(Weight::zero());
        self.values
            .iter()
            .filter(|(_, x)| **x >= zero)
            .map(|(v, _)| v.clone())
            .collect()
    }
}

/// Integer view of an explicit arena: weights multiplied by their common
/// denominator.
struct Scaled {
    vertices: Vec<VertexId>,
    owner: Vec<Player>,
    /// `(target, scaled weight, position in the arena's edge list)`.
    edges: Vec<Vec<(usize, i128, usize)>>,
    den: BigInt,
    max_abs: i128,
}

impl Scaled {
    fn new(arena: &ExplicitArena) -> Result<Self> {
        let (_, den) = arena.weight_bounds();
        let vertices: Vec<VertexId> = arena.vertices().map(|(v, _)| v.clone()).collect();
        let index: BTreeMap<VertexId, usize> =
            vertices.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        let mut owner = Vec::new();
        let mut edges = Vec::new();
        let mut max_abs = 1i128;
        for (v, p) in arena.vertices() {
            owner.push(p);
            let mut out = Vec::new();
            for (pos, e) in arena.edges_of(v).iter().enumerate() {
                let to = *index
                    .get(&e.to)
                    .ok_or_else(|| GameError::Domain(format!("edge {e} leaves the arena")))?;
                let scaled = e.weight.numer() * (&den / e.weight.denom());
                let w = scaled
                    .to_i128()
                    .ok_or_else(|| GameError::Domain(format!("weight {} is too large", e.weight)))?;
                max_abs = max_abs.max(w.abs());
                out.push((to, w, pos));
            }
            if out.is_empty() {
                return Err(GameError::Domain(format!("vertex {v} has no edges")));
            }
            edges.push(out);
        }
        Ok(Scaled {
            vertices,
            owner,
            edges,
            den,
            max_abs,
        })
    }

    fn n(&self) -> usize {
        self.vertices.len()
    }

    fn unscale(&self, numer: i128, denom: i128) -> Weight {
        Weight::from_big(BigInt::from(numer), BigInt::from(denom) * &self.den).expect("non-zero denominator")
    }

    fn edge<'a>(&self, arena: &'a ExplicitArena, v: usize, pos: usize) -> &'a Edge {
        &arena.edges_of(&self.vertices[v])[pos]
    }
}

/// Bound on `iterations × edges` for exact mean-payoff value iteration.
const VALUE_ITERATION_BUDGET: u128 = 2_000_000_000;

/// Mean-payoff values as exact fractions `(numerator, denominator)` in
/// scaled units.
///
/// After `k` rounds of the finite-horizon recurrence, `v_k / k` lies
/// within `2nW/k` of the value, and values are fractions with
/// denominator at most `n`, so `k > 4n³W` pins each one down.
fn mean_values(g: &Scaled) -> Result<Vec<(i128, i128)>> {
    let n = g.n() as i128;
    let k = 4 * n * n * n * g.max_abs + 1;
    let edge_count: usize = g.edges.iter().map(|e| e.len()).sum();
    if (k as u128) * (edge_count as u128) > VALUE_ITERATION_BUDGET {
        return Err(GameError::Domain(format!(
            "value iteration needs {k} rounds over {edge_count} edges; arena too large"
        )));
    }
    let mut val = vec![0i128; g.n()];
    let mut next = vec![0i128; g.n()];
    for _ in 0..k {
        for v in 0..g.n() {
            let options = g.edges[v].iter().map(|&(to, w, _)| w + val[to]);
            next[v] = match g.owner[v] {
                Player::One => options.max(),
                Player::Two => options.min(),
            }
            .expect("every vertex has an edge");
        }
        std::mem::swap(&mut val, &mut next);
    }
    let slack = 2 * n * g.max_abs;
    let mut out = Vec::with_capacity(g.n());
    for &x in &val {
        // Closest p/q with q ≤ n to x/k.
        // |p/q − x/k| = dist / (q·k); candidates compare by dist / q.
        let mut best: Option<(i128, i128, i128)> = None;
        for q in 1..=n {
            let p = (2 * x * q + k).div_euclid(2 * k);
            let dist = (p * k - x * q).abs();
            if best.map_or(true, |(d, _, bq)| dist * bq < d * q) {
                best = Some((dist, p, q));
            }
        }
        let (dist, p, q) = best.expect("n ≥ 1");
        if dist > slack * q {
            return Err(GameError::Domain(format!("value iteration did not settle near {x}/{k}")));
        }
        let g_cd = num_integer::gcd(p, q);
        out.push((p / g_cd, q / g_cd));
    }
    Ok(out)
}

/// Winning region of a Büchi game. `succ[s]` lists successors, `None`
/// standing for a state where Player 1 has lost.
fn buchi_region(p1: &[bool], succ: &[Vec<Option<usize>>], accepting: &[bool]) -> Vec<bool> {
    let n = succ.len();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (s, out) in succ.iter().enumerate() {
        for t in out.iter().flatten() {
            preds[*t].push(s);
        }
    }
    let mut alive = vec![true; n];
    loop {
        let reach = attractor(Player::One, p1, succ, &preds, &alive, |s| accepting[s]);
        let trap: Vec<usize> = (0..n).filter(|&s| alive[s] && !reach[s]).collect();
        if trap.is_empty() {
            return alive;
        }
        let mut in_trap = vec![false; n];
        for s in trap {
            in_trap[s] = true;
        }
        let lost = attractor(Player::Two, p1, succ, &preds, &alive, |s| in_trap[s]);
        for s in 0..n {
            if lost[s] {
                alive[s] = false;
            }
        }
    }
}

/// Attractor for `player` to `target` inside the subgame `alive`. Moves
/// out of `alive` count as reaching the target for Player 2 and as
/// forbidden for Player 1.
fn attractor(
    player: Player,
    p1: &[bool],
    succ: &[Vec<Option<usize>>],
    preds: &[Vec<usize>],
    alive: &[bool],
    target: impl Fn(usize) -> bool,
) -> Vec<bool> {
    let n = succ.len();
    let mut inside = vec![false; n];
    let mut pending: Vec<usize> = vec![0; n];
    let mut queue = Vec::new();
    let owns = |s: usize| (player == Player::One) == p1[s];
    for s in 0..n {
        if !alive[s] {
            continue;
        }
        let good = |t: &Option<usize>| match t {
            Some(t) if alive[*t] => false,
            _ => player == Player::Two,
        };
        let escapes = succ[s].iter().filter(|t| good(t)).count();
        if target(s) || (owns(s) && escapes > 0) || (!owns(s) && escapes == succ[s].len()) {
            inside[s] = true;
            queue.push(s);
        }
        pending[s] = succ[s].len() - escapes;
    }
    while let Some(t) = queue.pop() {
        for &s in &preds[t] {
            if !alive[s] || inside[s] {
                continue;
            }
            // preds lists s once per edge s → t.
            if owns(s) {
                inside[s] = true;
                queue.push(s);
            } else {
                pending[s] -= 1;
                if pending[s] == 0 {
                    inside[s] = true;
                    queue.push(s);
                }
            }
        }
    }
    inside
}

/// Total-payoff limsup values, given mean-payoff values.
///
/// Positive mean payoff gives +∞ and negative gives −∞. On the zero part
/// the value is the largest `c` such that Player 1 can make the running
/// sum reach `c` infinitely often. That is a Büchi game on (vertex,
/// tracked sum) where the tracked sum is capped at `c + nW` and a drop
/// below `−nW` loses: an optimal memoryless strategy never closes a
/// negative cycle, so no path under it dips by more than `nW`, and after
/// touching the cap the tracked sum stays at or above `c`.
fn total_values(g: &Scaled, mean: &[(i128, i128)]) -> Result<Vec<Extended>> {
    let n = g.n();
    let zero: Vec<usize> = (0..n).filter(|&v| mean[v].0 == 0).collect();
    let mut out: Vec<Extended> = mean
        .iter()
        .map(|&(p, _)| match p.signum() {
            1 => Extended::PosInf,
            -1 => Extended::NegInf,
            _ => Extended::Finite(Weight::zero()),
        })
        .collect();
    if zero.is_empty() {
        return Ok(out);
    }
    let in_zero: BTreeMap<usize, usize> = zero.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let bound = n as i128 * g.max_abs;
    let solve = |c: i128| -> Vec<bool> {
        let low = -bound;
        let high = c.max(low) + bound;
        let width = (high - low + 1) as usize;
        let id = |zi: usize, t: i128| zi * width + (t - low) as usize;
        let total = zero.len() * width;
        let mut p1 = vec![false; total];
        let mut succ = vec![Vec::new(); total];
        let mut accepting = vec![false; total];
        for (zi, &v) in zero.iter().enumerate() {
            for t in low..=high {
                let s = id(zi, t);
                p1[s] = g.owner[v] == Player::One;
                accepting[s] = t >= c;
                for &(to, w, _) in &g.edges[v] {
                    let Some(&ti) = in_zero.get(&to) else { continue };
                    let t2 = t + w;
                    succ[s].push(if t2 < low { None } else { Some(id(ti, t2.min(high))) });
                }
            }
        }
        let win = buchi_region(&p1, &succ, &accepting);
        (0..zero.len()).map(|zi| win[id(zi, 0)]).collect()
    };
    // Values lie in [−nW, nW]; winning is monotone in c.
    let mut lo = vec![-bound; zero.len()];
    let mut hi = vec![bound; zero.len()];
    let mut cache: BTreeMap<i128, Vec<bool>> = BTreeMap::new();
    if !solve(-bound).iter().all(|&w| w) {
        return Err(GameError::Domain("a zero-mean vertex loses every threshold".into()));
    }
    loop {
        let Some(zi) = (0..zero.len()).find(|&i| lo[i] < hi[i]) else { break };
        let mid = lo[zi] + (hi[zi] - lo[zi] + 1) / 2;
        let win = cache.entry(mid).or_insert_with(|| solve(mid)).clone();
        for i in 0..zero.len() {
            if lo[i] < hi[i] && lo[i] < mid && mid <= hi[i] {
                if win[i] {
                    lo[i] = mid;
                } else {
                    hi[i] = mid - 1;
                }
            }
        }
    }
    for (zi, &v) in zero.iter().enumerate() {
        out[v] = Extended::Finite(g.unscale(lo[zi], 1));
    }
    Ok(out)
}

/// Limit payoff from every vertex when both players follow the given
/// memoryless profile (`choice[v]` is an index into the edge list).
fn profile_values(g: &Scaled, arena: &ExplicitArena, choice: &[usize], kind: PayoffKind) -> Vec<Extended> {
    let n = g.n();
    let mut out = Vec::with_capacity(n);
    for start in 0..n {
        let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
        let mut weights = Vec::new();
        let mut v = start;
        while !seen.contains_key(&v) {
            seen.insert(v, weights.len());
            let (to, _, pos) = g.edges[v][choice[v]];
            weights.push(g.edge(arena, v, pos).weight.clone());
            v = to;
        }
        let split = seen[&v];
        let cycle = weights.split_off(split);
        let lasso = Lasso::new(weights, cycle).expect("a revisited vertex closes a cycle");
        out.push(lasso.limit(kind, LimitMode::Limsup));
    }
    out
}

/// Most profiles the witness search is willing to evaluate.
const WITNESS_BUDGET: u128 = 1 << 20;

fn profiles(options: &[Vec<usize>]) -> u128 {
    options.iter().map(|o| o.len() as u128).product()
}

/// Advances a mixed-radix counter; false once it wraps.
fn next_profile(counter: &mut [usize], options: &[Vec<usize>]) -> bool {
    for (c, o) in counter.iter_mut().zip(options) {
        *c += 1;
        if *c < o.len() {
            return true;
        }
        *c = 0;
    }
    false
}

/// A memoryless Player 1 strategy attaining `values` against every
/// memoryless Player 2 strategy, searched among value-preserving edges.
fn find_witness(
    g: &Scaled,
    arena: &ExplicitArena,
    family: ValueFamily,
    values: &[Extended],
) -> Option<Strategy> {
    let n = g.n();
    let mut p1_options: Vec<Vec<usize>> = vec![vec![0]; n];
    let mut p2_options: Vec<Vec<usize>> = vec![vec![0]; n];
    for v in 0..n {
        let all: Vec<usize> = (0..g.edges[v].len()).collect();
        match g.owner[v] {
            Player::One => {
                p1_options[v] = all
                    .into_iter()
                    .filter(|&i| {
                        let (to, _, pos) = g.edges[v][i];
                        let via = match family {
                            ValueFamily::MeanPayoff => values[to].clone(),
                            ValueFamily::TotalPayoffSup => values[to].add_finite(&g.edge(arena, v, pos).weight),
                        };
                        via >= values[v]
                    })
                    .collect();
            }
            Player::Two => p2_options[v] = all,
        }
    }
    if profiles(&p1_options).saturating_mul(profiles(&p2_options)) > WITNESS_BUDGET {
        return None;
    }
    let mut c1 = vec![0usize; n];
    loop {
        let mut c2 = vec![0usize; n];
        let mut attains = true;
        loop {
            let choice: Vec<usize> = (0..n)
                .map(|v| match g.owner[v] {
                    Player::One => p1_options[v][c1[v]],
                    Player::Two => p2_options[v][c2[v]],
                })
                .collect();
            let got = profile_values(g, arena, &choice, family.kind());
            if (0..n).any(|v| got[v] < values[v]) {
                attains = false;
                break;
            }
            if !next_profile(&mut c2, &p2_options) {
                break;
            }
        }
        if attains {
            let table = (0..n)
                .filter(|&v| g.owner[v] == Player::One)
                .map(|v| {
                    let (_, _, pos) = g.edges[v][p1_options[v][c1[v]]];
                    (g.vertices[v].clone(), g.edge(arena, v, pos).clone())
                })
                .collect();
            return Some(Strategy::memoryless(format!("optimal_{family}"), table));
        }
        if !next_profile(&mut c1, &p1_options) {
            return None;
        }
    }
}

/// Values of the limsup family on a finite arena, plus a memoryless
/// optimal strategy for Player 1 when the search budget allows.
pub fn solve_values(arena: &ExplicitArena, family: ValueFamily) -> Result<ValueMap> {
    let g = Scaled::new(arena)?;
    let mean = mean_values(&g)?;
    let values: Vec<Extended> = match family {
        ValueFamily::MeanPayoff => mean.iter().map(|&(p, q)| Extended::Finite(g.unscale(p, q))).collect(),
        ValueFamily::TotalPayoffSup => total_values(&g, &mean)?,
    };
    let witness = find_witness(&g, arena, family, &values);
    Ok(ValueMap {
        family,
        values: g.vertices.iter().cloned().zip(values).collect(),
        witness,
    })
}

/// A set of (vertex, current total payoff) pairs. Used both for winning
/// regions of prefix-independent objectives (the payoff is ignored) and
/// for the pairs from which total-payoff limsup ≥ 0 is still winnable.
#[derive(Clone)]
pub enum Region {
    /// Every pair.
    All,
    Vertices(BTreeSet<VertexId>),
    /// `(v, r)` such that `r + value(v) ≥ 0`.
    Offsets(BTreeMap<VertexId, Extended>),
    /// A closed-form membership test; `None` for unknown vertices.
    Predicate(Arc<dyn Fn(&VertexId, &Weight) -> Option<bool> + Send + Sync>),
}

pub type WPrimeRegion = Region;

impl fmt::Debug for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::All => f.write_str("Region::All"),
            Region::Vertices(vs) => write!(f, "Region::Vertices({})", vs.len()),
            Region::Offsets(vs) => write!(f, "Region::Offsets({})", vs.len()),
            Region::Predicate(_) => f.write_str("Region::Predicate"),
        }
    }
}

impl Region {
    pub fn contains(&self, v: &VertexId, r: &Weight) -> Option<bool> {
        match self {
            Region::All => Some(true),
            Region::Vertices(vs) => Some(vs.contains(v)),
            Region::Offsets(values) => values.get(v).map(|x| match x {
                Extended::PosInf => true,
                Extended::NegInf => false,
                Extended::Finite(val) => !(r + val).is_negative(),
            }),
            Region::Predicate(p) => p(v, r),
        }
    }
}

/// Regions known in closed form for zoo entries.
pub fn zoo_region(entry: &str) -> Option<Region> {
    match entry {
        "bitarena" => Some(Region::Predicate(Arc::new(crate::zoo::bit::in_w_prime))),
        "a2" => Some(Region::All),
        _ => None,
    }
}

/// Player 1's move maximizing `weight + value(target)`, first in edge
/// order on ties, and the region `{(v, r) : r + value(v) ≥ 0}`.
pub fn sigma_safe(arena: &ExplicitArena, values: &ValueMap) -> Result<(Strategy, Region)> {
    if values.family != ValueFamily::TotalPayoffSup {
        return Err(GameError::Domain("the safe strategy needs total-payoff limsup values".into()));
    }
    let value_of = |v: &VertexId| {
        values
            .get(v)
            .cloned()
            .ok_or_else(|| GameError::Domain(format!("no value for {v}")))
    };
    let mut table = BTreeMap::new();
    for (v, owner) in arena.vertices() {
        if owner != Player::One {
            continue;
        }
        let mut best: Option<(Extended, &Edge)> = None;
        for e in arena.edges_of(v) {
            let score = value_of(&e.to)?.add_finite(&e.weight);
            if best.as_ref().map_or(true, |(b, _)| score > *b) {
                best = Some((score, e));
            }
        }
        if let Some((_, e)) = best {
            table.insert(v.clone(), e.clone());
        }
    }
    Ok((Strategy::memoryless("sigma_safe", table), Region::Offsets(values.values.clone())))
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionCheck {
    pub depth: usize,
    /// Distinct (vertex, memory, payoff) states visited.
    pub states: usize,
    pub partial: bool,
    /// A consistent history whose end lies outside the region.
    pub violation: Option<String>,
}

impl RegionCheck {
    pub fn ok(&self) -> bool {
        self.violation.is_none() && !self.partial
    }
}

/// Explores every `sigma`-consistent history from `(v0, r0)` up to
/// `depth` and reports the first one whose end leaves `region`. States
/// with equal (vertex, memory, payoff) are explored once.
pub fn check_region(
    arena: &dyn Arena,
    v0: &VertexId,
    r0: &Weight,
    sigma: &Strategy,
    region: &Region,
    depth: usize,
    node_cap: usize,
) -> Result<RegionCheck> {
    struct Node {
        parent: usize,
        edge: Option<Edge>,
        vertex: VertexId,
        memory: Memory,
        tp: Weight,
    }
    let mut levels: Vec<Vec<Node>> = vec![vec![Node {
        parent: 0,
        edge: None,
        vertex: v0.clone(),
        memory: sigma.initial_memory(v0),
        tp: r0.clone(),
    }]];
    let mut states = 1usize;
    let history_of = |levels: &Vec<Vec<Node>>, level: usize, idx: usize| {
        let mut edges = Vec::new();
        let (mut l, mut i) = (level, idx);
        while l > 0 {
            let node = &levels[l][i];
            edges.push(node.edge.clone().expect("non-root"));
            i = node.parent;
            l -= 1;
        }
        edges.reverse();
        History::from_edges(v0.clone(), edges).expect("contiguous")
    };
    for level in 0..=depth {
        for (idx, node) in levels[level].iter().enumerate() {
            if region.contains(&node.vertex, &node.tp) != Some(true) {
                return Ok(RegionCheck {
                    depth,
                    states,
                    partial: false,
                    violation: Some(format!(
                        "{} (payoff {})",
                        history_of(&levels, level, idx),
                        node.tp
                    )),
                });
            }
        }
        if level == depth {
            break;
        }
        let mut next: Vec<Node> = Vec::new();
        let mut seen: BTreeMap<(VertexId, Memory, Weight), ()> = BTreeMap::new();
        for (idx, node) in levels[level].iter().enumerate() {
            let x = arena.expand(&node.vertex)?;
            let moves = if x.owner == Player::One {
                vec![sigma.choose(arena, &node.vertex, &node.memory)?]
            } else {
                x.edges.clone()
            };
            for e in moves {
                let memory = sigma.update(&node.memory, &e);
                let tp = &node.tp + &e.weight;
                if seen.insert((e.to.clone(), memory.clone(), tp.clone()), ()).is_some() {
                    continue;
                }
                states += 1;
                if states > node_cap {
                    return Ok(RegionCheck {
                        depth,
                        states,
                        partial: true,
                        violation: None,
                    });
                }
                next.push(Node {
                    parent: idx,
                    vertex: e.to.clone(),
                    edge: Some(e),
                    memory,
                    tp,
                });
            }
        }
        levels.push(next);
    }
    Ok(RegionCheck {
        depth,
        states,
        partial: false,
        violation: None,
    })
}

/// The ⪯-least consistent history of some length ending at some vertex.
#[derive(Clone, Debug)]
pub struct MinimalHistory {
    pub edges: Vec<Edge>,
    /// Memory of the strategy after the history.
    pub memory: Memory,
    pub tp: Weight,
    pub satisfied: bool,
}

impl MinimalHistory {
    /// Whether the one-edge extension already satisfies `open_sub`.
    pub fn extension_satisfies(&self, open_sub: &OpenSub, e: &Edge) -> bool {
        self.satisfied || open_sub.fires(self.edges.len() as u64 + 1, &(&self.tp + &e.weight), Some(&e.weight))
    }
}

/// Orders two histories of equal length: the preorder first, then the
/// lexicographic order of their edges.
fn history_order(open_sub: &OpenSub, a: &MinimalHistory, b: &MinimalHistory) -> Ordering {
    let score = if open_sub.is_quantitative() {
        a.tp.cmp(&b.tp)
    } else {
        Ordering::Equal
    };
    match compare_states(a.satisfied, b.satisfied, score) {
        PrefixOrder::Le => Ordering::Less,
        PrefixOrder::Ge => Ordering::Greater,
        PrefixOrder::Both => a.edges.cmp(&b.edges),
    }
}

/// For every level `s < depth` and vertex `v`, the ⪯-least
/// `sigma`-consistent history of length `s` from `v0` ending at `v`.
///
/// Candidates are kept per (vertex, memory): the preorder is a congruence
/// for appending an edge, and equal (vertex, memory) pairs have the same
/// futures, so a non-least candidate never extends to a least one.
pub fn minimal_histories(
    arena: &dyn Arena,
    v0: &VertexId,
    sigma: &Strategy,
    open_sub: &OpenSub,
    depth: usize,
    node_cap: usize,
) -> Result<Vec<BTreeMap<VertexId, MinimalHistory>>> {
    let mut cells: BTreeMap<(VertexId, Memory), MinimalHistory> = BTreeMap::new();
    cells.insert(
        (v0.clone(), sigma.initial_memory(v0)),
        MinimalHistory {
            edges: Vec::new(),
            memory: sigma.initial_memory(v0),
            tp: Weight::zero(),
            satisfied: false,
        },
    );
    let mut out = Vec::with_capacity(depth);
    let mut created = 1usize;
    for s in 0..depth {
        let mut per_vertex: BTreeMap<VertexId, MinimalHistory> = BTreeMap::new();
        for ((v, _), h) in &cells {
            match per_vertex.get(v) {
                Some(best) if history_order(open_sub, best, h) != Ordering::Greater => {}
                _ => {
                    per_vertex.insert(v.clone(), h.clone());
                }
            }
        }
        out.push(per_vertex);
        if s + 1 == depth {
            break;
        }
        let mut next: BTreeMap<(VertexId, Memory), MinimalHistory> = BTreeMap::new();
        for ((v, mem), h) in &cells {
            let x = arena.expand(v)?;
            let moves = if x.owner == Player::One {
                vec![sigma.choose(arena, v, mem)?]
            } else {
                x.edges.clone()
            };
            for e in moves {
                created += 1;
                if created > node_cap {
                    return Err(GameError::NodeCap(node_cap));
                }
                let memory = sigma.update(mem, &e);
                let satisfied = h.extension_satisfies(open_sub, &e);
                let mut edges = h.edges.clone();
                edges.push(e.clone());
                let cand = MinimalHistory {
                    edges,
                    memory: memory.clone(),
                    tp: &h.tp + &e.weight,
                    satisfied,
                };
                let key = (e.to.clone(), memory);
                match next.get(&key) {
                    Some(best) if history_order(open_sub, best, &cand) != Ordering::Greater => {}
                    _ => {
                        next.insert(key, cand);
                    }
                }
            }
        }
        cells = next;
    }
    Ok(out)
}

/// A step-counter strategy derived from `sigma_prime`, with the least
/// histories it mimics.
#[derive(Clone, Debug)]
pub struct StepCounterConversion {
    pub strategy: Strategy,
    /// `minimal[s][v]` is the history whose continuation the table plays
    /// at `(v, s)`.
    pub minimal: Vec<BTreeMap<VertexId, MinimalHistory>>,
}

/// Table over steps `0..depth`: at `(v, s)` play what `sigma_prime` plays
/// after the ⪯-least consistent history of length `s` ending at `v`.
pub fn sc_from_strategy(
    arena: &dyn Arena,
    v0: &VertexId,
    sigma_prime: &Strategy,
    open_sub: &OpenSub,
    depth: usize,
    node_cap: usize,
) -> Result<StepCounterConversion> {
    let minimal = minimal_histories(arena, v0, sigma_prime, open_sub, depth, node_cap)?;
    let mut table = BTreeMap::new();
    for (s, row) in minimal.iter().enumerate() {
        for (v, h) in row {
            if arena.owner(v)? == Player::One {
                table.insert((v.clone(), s as u64), sigma_prime.choose(arena, v, &h.memory)?);
            }
        }
    }
    Ok(StepCounterConversion {
        strategy: Strategy::StepCounter {
            name: format!("sc_{}", sigma_prime.name()),
            horizon: depth as u64,
            table,
            fallback: Fallback::FirstEdge,
        },
        minimal,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DominationReport {
    pub checked: usize,
    pub partial: bool,
    /// `(h, h′)` with `h′` the recorded least history and `h ≺ h′`.
    pub violation: Option<(String, String)>,
}

/// Checks that every history consistent with the converted table is
/// bounded below, in the preorder, by the recorded least history at the
/// same (vertex, length). The comparison works on whole words, separately
/// from the incremental summaries used to build the table.
pub fn check_domination(
    arena: &dyn Arena,
    v0: &VertexId,
    conversion: &StepCounterConversion,
    open_sub: &OpenSub,
    depth: usize,
    node_cap: usize,
) -> Result<DominationReport> {
    let depth = depth.min(conversion.minimal.len().saturating_sub(1));
    let tree = explore_consistent(arena, v0, &conversion.strategy, Player::One, depth, node_cap)?;
    let mut checked = 0usize;
    for level in 0..tree.levels.len() {
        for h in tree.histories(level) {
            checked += 1;
            let Some(least) = conversion.minimal[level].get(h.to()) else {
                return Ok(DominationReport {
                    checked,
                    partial: tree.partial,
                    violation: Some((h.to_string(), "none".into())),
                });
            };
            let least_words: Vec<Weight> = least.edges.iter().map(|e| e.weight.clone()).collect();
            let order = open_sub.prefix_compare(&least_words, &h.colours())?;
            if order == PrefixOrder::Ge {
                let least_h = History::from_edges(v0.clone(), least.edges.clone())?;
                return Ok(DominationReport {
                    checked,
                    partial: tree.partial,
                    violation: Some((h.to_string(), least_h.to_string())),
                });
            }
        }
    }
    Ok(DominationReport {
        checked,
        partial: tree.partial,
        violation: None,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Caps {
    /// Deepest level a König bound may search.
    pub depth: usize,
    pub node_cap: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            depth: 256,
            node_cap: crate::engine::node_cap_from_env(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelReport {
    pub open_sub: OpenSub,
    /// Level by which the schedule promises satisfaction.
    pub scheduled: u64,
    /// König bound recomputed on the final table.
    pub certified: Option<u64>,
}

impl LevelReport {
    pub fn ok(&self) -> bool {
        self.certified.is_some_and(|c| c <= self.scheduled)
    }
}

#[derive(Clone, Debug)]
pub struct SynthReport {
    /// Step-counter boundaries `k_0 = 0 < k_1 < …`.
    pub schedule: Vec<u64>,
    pub levels: Vec<LevelReport>,
    pub strategy: Strategy,
    pub certificate: Certificate,
    pub region: RegionCheck,
    /// For total-payoff synthesis: whether the histories at each certified
    /// level also satisfy every earlier member of the family.
    pub nested: Option<bool>,
    /// Why synthesis stopped before `m_max`, if it did.
    pub partial: Option<String>,
}

#[derive(Serialize)]
struct Summary<'a> {
    strategy: &'a str,
    kind: &'a str,
    schedule: &'a [u64],
    levels: &'a [LevelReport],
    region: &'a RegionCheck,
    nested: Option<bool>,
    partial: &'a Option<String>,
    certified: bool,
}

impl SynthReport {
    /// Every level certified within its schedule, the region kept, and no
    /// truncation.
    pub fn certified(&self) -> bool {
        self.partial.is_none()
            && self.levels.iter().all(LevelReport::ok)
            && self.region.ok()
            && self.nested != Some(false)
            && self.schedule.windows(2).all(|w| w[1] > w[0])
    }

    pub fn to_text(&self) -> String {
        let summary = Summary {
            strategy: self.strategy.name(),
            kind: self.strategy.kind(),
            schedule: &self.schedule,
            levels: &self.levels,
            region: &self.region,
            nested: self.nested,
            partial: &self.partial,
            certified: self.certified(),
        };
        serde_json::to_string_pretty(&summary).expect("summaries serialize")
    }
}

fn certify_levels(
    arena: &dyn Arena,
    v0: &VertexId,
    strategy: &Strategy,
    levels: &mut [LevelReport],
    caps: Caps,
) -> Result<()> {
    for level in levels.iter_mut() {
        let depth = caps.depth.max(level.scheduled as usize);
        level.certified = koenig_bound(arena, v0, strategy, Player::One, &level.open_sub, depth, caps.node_cap)?.bound();
    }
    Ok(())
}

fn level_certificate(source: &str, v0: &VertexId, strategy: &Strategy, levels: &[LevelReport]) -> Certificate {
    let claimed = levels
        .iter()
        .filter_map(|l| l.certified.map(|c| (l.open_sub, c)))
        .collect();
    let mut cert = Certificate::new(source, v0.clone(), Vec::new(), Claim::LevelSatisfaction { levels: claimed });
    cert.p1 = write_strategy(strategy, None).ok();
    cert
}

fn describe(outcome: &KoenigOutcome) -> String {
    match outcome {
        KoenigOutcome::Bound(b) => format!("bound {b}"),
        KoenigOutcome::Inconclusive {
            depth,
            unsatisfied,
            node_cap_hit,
        } => format!(
            "inconclusive at depth {depth} with {unsatisfied} unsatisfied histories{}",
            if *node_cap_hit { " (node cap)" } else { "" }
        ),
        KoenigOutcome::Refuted { prefix, cycle, .. } => {
            format!("refuted by a lasso with prefix length {} and cycle length {}", prefix.len(), cycle.len())
        }
    }
}

/// Step-counter synthesis for a prefix-independent objective given as
/// the union-free family `family`: bubble `m` fixes the table on steps
/// `k_m..k_{m+1}` so that the `m`-th member is satisfied by `k_{m+1}`.
///
/// `oracle` must win from every vertex of `region`; beyond the fixed
/// table it takes over, with its memory following the whole history.
#[allow(clippy::too_many_arguments)]
pub fn bubble_synthesize(
    arena: &dyn Arena,
    source: &str,
    v0: &VertexId,
    family: &Family,
    m_max: usize,
    oracle: &Strategy,
    region: &Region,
    caps: Caps,
) -> Result<SynthReport> {
    if region.contains(v0, &Weight::zero()) != Some(true) {
        return Err(GameError::Domain(format!("{v0} is not in the winning region")));
    }
    let mut k = 0u64;
    let mut schedule = vec![0u64];
    let mut table: BTreeMap<(VertexId, u64), Edge> = BTreeMap::new();
    let mut levels = Vec::new();
    let mut partial = None;
    for m in 0..m_max {
        let target = family.nth(m);
        let composite = Strategy::Switched {
            name: "composite".into(),
            prefix: Box::new(Strategy::StepCounter {
                name: "fixed".into(),
                horizon: k,
                table: table.clone(),
                fallback: Fallback::FirstEdge,
            }),
            switch_at: k,
            tail: Box::new(oracle.clone()),
        };
        let outcome = koenig_bound(arena, v0, &composite, Player::One, &target, caps.depth, caps.node_cap)?;
        let Some(bound) = outcome.bound() else {
            partial = Some(format!("{target}: {}", describe(&outcome)));
            break;
        };
        let next = bound.max(k + 1);
        let conv = sc_from_strategy(arena, v0, &composite, &target, next as usize, caps.node_cap)?;
        if let Strategy::StepCounter { table: fresh, .. } = conv.strategy {
            table.extend(fresh.into_iter().filter(|((_, s), _)| *s >= k));
        }
        levels.push(LevelReport {
            open_sub: target,
            scheduled: next,
            certified: None,
        });
        k = next;
        schedule.push(k);
    }
    let strategy = Strategy::StepCounter {
        name: format!("bubble_{}", oracle.name()),
        horizon: k,
        table,
        fallback: Fallback::FirstEdge,
    };
    certify_levels(arena, v0, &strategy, &mut levels, caps)?;
    let region_check = check_region(arena, v0, &Weight::zero(), &strategy, region, k as usize, caps.node_cap)?;
    let certificate = level_certificate(source, v0, &strategy, &levels);
    Ok(SynthReport {
        schedule,
        levels,
        strategy,
        certificate,
        region: region_check,
        nested: None,
        partial,
    })
}

/// Step counter plus one bit for total-payoff limsup ≥ 0.
///
/// Bubble `m` starts at `k_m` with the bit at 0 and targets "payoff
/// ≥ −1/m′ at some step ≥ m′" for `m′ = k_m + 1`. With the bit at 0 the
/// table mimics `oracle` after the ⪯-least history reaching the same
/// (vertex, step); the bit turns to 1 once that least history, extended by
/// the edge just taken, satisfies the target, and from then on `safe`
/// plays. The bit returns to 0 at `k_{m+1}`.
#[allow(clippy::too_many_arguments)]
pub fn sc1bit_synthesize(
    arena: &dyn Arena,
    source: &str,
    v0: &VertexId,
    bubbles: usize,
    oracle: &Strategy,
    safe: &Strategy,
    region: &Region,
    caps: Caps,
) -> Result<SynthReport> {
    if !matches!(safe, Strategy::Memoryless { .. }) {
        return Err(GameError::Domain("the safe strategy must be memoryless".into()));
    }
    if region.contains(v0, &Weight::zero()) != Some(true) {
        return Err(GameError::Domain(format!("({v0}, 0) is not in the region")));
    }
    let mut k = 0u64;
    let mut schedule = vec![0u64];
    let mut table: BTreeMap<(VertexId, u64, u32), Edge> = BTreeMap::new();
    let mut modes: ModeTable = BTreeMap::new();
    let mut frontier: BTreeSet<(VertexId, u32)> = BTreeSet::from([(v0.clone(), 0)]);
    let mut levels = Vec::new();
    let mut partial = None;
    let fixed = |table: &BTreeMap<(VertexId, u64, u32), Edge>, modes: &ModeTable, horizon: u64| Strategy::StepCounterPlusK {
        name: "sc1bit".into(),
        k: 2,
        horizon,
        table: table.clone(),
        update: Arc::new(modes.clone()),
        fallback: Fallback::FirstEdge,
    };
    for _ in 0..bubbles {
        let target = OpenSub::TpSupGe0 { m: k + 1 };
        let composite = Strategy::Switched {
            name: "composite".into(),
            prefix: Box::new(fixed(&table, &modes, k)),
            switch_at: k,
            tail: Box::new(oracle.clone()),
        };
        let outcome = koenig_bound(arena, v0, &composite, Player::One, &target, caps.depth, caps.node_cap)?;
        let Some(bound) = outcome.bound() else {
            partial = Some(format!("{target}: {}", describe(&outcome)));
            break;
        };
        let next = bound.max(k + 1);
        let minimal = minimal_histories(arena, v0, &composite, &target, next as usize, caps.node_cap)?;
        for s in k..next {
            let mut after: BTreeSet<(VertexId, u32)> = BTreeSet::new();
            for (v, bit) in &frontier {
                let least = minimal[s as usize].get(v);
                let need_least = || {
                    least.ok_or_else(|| {
                        GameError::Domain(format!("no consistent history of length {s} reaches {v}"))
                    })
                };
                let x = arena.expand(v)?;
                let moves = if x.owner == Player::One {
                    let e = if *bit == 0 {
                        composite.choose(arena, v, &need_least()?.memory)?
                    } else {
                        safe.choose(arena, v, &Memory::Unit)?
                    };
                    table.insert((v.clone(), s, *bit), e.clone());
                    vec![e]
                } else {
                    x.edges.clone()
                };
                for e in moves {
                    let mut bit2 = *bit;
                    if *bit == 0 && need_least()?.extension_satisfies(&target, &e) {
                        bit2 = 1;
                    }
                    if s + 1 == next {
                        bit2 = 0;
                    }
                    if bit2 != *bit {
                        modes.insert((s, *bit, e.clone()), bit2);
                    }
                    after.insert((e.to.clone(), bit2));
                }
            }
            frontier = after;
        }
        levels.push(LevelReport {
            open_sub: target,
            scheduled: next,
            certified: None,
        });
        k = next;
        schedule.push(k);
    }
    let mut strategy = fixed(&table, &modes, k);
    if let Strategy::StepCounterPlusK { name, .. } = &mut strategy {
        *name = format!("sc1bit_{}", oracle.name());
    }
    certify_levels(arena, v0, &strategy, &mut levels, caps)?;
    let region_check = check_region(arena, v0, &Weight::zero(), &strategy, region, k as usize, caps.node_cap)?;
    let nested = nested_satisfaction(arena, v0, &strategy, &levels, caps)?;
    let certificate = level_certificate(source, v0, &strategy, &levels);
    Ok(SynthReport {
        schedule,
        levels,
        strategy,
        certificate,
        region: region_check,
        nested,
        partial,
    })
}

/// The total-payoff family decreases in `m`, so every history that
/// satisfies member `m′` satisfies all earlier members. Checked directly
/// on the histories at each certified level; `None` if the tree was too
/// large to enumerate.
fn nested_satisfaction(
    arena: &dyn Arena,
    v0: &VertexId,
    strategy: &Strategy,
    levels: &[LevelReport],
    caps: Caps,
) -> Result<Option<bool>> {
    for level in levels {
        let (Some(depth), OpenSub::TpSupGe0 { m: top }) = (level.certified, level.open_sub) else {
            continue;
        };
        let tree = explore_consistent(arena, v0, strategy, Player::One, depth as usize, caps.node_cap)?;
        if tree.partial {
            return Ok(None);
        }
        for h in tree.histories(depth as usize) {
            let word = h.colours();
            if !(1..=top).all(|m| OpenSub::TpSupGe0 { m }.already_satisfies(&word)) {
                return Ok(Some(false));
            }
        }
    }
    Ok(Some(true))
}
