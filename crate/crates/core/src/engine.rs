//! Play simulation, consistent-history exploration and König bounds.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::arena::{Arena, Edge};
use crate::error::{GameError, Result};
use crate::history::History;
use crate::objective::{Lasso, OpenSub};
use crate::strategy::{Memory, Strategy};
use crate::vertex::{Player, VertexId};
use crate::weight::Weight;

pub const DEFAULT_NODE_CAP: usize = 1_000_000;

/// Node cap from `QG_NODE_CAP`, or the default.
pub fn node_cap_from_env() -> usize {
    std::env::var("QG_NODE_CAP")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or(DEFAULT_NODE_CAP)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Horizon,
    /// Reached a vertex whose only edge is a weight-0 self-loop.
    Sink(VertexId),
}

#[derive(Clone, Debug)]
pub struct PlayRecord {
    pub origin: VertexId,
    pub edges: Vec<Edge>,
    /// Total payoff after each step.
    pub tp: Vec<Weight>,
    /// Mean payoff after each step.
    pub mp: Vec<Weight>,
    /// Memory of each player's strategy after each step.
    pub mem1: Vec<Memory>,
    pub mem2: Vec<Memory>,
    pub termination: Termination,
}

impl PlayRecord {
    pub fn history(&self) -> History {
        History::from_edges(self.origin.clone(), self.edges.clone()).expect("plays are contiguous")
    }

    pub fn colours(&self) -> Vec<Weight> {
        self.edges.iter().map(|e| e.weight.clone()).collect()
    }

    pub fn final_tp(&self) -> Weight {
        self.tp.last().cloned().unwrap_or_default()
    }

    /// Total payoff after `step` steps (`0` for the empty prefix).
    pub fn tp_at(&self, step: usize) -> Weight {
        if step == 0 {
            Weight::zero()
        } else {
            self.tp[step - 1].clone()
        }
    }

    /// Vertex reached after `step` steps.
    pub fn vertex_at(&self, step: usize) -> &VertexId {
        if step == 0 {
            &self.origin
        } else {
            &self.edges[step - 1].to
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,from,to,weight,tp,mp,mem1,mem2\n");
        for (i, e) in self.edges.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                i + 1,
                csv_field(&e.from.to_string()),
                csv_field(&e.to.to_string()),
                e.weight,
                self.tp[i],
                self.mp[i],
                csv_field(&self.mem1[i].to_string()),
                csv_field(&self.mem2[i].to_string()),
            );
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// The play from `v0` consistent with both strategies, `horizon` steps long
/// or shorter when a sink is reached.
pub fn play(
    arena: &dyn Arena,
    v0: &VertexId,
    sigma1: &Strategy,
    sigma2: &Strategy,
    horizon: usize,
) -> Result<PlayRecord> {
    let mut rec = PlayRecord {
        origin: v0.clone(),
        edges: Vec::with_capacity(horizon),
        tp: Vec::with_capacity(horizon),
        mp: Vec::with_capacity(horizon),
        mem1: Vec::with_capacity(horizon),
        mem2: Vec::with_capacity(horizon),
        termination: Termination::Horizon,
    };
    let mut m1 = sigma1.initial_memory(v0);
    let mut m2 = sigma2.initial_memory(v0);
    let mut at = v0.clone();
    let mut tp = Weight::zero();
    for step in 0..horizon {
        let x = arena.expand(&at)?;
        if x.is_sink() {
            rec.termination = Termination::Sink(at);
            return Ok(rec);
        }
        let e = match x.owner {
            Player::One => sigma1.choose(arena, &at, &m1)?,
            Player::Two => sigma2.choose(arena, &at, &m2)?,
        };
        if !x.edges.contains(&e) {
            return Err(GameError::Domain(format!(
                "step {step}: strategy chose `{e}`, which is not an edge of the arena"
            )));
        }
        m1 = sigma1.update(&m1, &e);
        m2 = sigma2.update(&m2, &e);
        tp += &e.weight;
        rec.mp.push(&tp / &Weight::from_int(step as i64 + 1));
        rec.tp.push(tp.clone());
        rec.mem1.push(m1.clone());
        rec.mem2.push(m2.clone());
        at = e.to.clone();
        rec.edges.push(e);
    }
    if arena.expand(&at)?.is_sink() {
        rec.termination = Termination::Sink(at);
    }
    Ok(rec)
}

/// One node of a consistent-history tree.
#[derive(Clone, Debug)]
pub struct TreeNode {
    /// Index of the parent in the previous level.
    pub parent: Option<usize>,
    pub edge: Option<Edge>,
    pub vertex: VertexId,
    pub memory: Memory,
    pub tp: Weight,
}

/// All histories from `origin` consistent with a strategy, level by level.
#[derive(Clone, Debug)]
pub struct ConsistentTree {
    pub origin: VertexId,
    pub levels: Vec<Vec<TreeNode>>,
    /// Set when the node cap stopped the exploration early.
    pub partial: bool,
}

impl ConsistentTree {
    pub fn widths(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.len()).collect()
    }

    pub fn history(&self, level: usize, idx: usize) -> History {
        let mut edges = Vec::with_capacity(level);
        let (mut l, mut i) = (level, idx);
        while l > 0 {
            let node = &self.levels[l][i];
            edges.push(node.edge.clone().expect("non-root nodes have an edge"));
            i = node.parent.expect("non-root nodes have a parent");
            l -= 1;
        }
        edges.reverse();
        History::from_edges(self.origin.clone(), edges).expect("tree paths are contiguous")
    }

    pub fn histories(&self, level: usize) -> Vec<History> {
        (0..self.levels.get(level).map_or(0, |l| l.len()))
            .map(|i| self.history(level, i))
            .collect()
    }
}

/// Successors of a node: the strategy's move at its own vertices, every
/// edge at the opponent's.
fn successors(
    arena: &dyn Arena,
    sigma: &Strategy,
    player: Player,
    v: &VertexId,
    mem: &Memory,
) -> Result<Vec<Edge>> {
    let x = arena.expand(v)?;
    if x.owner == player {
        Ok(vec![sigma.choose(arena, v, mem)?])
    } else {
        Ok(x.edges.clone())
    }
}

/// Enumerates every `sigma`-consistent history from `v0` up to `depth`.
pub fn explore_consistent(
    arena: &dyn Arena,
    v0: &VertexId,
    sigma: &Strategy,
    player: Player,
    depth: usize,
    node_cap: usize,
) -> Result<ConsistentTree> {
    let root = TreeNode {
        parent: None,
        edge: None,
        vertex: v0.clone(),
        memory: sigma.initial_memory(v0),
        tp: Weight::zero(),
    };
    let mut tree = ConsistentTree {
        origin: v0.clone(),
        levels: vec![vec![root]],
        partial: false,
    };
    let mut total = 1usize;
    for _ in 0..depth {
        let prev = tree.levels.last().unwrap();
        let mut next = Vec::new();
        for (idx, node) in prev.iter().enumerate() {
            for e in successors(arena, sigma, player, &node.vertex, &node.memory)? {
                total += 1;
                if total > node_cap {
                    tree.partial = true;
                    tree.levels.push(next);
                    return Ok(tree);
                }
                next.push(TreeNode {
                    parent: Some(idx),
                    memory: sigma.update(&node.memory, &e),
                    vertex: e.to.clone(),
                    tp: &node.tp + &e.weight,
                    edge: Some(e),
                });
            }
        }
        tree.levels.push(next);
    }
    Ok(tree)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KoenigOutcome {
    /// Every consistent history of length `level` already satisfies.
    Bound(u64),
    /// Unsatisfied histories remain at `depth`.
    Inconclusive { depth: u64, unsatisfied: usize, node_cap_hit: bool },
    /// A consistent lasso along which the predicate never fires.
    Refuted {
        origin: VertexId,
        prefix: Vec<Edge>,
        cycle: Vec<Edge>,
    },
}

impl KoenigOutcome {
    pub fn bound(&self) -> Option<u64> {
        match self {
            KoenigOutcome::Bound(s) => Some(*s),
            _ => None,
        }
    }
}

/// How far back the lasso search looks for a repeated (vertex, memory).
const LASSO_LOOKBACK: usize = 64;

struct FrontierNode {
    parent: usize,
    edge: Edge,
    vertex: VertexId,
    memory: Memory,
    tp: Weight,
}

/// Least level `s` such that every `sigma`-consistent history from `v0` of
/// length `s` already satisfies `open_sub`.
///
/// Unsatisfied histories ending in the same (vertex, memory) pair have the
/// same future moves, so only the one with the lowest total payoff is kept
/// (for colour objectives any one of them).
pub fn koenig_bound(
    arena: &dyn Arena,
    v0: &VertexId,
    sigma: &Strategy,
    player: Player,
    open_sub: &OpenSub,
    max_depth: usize,
    node_cap: usize,
) -> Result<KoenigOutcome> {
    // levels[l] holds the unsatisfied representatives at level l; the root
    // sits in level 0 as a node without an edge.
    let mut levels: Vec<Vec<FrontierNode>> = Vec::new();
    let root_mem = sigma.initial_memory(v0);
    let mut frontier: Vec<(usize, Option<Edge>, VertexId, Memory, Weight)> =
        vec![(0, None, v0.clone(), root_mem, Weight::zero())];
    let mut created = 1usize;
    let mut level = 0u64;
    // Level 0 (the empty history) never satisfies.
    loop {
        let current: Vec<FrontierNode> = frontier
            .drain(..)
            .map(|(parent, edge, vertex, memory, tp)| FrontierNode {
                parent,
                edge: edge.unwrap_or_else(|| Edge::new(v0.clone(), 0, v0.clone())),
                vertex,
                memory,
                tp,
            })
            .collect();
        if current.is_empty() {
            return Ok(KoenigOutcome::Bound(level));
        }
        if level > 0 {
            if let Some(refuted) = find_lasso(&levels, &current, v0, open_sub, level) {
                return Ok(refuted);
            }
        }
        if level as usize >= max_depth {
            return Ok(KoenigOutcome::Inconclusive {
                depth: level,
                unsatisfied: current.len(),
                node_cap_hit: false,
            });
        }
        let next_level = level + 1;
        let mut merged: HashMap<(VertexId, Memory), usize> = HashMap::new();
        let mut next: Vec<(usize, Option<Edge>, VertexId, Memory, Weight)> = Vec::new();
        for (idx, node) in current.iter().enumerate() {
            for e in successors(arena, sigma, player, &node.vertex, &node.memory)? {
                created += 1;
                if created > node_cap {
                    return Ok(KoenigOutcome::Inconclusive {
                        depth: level,
                        unsatisfied: current.len(),
                        node_cap_hit: true,
                    });
                }
                let tp = &node.tp + &e.weight;
                if open_sub.fires(next_level, &tp, Some(&e.weight)) {
                    continue;
                }
                let memory = sigma.update(&node.memory, &e);
                let key = (e.to.clone(), memory.clone());
                match merged.get(&key) {
                    Some(&slot) => {
                        if open_sub.is_quantitative() && tp < next[slot].4 {
                            next[slot] = (idx, Some(e.clone()), e.to.clone(), memory, tp);
                        }
                    }
                    None => {
                        merged.insert(key, next.len());
                        next.push((idx, Some(e.clone()), e.to.clone(), memory, tp));
                    }
                }
            }
        }
        // Deterministic order independent of hashing.
        next.sort_by(|a, b| (&a.2, &a.3, &a.4).cmp(&(&b.2, &b.3, &b.4)));
        levels.push(current);
        frontier = next;
        level = next_level;
    }
}

/// Looks for an unsatisfied node whose (vertex, memory) repeats an
/// ancestor's such that repeating the cycle forever never fires.
fn find_lasso(
    levels: &[Vec<FrontierNode>],
    current: &[FrontierNode],
    v0: &VertexId,
    open_sub: &OpenSub,
    level: u64,
) -> Option<KoenigOutcome> {
    for node in current {
        // Walk ancestors: (level, vertex, memory, tp).
        let mut chain: Vec<(u64, &FrontierNode)> = Vec::new();
        let mut l = level as usize;
        let mut parent = node.parent;
        while l > 0 && chain.len() < LASSO_LOOKBACK {
            l -= 1;
            let anc = &levels[l][parent];
            chain.push((l as u64, anc));
            parent = anc.parent;
        }
        for &(anc_level, anc) in &chain {
            if anc.vertex != node.vertex || anc.memory != node.memory {
                continue;
            }
            let cycle_len = level - anc_level;
            let cycle_tp = &node.tp - &anc.tp;
            let cycle_start_ok = anc_level + 1 >= open_sub.step_index();
            let never_fires = match *open_sub {
                OpenSub::TpSupGe0 { .. } | OpenSub::TpInf { .. } => {
                    cycle_start_ok && !cycle_tp.is_positive()
                }
                OpenSub::MpSupGe0 { m, .. } => {
                    // Later traversals fail if m·c + L ≤ 0.
                    cycle_start_ok
                        && !(&(&Weight::from_int(m as i64) * &cycle_tp)
                            + &Weight::from_int(cycle_len as i64))
                            .is_positive()
                }
                OpenSub::BuchiColour { c, .. } => {
                    let mut absent = true;
                    let mut cur = node;
                    let mut lv = level as usize;
                    while lv as u64 > anc_level {
                        if cur.edge.weight.to_i64() == Some(c) {
                            absent = false;
                            break;
                        }
                        lv -= 1;
                        cur = &levels[lv][cur.parent];
                    }
                    absent
                }
            };
            if never_fires {
                let path = path_to(levels, node, level as usize);
                let split = anc_level as usize;
                return Some(KoenigOutcome::Refuted {
                    origin: v0.clone(),
                    prefix: path[..split].to_vec(),
                    cycle: path[split..].to_vec(),
                });
            }
        }
    }
    None
}

fn path_to(levels: &[Vec<FrontierNode>], node: &FrontierNode, level: usize) -> Vec<Edge> {
    let mut edges = vec![node.edge.clone()];
    let mut l = level;
    let mut parent = node.parent;
    while l > 1 {
        l -= 1;
        let anc = &levels[l][parent];
        edges.push(anc.edge.clone());
        parent = anc.parent;
    }
    edges.reverse();
    edges
}

/// Weight lasso of a refutation, for evaluation against the objective.
pub fn refutation_lasso(outcome: &KoenigOutcome) -> Option<Lasso> {
    match outcome {
        KoenigOutcome::Refuted { prefix, cycle, .. } => Lasso::new(
            prefix.iter().map(|e| e.weight.clone()).collect(),
            cycle.iter().map(|e| e.weight.clone()).collect(),
        )
        .ok(),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::ExplicitArena;

    fn v(n: &str) -> VertexId {
        VertexId::named(n)
    }

    fn loop_arena(w: i64) -> ExplicitArena {
        let mut b = ExplicitArena::builder("loop");
        b.vertex(v("a"), Player::One).edge(v("a"), w, v("a")).start(v("a"));
        b.build().unwrap()
    }

    #[test]
    fn zero_loop_play_is_a_sink() {
        let a = loop_arena(0);
        let s = Strategy::first_edge("x");
        let rec = play(&a, &v("a"), &s, &s, 10).unwrap();
        assert!(rec.edges.is_empty());
        assert_eq!(rec.termination, Termination::Sink(v("a")));
    }

    #[test]
    fn positive_chain_bound_is_one() {
        let a = loop_arena(1);
        let s = Strategy::first_edge("x");
        let out = koenig_bound(&a, &v("a"), &s, Player::One, &OpenSub::TpSupGe0 { m: 1 }, 10, 1000)
            .unwrap();
        assert_eq!(out, KoenigOutcome::Bound(1));
        let out = koenig_bound(&a, &v("a"), &s, Player::One, &OpenSub::TpSupGe0 { m: 4 }, 10, 1000)
            .unwrap();
        assert_eq!(out, KoenigOutcome::Bound(4));
    }

    #[test]
    fn negative_loop_is_refuted() {
        let a = loop_arena(-1);
        let s = Strategy::first_edge("x");
        let out = koenig_bound(&a, &v("a"), &s, Player::One, &OpenSub::TpSupGe0 { m: 2 }, 10, 1000)
            .unwrap();
        let lasso = refutation_lasso(&out).expect("refuted");
        assert!(!crate::objective::Objective::tp_limsup_ge0().eval_on_lasso(&lasso));
    }

    #[test]
    fn csv_header_and_rows() {
        let a = loop_arena(2);
        let s = Strategy::first_edge("x");
        let rec = play(&a, &v("a"), &s, &s, 2).unwrap();
        assert_eq!(
            rec.to_csv(),
            "step,from,to,weight,tp,mp,mem1,mem2\n1,a,a,2,2,2,-,-\n2,a,a,2,4,2,-,-\n"
        );
    }
}
