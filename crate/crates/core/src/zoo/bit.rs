//! The round arena where one bit of memory beats step counters.
//!
//! `v0 → v[1]` pays -1. In round `i ≥ 1`, Player 2 at `v[i]` and then
//! Player 1 at `u[i]` each pick the zero branch (weights 0) or the spike
//! branch (`i` then `-i-1`). Both branches of a choice have the same
//! length, so every history reaching a vertex has the same length. In
//! compact form a branch is two edges; with `unit` every weight is spread
//! over unit steps and both branches have `2i+1` edges.

use smallvec::smallvec;

use crate::arena::{Arena, Edge, Expansion, ExplicitArena, GeneratedArena};
use crate::error::{ArenaError, StrategyError};
use crate::strategy::{Script, ScriptMem};
use crate::vertex::{Player, VertexId};
use crate::weight::Weight;
use crate::zoo::edge_to;

pub fn v0() -> VertexId {
    VertexId::named("v0")
}

pub fn v(i: i64) -> VertexId {
    VertexId::new("v", &[i])
}

pub fn u(i: i64) -> VertexId {
    VertexId::new("u", &[i])
}

/// Branch vertices: `a0`/`a1` after Player 2's zero/spike choice, `b0`/`b1`
/// after Player 1's.
pub fn mid(kind: &str, i: i64, l: i64) -> VertexId {
    VertexId::new(kind, &[i, l])
}

fn chain_len(i: i64, unit: bool) -> i64 {
    if unit {
        2 * i + 1
    } else {
        2
    }
}

fn spike_weight(i: i64, l: i64, unit: bool) -> i64 {
    match (unit, l <= i) {
        (false, _) if l == 1 => i,
        (false, _) => -i - 1,
        (true, true) => 1,
        (true, false) => -1,
    }
}

fn expand(x: &VertexId, unit: bool) -> Result<Expansion, ArenaError> {
    let owner_of = |kind: &str| if kind.starts_with('a') { Player::Two } else { Player::One };
    let e = match (x.name(), x.params()) {
        ("v0", []) => Expansion::new(Player::Two, vec![Edge::new(x.clone(), -1, v(1))]),
        ("v", [i]) if *i >= 1 => Expansion::new(
            Player::Two,
            vec![
                Edge::new(x.clone(), 0, mid("a0", *i, 1)),
                Edge::new(x.clone(), spike_weight(*i, 1, unit), mid("a1", *i, 1)),
            ],
        ),
        ("u", [i]) if *i >= 1 => Expansion::new(
            Player::One,
            vec![
                Edge::new(x.clone(), 0, mid("b0", *i, 1)),
                Edge::new(x.clone(), spike_weight(*i, 1, unit), mid("b1", *i, 1)),
            ],
        ),
        (kind @ ("a0" | "a1" | "b0" | "b1"), [i, l]) if *i >= 1 && *l >= 1 && *l < chain_len(*i, unit) => {
            let last = *l == chain_len(*i, unit) - 1;
            let to = match (last, kind.starts_with('a')) {
                (true, true) => u(*i),
                (true, false) => v(i + 1),
                (false, _) => mid(kind, *i, l + 1),
            };
            let w = if kind.ends_with('0') { 0 } else { spike_weight(*i, l + 1, unit) };
            Expansion::new(owner_of(kind), vec![Edge::new(x.clone(), w, to)])
        }
        _ => return Err(ArenaError::UnknownVertex(x.clone())),
    };
    Ok(e)
}

pub fn arena(unit: bool) -> GeneratedArena {
    let name = if unit { "bitarena-unit" } else { "bitarena" };
    GeneratedArena::new(name, v0(), move |x: &VertexId| expand(x, unit)).with_branching_bound(2)
}

/// The first `rounds` rounds as an explicit arena; `v[rounds+1]` becomes
/// a weight-0 sink.
pub fn truncated(rounds: i64, unit: bool) -> ExplicitArena {
    let end = v(rounds + 1);
    let mut b = ExplicitArena::builder(format!("{}-{rounds}", if unit { "bitarena-unit" } else { "bitarena" }));
    let mut seen = std::collections::BTreeSet::from([v0()]);
    let mut stack = vec![v0()];
    while let Some(x) = stack.pop() {
        if x == end {
            b.vertex(x.clone(), Player::One);
            b.edge(x.clone(), 0, x.clone());
            continue;
        }
        let exp = expand(&x, unit).expect("generated vertices expand");
        b.vertex(x.clone(), exp.owner);
        for e in exp.edges {
            if seen.insert(e.to.clone()) {
                stack.push(e.to.clone());
            }
            b.edge(e.from, e.weight, e.to);
        }
    }
    b.start(v0());
    b.build().expect("truncated bit arena is well formed")
}

/// Step at which round `i` starts at `v[i]` in the compact arena.
pub fn step_of_v(i: i64) -> u64 {
    (4 * i - 3) as u64
}

/// Round index of a compact-arena vertex (0 for `v0`).
pub fn round_of(x: &VertexId) -> i64 {
    x.params().first().copied().unwrap_or(0)
}

/// Whether Player 1 wins total-payoff limsup ≥ 0 from compact-arena
/// vertex `x` when the current sum is `r`.
pub fn in_w_prime(x: &VertexId, r: &Weight) -> Option<bool> {
    let i = round_of(x);
    let need = match x.name() {
        "v0" => 0,
        "v" => -i,
        "u" | "a0" | "b0" => -i - 1,
        "a1" | "b1" => 0,
        _ => return None,
    };
    Some(*r >= Weight::from_int(need))
}

pub fn is_spike_choice(e: &Edge) -> bool {
    (e.from.is("v") || e.from.is("u")) && (e.to.is("a1") || e.to.is("b1"))
}

/// Plays the branch Player 2 did not just play. Memory is Player 2's last
/// choice (0 zero, 1 spike).
#[derive(Clone, Debug)]
pub struct Opposite;

impl Script for Opposite {
    fn name(&self) -> &str {
        "opposite"
    }

    fn initial(&self, _: &VertexId) -> ScriptMem {
        smallvec![0]
    }

    fn update(&self, mem: &ScriptMem, e: &Edge) -> ScriptMem {
        if e.from.is("v") {
            smallvec![is_spike_choice(e) as i64]
        } else {
            mem.clone()
        }
    }

    fn choose(&self, arena: &dyn Arena, x: &VertexId, mem: &ScriptMem) -> Result<Edge, StrategyError> {
        if !x.is("u") {
            return crate::zoo::first_edge(arena, x);
        }
        let kind = if mem[0] == 0 { "b1" } else { "b0" };
        edge_to(arena, x, &mid(kind, x.param(0), 1), None)
    }

    fn states(&self) -> Option<Vec<ScriptMem>> {
        Some(vec![smallvec![0], smallvec![1]])
    }
}

/// Player 2 spikes in every round.
#[derive(Clone, Debug)]
pub struct AllSpike;

impl Script for AllSpike {
    fn name(&self) -> &str {
        "allspike"
    }

    fn initial(&self, _: &VertexId) -> ScriptMem {
        smallvec![]
    }

    fn update(&self, mem: &ScriptMem, _: &Edge) -> ScriptMem {
        mem.clone()
    }

    fn choose(&self, arena: &dyn Arena, x: &VertexId, _: &ScriptMem) -> Result<Edge, StrategyError> {
        if !x.is("v") {
            return crate::zoo::first_edge(arena, x);
        }
        edge_to(arena, x, &mid("a1", x.param(0), 1), None)
    }

    fn states(&self) -> Option<Vec<ScriptMem>> {
        Some(vec![smallvec![]])
    }

    fn is_step_counter(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::{encodes_step_count, validate, StepEncoding};

    #[test]
    fn unit_form_uses_unit_weights_and_encodes_steps() {
        let a = arena(true);
        assert!(validate(&a, 60).is_valid());
        match encodes_step_count(&a, &v0(), 60).unwrap() {
            StepEncoding::Encoded { lengths, .. } => {
                for (x, _) in &lengths {
                    for e in &a.expand(x).unwrap().edges {
                        assert!(e.weight.abs() <= Weight::one());
                    }
                }
                assert!(lengths.contains_key(&u(3)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn compact_round_starts() {
        let a = arena(false);
        match encodes_step_count(&a, &v0(), 30).unwrap() {
            StepEncoding::Encoded { lengths, .. } => {
                for i in 1..=6 {
                    assert_eq!(lengths[&v(i)], step_of_v(i));
                }
            }
            other => panic!("{other:?}"),
        }
    }
}
