//! Acyclic unfolding of the repeated outbid arena with unit chains.
//!
//! Round `i` starts at `s[i,0]`, which moves to `s[i,1]` (+1). Player 2
//! descends `s[i,j] → s[i,j+1]` (+1 each) and turns at `s[i,j]` paying
//! `-2j` into `q[i,j] → … → q[i,1] → t[i,0]` (weights 0); the round so far
//! has lost `j`. Player 1 then descends `t[i,j'] → t[i,j'+1]` (-1 each) and
//! turns at `t[i,j']` gaining `2j'` into `p[i,j'] → … → p[i,0] → s[i+1,0]`.
//! The round's total payoff is `j' - j`.

use smallvec::smallvec;

use crate::arena::{Arena, Edge, Expansion, GeneratedArena};
use crate::error::{ArenaError, StrategyError};
use crate::strategy::{Script, ScriptMem};
use crate::vertex::{Player, VertexId};
use crate::zoo::edge_to;

pub fn s(i: i64, j: i64) -> VertexId {
    VertexId::new("s", &[i, j])
}

pub fn t(i: i64, j: i64) -> VertexId {
    VertexId::new("t", &[i, j])
}

pub fn q(i: i64, j: i64) -> VertexId {
    VertexId::new("q", &[i, j])
}

pub fn p(i: i64, j: i64) -> VertexId {
    VertexId::new("p", &[i, j])
}

fn expand(v: &VertexId) -> Result<Expansion, ArenaError> {
    let x = match (v.name(), v.params()) {
        ("s", [i, 0]) if *i >= 0 => Expansion::new(Player::Two, vec![Edge::new(v.clone(), 1, s(*i, 1))]),
        ("s", [i, j]) if *i >= 0 && *j >= 1 => Expansion::new(
            Player::Two,
            vec![Edge::new(v.clone(), 1, s(*i, j + 1)), Edge::new(v.clone(), -2 * j, q(*i, *j))],
        ),
        ("q", [i, j]) if *i >= 0 && *j >= 1 => {
            let next = if *j == 1 { t(*i, 0) } else { q(*i, j - 1) };
            Expansion::new(Player::Two, vec![Edge::new(v.clone(), 0, next)])
        }
        ("t", [i, j]) if *i >= 0 && *j >= 0 => Expansion::new(
            Player::One,
            vec![Edge::new(v.clone(), -1, t(*i, j + 1)), Edge::new(v.clone(), 2 * j, p(*i, *j))],
        ),
        ("p", [i, j]) if *i >= 0 && *j >= 0 => {
            let next = if *j == 0 { s(i + 1, 0) } else { p(*i, j - 1) };
            Expansion::new(Player::One, vec![Edge::new(v.clone(), 0, next)])
        }
        _ => return Err(ArenaError::UnknownVertex(v.clone())),
    };
    Ok(x)
}

pub fn arena() -> GeneratedArena {
    GeneratedArena::new("a2", s(0, 0), expand).with_branching_bound(2)
}

pub fn is_p2_turn(e: &Edge) -> bool {
    e.from.is("s") && e.to.is("q")
}

pub fn is_p1_turn(e: &Edge) -> bool {
    e.from.is("t") && e.to.is("p")
}

/// Answers a descent of `j` with a descent of `j + 1`.
#[derive(Clone, Debug)]
pub struct Adaptive;

impl Script for Adaptive {
    fn name(&self) -> &str {
        "adaptive"
    }

    fn initial(&self, _: &VertexId) -> ScriptMem {
        smallvec![0]
    }

    fn update(&self, mem: &ScriptMem, e: &Edge) -> ScriptMem {
        if is_p2_turn(e) {
            smallvec![e.from.param(1)]
        } else {
            mem.clone()
        }
    }

    fn choose(&self, arena: &dyn Arena, v: &VertexId, mem: &ScriptMem) -> Result<Edge, StrategyError> {
        if !v.is("t") {
            return crate::zoo::first_edge(arena, v);
        }
        let (i, j) = (v.param(0), v.param(1));
        if j < mem[0] + 1 {
            edge_to(arena, v, &t(i, j + 1), None)
        } else {
            edge_to(arena, v, &p(i, j), None)
        }
    }
}
