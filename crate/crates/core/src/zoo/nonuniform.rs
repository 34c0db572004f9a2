//! Entries `s[i]` at payoff `-i` in front of a shared exit line.
//!
//! `s[i] → x[0]` pays `-i`; at `x[n]` Player 1 continues to `x[n+1]`
//! (weight 0) or exits to the sink `r0` gaining `n`. From `s[i]` Player 1
//! wins total-payoff limsup ≥ 0 exactly by exiting at some `x[n]` with
//! `n ≥ i`. Every `x[n]` is reached at step `n+1` from every entry, so a
//! step counter with finite memory cannot tell the entries apart.

use smallvec::smallvec;

use crate::arena::{Arena, Edge, Expansion, GeneratedArena};
use crate::error::{ArenaError, StrategyError};
use crate::strategy::{Script, ScriptMem};
use crate::vertex::{Player, VertexId};
use crate::zoo::edge_to;

pub fn s(i: i64) -> VertexId {
    VertexId::new("s", &[i])
}

pub fn x(n: i64) -> VertexId {
    VertexId::new("x", &[n])
}

pub fn r0() -> VertexId {
    VertexId::named("r0")
}

fn expand(v: &VertexId) -> Result<Expansion, ArenaError> {
    let e = match (v.name(), v.params()) {
        ("s", [i]) if *i >= 0 => Expansion::new(Player::Two, vec![Edge::new(v.clone(), -i, x(0))]),
        ("x", [n]) if *n >= 0 => Expansion::new(
            Player::One,
            vec![Edge::new(v.clone(), *n, r0()), Edge::new(v.clone(), 0, x(n + 1))],
        ),
        ("r0", []) => Expansion::new(Player::One, vec![Edge::new(v.clone(), 0, r0())]),
        _ => return Err(ArenaError::UnknownVertex(v.clone())),
    };
    Ok(e)
}

pub fn arena(start: i64) -> GeneratedArena {
    GeneratedArena::new("nonuniform", s(start), expand).with_branching_bound(2)
}

/// Exits at `x[n]` for the given `n`.
#[derive(Clone, Debug)]
pub struct ExitAt(pub i64);

impl Script for ExitAt {
    fn name(&self) -> &str {
        "exit_at"
    }

    fn initial(&self, _: &VertexId) -> ScriptMem {
        smallvec![]
    }

    fn update(&self, mem: &ScriptMem, _: &Edge) -> ScriptMem {
        mem.clone()
    }

    fn choose(&self, arena: &dyn Arena, v: &VertexId, _: &ScriptMem) -> Result<Edge, StrategyError> {
        if v.is("x") && v.param(0) >= self.0 {
            edge_to(arena, v, &r0(), None)
        } else if v.is("x") {
            edge_to(arena, v, &x(v.param(0) + 1), None)
        } else {
            crate::zoo::first_edge(arena, v)
        }
    }

    fn states(&self) -> Option<Vec<ScriptMem>> {
        Some(vec![smallvec![]])
    }

    fn is_step_counter(&self) -> bool {
        true
    }

    fn params(&self) -> Vec<(String, String)> {
        vec![("n".into(), self.0.to_string())]
    }
}
