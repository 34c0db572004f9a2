//! The delay-chain arena defeating step counters.
//!
//! Player 2 walks `s[i] → s[i+1]` (+1) and may enter at `s[i]` through
//! `b[i,1..2i]`, `2i+1` edges of weight -1, reaching `t[i]` with total
//! payoff `-i-1` after `3i+1` steps. At `t[i]` Player 1 exits to `r0`
//! gaining `i`, or delays through `a[i,1], a[i,2]` (weights 0) to
//! `t[i+1]`. Every history reaching `t[i]` has length `3i+1`.

use smallvec::smallvec;

use crate::arena::{Arena, Edge, Expansion, GeneratedArena};
use crate::error::{ArenaError, StrategyError};
use crate::strategy::{Script, ScriptMem};
use crate::vertex::{Player, VertexId};
use crate::zoo::edge_to;

pub fn s(i: i64) -> VertexId {
    VertexId::new("s", &[i])
}

pub fn t(i: i64) -> VertexId {
    VertexId::new("t", &[i])
}

pub fn r0() -> VertexId {
    VertexId::named("r0")
}

fn a(i: i64, l: i64) -> VertexId {
    VertexId::new("a", &[i, l])
}

fn b(i: i64, l: i64) -> VertexId {
    VertexId::new("b", &[i, l])
}

/// Step at which any history from `s[0]` reaches `t[i]`.
pub fn step_of_t(i: i64) -> u64 {
    (3 * i + 1) as u64
}

fn expand(v: &VertexId) -> Result<Expansion, ArenaError> {
    let p = v.params();
    let x = match (v.name(), p) {
        ("s", [i]) if *i >= 0 => {
            let entry = if *i == 0 { t(0) } else { b(*i, 1) };
            Expansion::new(
                Player::Two,
                vec![Edge::new(v.clone(), 1, s(i + 1)), Edge::new(v.clone(), -1, entry)],
            )
        }
        ("b", [i, l]) if *i >= 1 && *l >= 1 && *l <= 2 * i => {
            let next = if *l == 2 * i { t(*i) } else { b(*i, l + 1) };
            Expansion::new(Player::Two, vec![Edge::new(v.clone(), -1, next)])
        }
        ("t", [i]) if *i >= 0 => Expansion::new(
            Player::One,
            vec![Edge::new(v.clone(), 0, a(*i, 1)), Edge::new(v.clone(), *i, r0())],
        ),
        ("a", [i, 1]) if *i >= 0 => Expansion::new(Player::Two, vec![Edge::new(v.clone(), 0, a(*i, 2))]),
        ("a", [i, 2]) if *i >= 0 => Expansion::new(Player::Two, vec![Edge::new(v.clone(), 0, t(i + 1))]),
        ("r0", []) => Expansion::new(Player::One, vec![Edge::new(v.clone(), 0, r0())]),
        _ => return Err(ArenaError::UnknownVertex(v.clone())),
    };
    Ok(x)
}

pub fn arena() -> GeneratedArena {
    GeneratedArena::new("a3", s(0), expand).with_branching_bound(2)
}

/// Delays `delays` times after arriving at some `t`, then exits.
#[derive(Clone, Debug)]
pub struct DelayThenExit {
    pub delays: u64,
}

impl Script for DelayThenExit {
    fn name(&self) -> &str {
        if self.delays == 2 {
            "delay_twice_exit"
        } else {
            "exit_at"
        }
    }

    fn initial(&self, _: &VertexId) -> ScriptMem {
        smallvec![0]
    }

    fn update(&self, mem: &ScriptMem, e: &Edge) -> ScriptMem {
        if e.from.is("t") && e.to.is("a") {
            smallvec![(mem[0] + 1).min(self.delays as i64)]
        } else {
            mem.clone()
        }
    }

    fn choose(&self, arena: &dyn Arena, v: &VertexId, mem: &ScriptMem) -> Result<Edge, StrategyError> {
        if !v.is("t") {
            return crate::zoo::first_edge(arena, v);
        }
        if (mem[0] as u64) < self.delays {
            edge_to(arena, v, &a(v.param(0), 1), None)
        } else {
            edge_to(arena, v, &r0(), None)
        }
    }

    fn states(&self) -> Option<Vec<ScriptMem>> {
        Some((0..=self.delays as i64).map(|c| smallvec![c]).collect())
    }

    fn params(&self) -> Vec<(String, String)> {
        vec![("delays".into(), self.delays.to_string())]
    }
}
