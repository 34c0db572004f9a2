//! One-shot and repeated "outbid" arenas, truncated to bids `1..=b`.
//!
//! `s` (Player 2) pays `-x` for `x ∈ 1..=b` and moves to `t`; `t` (Player 1)
//! gains `y ∈ 0..=b+1`. In the one-shot version `t` leads to the sink `q`,
//! in the repeated version back to `s`.

use smallvec::smallvec;

use crate::arena::{Arena, Edge, ExplicitArena};
use crate::error::StrategyError;
use crate::strategy::{Script, ScriptMem};
use crate::vertex::{Player, VertexId};
use crate::weight::Weight;
use crate::zoo::edge_to;

fn build(name: &str, b: i64, repeated: bool) -> ExplicitArena {
    let (s, t, q) = (VertexId::named("s"), VertexId::named("t"), VertexId::named("q"));
    let mut ab = ExplicitArena::builder(name);
    ab.vertex(s.clone(), Player::Two).vertex(t.clone(), Player::One);
    for x in 1..=b {
        ab.edge(s.clone(), -x, t.clone());
    }
    let back = if repeated { s.clone() } else { q.clone() };
    for y in 0..=b + 1 {
        ab.edge(t.clone(), y, back.clone());
    }
    if !repeated {
        ab.vertex(q.clone(), Player::One).edge(q.clone(), 0, q);
    }
    ab.start(s);
    ab.build().expect("outbid arena is well formed")
}

pub fn a1(b: i64) -> ExplicitArena {
    build("a1", b, false)
}

pub fn a1prime(b: i64) -> ExplicitArena {
    build("a1prime", b, true)
}

/// Answers a bid of `x` with `x + 1`.
#[derive(Clone, Debug)]
pub struct MatchPlusOne;

impl Script for MatchPlusOne {
    fn name(&self) -> &str {
        "match_plus_one"
    }

    fn initial(&self, _: &VertexId) -> ScriptMem {
        smallvec![0]
    }

    fn update(&self, mem: &ScriptMem, e: &Edge) -> ScriptMem {
        if e.from.is("s") {
            smallvec![-e.weight.to_i64().unwrap_or(0)]
        } else {
            mem.clone()
        }
    }

    fn choose(&self, arena: &dyn Arena, v: &VertexId, mem: &ScriptMem) -> Result<Edge, StrategyError> {
        if !v.is("t") {
            return crate::zoo::first_edge(arena, v);
        }
        let x = arena.expand(v)?;
        let target = x.edges[0].to.clone();
        edge_to(arena, v, &target, Some(&Weight::from_int(mem[0] + 1)))
    }
}
