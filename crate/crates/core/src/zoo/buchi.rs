//! Arenas for the "every colour infinitely often" objective. Colours are
//! small integer codes carried as edge weights.

use smallvec::smallvec;

use crate::arena::{Arena, Edge, Expansion, ExplicitArena, GeneratedArena};
use crate::error::{ArenaError, StrategyError};
use crate::strategy::{Script, ScriptMem};
use crate::vertex::{Player, VertexId};
use crate::zoo::edge_to;

pub fn h(n: i64) -> VertexId {
    VertexId::new("h", &[n])
}

/// A line `h[0] → h[1] → … → h[k-1]` of colour-0 edges where each `h[n]`
/// may return to `h[0]` showing colour `n`. Seeing colour `n` requires
/// walking `n` steps right, so any fixed finite memory eventually stops
/// short once the colour set grows.
pub fn buchi_a(k: i64) -> ExplicitArena {
    let mut b = ExplicitArena::builder("buchia");
    for n in 0..k {
        b.vertex(h(n), Player::One);
        if n + 1 < k {
            b.edge(h(n), 0, h(n + 1));
        }
        b.edge(h(n), n, h(0));
    }
    b.start(h(0));
    b.build().expect("buchia is well formed")
}

/// Visits colours `1, 2, …, k-1` in turn. Memory is the next target.
#[derive(Clone, Debug)]
pub struct RoundRobin {
    k: i64,
}

impl RoundRobin {
    pub fn new(k: i64) -> Self {
        RoundRobin { k }
    }
}

impl Script for RoundRobin {
    fn name(&self) -> &str {
        "round_robin"
    }

    fn initial(&self, _: &VertexId) -> ScriptMem {
        smallvec![1]
    }

    fn update(&self, mem: &ScriptMem, e: &Edge) -> ScriptMem {
        if e.to == h(0) && e.from.param(0) == mem[0] && e.weight.to_i64() == Some(mem[0]) {
            smallvec![mem[0] % (self.k - 1) + 1]
        } else {
            mem.clone()
        }
    }

    fn choose(&self, arena: &dyn Arena, v: &VertexId, mem: &ScriptMem) -> Result<Edge, StrategyError> {
        let n = v.param(0);
        if n < mem[0] {
            edge_to(arena, v, &h(n + 1), None)
        } else {
            edge_to(arena, v, &h(0), Some(&crate::weight::Weight::from_int(n)))
        }
    }

    fn states(&self) -> Option<Vec<ScriptMem>> {
        Some((1..self.k).map(|t| smallvec![t]).collect())
    }
}

pub const C1: i64 = 0;
pub const C2: i64 = 1;

pub fn bv() -> VertexId {
    VertexId::named("v")
}

pub fn bu() -> VertexId {
    VertexId::named("u")
}

/// Intermediate vertex `l` of Player 2's `c1` word of length `len`.
pub fn w(len: i64, l: i64) -> VertexId {
    VertexId::new("w", &[len, l])
}

fn expand_b(x: &VertexId, b: i64) -> Result<Expansion, ArenaError> {
    let e = match (x.name(), x.params()) {
        ("v", []) => Expansion::new(
            Player::One,
            vec![Edge::new(x.clone(), C2, bv()), Edge::new(x.clone(), C1, bu())],
        ),
        ("u", []) => Expansion::new(
            Player::Two,
            (1..=b)
                .map(|len| {
                    let to = if len == 1 { bv() } else { w(len, 1) };
                    Edge::new(x.clone(), C1, to)
                })
                .collect(),
        ),
        ("w", [len, l]) if *len >= 2 && *len <= b && *l >= 1 && *l < *len => {
            let to = if *l == len - 1 { bv() } else { w(*len, l + 1) };
            Expansion::new(Player::Two, vec![Edge::new(x.clone(), C1, to)])
        }
        _ => return Err(ArenaError::UnknownVertex(x.clone())),
    };
    Ok(e)
}

/// `v` (Player 1) loops with colour `c2` or moves to `u` with colour `c1`;
/// `u` (Player 2) returns to `v` through a `c1` word of length `1..=b`.
pub fn buchi_b(b: i64) -> GeneratedArena {
    GeneratedArena::new("buchib", bv(), move |x: &VertexId| expand_b(x, b)).with_branching_bound(b.max(2) as usize)
}

/// Length of a Player 2 word starting with edge `e` out of `u`.
pub fn word_len(e: &Edge) -> i64 {
    if e.to == bv() {
        1
    } else {
        e.to.param(0)
    }
}

/// At `v`: loop once (colour `c2`), then leave (colour `c1`).
#[derive(Clone, Debug)]
pub struct Alternating;

impl Script for Alternating {
    fn name(&self) -> &str {
        "alternating"
    }

    fn initial(&self, _: &VertexId) -> ScriptMem {
        smallvec![0]
    }

    fn update(&self, mem: &ScriptMem, e: &Edge) -> ScriptMem {
        if e.from == bv() {
            smallvec![(e.to == bv()) as i64]
        } else {
            mem.clone()
        }
    }

    fn choose(&self, arena: &dyn Arena, v: &VertexId, mem: &ScriptMem) -> Result<Edge, StrategyError> {
        if *v != bv() {
            return crate::zoo::first_edge(arena, v);
        }
        if mem[0] == 0 {
            edge_to(arena, v, &bv(), None)
        } else {
            edge_to(arena, v, &bu(), None)
        }
    }

    fn states(&self) -> Option<Vec<ScriptMem>> {
        Some(vec![smallvec![0], smallvec![1]])
    }
}
