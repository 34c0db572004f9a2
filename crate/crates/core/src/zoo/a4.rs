//! The delay-gadget arena.
//!
//! Player 2 walks the top row `s[0] → s[1] → …` (weight 0) and may enter
//! at `s[i]`, paying `-2(i+1)` over `2i+3` edges to reach `t[i]`. At
//! `t[i]` Player 1 either exits to the sink `r0` gaining `i+1`, or delays
//! into the gadget: `t[i] → g[i,1]` (+1), then Player 2 continues
//! `g[i,j] → g[i,j+1]` (+1) or drops from `g[i,j]` to `t[i+j]` over `2j`
//! edges paying `-2j+1`. Every path `s[0] ⇝ t[k]` has length `3(k+1)` and
//! every gadget path `t[i] ⇝ t[i+j]` has length `3j` and payoff `-j+1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
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

pub fn g(i: i64, j: i64) -> VertexId {
    VertexId::new("g", &[i, j])
}

pub fn r0() -> VertexId {
    VertexId::named("r0")
}

fn e(i: i64, l: i64) -> VertexId {
    VertexId::new("e", &[i, l])
}

fn d(i: i64, j: i64, l: i64) -> VertexId {
    VertexId::new("d", &[i, j, l])
}

fn bad(v: &VertexId) -> ArenaError {
    ArenaError::UnknownVertex(v.clone())
}

fn expand(v: &VertexId, guarded: bool) -> Result<Expansion, ArenaError> {
    let p = v.params();
    let x = match (v.name(), p) {
        ("s", [-1]) if guarded => Expansion::new(Player::Two, vec![Edge::new(v.clone(), 1, s(0))]),
        ("s", [i]) if *i >= 0 => Expansion::new(
            Player::Two,
            vec![Edge::new(v.clone(), 0, s(i + 1)), Edge::new(v.clone(), -1, e(*i, 1))],
        ),
        ("e", [i, l]) if *i >= 0 && *l >= 1 && *l <= 2 * i + 2 => {
            // Edges e[i,l] → e[i,l+1] carry -1 until 2(i+1) of them were paid;
            // the last one into t[i] carries 0.
            if *l == 2 * i + 2 {
                Expansion::new(Player::Two, vec![Edge::new(v.clone(), 0, t(*i))])
            } else {
                Expansion::new(Player::Two, vec![Edge::new(v.clone(), -1, e(*i, l + 1))])
            }
        }
        ("t", [i]) if *i >= 0 => Expansion::new(
            Player::One,
            vec![Edge::new(v.clone(), 1, g(*i, 1)), Edge::new(v.clone(), i + 1, r0())],
        ),
        ("g", [i, j]) if *i >= 0 && *j >= 1 => Expansion::new(
            Player::Two,
            vec![Edge::new(v.clone(), 1, g(*i, j + 1)), Edge::new(v.clone(), -1, d(*i, *j, 1))],
        ),
        ("d", [i, j, l]) if *i >= 0 && *j >= 1 && *l >= 1 && *l <= 2 * j - 1 => {
            if *l == 2 * j - 1 {
                Expansion::new(Player::Two, vec![Edge::new(v.clone(), 0, t(i + j))])
            } else {
                Expansion::new(Player::Two, vec![Edge::new(v.clone(), -1, d(*i, *j, l + 1))])
            }
        }
        ("r0", []) => Expansion::new(Player::One, vec![Edge::new(v.clone(), 0, r0())]),
        _ => return Err(bad(v)),
    };
    Ok(x)
}

pub fn arena(guarded: bool) -> GeneratedArena {
    let (name, start) = if guarded { ("a4guarded", s(-1)) } else { ("a4", s(0)) };
    GeneratedArena::new(name, start, move |v: &VertexId| expand(v, guarded)).with_branching_bound(2)
}

/// The entry path `s[i] ⇝ t[i]`.
pub fn entry_path(i: i64) -> Vec<Edge> {
    let mut out = vec![Edge::new(s(i), -1, e(i, 1))];
    for l in 1..=2 * i + 2 {
        let x = expand(&e(i, l), false).expect("entry vertex");
        out.push(x.edges[0].clone());
    }
    out
}

/// The gadget path `t[i] ⇝ t[i+j]`: delay, `j-1` continues, drop.
pub fn gadget_path(i: i64, j: i64) -> Vec<Edge> {
    assert!(j >= 1);
    let mut out = vec![Edge::new(t(i), 1, g(i, 1))];
    for c in 1..j {
        out.push(Edge::new(g(i, c), 1, g(i, c + 1)));
    }
    out.push(Edge::new(g(i, j), -1, d(i, j, 1)));
    for l in 1..=2 * j - 1 {
        let x = expand(&d(i, j, l), false).expect("drop vertex");
        out.push(x.edges[0].clone());
    }
    out
}

pub fn is_delay(e: &Edge) -> bool {
    e.from.is("t") && e.to.is("g")
}

/// Delay `k` times, then exit. Memory counts delays, saturating at `k`.
#[derive(Clone, Debug)]
pub struct SigmaK {
    name: String,
    k: u64,
}

impl SigmaK {
    pub fn new(k: u64) -> Self {
        SigmaK {
            name: format!("sigma_{k}"),
            k,
        }
    }

    pub fn named(name: &str, k: u64) -> Self {
        SigmaK {
            name: name.to_string(),
            k,
        }
    }
}

impl Script for SigmaK {
    fn name(&self) -> &str {
        &self.name
    }

    fn initial(&self, _: &VertexId) -> ScriptMem {
        smallvec![0]
    }

    fn update(&self, mem: &ScriptMem, e: &Edge) -> ScriptMem {
        if is_delay(e) {
            smallvec![(mem[0] + 1).min(self.k as i64)]
        } else {
            mem.clone()
        }
    }

    fn choose(&self, arena: &dyn Arena, v: &VertexId, mem: &ScriptMem) -> Result<Edge, StrategyError> {
        if !v.is("t") {
            return crate::zoo::first_edge(arena, v);
        }
        if (mem[0] as u64) < self.k {
            edge_to(arena, v, &g(v.param(0), 1), None)
        } else {
            edge_to(arena, v, &r0(), None)
        }
    }

    fn states(&self) -> Option<Vec<ScriptMem>> {
        Some((0..=self.k as i64).map(|c| smallvec![c]).collect())
    }

    fn params(&self) -> Vec<(String, String)> {
        vec![("k".into(), self.k.to_string())]
    }
}

/// Observes the entry index `k` and then delays `k+1` times before
/// exiting, which returns total payoff exactly to 0.
#[derive(Clone, Debug)]
pub struct Adaptive;

impl Script for Adaptive {
    fn name(&self) -> &str {
        "adaptive"
    }

    /// Memory: `[target, delays]`; target −1 until an entry is seen.
    fn initial(&self, _: &VertexId) -> ScriptMem {
        smallvec![-1, 0]
    }

    fn update(&self, mem: &ScriptMem, e: &Edge) -> ScriptMem {
        if e.from.is("s") && e.to.is("e") {
            smallvec![e.from.param(0) + 1, 0]
        } else if is_delay(e) {
            smallvec![mem[0], mem[1] + 1]
        } else {
            mem.clone()
        }
    }

    fn choose(&self, arena: &dyn Arena, v: &VertexId, mem: &ScriptMem) -> Result<Edge, StrategyError> {
        if !v.is("t") {
            return crate::zoo::first_edge(arena, v);
        }
        if mem[1] < mem[0] {
            edge_to(arena, v, &g(v.param(0), 1), None)
        } else {
            edge_to(arena, v, &r0(), None)
        }
    }
}

/// Edge classes a random finite-memory strategy reacts to.
const CLASSES: usize = 6;

fn edge_class(e: &Edge) -> usize {
    match (e.from.name(), e.to.name()) {
        ("s", "s") => 0,
        ("s", "e") | ("e", _) => 1,
        ("t", "g") => 2,
        ("g", "g") => 3,
        ("g", "d") | ("d", "d") => 4,
        _ => 5,
    }
}

/// A seeded random finite-memory strategy whose memory update depends on
/// the class of the edge taken (top row, entry, delay, continue, drop,
/// other) and whose exit decision depends on the memory state only.
#[derive(Clone, Debug)]
pub struct RandomFm {
    name: String,
    seed: u64,
    update: Vec<[u8; CLASSES]>,
    exits: Vec<bool>,
}

impl RandomFm {
    pub fn from_seed(states: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let update = (0..states)
            .map(|_| {
                let mut row = [0u8; CLASSES];
                for slot in &mut row {
                    *slot = rng.gen_range(0..states) as u8;
                }
                row
            })
            .collect();
        let exits = (0..states).map(|_| rng.gen_bool(0.4)).collect();
        RandomFm {
            name: format!("random_fm_{states}_{seed}"),
            seed,
            update,
            exits,
        }
    }
}

impl Script for RandomFm {
    fn name(&self) -> &str {
        &self.name
    }

    fn initial(&self, _: &VertexId) -> ScriptMem {
        smallvec![0]
    }

    fn update(&self, mem: &ScriptMem, e: &Edge) -> ScriptMem {
        smallvec![self.update[mem[0] as usize][edge_class(e)] as i64]
    }

    fn choose(&self, arena: &dyn Arena, v: &VertexId, mem: &ScriptMem) -> Result<Edge, StrategyError> {
        if !v.is("t") {
            return crate::zoo::first_edge(arena, v);
        }
        if self.exits[mem[0] as usize] {
            edge_to(arena, v, &r0(), None)
        } else {
            edge_to(arena, v, &g(v.param(0), 1), None)
        }
    }

    fn states(&self) -> Option<Vec<ScriptMem>> {
        Some((0..self.exits.len() as i64).map(|m| smallvec![m]).collect())
    }

    fn params(&self) -> Vec<(String, String)> {
        vec![
            ("states".into(), self.exits.len().to_string()),
            ("seed".into(), self.seed.to_string()),
        ]
    }
}
