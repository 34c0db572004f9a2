//! Helpers shared by the integration suites: random arenas, a brute-force
//! value oracle over memoryless profiles, and scripted Player 2 plans.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use qgame::arena::{Arena, Edge, ExplicitArena};
use qgame::objective::{Lasso, LimitMode, PayoffKind};
use qgame::strategy::{Script, ScriptMem};
use qgame::{Extended, Player, StrategyError, VertexId, Weight};
use rand::Rng;
use smallvec::smallvec;

/// Arena with `2..=max_vertices` vertices, out-degree 1 or 2 and integer
/// weights in `-2..=2`.
pub fn random_arena(rng: &mut impl Rng, max_vertices: usize) -> ExplicitArena {
    let n = rng.gen_range(2..=max_vertices);
    let name = |i: usize| VertexId::new("x", &[i as i64]);
    let mut b = ExplicitArena::builder("random");
    for i in 0..n {
        let owner = if rng.gen_bool(0.5) { Player::One } else { Player::Two };
        b.vertex(name(i), owner);
        let degree = rng.gen_range(1..=2);
        let mut seen = BTreeSet::new();
        for _ in 0..degree {
            let to = rng.gen_range(0..n);
            let w = rng.gen_range(-2..=2i64);
            if seen.insert((to, w)) {
                b.edge(name(i), w, name(to));
            }
        }
    }
    b.start(name(0));
    b.build().expect("random arenas are well formed")
}

/// Limit payoff from `start` when every vertex follows `choice`.
fn lasso_value(choice: &BTreeMap<VertexId, Edge>, start: &VertexId, kind: PayoffKind) -> Extended {
    let mut order: Vec<VertexId> = Vec::new();
    let mut weights = Vec::new();
    let mut v = start.clone();
    while !order.contains(&v) {
        order.push(v.clone());
        let e = &choice[&v];
        weights.push(e.weight.clone());
        v = e.to.clone();
    }
    let split = order.iter().position(|x| *x == v).unwrap();
    let cycle = weights.split_off(split);
    Lasso::new(weights, cycle).unwrap().limit(kind, LimitMode::Limsup)
}

/// All memoryless choices for the vertices of `player`.
fn profiles(arena: &ExplicitArena, player: Player) -> Vec<BTreeMap<VertexId, Edge>> {
    let mut out = vec![BTreeMap::new()];
    for (v, owner) in arena.vertices() {
        if owner != player {
            continue;
        }
        let mut next = Vec::new();
        for partial in &out {
            for e in arena.edges_of(v) {
                let mut p = partial.clone();
                p.insert(v.clone(), e.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// `max_σ1 min_σ2` of the limsup payoff over memoryless profiles, per
/// vertex.
pub fn brute_force_values(arena: &ExplicitArena, kind: PayoffKind) -> BTreeMap<VertexId, Extended> {
    let p1 = profiles(arena, Player::One);
    let p2 = profiles(arena, Player::Two);
    let mut best: BTreeMap<VertexId, Extended> = BTreeMap::new();
    for s1 in &p1 {
        let mut worst: BTreeMap<VertexId, Extended> = BTreeMap::new();
        for s2 in &p2 {
            let mut choice = s1.clone();
            choice.extend(s2.clone());
            for (v, _) in arena.vertices() {
                let x = lasso_value(&choice, v, kind);
                let slot = worst.entry(v.clone()).or_insert(Extended::PosInf);
                if x < *slot {
                    *slot = x;
                }
            }
        }
        for (v, x) in worst {
            let slot = best.entry(v).or_insert(Extended::NegInf);
            if x > *slot {
                *slot = x;
            }
        }
    }
    best
}

pub fn brute_force_winning(arena: &ExplicitArena, kind: PayoffKind) -> BTreeSet<VertexId> {
    brute_force_values(arena, kind)
        .into_iter()
        .filter(|(_, x)| *x >= Extended::Finite(Weight::zero()))
        .map(|(v, _)| v)
        .collect()
}

fn pick(arena: &dyn Arena, v: &VertexId, to_name: &str) -> Result<Edge, StrategyError> {
    let x = arena.expand(v)?;
    x.edges
        .iter()
        .find(|e| e.to.is(to_name))
        .cloned()
        .ok_or_else(|| StrategyError::NoMove(v.clone()))
}

/// Player 2 on the delay-gadget arena: enters at `s[entry]`; in the
/// `c`-th gadget (counting Player 1's delays) drops at depth `drops[c-1]`,
/// and continues forever once `drops` runs out.
#[derive(Clone, Debug)]
pub struct GadgetPlan {
    pub entry: i64,
    pub drops: Vec<i64>,
}

impl Script for GadgetPlan {
    fn name(&self) -> &str {
        "gadget_plan"
    }

    fn initial(&self, _: &VertexId) -> ScriptMem {
        smallvec![0]
    }

    fn update(&self, mem: &ScriptMem, e: &Edge) -> ScriptMem {
        if e.from.is("t") && e.to.is("g") {
            smallvec![mem[0] + 1]
        } else {
            mem.clone()
        }
    }

    fn choose(&self, arena: &dyn Arena, v: &VertexId, mem: &ScriptMem) -> Result<Edge, StrategyError> {
        match v.name() {
            "s" if v.param(0) == self.entry => pick(arena, v, "e"),
            "s" => pick(arena, v, "s"),
            "g" => {
                let c = mem[0] as usize;
                match self.drops.get(c.wrapping_sub(1)) {
                    Some(&j) if v.param(1) >= j => pick(arena, v, "d"),
                    _ => pick(arena, v, "g"),
                }
            }
            _ => Ok(arena.expand(v)?.edges[0].clone()),
        }
    }
}

/// Player 2 on the delay chain: enters at `s[entry]`.
#[derive(Clone, Debug)]
pub struct EnterChain(pub i64);

impl Script for EnterChain {
    fn name(&self) -> &str {
        "enter_chain"
    }

    fn initial(&self, _: &VertexId) -> ScriptMem {
        smallvec![]
    }

    fn update(&self, mem: &ScriptMem, _: &Edge) -> ScriptMem {
        mem.clone()
    }

    fn choose(&self, arena: &dyn Arena, v: &VertexId, _: &ScriptMem) -> Result<Edge, StrategyError> {
        let x = arena.expand(v)?;
        if v.is("s") {
            let walk = v.param(0) < self.0;
            return Ok(x.edges.iter().find(|e| e.to.is("s") == walk).unwrap().clone());
        }
        Ok(x.edges[0].clone())
    }
}
