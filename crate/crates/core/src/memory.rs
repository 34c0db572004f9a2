//! Memory structures and the product of an arena with one.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::arena::{ArenaRef, Edge, Expansion, ExplicitArena, GeneratedArena};
use crate::error::ArenaError;
use crate::vertex::VertexId;

/// Mealy update table; pairs missing from the table keep their state.
pub type MealyTable = BTreeMap<(u32, Edge), u32>;

/// Step-dependent mode update table for step-counter × K structures;
/// missing entries keep the mode.
pub type ModeTable = BTreeMap<(u64, u32, Edge), u32>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MemoryStructure {
    Mealy {
        states: u32,
        initial: u32,
        update: Arc<MealyTable>,
    },
    StepCounter,
    StepCounterTimesK {
        k: u32,
        update: Arc<ModeTable>,
    },
}

/// A state of a [`MemoryStructure`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MemState {
    Mealy(u32),
    Step(u64),
    StepMode(u64, u32),
}

impl MemState {
    fn components(self) -> Vec<i64> {
        match self {
            MemState::Mealy(m) => vec![m as i64],
            MemState::Step(s) => vec![s as i64],
            MemState::StepMode(s, m) => vec![s as i64, m as i64],
        }
    }
}

impl MemoryStructure {
    pub fn initial(&self) -> MemState {
        match self {
            MemoryStructure::Mealy { initial, .. } => MemState::Mealy(*initial),
            MemoryStructure::StepCounter => MemState::Step(0),
            MemoryStructure::StepCounterTimesK { .. } => MemState::StepMode(0, 0),
        }
    }

    pub fn update(&self, m: MemState, e: &Edge) -> MemState {
        match (self, m) {
            (MemoryStructure::Mealy { update, .. }, MemState::Mealy(q)) => {
                MemState::Mealy(*update.get(&(q, e.clone())).unwrap_or(&q))
            }
            (MemoryStructure::StepCounter, MemState::Step(s)) => MemState::Step(s + 1),
            (MemoryStructure::StepCounterTimesK { update, .. }, MemState::StepMode(s, q)) => {
                MemState::StepMode(s + 1, *update.get(&(s, q, e.clone())).unwrap_or(&q))
            }
            _ => panic!("memory state {m:?} does not belong to {self:?}"),
        }
    }

    fn width(&self) -> usize {
        match self {
            MemoryStructure::StepCounterTimesK { .. } => 2,
            _ => 1,
        }
    }

    fn decode(&self, comps: &[i64]) -> Result<MemState, ArenaError> {
        let bad = || ArenaError::Invalid(format!("bad memory components {comps:?}"));
        let nat = |x: i64| u64::try_from(x).map_err(|_| bad());
        match (self, comps) {
            (MemoryStructure::Mealy { states, .. }, [m]) => {
                let m = u32::try_from(*m).map_err(|_| bad())?;
                if m >= *states {
                    return Err(bad());
                }
                Ok(MemState::Mealy(m))
            }
            (MemoryStructure::StepCounter, [s]) => Ok(MemState::Step(nat(*s)?)),
            (MemoryStructure::StepCounterTimesK { k, .. }, [s, m]) => {
                let m = u32::try_from(*m).map_err(|_| bad())?;
                if m >= *k {
                    return Err(bad());
                }
                Ok(MemState::StepMode(nat(*s)?, m))
            }
            _ => Err(bad()),
        }
    }
}

/// Encodes the product vertex `(v, m)` as `name@[params.., m..]`.
pub fn product_vertex(v: &VertexId, m: MemState) -> VertexId {
    v.with_params(&format!("{}@", v.name()), &m.components())
}

/// Splits a product vertex into its arena vertex and memory components.
pub fn split_product_vertex(pv: &VertexId, width: usize) -> Option<(VertexId, Vec<i64>)> {
    let name = pv.name().strip_suffix('@')?;
    let params = pv.params();
    if params.len() < width {
        return None;
    }
    let (orig, mem) = params.split_at(params.len() - width);
    Some((VertexId::new(name, orig), mem.to_vec()))
}

/// The product arena `arena ⊗ memory`, started at `(start, m0)`.
///
/// An explicit arena times a Mealy machine is explicit with
/// `|V|·|M|` vertices; every other combination is a generator.
pub fn product(arena: ArenaRef, memory: &MemoryStructure) -> Result<ArenaRef, ArenaError> {
    let m0 = memory.initial();
    let start = product_vertex(arena.start(), m0);
    let name = format!("{}*mem", arena.name());
    if let (Some(explicit), MemoryStructure::Mealy { states, .. }) = (arena.as_explicit(), memory)
    {
        let mut b = ExplicitArena::builder(name);
        for (v, owner) in explicit.vertices() {
            for q in 0..*states {
                let pv = product_vertex(v, MemState::Mealy(q));
                b.vertex(pv.clone(), owner);
                for e in explicit.edges_of(v) {
                    let q2 = memory.update(MemState::Mealy(q), e);
                    b.edge(pv.clone(), e.weight.clone(), product_vertex(&e.to, q2));
                }
            }
        }
        b.start(start);
        return Ok(Arc::new(b.build()?));
    }
    let memory = memory.clone();
    let width = memory.width();
    let generator = GeneratedArena::new(name, start, move |pv: &VertexId| {
        let (v, comps) = split_product_vertex(pv, width)
            .ok_or_else(|| ArenaError::UnknownVertex(pv.clone()))?;
        let m = memory.decode(&comps)?;
        let x = arena.expand(&v)?;
        let edges = x
            .edges
            .iter()
            .map(|e| {
                Edge::new(
                    pv.clone(),
                    e.weight.clone(),
                    product_vertex(&e.to, memory.update(m, e)),
                )
            })
            .collect();
        Ok(Expansion::new(x.owner, edges))
    });
    Ok(Arc::new(generator))
}
