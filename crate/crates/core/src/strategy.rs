//! Deterministic strategies: tables, Mealy machines, step counters,
//! scripted callbacks, and compositions of these.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::arena::{Arena, Edge};
use crate::error::{GameError, StrategyError};
use crate::history::History;
use crate::memory::{MealyTable, ModeTable};
use crate::vertex::{Player, VertexId};

/// What a table strategy does where its table has no entry (or past its
/// horizon).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Fallback {
    /// Take the first edge in the arena's edge order.
    #[default]
    FirstEdge,
    Error,
}

pub type ScriptMem = SmallVec<[i64; 4]>;

/// A closed-form strategy whose memory is a short vector of integers.
///
/// Implementations must be pure: `choose` and `update` may depend only on
/// their arguments.
pub trait Script: Send + Sync {
    fn name(&self) -> &str;
    fn initial(&self, origin: &VertexId) -> ScriptMem;
    fn update(&self, mem: &ScriptMem, e: &Edge) -> ScriptMem;
    fn choose(&self, arena: &dyn Arena, v: &VertexId, mem: &ScriptMem) -> Result<Edge, StrategyError>;

    /// All memory states, when the script is a finite-memory strategy.
    fn states(&self) -> Option<Vec<ScriptMem>> {
        None
    }

    /// Whether the memory is a function of the history length alone.
    fn is_step_counter(&self) -> bool {
        false
    }

    /// Parameters that, with the name, identify the script in files.
    fn params(&self) -> Vec<(String, String)> {
        Vec::new()
    }
}

/// Memory state of any [`Strategy`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Memory {
    Unit,
    State(u32),
    Step(u64),
    StepMode(u64, u32),
    Script(ScriptMem),
    Switched {
        step: u64,
        prefix: Box<Memory>,
        tail: Box<Memory>,
    },
}

impl fmt::Display for Memory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Memory::Unit => f.write_str("-"),
            Memory::State(m) => write!(f, "{m}"),
            Memory::Step(s) => write!(f, "{s}"),
            Memory::StepMode(s, m) => write!(f, "{s}:{m}"),
            Memory::Script(xs) => {
                let parts: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", parts.join(":"))
            }
            Memory::Switched { step, prefix, tail } => write!(f, "{step}/{prefix}/{tail}"),
        }
    }
}

#[derive(Clone)]
pub enum Strategy {
    Memoryless {
        name: String,
        table: BTreeMap<VertexId, Edge>,
        fallback: Fallback,
    },
    FiniteMemory {
        name: String,
        states: u32,
        initial: u32,
        update: Arc<MealyTable>,
        table: BTreeMap<(VertexId, u32), Edge>,
        fallback: Fallback,
    },
    StepCounter {
        name: String,
        horizon: u64,
        table: BTreeMap<(VertexId, u64), Edge>,
        fallback: Fallback,
    },
    /// Step counter with `k` extra modes; mode updates missing from
    /// `update` keep the mode.
    StepCounterPlusK {
        name: String,
        k: u32,
        horizon: u64,
        table: BTreeMap<(VertexId, u64, u32), Edge>,
        update: Arc<ModeTable>,
        fallback: Fallback,
    },
    Scripted(Arc<dyn Script>),
    /// Plays `prefix` for the first `switch_at` steps and `tail` afterwards.
    /// The tail's memory follows the whole history from the origin.
    Switched {
        name: String,
        prefix: Box<Strategy>,
        switch_at: u64,
        tail: Box<Strategy>,
    },
}

impl fmt::Debug for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Strategy({} {})", self.kind(), self.name())
    }
}

fn lookup_or_fallback(
    arena: &dyn Arena,
    v: &VertexId,
    found: Option<&Edge>,
    fallback: Fallback,
    past_horizon: Option<(u64, u64)>,
) -> Result<Edge, StrategyError> {
    if let Some(e) = found {
        if &e.from != v {
            return Err(StrategyError::ForeignEdge { vertex: v.clone() });
        }
        return Ok(e.clone());
    }
    let x = arena.expand(v)?;
    if x.edges.len() == 1 {
        return Ok(x.edges[0].clone());
    }
    match (fallback, past_horizon) {
        (Fallback::FirstEdge, _) => Ok(x.edges[0].clone()),
        (Fallback::Error, Some((step, horizon))) => Err(StrategyError::HorizonExceeded {
            vertex: v.clone(),
            step,
            horizon,
        }),
        (Fallback::Error, None) => Err(StrategyError::NoMove(v.clone())),
    }
}

impl Strategy {
    /// Always takes the first edge.
    pub fn first_edge(name: impl Into<String>) -> Self {
        Strategy::Memoryless {
            name: name.into(),
            table: BTreeMap::new(),
            fallback: Fallback::FirstEdge,
        }
    }

    pub fn memoryless(name: impl Into<String>, table: BTreeMap<VertexId, Edge>) -> Self {
        Strategy::Memoryless {
            name: name.into(),
            table,
            fallback: Fallback::Error,
        }
    }

    pub fn scripted(script: impl Script + 'static) -> Self {
        Strategy::Scripted(Arc::new(script))
    }

    pub fn name(&self) -> &str {
        match self {
            Strategy::Memoryless { name, .. }
            | Strategy::FiniteMemory { name, .. }
            | Strategy::StepCounter { name, .. }
            | Strategy::StepCounterPlusK { name, .. }
            | Strategy::Switched { name, .. } => name,
            Strategy::Scripted(s) => s.name(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Strategy::Memoryless { .. } => "memoryless",
            Strategy::FiniteMemory { .. } => "fm",
            Strategy::StepCounter { .. } => "sc",
            Strategy::StepCounterPlusK { .. } => "sc+k",
            Strategy::Scripted(_) => "script",
            Strategy::Switched { .. } => "switched",
        }
    }

    pub fn is_step_counter(&self) -> bool {
        match self {
            Strategy::Memoryless { .. } | Strategy::StepCounter { .. } => true,
            Strategy::Scripted(s) => s.is_step_counter(),
            _ => false,
        }
    }

    pub fn initial_memory(&self, origin: &VertexId) -> Memory {
        match self {
            Strategy::Memoryless { .. } => Memory::Unit,
            Strategy::FiniteMemory { initial, .. } => Memory::State(*initial),
            Strategy::StepCounter { .. } => Memory::Step(0),
            Strategy::StepCounterPlusK { .. } => Memory::StepMode(0, 0),
            Strategy::Scripted(s) => Memory::Script(s.initial(origin)),
            Strategy::Switched { prefix, tail, .. } => Memory::Switched {
                step: 0,
                prefix: Box::new(prefix.initial_memory(origin)),
                tail: Box::new(tail.initial_memory(origin)),
            },
        }
    }

    pub fn update(&self, mem: &Memory, e: &Edge) -> Memory {
        match (self, mem) {
            (Strategy::Memoryless { .. }, Memory::Unit) => Memory::Unit,
            (Strategy::FiniteMemory { update, .. }, Memory::State(q)) => {
                Memory::State(*update.get(&(*q, e.clone())).unwrap_or(q))
            }
            (Strategy::StepCounter { .. }, Memory::Step(s)) => Memory::Step(s + 1),
            (Strategy::StepCounterPlusK { update, .. }, Memory::StepMode(s, q)) => {
                Memory::StepMode(s + 1, *update.get(&(*s, *q, e.clone())).unwrap_or(q))
            }
            (Strategy::Scripted(script), Memory::Script(m)) => Memory::Script(script.update(m, e)),
            (
                Strategy::Switched {
                    prefix: ps,
                    switch_at,
                    tail: ts,
                    ..
                },
                Memory::Switched { step, prefix, tail },
            ) => {
                let step = step + 1;
                let prefix = if step < *switch_at {
                    ps.update(prefix, e)
                } else {
                    Memory::Unit
                };
                Memory::Switched {
                    step,
                    prefix: Box::new(prefix),
                    tail: Box::new(ts.update(tail, e)),
                }
            }
            _ => panic!("memory {mem} does not belong to strategy {}", self.name()),
        }
    }

    /// The move at `v` in memory state `mem`.
    pub fn choose(&self, arena: &dyn Arena, v: &VertexId, mem: &Memory) -> Result<Edge, StrategyError> {
        match (self, mem) {
            (Strategy::Memoryless { table, fallback, .. }, _) => {
                lookup_or_fallback(arena, v, table.get(v), *fallback, None)
            }
            (Strategy::FiniteMemory { table, fallback, .. }, Memory::State(q)) => {
                lookup_or_fallback(arena, v, table.get(&(v.clone(), *q)), *fallback, None)
            }
            (
                Strategy::StepCounter {
                    horizon,
                    table,
                    fallback,
                    ..
                },
                Memory::Step(s),
            ) => {
                let past = (*s >= *horizon).then_some((*s, *horizon));
                let found = if past.is_none() {
                    table.get(&(v.clone(), *s))
                } else {
                    None
                };
                lookup_or_fallback(arena, v, found, *fallback, past)
            }
            (
                Strategy::StepCounterPlusK {
                    horizon,
                    table,
                    fallback,
                    ..
                },
                Memory::StepMode(s, q),
            ) => {
                let past = (*s >= *horizon).then_some((*s, *horizon));
                let found = if past.is_none() {
                    table.get(&(v.clone(), *s, *q))
                } else {
                    None
                };
                lookup_or_fallback(arena, v, found, *fallback, past)
            }
            (Strategy::Scripted(script), Memory::Script(m)) => {
                let e = script.choose(arena, v, m)?;
                if &e.from != v {
                    return Err(StrategyError::ForeignEdge { vertex: v.clone() });
                }
                Ok(e)
            }
            (
                Strategy::Switched {
                    prefix: ps,
                    switch_at,
                    tail: ts,
                    ..
                },
                Memory::Switched { step, prefix, tail },
            ) => {
                if step < switch_at {
                    ps.choose(arena, v, prefix)
                } else {
                    ts.choose(arena, v, tail)
                }
            }
            _ => panic!("memory {mem} does not belong to strategy {}", self.name()),
        }
    }

    /// Memory after reading `history` from its origin.
    pub fn memory_after(&self, history: &History) -> Memory {
        let mut mem = self.initial_memory(history.origin());
        for e in history.edges() {
            mem = self.update(&mem, e);
        }
        mem
    }

    /// The move after `history`.
    pub fn decide(&self, arena: &dyn Arena, history: &History) -> Result<Edge, StrategyError> {
        self.choose(arena, history.to(), &self.memory_after(history))
    }

    /// Whether every move of `history` taken at a vertex of `player` agrees
    /// with this strategy.
    pub fn consistent(&self, arena: &dyn Arena, player: Player, history: &History) -> bool {
        let mut mem = self.initial_memory(history.origin());
        for e in history.edges() {
            match arena.owner(&e.from) {
                Ok(owner) if owner == player => match self.choose(arena, &e.from, &mem) {
                    Ok(chosen) if chosen == *e => {}
                    _ => return false,
                },
                Ok(_) => {}
                Err(_) => return false,
            }
            mem = self.update(&mem, e);
        }
        true
    }

    /// Memory states of a finite-memory strategy, or `None` when the
    /// memory is unbounded.
    pub fn fm_states(&self) -> Option<Vec<Memory>> {
        match self {
            Strategy::Memoryless { .. } => Some(vec![Memory::Unit]),
            Strategy::FiniteMemory { states, .. } => Some((0..*states).map(Memory::State).collect()),
            Strategy::Scripted(s) => s
                .states()
                .map(|xs| xs.into_iter().map(Memory::Script).collect()),
            _ => None,
        }
    }

    /// Number of memory states for finite-memory strategies.
    pub fn memory_bound(&self) -> Option<usize> {
        self.fm_states().map(|s| s.len())
    }
}

/// Collapses a step-counter (× K) strategy to a finite-memory one using a
/// step-count map `n_v`, valid on arenas that encode the step count.
pub fn collapse_sc_fm(
    strategy: &Strategy,
    n_map: &BTreeMap<VertexId, u64>,
) -> Result<Strategy, GameError> {
    let n_of = |v: &VertexId| {
        n_map
            .get(v)
            .copied()
            .ok_or_else(|| StrategyError::MissingStepCount(v.clone()))
    };
    match strategy {
        Strategy::StepCounter {
            name,
            table,
            fallback,
            ..
        } => {
            let mut out = BTreeMap::new();
            for ((v, s), e) in table {
                if n_of(v)? == *s {
                    out.insert(v.clone(), e.clone());
                }
            }
            Ok(Strategy::Memoryless {
                name: format!("{name}/collapsed"),
                table: out,
                fallback: *fallback,
            })
        }
        Strategy::StepCounterPlusK {
            name,
            k,
            table,
            update,
            fallback,
            ..
        } => {
            let mut out = BTreeMap::new();
            for ((v, s, m), e) in table {
                if n_of(v)? == *s {
                    out.insert((v.clone(), *m), e.clone());
                }
            }
            let mut mealy = MealyTable::new();
            for ((s, m, e), m2) in update.iter() {
                if n_of(&e.from)? == *s {
                    mealy.insert((*m, e.clone()), *m2);
                }
            }
            Ok(Strategy::FiniteMemory {
                name: format!("{name}/collapsed"),
                states: *k,
                initial: 0,
                update: Arc::new(mealy),
                table: out,
                fallback: *fallback,
            })
        }
        other => Err(StrategyError::WrongKind(
            other.name().to_string(),
            "collapse needs a step-counter table".into(),
        )
        .into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::ExplicitArena;

    fn v(n: &str) -> VertexId {
        VertexId::named(n)
    }

    fn two_loops() -> ExplicitArena {
        let mut b = ExplicitArena::builder("two");
        b.vertex(v("a"), Player::One)
            .vertex(v("b"), Player::Two)
            .edge(v("a"), 0, v("a"))
            .edge(v("a"), 1, v("b"))
            .edge(v("b"), -1, v("a"))
            .start(v("a"));
        b.build().unwrap()
    }

    #[test]
    fn memoryless_lookup() {
        let a = two_loops();
        let e = Edge::new(v("a"), 1, v("b"));
        let s = Strategy::memoryless("go", [(v("a"), e.clone())].into());
        let h = History::from_edges(v("a"), vec![Edge::new(v("a"), 0, v("a"))]).unwrap();
        assert_eq!(s.decide(&a, &h).unwrap(), e);
        assert!(s.consistent(&a, Player::One, &History::empty(v("a"))));
        assert!(!s.consistent(&a, Player::One, &h));
    }

    #[test]
    fn step_counter_fallback() {
        let a = two_loops();
        let first = Strategy::StepCounter {
            name: "sc".into(),
            horizon: 2,
            table: BTreeMap::new(),
            fallback: Fallback::FirstEdge,
        };
        let loop_e = Edge::new(v("a"), 0, v("a"));
        let h = History::from_edges(v("a"), vec![loop_e.clone(); 5]).unwrap();
        assert_eq!(first.decide(&a, &h).unwrap(), loop_e);
        let strict = Strategy::StepCounter {
            name: "sc".into(),
            horizon: 2,
            table: BTreeMap::new(),
            fallback: Fallback::Error,
        };
        assert!(matches!(
            strict.decide(&a, &h),
            Err(StrategyError::HorizonExceeded { step: 5, horizon: 2, .. })
        ));
    }

    #[test]
    fn switched_hands_over() {
        let a = two_loops();
        let stay = Edge::new(v("a"), 0, v("a"));
        let go = Edge::new(v("a"), 1, v("b"));
        let s = Strategy::Switched {
            name: "sw".into(),
            prefix: Box::new(Strategy::memoryless("stay", [(v("a"), stay.clone())].into())),
            switch_at: 2,
            tail: Box::new(Strategy::memoryless("go", [(v("a"), go.clone())].into())),
        };
        let mut h = History::empty(v("a"));
        assert_eq!(s.decide(&a, &h).unwrap(), stay);
        h.push(stay.clone()).unwrap();
        assert_eq!(s.decide(&a, &h).unwrap(), stay);
        h.push(stay).unwrap();
        assert_eq!(s.decide(&a, &h).unwrap(), go);
    }
}
