use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arena::{Arena, Edge};
use crate::error::ArenaError;
use crate::vertex::VertexId;
use crate::weight::Weight;

/// A finite contiguous edge sequence from `origin`. The empty history of a
/// vertex is represented by an empty edge list.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct History {
    origin: VertexId,
    edges: Vec<Edge>,
}

impl History {
    pub fn empty(origin: VertexId) -> Self {
        History {
            origin,
            edges: Vec::new(),
        }
    }

    /// Builds a history, checking contiguity.
    pub fn from_edges(origin: VertexId, edges: Vec<Edge>) -> Result<Self, ArenaError> {
        let mut at = &origin;
        for e in &edges {
            if &e.from != at {
                return Err(ArenaError::Invalid(format!(
                    "edge `{e}` does not continue from `{at}`"
                )));
            }
            at = &e.to;
        }
        Ok(History { origin, edges })
    }

    pub fn push(&mut self, e: Edge) -> Result<(), ArenaError> {
        if e.from != *self.to() {
            return Err(ArenaError::Invalid(format!(
                "edge `{e}` does not continue from `{}`",
                self.to()
            )));
        }
        self.edges.push(e);
        Ok(())
    }

    pub fn extended(&self, e: Edge) -> Result<Self, ArenaError> {
        let mut h = self.clone();
        h.push(e)?;
        Ok(h)
    }

    pub fn origin(&self) -> &VertexId {
        &self.origin
    }

    pub fn to(&self) -> &VertexId {
        self.edges.last().map(|e| &e.to).unwrap_or(&self.origin)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn colours(&self) -> Vec<Weight> {
        self.edges.iter().map(|e| e.weight.clone()).collect()
    }

    pub fn total_payoff(&self) -> Weight {
        self.edges.iter().map(|e| &e.weight).sum()
    }

    pub fn prefix(&self, len: usize) -> History {
        History {
            origin: self.origin.clone(),
            edges: self.edges[..len].to_vec(),
        }
    }

    /// Checks that every edge belongs to `arena`.
    pub fn check_in(&self, arena: &dyn Arena) -> Result<(), ArenaError> {
        for e in &self.edges {
            let x = arena.expand(&e.from)?;
            if !x.edges.contains(e) {
                return Err(ArenaError::Invalid(format!("edge `{e}` is not in the arena")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.origin)?;
        for e in &self.edges {
            write!(f, " -({})-> {}", e.weight, e.to)?;
        }
        Ok(())
    }
}

impl fmt::Debug for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contiguity_enforced() {
        let a = VertexId::named("a");
        let b = VertexId::named("b");
        let ok = History::from_edges(
            a.clone(),
            vec![Edge::new(a.clone(), 1, b.clone()), Edge::new(b.clone(), -3, a.clone())],
        )
        .unwrap();
        assert_eq!(ok.total_payoff(), Weight::from_int(-2));
        assert_eq!(ok.to(), &a);
        assert!(History::from_edges(a.clone(), vec![Edge::new(b.clone(), 0, a.clone())]).is_err());
        let empty = History::empty(b.clone());
        assert_eq!(empty.to(), &b);
        assert_eq!(empty.len(), 0);
    }
}
