//! Two-player quantitative games of infinite duration on finitely branching
//! arenas: arenas and memory structures, total- and mean-payoff objectives,
//! step-counter strategies, lower-bound adversaries and constructive
//! strategy synthesis, with checkable certificates for every claim.

pub mod adversary;
pub mod arena;
pub mod certificate;
pub mod engine;
pub mod error;
pub mod format;
pub mod history;
pub mod memory;
pub mod objective;
pub mod strategy;
pub mod synthesis;
pub mod vertex;
pub mod weight;
pub mod zoo;

pub use arena::{Arena, ArenaRef, Edge, Expansion, ExplicitArena, GeneratedArena};
pub use error::{ArenaError, GameError, ObjectiveError, ParseError, Result, StrategyError};
pub use history::History;
pub use objective::{Family, Lasso, Objective, OpenSub, PrefixOrder};
pub use strategy::{Fallback, Memory, Script, ScriptMem, Strategy};
pub use vertex::{Player, VertexId};
pub use weight::{Extended, Weight};
