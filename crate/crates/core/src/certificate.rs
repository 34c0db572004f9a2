//! Finite, independently checkable evidence about infinite plays.

use serde::{Deserialize, Serialize};

use crate::arena::{Arena, Edge};
use crate::engine::{koenig_bound, KoenigOutcome};
use crate::history::History;
use crate::objective::OpenSub;
use crate::strategy::Strategy;
use crate::vertex::{Player, VertexId};
use crate::weight::Weight;

pub const SCHEMA: &str = "qgame-cert/1";

/// Bound on how far total payoff may rise inside a round above the
/// payoff at the round's start.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Elevation {
    Constant(Weight),
    /// Round `k` (0-based within the certificate) may rise by at most
    /// `first + k + offset`; used where round `i` offers a spike of `i`.
    RoundIndex { first: i64, offset: i64 },
}

impl Elevation {
    fn bound(&self, round: usize) -> Weight {
        match self {
            Elevation::Constant(b) => b.clone(),
            Elevation::RoundIndex { first, offset } => Weight::from_int(first + round as i64 + offset),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Claim {
    /// The play reaches a sink with total payoff `tp`.
    SinkPayoff { tp: Weight },
    /// The play reaches a sink with total payoff `tp < threshold`.
    EarlyExitNegative { tp: Weight, threshold: Weight },
    /// Every history of length `level` consistent with Player 1's strategy
    /// already satisfies `open_sub`, and some shorter one does not.
    KoenigBound { open_sub: OpenSub, level: u64 },
    /// A list of `(open_sub, level)` pairs, each a König bound.
    LevelSatisfaction { levels: Vec<(OpenSub, u64)> },
    /// Total payoff tends to −∞: rounds start at `round_starts` (step
    /// indices), each round loses at least `decrease`, and within round `k`
    /// the payoff never exceeds its start plus the elevation bound.
    Divergence {
        round_starts: Vec<usize>,
        decrease: Weight,
        elevation: Elevation,
        /// Two rounds whose Player 1 memory states coincide.
        memory_cycle: Option<(usize, usize)>,
        /// Optional bound on the mean payoff at every round start after the
        /// first.
        mean_bound: Option<Weight>,
    },
    /// Total payoff stays at most `bound` at every step of the play.
    Stagnation { bound: Weight },
    /// From step `from_step` on, at most one of `colours` occurs.
    ColourStarvation { from_step: usize, colours: Vec<i64> },
}

impl Claim {
    pub fn name(&self) -> &'static str {
        match self {
            Claim::SinkPayoff { .. } => "sink_payoff",
            Claim::EarlyExitNegative { .. } => "early_exit_negative",
            Claim::KoenigBound { .. } => "koenig_bound",
            Claim::LevelSatisfaction { .. } => "level_satisfaction",
            Claim::Divergence { .. } => "divergence",
            Claim::Stagnation { .. } => "stagnation",
            Claim::ColourStarvation { .. } => "colour_starvation",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: String,
    /// Arena source (file path or `zoo:` URI).
    pub arena: String,
    /// Player 1 strategy in strategy-file text.
    pub p1: Option<String>,
    pub origin: VertexId,
    /// The witnessing play, when the claim is about one play.
    pub play: Vec<Edge>,
    pub claim: Claim,
    /// Set when a truncation limited the construction.
    #[serde(default)]
    pub partial: bool,
    /// Free-form producer notes; never consulted by the checker.
    #[serde(default)]
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn new(arena: impl Into<String>, origin: VertexId, play: Vec<Edge>, claim: Claim) -> Self {
        Certificate {
            schema: SCHEMA.to_string(),
            arena: arena.into(),
            p1: None,
            origin,
            play,
            claim,
            partial: false,
            notes: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// What a certificate is checked against.
pub struct CheckContext<'a> {
    pub arena: &'a dyn Arena,
    pub p1: Option<&'a Strategy>,
    pub depth_cap: usize,
    pub node_cap: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub accepted: bool,
    pub diagnostics: Vec<String>,
}

impl CheckReport {
    fn reject(mut self, why: impl Into<String>) -> Self {
        self.accepted = false;
        self.diagnostics.push(why.into());
        self
    }
}

/// Re-derives every quantity the certificate claims.
pub fn check_certificate(cert: &Certificate, ctx: &CheckContext<'_>) -> CheckReport {
    let report = CheckReport {
        accepted: true,
        diagnostics: Vec::new(),
    };
    if cert.schema != SCHEMA {
        return report.reject(format!("unknown schema `{}`", cert.schema));
    }
    let history = match History::from_edges(cert.origin.clone(), cert.play.clone()) {
        Ok(h) => h,
        Err(e) => return report.reject(format!("play is not contiguous: {e}")),
    };
    if let Err(e) = history.check_in(ctx.arena) {
        return report.reject(format!("play leaves the arena: {e}"));
    }
    if let Some(p1) = ctx.p1 {
        if !p1.consistent(ctx.arena, Player::One, &history) {
            return report.reject("play is not consistent with Player 1's strategy");
        }
    }
    let tps: Vec<Weight> = history
        .edges()
        .iter()
        .scan(Weight::zero(), |acc, e| {
            *acc += &e.weight;
            Some(acc.clone())
        })
        .collect();
    let tp_at = |step: usize| if step == 0 { Weight::zero() } else { tps[step - 1].clone() };
    let ends_in_sink = ctx.arena.expand(history.to()).map(|x| x.is_sink()).unwrap_or(false);

    match &cert.claim {
        Claim::SinkPayoff { tp } => {
            if !ends_in_sink {
                return report.reject("play does not end in a sink");
            }
            if tp_at(history.len()) != *tp {
                return report.reject(format!("final payoff is {}, not {tp}", tp_at(history.len())));
            }
            report
        }
        Claim::EarlyExitNegative { tp, threshold } => {
            if !ends_in_sink {
                return report.reject("play does not end in a sink");
            }
            let fin = tp_at(history.len());
            if fin != *tp {
                return report.reject(format!("final payoff is {fin}, not {tp}"));
            }
            if fin >= *threshold {
                return report.reject(format!("final payoff {fin} is not below {threshold}"));
            }
            report
        }
        Claim::KoenigBound { open_sub, level } => check_levels(ctx, &cert.origin, &[(*open_sub, *level)], report),
        Claim::LevelSatisfaction { levels } => check_levels(ctx, &cert.origin, levels, report),
        Claim::Divergence {
            round_starts,
            decrease,
            elevation,
            memory_cycle,
            mean_bound,
        } => {
            if !decrease.is_positive() || *decrease < Weight::one() {
                return report.reject(format!("per-round decrease {decrease} is below 1"));
            }
            if round_starts.len() < 2 {
                return report.reject("need at least two round starts");
            }
            if round_starts.windows(2).any(|w| w[0] >= w[1]) || *round_starts.last().unwrap() > history.len() {
                return report.reject("round starts must increase within the play");
            }
            if ends_in_sink {
                return report.reject("play exits to a sink");
            }
            for (k, w) in round_starts.windows(2).enumerate() {
                let start = tp_at(w[0]);
                let end = tp_at(w[1]);
                if &end - &start > -decrease.clone() {
                    return report.reject(format!(
                        "round {k} (steps {}..{}) changes payoff by {}, more than -{decrease}",
                        w[0],
                        w[1],
                        &end - &start
                    ));
                }
                let cap = &start + &elevation.bound(k);
                // A growing bound only says something when each round's peak stays negative.
                if matches!(elevation, Elevation::RoundIndex { .. }) && !cap.is_negative() {
                    return report.reject(format!("round {k} may rise to {cap}, which is not below 0"));
                }
                if let Some(step) = (w[0]..=w[1]).find(|&s| tp_at(s) > cap) {
                    return report.reject(format!(
                        "round {k} rises to {} at step {step}, above {cap}",
                        tp_at(step)
                    ));
                }
            }
            if let Some(mb) = mean_bound {
                for &s in &round_starts[1..] {
                    let mp = &tp_at(s) / &Weight::from_int(s as i64);
                    if mp > *mb {
                        return report.reject(format!("mean payoff {mp} at step {s} exceeds {mb}"));
                    }
                }
            }
            if let Some((a, b)) = memory_cycle {
                let Some(p1) = ctx.p1 else {
                    return report.reject("memory cycle needs Player 1's strategy");
                };
                if a >= b || *b >= round_starts.len() {
                    return report.reject("memory cycle indices out of range");
                }
                let ma = p1.memory_after(&history.prefix(round_starts[*a]));
                let mb = p1.memory_after(&history.prefix(round_starts[*b]));
                if ma != mb {
                    return report.reject(format!("memory at round {a} is {ma}, at round {b} is {mb}"));
                }
            }
            report
        }
        Claim::Stagnation { bound } => {
            if !bound.is_negative() {
                return report.reject("stagnation bound must be negative");
            }
            if let Some(step) = (1..=history.len()).find(|&s| tp_at(s) > *bound) {
                return report.reject(format!("payoff {} at step {step} exceeds {bound}", tp_at(step)));
            }
            report
        }
        Claim::ColourStarvation { from_step, colours } => {
            let seen: std::collections::BTreeSet<i64> = history
                .edges()
                .iter()
                .skip(*from_step)
                .filter_map(|e| e.weight.to_i64())
                .filter(|c| colours.contains(c))
                .collect();
            if seen.len() > 1 {
                return report.reject(format!("colours {seen:?} all occur after step {from_step}"));
            }
            report
        }
    }
}

fn check_levels(
    ctx: &CheckContext<'_>,
    origin: &VertexId,
    levels: &[(OpenSub, u64)],
    report: CheckReport,
) -> CheckReport {
    let Some(p1) = ctx.p1 else {
        return report.reject("level claims need Player 1's strategy");
    };
    for (sub, level) in levels {
        let depth = ctx.depth_cap.max(*level as usize);
        match koenig_bound(ctx.arena, origin, p1, Player::One, sub, depth, ctx.node_cap) {
            Ok(KoenigOutcome::Bound(s)) if s == *level => {}
            Ok(other) => {
                return report.reject(format!("{sub}: claimed level {level}, recomputed {other:?}"))
            }
            Err(e) => return report.reject(format!("{sub}: {e}")),
        }
    }
    report
}
