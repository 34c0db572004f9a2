//! Payoff functions, quantitative objectives, and their open decompositions.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arena::{ArenaRef, Edge, Expansion, GeneratedArena};
use crate::error::{ObjectiveError, ParseError};
use crate::vertex::{Player, VertexId};
use crate::weight::{Extended, Weight};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PayoffKind {
    Total,
    Mean,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LimitMode {
    Limsup,
    Liminf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    Greater,
    GreaterEq,
}

impl Relation {
    pub fn holds(self, value: &Extended, threshold: &Extended) -> bool {
        match self {
            Relation::Greater => value > threshold,
            Relation::GreaterEq => value >= threshold,
        }
    }
}

/// Total payoff of a word.
pub fn total_payoff(word: &[Weight]) -> Weight {
    word.iter().sum()
}

/// Mean payoff of a non-empty word.
pub fn mean_payoff(word: &[Weight]) -> Result<Weight, ObjectiveError> {
    if word.is_empty() {
        return Err(ObjectiveError::EmptyMeanPayoff);
    }
    Ok(&total_payoff(word) / &Weight::from_int(word.len() as i64))
}

pub fn payoff(kind: PayoffKind, word: &[Weight]) -> Result<Weight, ObjectiveError> {
    match kind {
        PayoffKind::Total => Ok(total_payoff(word)),
        PayoffKind::Mean => mean_payoff(word),
    }
}

/// A limit objective `X̄ ▷ r` or `X̲ ▷ r`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Quantitative {
    pub kind: PayoffKind,
    pub mode: LimitMode,
    pub relation: Relation,
    pub threshold: Extended,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Objective {
    Quant(Quantitative),
    /// Every colour code `0..colours` is seen infinitely often.
    BuchiAll { colours: u32 },
}

/// Position of an objective in the Borel hierarchy and what is known about
/// the memory Player 1 needs over finitely branching arenas.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub borel: &'static str,
    pub memory: &'static str,
}

impl Objective {
    pub fn new(
        kind: PayoffKind,
        mode: LimitMode,
        relation: Relation,
        threshold: Extended,
    ) -> Result<Self, ObjectiveError> {
        if kind == PayoffKind::Mean && !threshold.is_finite() {
            return Err(ObjectiveError::InfiniteMeanThreshold);
        }
        Ok(Objective::Quant(Quantitative {
            kind,
            mode,
            relation,
            threshold,
        }))
    }

    pub fn mp_limsup_ge0() -> Self {
        Self::new(
            PayoffKind::Mean,
            LimitMode::Limsup,
            Relation::GreaterEq,
            Extended::Finite(Weight::zero()),
        )
        .unwrap()
    }

    pub fn tp_limsup_ge0() -> Self {
        Self::new(
            PayoffKind::Total,
            LimitMode::Limsup,
            Relation::GreaterEq,
            Extended::Finite(Weight::zero()),
        )
        .unwrap()
    }

    pub fn tp_limsup_inf() -> Self {
        Self::new(
            PayoffKind::Total,
            LimitMode::Limsup,
            Relation::GreaterEq,
            Extended::PosInf,
        )
        .unwrap()
    }

    pub fn tp_liminf_ge0() -> Self {
        Self::new(
            PayoffKind::Total,
            LimitMode::Liminf,
            Relation::GreaterEq,
            Extended::Finite(Weight::zero()),
        )
        .unwrap()
    }

    pub fn is_prefix_independent(&self) -> bool {
        match self {
            Objective::BuchiAll { .. } => true,
            Objective::Quant(q) => q.kind == PayoffKind::Mean || !q.threshold.is_finite(),
        }
    }

    pub fn classify(&self) -> Classification {
        use LimitMode::*;
        use PayoffKind::*;
        use Relation::*;
        let q = match self {
            Objective::BuchiAll { .. } => {
                return Classification {
                    borel: "Π⁰₂",
                    memory: "step counter sufficient; finite memory insufficient for infinitely many colours",
                }
            }
            Objective::Quant(q) => q,
        };
        let t = &q.threshold;
        let zero = Extended::Finite(Weight::zero());
        match (q.kind, q.mode, q.relation) {
            (Mean, Liminf, Greater) => Classification {
                borel: "Σ⁰₂",
                memory: "memoryless per prior work; no decomposition needed",
            },
            (Total, Liminf, Greater) if *t == Extended::NegInf => Classification {
                borel: "Σ⁰₂",
                memory: "memoryless per prior work; no decomposition needed",
            },
            (Total, Liminf, _) if t.is_finite() => Classification {
                borel: "Σ⁰₂",
                memory: "step counter plus finite memory insufficient",
            },
            (Mean, Limsup, GreaterEq) => Classification {
                borel: "Π⁰₂",
                memory: "step counter sufficient; finite memory insufficient",
            },
            (Total, Limsup, GreaterEq) if *t == Extended::PosInf => Classification {
                borel: "Π⁰₂",
                memory: "step counter sufficient; finite memory insufficient",
            },
            (Total, Limsup, GreaterEq) if t.is_finite() => Classification {
                borel: "Π⁰₂",
                memory: "step counter plus one bit sufficient; step counter or finite memory alone insufficient",
            },
            (Total, Limsup, Greater) if t.is_finite() => Classification {
                borel: "Σ⁰₃ over ℚ",
                memory: "open; over integer weights equivalent to a ≥ threshold one unit higher",
            },
            (Mean, Limsup, Greater) | (Mean, Liminf, GreaterEq) => Classification {
                borel: "Σ⁰₃",
                memory: "open",
            },
            (Total, Liminf, GreaterEq) if *t == Extended::PosInf => Classification {
                borel: "Σ⁰₃",
                memory: "open",
            },
            _ if *t == zero => Classification {
                borel: "unclassified",
                memory: "unknown",
            },
            _ => Classification {
                borel: "degenerate threshold",
                memory: "trivial",
            },
        }
    }

    /// Decides membership of `prefix · cycle^ω`.
    pub fn eval_on_lasso(&self, lasso: &Lasso) -> bool {
        match self {
            Objective::BuchiAll { colours } => (0..*colours as i64).all(|c| {
                lasso.cycle.iter().any(|w| w.to_i64() == Some(c))
            }),
            Objective::Quant(q) => {
                let value = lasso.limit(q.kind, q.mode);
                q.relation.holds(&value, &q.threshold)
            }
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::BuchiAll { colours } => write!(f, "buchi-all:{colours}"),
            Objective::Quant(q) => {
                let kind = match q.kind {
                    PayoffKind::Total => "tp",
                    PayoffKind::Mean => "mp",
                };
                let mode = match q.mode {
                    LimitMode::Limsup => "limsup",
                    LimitMode::Liminf => "liminf",
                };
                let rel = match q.relation {
                    Relation::Greater => ">",
                    Relation::GreaterEq => ">=",
                };
                write!(f, "{kind}:{mode}:{rel}:{}", q.threshold)
            }
        }
    }
}

impl FromStr for Objective {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |why: &str| ParseError::new(0, format!("invalid objective `{s}`: {why}"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        if parts.len() == 2 && parts[0] == "buchi-all" {
            let colours = parts[1].parse().map_err(|_| bad("colour count"))?;
            return Ok(Objective::BuchiAll { colours });
        }
        let [kind, mode, rel, threshold] = parts[..] else {
            return Err(bad("expected kind:mode:relation:threshold"));
        };
        let kind = match kind {
            "tp" => PayoffKind::Total,
            "mp" => PayoffKind::Mean,
            _ => return Err(bad("kind must be mp or tp")),
        };
        let mode = match mode {
            "limsup" => LimitMode::Limsup,
            "liminf" => LimitMode::Liminf,
            _ => return Err(bad("mode must be limsup or liminf")),
        };
        let relation = match rel {
            ">" => Relation::Greater,
            ">=" => Relation::GreaterEq,
            _ => return Err(bad("relation must be > or >=")),
        };
        let threshold: Extended = threshold.parse().map_err(|_| bad("threshold"))?;
        Objective::new(kind, mode, relation, threshold).map_err(|e| bad(&e.to_string()))
    }
}

/// An ultimately periodic word `prefix · cycle^ω`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lasso {
    pub prefix: Vec<Weight>,
    pub cycle: Vec<Weight>,
}

impl Lasso {
    pub fn new(prefix: Vec<Weight>, cycle: Vec<Weight>) -> Result<Self, ObjectiveError> {
        if cycle.is_empty() {
            return Err(ObjectiveError::EmptyCycle);
        }
        Ok(Lasso { prefix, cycle })
    }

    /// Exact limit of the payoff sequence over prefixes.
    pub fn limit(&self, kind: PayoffKind, mode: LimitMode) -> Extended {
        let cycle_sum = total_payoff(&self.cycle);
        match kind {
            PayoffKind::Mean => {
                Extended::Finite(&cycle_sum / &Weight::from_int(self.cycle.len() as i64))
            }
            PayoffKind::Total => match cycle_sum.signum() {
                1 => Extended::PosInf,
                -1 => Extended::NegInf,
                _ => {
                    // Partial sums repeat with period |cycle| after the prefix.
                    let mut acc = total_payoff(&self.prefix);
                    let mut seen = Vec::with_capacity(self.cycle.len());
                    for w in &self.cycle {
                        acc += w;
                        seen.push(acc.clone());
                    }
                    let pick = match mode {
                        LimitMode::Limsup => seen.into_iter().max(),
                        LimitMode::Liminf => seen.into_iter().min(),
                    };
                    Extended::Finite(pick.expect("cycle is non-empty"))
                }
            },
        }
    }
}

/// An open objective from one of the decomposition families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OpenSub {
    /// Some prefix of length `j ≥ i` has mean payoff `≥ −1/m`.
    MpSupGe0 { m: u64, i: u64 },
    /// Some prefix of length `j ≥ i` has total payoff `≥ m`.
    TpInf { m: u64, i: u64 },
    /// Some prefix of length `j ≥ m` has total payoff `≥ −1/m`.
    TpSupGe0 { m: u64 },
    /// Colour `c` occurs at some position `j ≥ i`.
    BuchiColour { c: i64, i: u64 },
}

/// Outcome of comparing two equal-length words under a prefix preorder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrefixOrder {
    /// `w1 ⪯ w2` only.
    Le,
    /// `w2 ⪯ w1` only.
    Ge,
    Both,
}

impl OpenSub {
    /// Least prefix length at which the objective can fire.
    pub fn step_index(&self) -> u64 {
        match *self {
            OpenSub::MpSupGe0 { i, .. } | OpenSub::TpInf { i, .. } | OpenSub::BuchiColour { i, .. } => i,
            OpenSub::TpSupGe0 { m } => m,
        }
    }

    pub fn is_quantitative(&self) -> bool {
        !matches!(self, OpenSub::BuchiColour { .. })
    }

    /// Whether the prefix of length `j` (ending with colour `last`, total
    /// payoff `tp`) meets the family's bound.
    pub fn fires(&self, j: u64, tp: &Weight, last: Option<&Weight>) -> bool {
        if j == 0 || j < self.step_index() {
            return false;
        }
        match *self {
            OpenSub::MpSupGe0 { m, .. } => {
                // tp / j >= -1/m  <=>  m * tp >= -j
                &(&Weight::from_int(m as i64) * tp) >= &Weight::from_int(-(j as i64))
            }
            OpenSub::TpInf { m, .. } => tp >= &Weight::from_int(m as i64),
            OpenSub::TpSupGe0 { m } => tp >= &Weight::ratio(-1, m as i64),
            OpenSub::BuchiColour { c, .. } => last.and_then(|w| w.to_i64()) == Some(c),
        }
    }

    pub fn already_satisfies(&self, word: &[Weight]) -> bool {
        let mut tp = Weight::zero();
        for (idx, w) in word.iter().enumerate() {
            tp += w;
            if self.fires(idx as u64 + 1, &tp, Some(w)) {
                return true;
            }
        }
        false
    }

    /// Score used to order unsatisfied words of equal length; `None` for
    /// the colour family, whose unsatisfied words are all equivalent.
    fn score(&self, word: &[Weight]) -> Option<Weight> {
        match self {
            OpenSub::BuchiColour { .. } => None,
            OpenSub::MpSupGe0 { .. } => mean_payoff(word).ok().or_else(|| Some(Weight::zero())),
            _ => Some(total_payoff(word)),
        }
    }

    /// `w1 ⪯ w2` iff `w2` already satisfies, or `w1` does not and scores
    /// no higher than `w2`.
    pub fn prefix_compare(&self, w1: &[Weight], w2: &[Weight]) -> Result<PrefixOrder, ObjectiveError> {
        if w1.len() != w2.len() {
            return Err(ObjectiveError::UnequalLengths(w1.len(), w2.len()));
        }
        let s1 = self.already_satisfies(w1);
        let s2 = self.already_satisfies(w2);
        let cmp = match (self.score(w1), self.score(w2)) {
            (Some(a), Some(b)) => a.cmp(&b),
            _ => Ordering::Equal,
        };
        Ok(compare_states(s1, s2, cmp))
    }
}

/// The preorder on (satisfied, score) summaries; shared by the word-level
/// comparator and by algorithms that track summaries incrementally.
pub fn compare_states(sat1: bool, sat2: bool, score_cmp: Ordering) -> PrefixOrder {
    let le = sat2 || (!sat1 && score_cmp != Ordering::Greater);
    let ge = sat1 || (!sat2 && score_cmp != Ordering::Less);
    match (le, ge) {
        (true, true) => PrefixOrder::Both,
        (true, false) => PrefixOrder::Le,
        (false, true) => PrefixOrder::Ge,
        (false, false) => unreachable!("the preorder is total"),
    }
}

impl fmt::Display for OpenSub {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpenSub::MpSupGe0 { m, i } => write!(f, "mp-sup-ge0(m={m},i={i})"),
            OpenSub::TpInf { m, i } => write!(f, "tp-inf(m={m},i={i})"),
            OpenSub::TpSupGe0 { m } => write!(f, "tp-sup-ge0(m={m})"),
            OpenSub::BuchiColour { c, i } => write!(f, "buchi-colour(c={c},i={i})"),
        }
    }
}

/// A linearly ordered family `O_1, O_2, …` whose intersection is the
/// decomposed objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    MpSupGe0,
    TpInf,
    TpSupGe0,
    BuchiAll { colours: u32 },
}

/// The `n`-th pair (0-based) of `(m, i) ∈ ℕ₊²` ordered by `m + i`, then `m`.
pub fn diagonal_pair(n: usize) -> (u64, u64) {
    let mut sum = 2u64;
    let mut rest = n as u64;
    loop {
        let width = sum - 1;
        if rest < width {
            let m = rest + 1;
            return (m, sum - m);
        }
        rest -= width;
        sum += 1;
    }
}

impl Family {
    /// Member `O_{n+1}` (0-based `n`).
    pub fn nth(&self, n: usize) -> OpenSub {
        match *self {
            Family::MpSupGe0 => {
                let (m, i) = diagonal_pair(n);
                OpenSub::MpSupGe0 { m, i }
            }
            Family::TpInf => {
                let (m, i) = diagonal_pair(n);
                OpenSub::TpInf { m, i }
            }
            Family::TpSupGe0 => OpenSub::TpSupGe0 { m: n as u64 + 1 },
            Family::BuchiAll { colours } => {
                let k = colours.max(1) as usize;
                OpenSub::BuchiColour {
                    c: (n % k) as i64,
                    i: (n / k) as u64 + 1,
                }
            }
        }
    }

    pub fn take(&self, count: usize) -> Vec<OpenSub> {
        (0..count).map(|n| self.nth(n)).collect()
    }
}

/// Why an objective has no implemented decomposition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unsupported {
    pub reason: String,
}

impl fmt::Display for Unsupported {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.reason)
    }
}

/// Open decomposition of a threshold-0 (or infinite-threshold) objective.
pub fn decompose(objective: &Objective) -> Result<Family, Unsupported> {
    let zero = Extended::Finite(Weight::zero());
    if let Objective::BuchiAll { colours } = objective {
        return Ok(Family::BuchiAll { colours: *colours });
    }
    let Objective::Quant(q) = objective else {
        unreachable!()
    };
    use LimitMode::*;
    use PayoffKind::*;
    use Relation::*;
    match (q.kind, q.mode, q.relation) {
        (Mean, Limsup, GreaterEq) if q.threshold == zero => return Ok(Family::MpSupGe0),
        (Total, Limsup, GreaterEq) if q.threshold == Extended::PosInf => return Ok(Family::TpInf),
        (Total, Limsup, GreaterEq) if q.threshold == zero => return Ok(Family::TpSupGe0),
        (Mean, Limsup, GreaterEq) | (Total, Limsup, GreaterEq) if q.threshold.is_finite() => {
            return Err(Unsupported {
                reason: "non-zero threshold; apply the threshold shift first".into(),
            })
        }
        _ => {}
    }
    let c = objective.classify();
    Err(Unsupported {
        reason: format!("{}, {}", c.borel, c.memory),
    })
}

/// Rewrites `(arena, objective)` into an equivalent pair with threshold 0.
///
/// Mean payoff subtracts the threshold from every weight; total payoff with
/// a finite threshold `r` prepends a fresh start vertex with one edge of
/// weight `−r`. With `integer_weights`, a strict total-payoff threshold `r`
/// is first rewritten as `≥ r + 1`. Infinite or already-zero thresholds are
/// returned unchanged.
pub fn shift_threshold(
    arena: ArenaRef,
    objective: &Objective,
    integer_weights: bool,
) -> Result<(ArenaRef, Objective), Unsupported> {
    let Objective::Quant(q) = objective else {
        return Ok((arena, objective.clone()));
    };
    let mut q = q.clone();
    if integer_weights && q.kind == PayoffKind::Total && q.relation == Relation::Greater {
        if let Extended::Finite(r) = &q.threshold {
            if !r.is_integer() {
                return Err(Unsupported {
                    reason: "strict threshold must be an integer over integer weights".into(),
                });
            }
            q.threshold = Extended::Finite(r + &Weight::one());
            q.relation = Relation::GreaterEq;
        }
    }
    let Extended::Finite(r) = q.threshold.clone() else {
        return Ok((arena, Objective::Quant(q)));
    };
    if r.is_zero() {
        return Ok((arena, Objective::Quant(q)));
    }
    q.threshold = Extended::Finite(Weight::zero());
    let name = format!("{}-shifted", arena.name());
    let shifted: ArenaRef = match q.kind {
        PayoffKind::Mean => {
            let inner = arena.clone();
            std::sync::Arc::new(GeneratedArena::new(name, arena.start().clone(), move |v: &VertexId| {
                let x = inner.expand(v)?;
                let edges = x
                    .edges
                    .iter()
                    .map(|e| Edge::new(e.from.clone(), &e.weight - &r, e.to.clone()))
                    .collect();
                Ok(Expansion::new(x.owner, edges))
            }))
        }
        PayoffKind::Total => {
            let entry = VertexId::named("shift_entry");
            let inner = arena.clone();
            let target = arena.start().clone();
            let neg = -&r;
            let entry2 = entry.clone();
            std::sync::Arc::new(GeneratedArena::new(name, entry, move |v: &VertexId| {
                if *v == entry2 {
                    return Ok(Expansion::new(
                        Player::One,
                        vec![Edge::new(v.clone(), neg.clone(), target.clone())],
                    ));
                }
                Ok((*inner.expand(v)?).clone())
            }))
        }
    };
    Ok((shifted, Objective::Quant(q)))
}
