//! Player 2 counterstrategies against restricted Player 1 strategies, each
//! returned with a certificate that `check_certificate` accepts.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use smallvec::smallvec;
use thiserror::Error;

use crate::arena::{Arena, Edge};
use crate::certificate::{check_certificate, CheckContext, Certificate, Claim, Elevation};
use crate::engine::{play, PlayRecord};
use crate::error::{GameError, StrategyError};
use crate::format::write_strategy;
use crate::history::History;
use crate::strategy::{Memory, Script, ScriptMem, Strategy};
use crate::vertex::{Player, VertexId};
use crate::weight::Weight;
use crate::zoo::{self, a1, a2, a3, a4, bit, buchi, edge_to, first_edge};

#[derive(Debug, Error)]
pub enum AdversaryError {
    #[error("strategy `{0}` is not applicable: {1}")]
    NotApplicable(String, String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("no monochromatic index set within window {window} ({evaluations} labels computed); enlarge the window")]
    NoCliqueFound { window: i64, evaluations: usize },
    #[error("constructed certificate failed its own check: {0}")]
    SelfCheck(String),
    #[error(transparent)]
    Game(#[from] GameError),
}

impl From<StrategyError> for AdversaryError {
    fn from(e: StrategyError) -> Self {
        AdversaryError::Game(e.into())
    }
}

impl From<crate::error::ArenaError> for AdversaryError {
    fn from(e: crate::error::ArenaError) -> Self {
        AdversaryError::Game(e.into())
    }
}

type AResult<T> = Result<T, AdversaryError>;

/// Index plan of the delay-gadget adversary: enter at `t[entry]`, then
/// route each delay from `t[routing[a]]` to `t[routing[a+1]]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryPlan {
    pub entry: i64,
    pub routing: Vec<i64>,
    pub clique_found: bool,
    pub window: i64,
    pub label_evaluations: usize,
}

/// Exit decision per memory state at `t[i]` and the memory map across the
/// gadget path `t[i] ⇝ t[i+j]`, both indexed by position in the
/// strategy's state list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RamseyLabel {
    pub exit_profile: Vec<bool>,
    pub gadget_update: Vec<usize>,
}

/// A counterstrategy together with the play it produces and its evidence.
#[derive(Debug)]
pub struct Defeat {
    pub p2: Strategy,
    pub play: PlayRecord,
    pub certificate: Certificate,
    pub plan: Option<AdversaryPlan>,
}

fn finish(
    arena: &dyn Arena,
    source: &str,
    entry: &str,
    sigma: &Strategy,
    p2: Strategy,
    record: PlayRecord,
    claim: Claim,
    partial: bool,
    notes: Vec<String>,
) -> AResult<Defeat> {
    let mut cert = Certificate::new(source, record.origin.clone(), record.edges.clone(), claim);
    cert.p1 = write_strategy(sigma, Some(entry)).ok();
    cert.partial = partial;
    cert.notes = notes;
    let ctx = CheckContext {
        arena,
        p1: Some(sigma),
        depth_cap: 0,
        node_cap: 0,
    };
    let report = check_certificate(&cert, &ctx);
    if !report.accepted {
        return Err(AdversaryError::SelfCheck(report.diagnostics.join("; ")));
    }
    Ok(Defeat {
        p2,
        play: record,
        certificate: cert,
        plan: None,
    })
}

fn states_of(sigma: &Strategy) -> AResult<Vec<Memory>> {
    sigma.fm_states().ok_or_else(|| {
        AdversaryError::NotApplicable(sigma.name().to_string(), "needs a finite-memory strategy".into())
    })
}

fn require_step_counter(sigma: &Strategy) -> AResult<()> {
    if sigma.is_step_counter() {
        Ok(())
    } else {
        Err(AdversaryError::NotApplicable(
            sigma.name().to_string(),
            format!("needs a step-counter strategy, got kind `{}`", sigma.kind()),
        ))
    }
}

fn first_repeat(mems: &[Memory]) -> Option<(usize, usize)> {
    for b in 0..mems.len() {
        if let Some(a) = mems[..b].iter().position(|m| *m == mems[b]) {
            return Some((a, b));
        }
    }
    None
}

fn round_starts_at(record: &PlayRecord, is_start: impl Fn(&VertexId) -> bool) -> Vec<usize> {
    (0..=record.edges.len())
        .filter(|&s| is_start(record.vertex_at(s)))
        .collect()
}

fn memory_before(sigma: &Strategy, record: &PlayRecord, step: usize) -> Memory {
    if step == 0 {
        sigma.initial_memory(&record.origin)
    } else {
        record.mem1[step - 1].clone()
    }
}

// ---------------------------------------------------------------------------
// Outbid arenas.

/// Which outbid arena the matching adversary plays on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatchTarget {
    A1Prime { b: i64 },
    A2,
}

/// Bids `bids[r]` in round `r` of the repeated outbid arena.
#[derive(Clone, Debug)]
struct BidPlan {
    bids: Vec<i64>,
}

impl Script for BidPlan {
    fn name(&self) -> &str {
        "bid_plan"
    }

    fn initial(&self, _: &VertexId) -> ScriptMem {
        smallvec![0]
    }

    fn update(&self, mem: &ScriptMem, e: &Edge) -> ScriptMem {
        if e.from.is("t") {
            smallvec![mem[0] + 1]
        } else {
            mem.clone()
        }
    }

    fn choose(&self, arena: &dyn Arena, v: &VertexId, mem: &ScriptMem) -> Result<Edge, StrategyError> {
        let x = arena.expand(v)?;
        let bid = self.bids.get(mem[0] as usize).or(self.bids.last()).copied().unwrap_or(1);
        let target = x.edges[0].to.clone();
        edge_to(arena, v, &target, Some(&Weight::from_int(-bid)))
    }
}

/// Descends to `s[i, depths[i]]` before turning in round `i`.
#[derive(Clone, Debug)]
struct DescentPlan {
    depths: Vec<i64>,
}

impl Script for DescentPlan {
    fn name(&self) -> &str {
        "descent_plan"
    }

    fn initial(&self, _: &VertexId) -> ScriptMem {
        smallvec![]
    }

    fn update(&self, mem: &ScriptMem, _: &Edge) -> ScriptMem {
        mem.clone()
    }

    fn choose(&self, arena: &dyn Arena, v: &VertexId, _: &ScriptMem) -> Result<Edge, StrategyError> {
        if !v.is("s") || v.param(1) == 0 {
            return first_edge(arena, v);
        }
        let (i, c) = (v.param(0), v.param(1));
        let depth = self.depths.get(i as usize).or(self.depths.last()).copied().unwrap_or(1);
        if c < depth {
            edge_to(arena, v, &a2::s(i, c + 1), None)
        } else {
            edge_to(arena, v, &a2::q(i, c), None)
        }
    }
}

/// Player 1's response in an outbid round of the repeated one-step arena:
/// the bid Player 2 makes, the cap flag, and whether the round loses.
fn a1_round(arena: &dyn Arena, sigma: &Strategy, mem: &Memory, b: i64) -> AResult<(i64, bool, bool)> {
    let (s, t) = (VertexId::named("s"), VertexId::named("t"));
    let mut f = i64::MIN;
    for x in 1..=b {
        let m = sigma.update(mem, &Edge::new(s.clone(), -x, t.clone()));
        let y = sigma.choose(arena, &t, &m)?;
        f = f.max(y.weight.to_i64().unwrap_or(i64::MAX));
    }
    let bid = (f + 1).min(b);
    let m = sigma.update(mem, &Edge::new(s.clone(), -bid, t.clone()));
    let y = sigma.choose(arena, &t, &m)?.weight.to_i64().unwrap_or(i64::MAX);
    Ok((bid, f + 1 >= b, y < bid))
}

/// Against a finite-memory outbid strategy, Player 2 bids one more than
/// the largest answer Player 1 can give in the current round.
pub fn defeat_fm_match(sigma: &Strategy, target: MatchTarget, rounds: usize) -> AResult<Defeat> {
    states_of(sigma)?;
    match target {
        MatchTarget::A1Prime { b } => defeat_a1prime(sigma, b, rounds),
        MatchTarget::A2 => defeat_a2(sigma, rounds, 4096),
    }
}

fn defeat_a1prime(sigma: &Strategy, b: i64, rounds: usize) -> AResult<Defeat> {
    let arena = a1::a1prime(b);
    let mut mem = sigma.initial_memory(arena.start());
    let mut bids = Vec::new();
    let mut partial = false;
    let mut notes = Vec::new();
    for r in 0..rounds {
        let (bid, capped, loses) = a1_round(&arena, sigma, &mem, b)?;
        if capped {
            partial = true;
        }
        if !loses {
            notes.push(format!("round {r}: the bid cap {b} binds and Player 1 can match it"));
            break;
        }
        let s_edge = Edge::new(VertexId::named("s"), -bid, VertexId::named("t"));
        let m = sigma.update(&mem, &s_edge);
        let y = sigma.choose(&arena, &VertexId::named("t"), &m)?;
        mem = sigma.update(&m, &y);
        bids.push(bid);
    }
    if bids.is_empty() {
        return Err(AdversaryError::Inconclusive(format!(
            "bid cap {b} binds in the first round; Player 1 answers every bid"
        )));
    }
    if partial {
        notes.push(format!("bid cap {b} reached; certificate covers {} rounds", bids.len()));
    }
    let p2 = Strategy::scripted(BidPlan { bids: bids.clone() });
    let record = play(&arena, arena.start(), sigma, &p2, 2 * bids.len())?;
    let starts: Vec<usize> = (0..=bids.len()).map(|r| 2 * r).collect();
    let mems: Vec<Memory> = starts.iter().map(|&s| memory_before(sigma, &record, s)).collect();
    let claim = Claim::Divergence {
        round_starts: starts,
        decrease: Weight::one(),
        elevation: Elevation::Constant(Weight::zero()),
        memory_cycle: first_repeat(&mems),
        mean_bound: Some(Weight::ratio(-1, 2)),
    };
    let source = format!("zoo:a1prime?b={b}");
    finish(&arena, &source, "a1prime", sigma, p2, record, claim, partial, notes)
}

/// Simulates one round of the unfolded outbid arena from `s[i,0]` with
/// Player 2 descending to depth `j`; returns Player 1's turning depth if
/// it turns before depth `limit`.
fn a2_response(arena: &dyn Arena, sigma: &Strategy, mem: &Memory, i: i64, j: i64, limit: i64) -> AResult<Option<i64>> {
    let mut m = sigma.update(mem, &Edge::new(a2::s(i, 0), 1, a2::s(i, 1)));
    for c in 1..j {
        m = sigma.update(&m, &Edge::new(a2::s(i, c), 1, a2::s(i, c + 1)));
    }
    m = sigma.update(&m, &Edge::new(a2::s(i, j), -2 * j, a2::q(i, j)));
    for c in (1..=j).rev() {
        let to = if c == 1 { a2::t(i, 0) } else { a2::q(i, c - 1) };
        m = sigma.update(&m, &Edge::new(a2::q(i, c), 0, to));
    }
    for c in 0..limit {
        let e = sigma.choose(arena, &a2::t(i, c), &m)?;
        if a2::is_p1_turn(&e) {
            return Ok(Some(c));
        }
        m = sigma.update(&m, &e);
    }
    Ok(None)
}

fn defeat_a2(sigma: &Strategy, rounds: usize, descent_cap: i64) -> AResult<Defeat> {
    let arena = a2::arena();
    let mut mem = sigma.initial_memory(arena.start());
    let mut depths = Vec::new();
    let mut starts = vec![0usize];
    let mut len = 0usize;
    let mut partial = false;
    let mut notes = Vec::new();
    for i in 0..rounds as i64 {
        let mut chosen = None;
        for j in 1..=descent_cap {
            if let Some(jp) = a2_response(&arena, sigma, &mem, i, j, j)? {
                chosen = Some((j, jp));
                break;
            }
        }
        if let Some((j, jp)) = chosen {
            depths.push(j);
            // Player 2's descent, turn and chain, then Player 1's.
            let round_len = (2 * j + 1 + 2 * jp + 2) as usize;
            let dp = Strategy::scripted(DescentPlan { depths: vec![j] });
            let (_, m) = play_from(&arena, &a2::s(i, 0), sigma, &mem, &dp, round_len)?;
            mem = m;
            len += round_len;
            starts.push(len);
            continue;
        }
        if a2_response(&arena, sigma, &mem, i, 1, descent_cap)?.is_none() {
            // Player 1 keeps descending: every further step loses 1.
            depths.push(1);
            len += 3;
            starts.push(len);
            for _ in 0..descent_cap {
                len += 1;
                starts.push(len);
            }
            notes.push(format!("round {i}: Player 1 descends {descent_cap} steps without turning"));
        } else {
            partial = true;
            notes.push(format!("round {i}: no losing descent up to {descent_cap}"));
        }
        break;
    }
    if starts.len() < 2 {
        return Err(AdversaryError::Inconclusive(format!(
            "no descent up to {descent_cap} makes the first round lose"
        )));
    }
    let p2 = Strategy::scripted(DescentPlan { depths: depths.clone() });
    let record = play(&arena, arena.start(), sigma, &p2, len)?;
    let max_depth = depths.iter().copied().max().unwrap_or(1);
    let mems: Vec<Memory> = starts.iter().map(|&s| memory_before(sigma, &record, s)).collect();
    let claim = Claim::Divergence {
        round_starts: starts,
        decrease: Weight::one(),
        elevation: Elevation::Constant(Weight::from_int(max_depth)),
        memory_cycle: first_repeat(&mems),
        mean_bound: None,
    };
    finish(&arena, "zoo:a2", "a2", sigma, p2, record, claim, partial, notes)
}

/// Plays from `v` with Player 1 starting in memory `mem`; returns the
/// edges and Player 1's final memory.
fn play_from(
    arena: &dyn Arena,
    v: &VertexId,
    sigma: &Strategy,
    mem: &Memory,
    p2: &Strategy,
    len: usize,
) -> AResult<(Vec<Edge>, Memory)> {
    let mut m1 = mem.clone();
    let mut m2 = p2.initial_memory(v);
    let mut at = v.clone();
    let mut edges = Vec::with_capacity(len);
    for _ in 0..len {
        let x = arena.expand(&at)?;
        let e = match x.owner {
            Player::One => sigma.choose(arena, &at, &m1)?,
            Player::Two => p2.choose(arena, &at, &m2)?,
        };
        m1 = sigma.update(&m1, &e);
        m2 = p2.update(&m2, &e);
        at = e.to.clone();
        edges.push(e);
    }
    Ok((edges, m1))
}

// ---------------------------------------------------------------------------
// Delay chain.

/// Walks the top row to `s[at]` and enters there.
#[derive(Clone, Debug)]
struct EnterAt {
    at: i64,
}

impl Script for EnterAt {
    fn name(&self) -> &str {
        "enter_at"
    }

    fn initial(&self, _: &VertexId) -> ScriptMem {
        smallvec![]
    }

    fn update(&self, mem: &ScriptMem, _: &Edge) -> ScriptMem {
        mem.clone()
    }

    fn choose(&self, arena: &dyn Arena, v: &VertexId, _: &ScriptMem) -> Result<Edge, StrategyError> {
        if !v.is("s") {
            return first_edge(arena, v);
        }
        let x = arena.expand(v)?;
        let next = VertexId::new("s", &[v.param(0) + 1]);
        let (walk, enter): (Vec<&Edge>, Vec<&Edge>) = x.edges.iter().partition(|e| e.to == next);
        Ok(if v.param(0) < self.at { walk[0] } else { enter[0] }.clone())
    }
}

/// Against a step-counter strategy on the delay chain, Player 2 enters
/// right where Player 1 would exit, or at `t[0]` when it never exits.
pub fn defeat_sc_on_a3(sigma: &Strategy, horizon: usize) -> AResult<Defeat> {
    require_step_counter(sigma)?;
    let arena = a3::arena();
    let mut exit_at = None;
    let mut covered = false;
    for i in 0.. {
        if a3::step_of_t(i) as usize >= horizon {
            break;
        }
        covered = true;
        let mut edges = Vec::new();
        for k in 0..i {
            edges.push(Edge::new(a3::s(k), 1, a3::s(k + 1)));
        }
        let mut at = a3::s(i);
        let entry = arena.expand(&at)?.edges.iter().find(|e| e.weight.is_negative()).cloned();
        let entry = entry.expect("every top-row vertex has an entry");
        edges.push(entry.clone());
        at = entry.to.clone();
        while !at.is("t") {
            let e = arena.expand(&at)?.edges[0].clone();
            at = e.to.clone();
            edges.push(e);
        }
        let h = History::from_edges(a3::s(0), edges).map_err(GameError::from)?;
        let e = sigma.decide(&arena, &h)?;
        if e.to == a3::r0() {
            exit_at = Some(i);
            break;
        }
    }
    if !covered {
        return Err(AdversaryError::Inconclusive(format!(
            "horizon {horizon} reaches no decision of Player 1"
        )));
    }
    match exit_at {
        Some(i) => {
            let p2 = Strategy::scripted(EnterAt { at: i });
            let record = play(&arena, arena.start(), sigma, &p2, a3::step_of_t(i) as usize + 2)?;
            let claim = Claim::EarlyExitNegative {
                tp: record.final_tp(),
                threshold: Weight::zero(),
            };
            let notes = vec![format!("Player 1 exits at t[{i}], step {}", a3::step_of_t(i))];
            finish(&arena, "zoo:a3", "a3", sigma, p2, record, claim, false, notes)
        }
        None => {
            let p2 = Strategy::scripted(EnterAt { at: 0 });
            let record = play(&arena, arena.start(), sigma, &p2, horizon)?;
            let claim = Claim::Stagnation {
                bound: Weight::from_int(-1),
            };
            let notes = vec![format!("Player 1 never exits within {horizon} steps")];
            finish(&arena, "zoo:a3", "a3", sigma, p2, record, claim, false, notes)
        }
    }
}

// ---------------------------------------------------------------------------
// Delay gadgets.

/// Enters at `t[chain[0]]` and routes each gadget from `t[chain[a]]` to
/// `t[chain[a+1]]`; past the chain it keeps the last gap.
#[derive(Clone, Debug)]
pub struct RoutingPlan {
    chain: Vec<i64>,
}

impl RoutingPlan {
    fn gap_at(&self, i: i64) -> i64 {
        let last_gap = match self.chain.as_slice() {
            [.., a, b] => b - a,
            _ => 2,
        };
        match self.chain.iter().position(|&x| x == i) {
            Some(a) if a + 1 < self.chain.len() => self.chain[a + 1] - i,
            _ => last_gap,
        }
    }
}

impl Script for RoutingPlan {
    fn name(&self) -> &str {
        "routing_plan"
    }

    fn initial(&self, _: &VertexId) -> ScriptMem {
        smallvec![]
    }

    fn update(&self, mem: &ScriptMem, _: &Edge) -> ScriptMem {
        mem.clone()
    }

    fn choose(&self, arena: &dyn Arena, v: &VertexId, _: &ScriptMem) -> Result<Edge, StrategyError> {
        match v.name() {
            "s" if v.param(0) >= 0 => {
                if v.param(0) < self.chain[0] {
                    edge_to(arena, v, &a4::s(v.param(0) + 1), None)
                } else {
                    let x = arena.expand(v)?;
                    Ok(x.edges.iter().find(|e| e.to.is("e")).expect("entry edge").clone())
                }
            }
            "g" => {
                let (i, c) = (v.param(0), v.param(1));
                if c < self.gap_at(i) {
                    edge_to(arena, v, &a4::g(i, c + 1), None)
                } else {
                    let x = arena.expand(v)?;
                    Ok(x.edges.iter().find(|e| e.to.is("d")).expect("drop edge").clone())
                }
            }
            _ => first_edge(arena, v),
        }
    }
}

struct LabelOracle<'a> {
    arena: &'a dyn Arena,
    sigma: &'a Strategy,
    states: Vec<Memory>,
    cache: HashMap<(i64, i64), RamseyLabel>,
    evaluations: usize,
}

impl<'a> LabelOracle<'a> {
    fn index(&self, m: &Memory) -> AResult<usize> {
        self.states.iter().position(|s| s == m).ok_or_else(|| {
            AdversaryError::NotApplicable(
                self.sigma.name().to_string(),
                format!("memory {m} is outside the declared states"),
            )
        })
    }

    fn compute(&self, i: i64, j: i64) -> AResult<RamseyLabel> {
        let path = a4::gadget_path(i, j);
        let mut exit_profile = Vec::with_capacity(self.states.len());
        let mut gadget_update = Vec::with_capacity(self.states.len());
        for m in &self.states {
            let e = self.sigma.choose(self.arena, &a4::t(i), m)?;
            exit_profile.push(e.to == a4::r0());
            let mut cur = m.clone();
            for e in &path {
                cur = self.sigma.update(&cur, e);
            }
            gadget_update.push(self.index(&cur)?);
        }
        Ok(RamseyLabel {
            exit_profile,
            gadget_update,
        })
    }

    fn label(&mut self, i: i64, k: i64) -> AResult<RamseyLabel> {
        if let Some(l) = self.cache.get(&(i, k)) {
            return Ok(l.clone());
        }
        self.evaluations += 1;
        let l = self.compute(i, k - i)?;
        self.cache.insert((i, k), l.clone());
        Ok(l)
    }
}

/// Lexicographically smallest index set of size `size` with first index
/// at least `min_first`, gaps above 1, all indices at most `window`, and
/// every pair carrying the same label.
fn find_clique(
    oracle: &mut LabelOracle<'_>,
    size: usize,
    min_first: i64,
    window: i64,
    budget: usize,
) -> AResult<Option<(Vec<i64>, RamseyLabel)>> {
    fn extend(
        oracle: &mut LabelOracle<'_>,
        chain: &mut Vec<i64>,
        label: &RamseyLabel,
        size: usize,
        window: i64,
        budget: usize,
    ) -> AResult<bool> {
        if chain.len() == size {
            return Ok(true);
        }
        let last = *chain.last().unwrap();
        for c in last + 2..=window {
            if oracle.evaluations > budget {
                return Ok(false);
            }
            let mut ok = true;
            for &x in chain.iter() {
                if oracle.label(x, c)? != *label {
                    ok = false;
                    break;
                }
            }
            if ok {
                chain.push(c);
                if extend(oracle, chain, label, size, window, budget)? {
                    return Ok(true);
                }
                chain.pop();
            }
        }
        Ok(false)
    }

    for first in min_first..=window {
        for second in first + 2..=window {
            if oracle.evaluations > budget {
                return Ok(None);
            }
            let label = oracle.label(first, second)?;
            let mut chain = vec![first, second];
            if extend(oracle, &mut chain, &label, size, window, budget)? {
                return Ok(Some((chain, label)));
            }
        }
    }
    Ok(None)
}

/// Label evaluations the clique search may spend.
pub const DEFAULT_LABEL_BUDGET: usize = 200_000;

/// Against a finite-memory strategy with `K` states on the delay-gadget
/// arena, finds `K+2` indices whose pairs all carry the same label and
/// routes Player 1 along them. Either Player 1 exits within the first
/// `K+1` gadgets at a negative payoff, or its memory cycles while it keeps
/// delaying and every routed gadget loses at least 1.
pub fn ramsey_adversary(
    sigma: &Strategy,
    guarded: bool,
    window: i64,
    horizon: usize,
    budget: usize,
) -> AResult<Defeat> {
    let states = states_of(sigma)?;
    let k = states.len();
    let arena = a4::arena(guarded);
    let mut oracle = LabelOracle {
        arena: &arena,
        sigma,
        states,
        cache: HashMap::new(),
        evaluations: 0,
    };
    let found = find_clique(&mut oracle, k + 2, k as i64, window, budget)?;
    let Some((chain, label)) = found else {
        return Err(AdversaryError::NoCliqueFound {
            window,
            evaluations: oracle.evaluations,
        });
    };
    // Re-derive every pair without the cache.
    for a in 0..chain.len() {
        for b in a + 1..chain.len() {
            if oracle.compute(chain[a], chain[b] - chain[a])? != label {
                return Err(AdversaryError::SelfCheck(format!(
                    "pair ({}, {}) does not carry the clique label",
                    chain[a], chain[b]
                )));
            }
        }
    }
    let offset = usize::from(guarded);
    let step_of_t = |i: i64| 3 * (i as usize + 1) + offset;
    let last = *chain.last().unwrap();
    if step_of_t(last) > horizon {
        return Err(AdversaryError::Inconclusive(format!(
            "the plan reaches t[{last}] at step {}, beyond horizon {horizon}",
            step_of_t(last)
        )));
    }
    let plan = AdversaryPlan {
        entry: chain[0],
        routing: chain[1..].to_vec(),
        clique_found: true,
        window,
        label_evaluations: oracle.evaluations,
    };
    let p2 = Strategy::scripted(RoutingPlan { chain: chain.clone() });
    let record = play(&arena, arena.start(), sigma, &p2, step_of_t(last))?;
    let source = if guarded { "zoo:a4guarded" } else { "zoo:a4" };
    let entry = if guarded { "a4guarded" } else { "a4" };
    let starts: Vec<usize> = chain
        .iter()
        .map(|&i| step_of_t(i))
        .filter(|&s| s <= record.edges.len())
        .collect();
    // Memory at successive round starts must follow the label's update.
    let mems: Vec<Memory> = starts.iter().map(|&s| memory_before(sigma, &record, s)).collect();
    for w in mems.windows(2) {
        let a = oracle.index(&w[0])?;
        if oracle.index(&w[1])? != label.gadget_update[a] {
            return Err(AdversaryError::SelfCheck(format!(
                "memory {} does not follow the label update from {}",
                w[1], w[0]
            )));
        }
    }
    let threshold = Weight::from_int(offset as i64);
    let mut defeat = if matches!(record.termination, crate::engine::Termination::Sink(_)) {
        let delays = record.edges.iter().filter(|e| a4::is_delay(e)).count() as i64;
        let tp = record.final_tp();
        let expected = Weight::from_int(-chain[0] + delays - 1 + offset as i64);
        if tp != expected {
            return Err(AdversaryError::SelfCheck(format!("exit payoff {tp}, expected {expected}")));
        }
        let notes = vec![format!(
            "Player 1 exits after {delays} delays at payoff -l0+j-1 = {}",
            -chain[0] + delays - 1
        )];
        let claim = Claim::EarlyExitNegative { tp, threshold };
        finish(&arena, source, entry, sigma, p2, record, claim, false, notes)?
    } else {
        let max_gap = chain.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(2);
        let claim = Claim::Divergence {
            round_starts: starts.clone(),
            decrease: Weight::one(),
            elevation: Elevation::Constant(Weight::from_int(max_gap)),
            memory_cycle: first_repeat(&mems),
            mean_bound: None,
        };
        let notes = vec![format!("Player 1 delays at t{chain:?}; memory cycles under the label update")];
        finish(&arena, source, entry, sigma, p2, record, claim, false, notes)?
    };
    defeat.plan = Some(plan);
    Ok(defeat)
}

// ---------------------------------------------------------------------------
// Two-colour arena.

/// Picks the `c1` word length by the step at which `u` is reached.
#[derive(Clone, Debug)]
struct WordPlan {
    lengths: BTreeMap<i64, i64>,
}

impl Script for WordPlan {
    fn name(&self) -> &str {
        "word_plan"
    }

    fn initial(&self, _: &VertexId) -> ScriptMem {
        smallvec![0]
    }

    fn update(&self, mem: &ScriptMem, _: &Edge) -> ScriptMem {
        smallvec![mem[0] + 1]
    }

    fn choose(&self, arena: &dyn Arena, v: &VertexId, mem: &ScriptMem) -> Result<Edge, StrategyError> {
        if *v != buchi::bu() {
            return first_edge(arena, v);
        }
        let len = self.lengths.get(&mem[0]).copied().unwrap_or(1);
        let x = arena.expand(v)?;
        x.edges
            .iter()
            .find(|e| buchi::word_len(e) == len)
            .cloned()
            .ok_or_else(|| StrategyError::NoMove(v.clone()))
    }
}

/// Against a step-counter strategy on the two-colour arena, Player 2 times
/// its word lengths so that from some step on only one colour appears.
pub fn defeat_sc_buchi(sigma: &Strategy, b: i64, horizon: usize) -> AResult<Defeat> {
    require_step_counter(sigma)?;
    let arena = buchi::buchi_b(b);
    let v = buchi::bv();
    let h = horizon;
    // exits[s]: Player 1 leaves v when standing there after s steps.
    let loop_edge = edge_to(&arena, &v, &v, None)?;
    let mut exits = Vec::with_capacity(h);
    let mut mem = sigma.initial_memory(&v);
    for _ in 0..h {
        exits.push(sigma.choose(&arena, &v, &mem)? .to == buchi::bu());
        mem = sigma.update(&mem, &loop_edge);
    }
    let arrive = |s: usize, len: i64| s + 1 + len as usize;
    // exit_lock[s]: from s, every arrival exits (colour c2 never again).
    let mut exit_lock = vec![false; h + 1];
    let mut exit_len = vec![0i64; h + 1];
    // loop_lock[s]: Player 1 loops at every step from s (colour c1 never again).
    let mut loop_lock = vec![false; h + 1];
    let mut win = vec![false; h + 1];
    let mut win_len = vec![0i64; h + 1];
    for s in (0..h).rev() {
        loop_lock[s] = !exits[s] && (s + 1 >= h || loop_lock[s + 1]);
        if exits[s] {
            for len in 1..=b {
                let n = arrive(s, len);
                if n >= h || exit_lock[n] {
                    exit_lock[s] = true;
                    exit_len[s] = len;
                    break;
                }
            }
        }
        win[s] = exit_lock[s] || loop_lock[s];
        if !win[s] {
            if !exits[s] {
                win[s] = s + 1 < h && win[s + 1];
            } else {
                for len in 1..=b {
                    let n = arrive(s, len);
                    if n < h && win[n] {
                        win[s] = true;
                        win_len[s] = len;
                        break;
                    }
                }
            }
        }
    }
    if h == 0 || !win[0] {
        let blocking = (0..h).find(|&s| exits[s] && !win[s]).unwrap_or(0);
        return Err(AdversaryError::Inconclusive(format!(
            "no word lengths up to {b} starve a colour within {h} steps; first blocking step {blocking}"
        )));
    }
    // Steer to a locked step, then keep the lock.
    let mut lengths = BTreeMap::new();
    let mut s = 0usize;
    let mut from_step = None;
    while s < h {
        if from_step.is_none() && (exit_lock[s] || loop_lock[s]) {
            from_step = Some(s);
        }
        if !exits[s] {
            s += 1;
            continue;
        }
        let len = match from_step {
            Some(_) if exit_lock[s] => exit_len[s],
            Some(_) => 1,
            None => win_len[s],
        };
        lengths.insert((s + 1) as i64, len);
        s = arrive(s, len);
    }
    let from_step = from_step.expect("a winning start reaches a lock");
    let p2 = Strategy::scripted(WordPlan { lengths });
    let record = play(&arena, &v, sigma, &p2, h)?;
    let claim = Claim::ColourStarvation {
        from_step,
        colours: vec![buchi::C1, buchi::C2],
    };
    let which = if exit_lock[from_step] { "c2" } else { "c1" };
    let notes = vec![format!("colour {which} does not occur after step {from_step}")];
    let source = format!("zoo:buchib?b={b}");
    finish(&arena, &source, "buchib", sigma, p2, record, claim, false, notes)
}

// ---------------------------------------------------------------------------
// Round arena with spikes.

/// Against a step-counter strategy on the round arena: if Player 1 never
/// spikes, Player 2 never spikes and the payoff stays at -1; otherwise
/// Player 2 always spikes and after Player 1's first spike every round
/// loses at least 1 while no round climbs back to 0.
pub fn defeat_sc_bit(sigma: &Strategy, unit: bool, rounds: i64) -> AResult<Defeat> {
    require_step_counter(sigma)?;
    let arena = bit::arena(unit);
    let source = format!("zoo:bitarena?unit={}", u8::from(unit));
    let zero = zoo::script("bitarena", "allzero", &Default::default())?;
    let spike = zoo::script("bitarena", "allspike", &Default::default())?;
    let horizon_for = |rec: &PlayRecord, last_round: i64| {
        rec.edges
            .iter()
            .position(|e| e.to == bit::v(last_round))
            .map(|p| p + 1)
    };
    let long = |p2: &Strategy| -> AResult<PlayRecord> {
        let mut len = 64usize;
        loop {
            let rec = play(&arena, arena.start(), sigma, p2, len)?;
            if let Some(cut) = horizon_for(&rec, rounds + 1) {
                return Ok(play(&arena, arena.start(), sigma, p2, cut)?);
            }
            len *= 2;
        }
    };
    let calm = long(&zero)?;
    let first_spike = calm
        .edges
        .iter()
        .find(|e| e.from.is("u") && bit::is_spike_choice(e))
        .map(|e| e.from.param(0));
    match first_spike {
        None => {
            let claim = Claim::Stagnation {
                bound: Weight::from_int(-1),
            };
            let notes = vec![format!("Player 1 never spikes in rounds 1..={rounds}")];
            finish(&arena, &source, "bitarena", sigma, zero, calm, claim, false, notes)
        }
        Some(i0) => {
            let record = long(&spike)?;
            let starts = round_starts_at(&record, |v| v.is("v") && v.param(0) > i0);
            if starts.len() < 2 {
                return Err(AdversaryError::Inconclusive(format!(
                    "first spike in round {i0} leaves fewer than two rounds up to {rounds}"
                )));
            }
            let claim = Claim::Divergence {
                round_starts: starts,
                decrease: Weight::one(),
                elevation: Elevation::RoundIndex {
                    first: i0 + 1,
                    offset: 0,
                },
                memory_cycle: None,
                mean_bound: None,
            };
            let notes = vec![format!(
                "Player 1 first spikes in round {i0}; round starts fall below -i and no round reaches 0"
            )];
            finish(&arena, &source, "bitarena", sigma, spike, record, claim, false, notes)
        }
    }
}
