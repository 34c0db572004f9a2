//! Parametric arenas with their scripted strategies and winning-region
//! predicates.
//!
//! Entries are addressed as `zoo:<name>?<key>=<value>&…`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::arena::{Arena, ArenaRef, Edge};
use crate::error::{GameError, StrategyError};
use crate::strategy::Strategy;
use crate::vertex::VertexId;
use crate::weight::Weight;

pub mod a1;
pub mod a2;
pub mod a3;
pub mod a4;
pub mod bit;
pub mod buchi;
pub mod nonuniform;

pub type Params = BTreeMap<String, String>;

pub struct ZooEntry {
    pub name: &'static str,
    pub arena: ArenaRef,
    pub provenance: &'static str,
    pub scripts: &'static [&'static str],
    pub params: Params,
}

impl std::fmt::Debug for ZooEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ZooEntry({} {:?})", self.name, self.params)
    }
}

/// Name, parameters with defaults, provenance, scripts.
pub const CATALOGUE: &[(&str, &str, &str, &[&str])] = &[
    (
        "a1",
        "b=8",
        "one round: Player 2 pays -1..-b, Player 1 answers 0..b+1; finite memory needed on the untruncated arena",
        &["match_plus_one"],
    ),
    (
        "a1prime",
        "b=8",
        "repeated version of a1; finite memory insufficient for mean payoff without truncation",
        &["match_plus_one"],
    ),
    (
        "a2",
        "",
        "acyclic finitely branching unfolding of a1prime with unit-weight chains; finite memory insufficient",
        &["adaptive"],
    ),
    (
        "a3",
        "",
        "delay chain with entry paths; step counters alone insufficient for total-payoff liminf",
        &["delay_twice_exit"],
    ),
    (
        "a4",
        "",
        "delay gadgets; step counter plus finite memory insufficient for total-payoff liminf",
        &["sigma_k", "adaptive", "delay_twice_exit", "random_fm"],
    ),
    (
        "a4guarded",
        "",
        "a4 behind a +1 edge, for strict total-payoff liminf",
        &["sigma_k", "adaptive", "delay_twice_exit", "random_fm"],
    ),
    (
        "bitarena",
        "unit=0",
        "rounds of 0 or (i, -i-1) choices; one bit plus step counter wins total-payoff limsup, step counter alone loses",
        &["opposite", "allzero", "allspike", "safe"],
    ),
    (
        "buchia",
        "k=4",
        "all colours infinitely often with colours growing to the right; finite memory insufficient for unboundedly many colours",
        &["round_robin"],
    ),
    (
        "buchib",
        "b=4",
        "two colours, Player 2 picks c1 words of length 1..b; step counters insufficient",
        &["alternating"],
    ),
    (
        "nonuniform",
        "start=0",
        "entries s_i at payoff -i before a shared exit line; no uniformly winning step-counter plus one-bit strategy",
        &["exit_at"],
    ),
];

/// Splits `zoo:<name>?k=v&…`.
pub fn parse_uri(uri: &str) -> Result<(String, Params), GameError> {
    let rest = uri
        .strip_prefix("zoo:")
        .ok_or_else(|| GameError::Domain(format!("not a zoo URI: `{uri}`")))?;
    let (name, query) = rest.split_once('?').unwrap_or((rest, ""));
    let mut params = Params::new();
    for pair in query.split('&').filter(|p| !p.is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| GameError::Domain(format!("bad zoo parameter `{pair}`")))?;
        params.insert(k.to_string(), v.to_string());
    }
    Ok((name.to_ascii_lowercase(), params))
}

pub(crate) fn param_i64(params: &Params, key: &str, default: i64) -> Result<i64, GameError> {
    match params.get(key) {
        None => Ok(default),
        Some(s) => s
            .parse()
            .map_err(|_| GameError::Domain(format!("parameter `{key}` must be an integer, got `{s}`"))),
    }
}

pub(crate) fn param_range(params: &Params, key: &str, default: i64, lo: i64, hi: i64) -> Result<i64, GameError> {
    let x = param_i64(params, key, default)?;
    if x < lo || x > hi {
        return Err(GameError::Domain(format!("parameter `{key}`={x} outside {lo}..={hi}")));
    }
    Ok(x)
}

fn check_keys(name: &str, params: &Params, allowed: &[&str]) -> Result<(), GameError> {
    for k in params.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(GameError::Domain(format!("`{name}` has no parameter `{k}`")));
        }
    }
    Ok(())
}

pub fn make(name: &str, params: &Params) -> Result<ZooEntry, GameError> {
    let (cname, _, provenance, scripts) = CATALOGUE
        .iter()
        .find(|c| c.0 == name)
        .copied()
        .ok_or_else(|| GameError::Domain(format!("unknown zoo entry `{name}`")))?;
    let arena: ArenaRef = match cname {
        "a1" => {
            check_keys(name, params, &["b"])?;
            Arc::new(a1::a1(param_range(params, "b", 8, 1, 10_000)?))
        }
        "a1prime" => {
            check_keys(name, params, &["b"])?;
            Arc::new(a1::a1prime(param_range(params, "b", 8, 1, 10_000)?))
        }
        "a2" => {
            check_keys(name, params, &[])?;
            Arc::new(a2::arena())
        }
        "a3" => {
            check_keys(name, params, &[])?;
            Arc::new(a3::arena())
        }
        "a4" => {
            check_keys(name, params, &[])?;
            Arc::new(a4::arena(false))
        }
        "a4guarded" => {
            check_keys(name, params, &[])?;
            Arc::new(a4::arena(true))
        }
        "bitarena" => {
            check_keys(name, params, &["unit"])?;
            Arc::new(bit::arena(param_range(params, "unit", 0, 0, 1)? == 1))
        }
        "buchia" => {
            check_keys(name, params, &["k"])?;
            Arc::new(buchi::buchi_a(param_range(params, "k", 4, 2, 10_000)?))
        }
        "buchib" => {
            check_keys(name, params, &["b"])?;
            Arc::new(buchi::buchi_b(param_range(params, "b", 4, 1, 10_000)?))
        }
        "nonuniform" => {
            check_keys(name, params, &["start"])?;
            Arc::new(nonuniform::arena(param_range(params, "start", 0, 0, 1_000_000)?))
        }
        _ => unreachable!(),
    };
    Ok(ZooEntry {
        name: cname,
        arena,
        provenance,
        scripts,
        params: params.clone(),
    })
}

pub fn make_uri(uri: &str) -> Result<ZooEntry, GameError> {
    let (name, params) = parse_uri(uri)?;
    make(&name, &params)
}

/// A scripted strategy of a zoo entry. `params` are script parameters
/// such as `k` for `sigma_k`.
pub fn script(entry: &str, script: &str, params: &Params) -> Result<Strategy, GameError> {
    let unknown = || GameError::Domain(format!("zoo entry `{entry}` has no script `{script}`"));
    let s = match (entry, script) {
        ("a1" | "a1prime", "match_plus_one") => Strategy::scripted(a1::MatchPlusOne),
        ("a2", "adaptive") => Strategy::scripted(a2::Adaptive),
        ("a3", "delay_twice_exit") => Strategy::scripted(a3::DelayThenExit { delays: 2 }),
        ("a3", "exit_at") => Strategy::scripted(a3::DelayThenExit {
            delays: param_range(params, "delays", 0, 0, 1_000_000)? as u64,
        }),
        ("a4" | "a4guarded", "sigma_k") => {
            Strategy::scripted(a4::SigmaK::new(param_range(params, "k", 1, 0, 1_000_000)? as u64))
        }
        ("a4" | "a4guarded", "delay_twice_exit") => Strategy::scripted(a4::SigmaK::named("delay_twice_exit", 2)),
        ("a4" | "a4guarded", "adaptive") => Strategy::scripted(a4::Adaptive),
        ("a4" | "a4guarded", "random_fm") => Strategy::scripted(a4::RandomFm::from_seed(
            param_range(params, "states", 2, 1, 8)? as usize,
            param_i64(params, "seed", 0)? as u64,
        )),
        ("bitarena", "opposite") => Strategy::scripted(bit::Opposite),
        ("bitarena", "allzero") | ("bitarena", "safe") => Strategy::first_edge(script),
        ("bitarena", "allspike") => Strategy::scripted(bit::AllSpike),
        ("buchia", "round_robin") => {
            Strategy::scripted(buchi::RoundRobin::new(param_range(params, "k", 4, 2, 10_000)?))
        }
        ("buchib", "alternating") => Strategy::scripted(buchi::Alternating),
        ("nonuniform", "exit_at") => Strategy::scripted(nonuniform::ExitAt(
            param_range(params, "n", 0, 0, 1_000_000)?,
        )),
        _ => return Err(unknown()),
    };
    Ok(s)
}

/// The edge from `v` to `to`, with weight `weight` when given.
pub(crate) fn edge_to(
    arena: &dyn Arena,
    v: &VertexId,
    to: &VertexId,
    weight: Option<&Weight>,
) -> Result<Edge, StrategyError> {
    arena
        .expand(v)?
        .find(to, weight)
        .cloned()
        .ok_or_else(|| StrategyError::NoMove(v.clone()))
}

pub(crate) fn first_edge(arena: &dyn Arena, v: &VertexId) -> Result<Edge, StrategyError> {
    Ok(arena.expand(v)?.edges[0].clone())
}
