//! Line-based text formats for arenas and strategies.
//!
//! Arena files:
//! ```text
//! arena <name>
//! vertex <id> owner=<1|2>
//! edge <from> <to> weight=<int>[/<posint>]
//! start <id>
//! ```
//! Strategy files:
//! ```text
//! strategy <name> kind=<memoryless|fm|sc|sc+k|script> [states=K] [initial=m]
//!          [horizon=S] [fallback=first|error] [arena=<zoo entry>] [script=<name>] [<key>=<value>…]
//! move <vertex> [state=<m>] [step=<s>] -> <to> weight=<w>
//! bitupd [state=<m>] [step=<s>] edge=<from>-><to> weight=<w> -> <m'>
//! ```
//! `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::arena::{Edge, ExplicitArena};
use crate::error::{GameError, ParseError};
use crate::memory::{MealyTable, ModeTable};
use crate::strategy::{Fallback, Strategy};
use crate::vertex::{Player, VertexId};
use crate::weight::Weight;
use crate::zoo;

fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            None
        } else {
            Some((i + 1, content.split_whitespace().collect()))
        }
    })
}

fn key_value<'a>(token: &'a str, key: &str, line: usize) -> Result<&'a str, ParseError> {
    token
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| ParseError::new(line, format!("expected `{key}=…`, found `{token}`")))
}

fn parse_at<T: std::str::FromStr<Err = ParseError>>(s: &str, line: usize) -> Result<T, ParseError> {
    s.parse().map_err(|e: ParseError| e.at_line(line))
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str, line: usize) -> Result<T, ParseError> {
    s.parse()
        .map_err(|_| ParseError::new(line, format!("invalid {what} `{s}`")))
}

/// Parses an arena file and checks it for blocking and dangling vertices.
pub fn parse_arena(text: &str) -> Result<ExplicitArena, GameError> {
    let mut name: Option<String> = None;
    let mut owners: Vec<(VertexId, Player, usize)> = Vec::new();
    let mut edges: Vec<(VertexId, Weight, VertexId, usize)> = Vec::new();
    let mut start: Option<VertexId> = None;
    for (line, toks) in lines(text) {
        match toks.as_slice() {
            ["arena", n] => {
                if name.replace(n.to_string()).is_some() {
                    return Err(ParseError::new(line, "duplicate `arena` line").into());
                }
            }
            ["vertex", id, owner] => {
                let owner = key_value(owner, "owner", line)?;
                let owner = Player::from_code(owner)
                    .ok_or_else(|| ParseError::new(line, format!("owner must be 1 or 2, got `{owner}`")))?;
                owners.push((parse_at(id, line)?, owner, line));
            }
            ["edge", from, to, weight] => {
                let w = key_value(weight, "weight", line)?;
                edges.push((parse_at(from, line)?, parse_at(w, line)?, parse_at(to, line)?, line));
            }
            ["start", id] => {
                if start.replace(parse_at(id, line)?).is_some() {
                    return Err(ParseError::new(line, "duplicate `start` line").into());
                }
            }
            _ => {
                return Err(ParseError::new(line, format!("unrecognized line `{}`", toks.join(" "))).into())
            }
        }
    }
    let name = name.ok_or_else(|| ParseError::new(0, "missing `arena` line"))?;
    let mut seen = BTreeMap::new();
    for (v, _, line) in &owners {
        if let Some(first) = seen.insert(v.clone(), *line) {
            return Err(ParseError::new(*line, format!("vertex `{v}` already declared on line {first}")).into());
        }
    }
    let mut b = ExplicitArena::builder(name);
    for (v, owner, _) in owners {
        b.vertex(v, owner);
    }
    for (from, w, to, line) in edges {
        if !seen.contains_key(&from) {
            return Err(ParseError::new(line, format!("edge from undeclared vertex `{from}`")).into());
        }
        b.edge(from, w, to);
    }
    if let Some(s) = start {
        b.start(s);
    }
    let arena = b.build()?;
    arena.check()?;
    Ok(arena)
}

/// Canonical text of an explicit arena: vertices and edges in order.
pub fn write_arena(arena: &ExplicitArena) -> String {
    use crate::arena::Arena;
    let mut out = format!("arena {}\n", arena.name());
    for (v, owner) in arena.vertices() {
        let _ = writeln!(out, "vertex {v} owner={owner}");
    }
    for e in arena.all_edges() {
        let _ = writeln!(out, "edge {} {} weight={}", e.from, e.to, e.weight);
    }
    let _ = writeln!(out, "start {}", arena.start());
    out
}

struct Header {
    name: String,
    kind: String,
    fields: BTreeMap<String, String>,
}

fn parse_header(toks: &[&str], line: usize) -> Result<Header, ParseError> {
    let [_, name, rest @ ..] = toks else {
        return Err(ParseError::new(line, "strategy line needs a name"));
    };
    let mut fields = BTreeMap::new();
    for tok in rest {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| ParseError::new(line, format!("expected key=value, found `{tok}`")))?;
        fields.insert(k.to_string(), v.to_string());
    }
    let kind = fields
        .remove("kind")
        .ok_or_else(|| ParseError::new(line, "strategy line needs kind=…"))?;
    Ok(Header {
        name: name.to_string(),
        kind,
        fields,
    })
}

/// Options `state=`, `step=` in any order before a fixed tail.
fn parse_opts<'a>(
    toks: &'a [&'a str],
    line: usize,
) -> Result<(Option<u32>, Option<u64>, &'a [&'a str]), ParseError> {
    let (mut state, mut step) = (None, None);
    let mut rest = toks;
    while let Some(tok) = rest.first() {
        if let Some(v) = tok.strip_prefix("state=") {
            state = Some(parse_num(v, "state", line)?);
        } else if let Some(v) = tok.strip_prefix("step=") {
            step = Some(parse_num(v, "step", line)?);
        } else {
            break;
        }
        rest = &rest[1..];
    }
    Ok((state, step, rest))
}

fn parse_edge_spec(spec: &str, weight: &str, line: usize) -> Result<Edge, ParseError> {
    let spec = key_value(spec, "edge", line)?;
    let (from, to) = spec
        .split_once("->")
        .ok_or_else(|| ParseError::new(line, format!("edge must be `from->to`, got `{spec}`")))?;
    let w: Weight = parse_at(key_value(weight, "weight", line)?, line)?;
    Ok(Edge::new(parse_at(from, line)?, w, parse_at(to, line)?))
}

/// Parses a strategy file. `kind=script` strategies are resolved against
/// the zoo: `arena=<entry> script=<name>` plus script parameters.
pub fn parse_strategy(text: &str) -> Result<Strategy, GameError> {
    let mut header: Option<Header> = None;
    let mut moves: Vec<(VertexId, Option<u32>, Option<u64>, Edge, usize)> = Vec::new();
    let mut updates: Vec<(Option<u32>, Option<u64>, Edge, u32, usize)> = Vec::new();
    for (line, toks) in lines(text) {
        match toks.first().copied() {
            Some("strategy") => {
                if header.is_some() {
                    return Err(ParseError::new(line, "duplicate `strategy` line").into());
                }
                header = Some(parse_header(&toks, line)?);
            }
            Some("move") => {
                let [_, v, rest @ ..] = toks.as_slice() else {
                    return Err(ParseError::new(line, "move line needs a vertex").into());
                };
                let v: VertexId = parse_at(v, line)?;
                let (state, step, tail) = parse_opts(rest, line)?;
                let ["->", to, weight] = tail else {
                    return Err(ParseError::new(line, "move line must end with `-> <to> weight=<w>`").into());
                };
                let w: Weight = parse_at(key_value(weight, "weight", line)?, line)?;
                let e = Edge::new(v.clone(), w, parse_at(to, line)?);
                moves.push((v, state, step, e, line));
            }
            Some("bitupd") => {
                let (state, step, tail) = parse_opts(&toks[1..], line)?;
                let [edge, weight, "->", target] = tail else {
                    return Err(ParseError::new(
                        line,
                        "bitupd line must be `bitupd [state=m] [step=s] edge=a->b weight=w -> m'`",
                    )
                    .into());
                };
                let e = parse_edge_spec(edge, weight, line)?;
                updates.push((state, step, e, parse_num(target, "state", line)?, line));
            }
            _ => return Err(ParseError::new(line, format!("unrecognized line `{}`", toks.join(" "))).into()),
        }
    }
    let h = header.ok_or_else(|| ParseError::new(0, "missing `strategy` line"))?;
    let num = |key: &str, default: u64| -> Result<u64, GameError> {
        match h.fields.get(key) {
            None => Ok(default),
            Some(s) => Ok(parse_num(s, key, 0)?),
        }
    };
    let fallback = match h.fields.get("fallback").map(String::as_str) {
        None | Some("first") => Fallback::FirstEdge,
        Some("error") => Fallback::Error,
        Some(other) => return Err(ParseError::new(0, format!("unknown fallback `{other}`")).into()),
    };
    let need = |x: Option<u64>, what: &str, line: usize| {
        x.ok_or_else(|| GameError::from(ParseError::new(line, format!("missing {what}="))))
    };
    let strategy = match h.kind.as_str() {
        "memoryless" => {
            let mut table = BTreeMap::new();
            for (v, _, _, e, _) in moves {
                table.insert(v, e);
            }
            Strategy::Memoryless {
                name: h.name,
                table,
                fallback,
            }
        }
        "fm" => {
            let states = num("states", 1)? as u32;
            let mut table = BTreeMap::new();
            for (v, state, _, e, line) in moves {
                table.insert((v, need(state.map(u64::from), "state", line)? as u32), e);
            }
            let mut update = MealyTable::new();
            for (state, _, e, target, line) in updates {
                update.insert((need(state.map(u64::from), "state", line)? as u32, e), target);
            }
            Strategy::FiniteMemory {
                name: h.name,
                states,
                initial: num("initial", 0)? as u32,
                update: Arc::new(update),
                table,
                fallback,
            }
        }
        "sc" => {
            let mut table = BTreeMap::new();
            for (v, _, step, e, line) in moves {
                table.insert((v, need(step, "step", line)?), e);
            }
            Strategy::StepCounter {
                name: h.name,
                horizon: num("horizon", 0)?,
                table,
                fallback,
            }
        }
        "sc+k" => {
            let mut table = BTreeMap::new();
            for (v, state, step, e, line) in moves {
                table.insert(
                    (v, need(step, "step", line)?, need(state.map(u64::from), "state", line)? as u32),
                    e,
                );
            }
            let mut update = ModeTable::new();
            for (state, step, e, target, line) in updates {
                update.insert(
                    (need(step, "step", line)?, need(state.map(u64::from), "state", line)? as u32, e),
                    target,
                );
            }
            Strategy::StepCounterPlusK {
                name: h.name,
                k: num("states", 2)? as u32,
                horizon: num("horizon", 0)?,
                table,
                update: Arc::new(update),
                fallback,
            }
        }
        "script" => {
            let entry = h
                .fields
                .get("arena")
                .ok_or_else(|| ParseError::new(0, "script strategies need arena=<zoo entry>"))?;
            let script = h
                .fields
                .get("script")
                .cloned()
                .unwrap_or_else(|| h.name.clone());
            let mut params = h.fields.clone();
            params.remove("arena");
            params.remove("script");
            zoo::script(entry, &script, &params)?
        }
        other => return Err(ParseError::new(0, format!("unknown strategy kind `{other}`")).into()),
    };
    Ok(strategy)
}

/// Text form of a table strategy; scripted strategies are written as a
/// reference to the zoo entry `arena`.
pub fn write_strategy(strategy: &Strategy, arena: Option<&str>) -> Result<String, GameError> {
    let fb = |f: &Fallback| match f {
        Fallback::FirstEdge => "first",
        Fallback::Error => "error",
    };
    let mut out = String::new();
    match strategy {
        Strategy::Memoryless { name, table, fallback } => {
            let _ = writeln!(out, "strategy {name} kind=memoryless fallback={}", fb(fallback));
            for (v, e) in table {
                let _ = writeln!(out, "move {v} -> {} weight={}", e.to, e.weight);
            }
        }
        Strategy::FiniteMemory {
            name,
            states,
            initial,
            update,
            table,
            fallback,
        } => {
            let _ = writeln!(
                out,
                "strategy {name} kind=fm states={states} initial={initial} fallback={}",
                fb(fallback)
            );
            for ((v, m), e) in table {
                let _ = writeln!(out, "move {v} state={m} -> {} weight={}", e.to, e.weight);
            }
            for ((m, e), m2) in update.iter() {
                let _ = writeln!(out, "bitupd state={m} edge={}->{} weight={} -> {m2}", e.from, e.to, e.weight);
            }
        }
        Strategy::StepCounter {
            name,
            horizon,
            table,
            fallback,
        } => {
            let _ = writeln!(out, "strategy {name} kind=sc horizon={horizon} fallback={}", fb(fallback));
            for ((v, s), e) in table {
                let _ = writeln!(out, "move {v} step={s} -> {} weight={}", e.to, e.weight);
            }
        }
        Strategy::StepCounterPlusK {
            name,
            k,
            horizon,
            table,
            update,
            fallback,
        } => {
            let _ = writeln!(
                out,
                "strategy {name} kind=sc+k states={k} horizon={horizon} fallback={}",
                fb(fallback)
            );
            for ((v, s, m), e) in table {
                let _ = writeln!(out, "move {v} state={m} step={s} -> {} weight={}", e.to, e.weight);
            }
            for ((s, m, e), m2) in update.iter() {
                let _ = writeln!(
                    out,
                    "bitupd state={m} step={s} edge={}->{} weight={} -> {m2}",
                    e.from, e.to, e.weight
                );
            }
        }
        Strategy::Scripted(script) => {
            let arena = arena.ok_or_else(|| GameError::Domain("scripted strategies need their zoo entry".into()))?;
            let mut line = format!("strategy {} kind=script arena={arena}", script.name());
            let script_name = match script.name() {
                n if n.starts_with("sigma_") => "sigma_k",
                n if n.starts_with("random_fm_") => "random_fm",
                n => n,
            };
            let _ = write!(line, " script={script_name}");
            for (k, v) in script.params() {
                let _ = write!(line, " {k}={v}");
            }
            out.push_str(&line);
            out.push('\n');
        }
        Strategy::Switched { name, .. } => {
            return Err(GameError::Unsupported(format!(
                "switched strategy `{name}` has no file form"
            )))
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::Arena;

    #[test]
    fn minimal_arena_parses() {
        let a = parse_arena("arena m\nvertex a owner=1\nedge a a weight=0\nstart a\n").unwrap();
        assert_eq!(a.vertex_count(), 1);
        assert_eq!(a.start(), &VertexId::named("a"));
    }

    #[test]
    fn arena_errors() {
        let e = parse_arena("arena m\nvertex a owner=1\nedge a a weight=0\n").unwrap_err();
        assert!(e.to_string().contains("no start vertex"), "{e}");
        let e = parse_arena("arena m\nvertex a owner=3\n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        let e = parse_arena("arena m\nvertex a owner=1\nvertex b owner=2\nedge a b weight=1\nstart a\n")
            .unwrap_err();
        assert!(e.to_string().contains("`b`"), "{e}");
        let e = parse_arena("arena m\nvertex a owner=1\nedge a c weight=1\nstart a\n").unwrap_err();
        assert!(e.to_string().contains("`c`"), "{e}");
    }

    #[test]
    fn arena_round_trip() {
        let text = "arena r\nvertex b owner=2\nvertex a owner=1\nedge a b weight=-1/2\nedge b a weight=3\nedge a a weight=0\nstart a\n";
        let a = parse_arena(text).unwrap();
        let canon = write_arena(&a);
        let b = parse_arena(&canon).unwrap();
        assert_eq!(a, b);
        assert_eq!(write_arena(&b), canon);
    }

    #[test]
    fn strategy_round_trip() {
        let text = "strategy s kind=sc+k states=2 horizon=4 fallback=error\n\
                    move a state=0 step=0 -> b weight=1\n\
                    move a state=1 step=2 -> a weight=0\n\
                    bitupd state=0 step=0 edge=a->b weight=1 -> 1\n";
        let s = parse_strategy(text).unwrap();
        let written = write_strategy(&s, None).unwrap();
        let again = parse_strategy(&written).unwrap();
        assert_eq!(write_strategy(&again, None).unwrap(), written);
        assert_eq!(s.kind(), "sc+k");
    }

    #[test]
    fn script_reference_resolves() {
        let s = parse_strategy("strategy delay_twice_exit kind=script arena=a4\n").unwrap();
        assert_eq!(s.memory_bound(), Some(3));
        let text = write_strategy(&s, Some("a4")).unwrap();
        assert_eq!(parse_strategy(&text).unwrap().name(), "delay_twice_exit");
    }
}
