use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qgame::adversary::{
    defeat_fm_match, defeat_sc_bit, defeat_sc_buchi, defeat_sc_on_a3, ramsey_adversary, AdversaryError, Defeat,
    MatchTarget, DEFAULT_LABEL_BUDGET,
};
use qgame::arena::{to_dot, truncate, validate, ArenaRef};
use qgame::certificate::{check_certificate, Certificate, CheckContext};
use qgame::engine::{node_cap_from_env, play};
use qgame::format::{parse_arena, parse_strategy, write_arena, write_strategy};
use qgame::objective::{LimitMode, PayoffKind, Quantitative, Relation};
use qgame::synthesis::{
    bubble_synthesize, sc1bit_synthesize, sigma_safe, solve_values, zoo_region, Caps, Region, SynthReport,
    ValueFamily,
};
use qgame::zoo::{self, Params, CATALOGUE};
use qgame::{Extended, ExplicitArena, Family, Objective, Strategy};
use rayon::prelude::*;

/// Exit status: 0 success or accepted, 1 refuted or failed, 2 inconclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Ok,
    Failed,
    Inconclusive,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(match s {
            Status::Ok => 0,
            Status::Failed => 1,
            Status::Inconclusive => 2,
        })
    }
}

#[derive(Parser, Debug)]
#[command(name = "qgame", version, about = "Quantitative games on finitely branching arenas")]
struct Cli {
    /// Worker threads for parallel searches (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check an arena for blocking and dangling vertices.
    Validate(ValidateArgs),
    /// Play two strategies against each other and emit the play as CSV.
    Simulate(SimulateArgs),
    /// Build a counterstrategy against a Player 1 strategy on a zoo arena.
    Defeat(DefeatArgs),
    /// Synthesize a Player 1 strategy with a level-by-level certificate.
    Synthesize(SynthesizeArgs),
    /// Re-check a certificate file.
    Verify(VerifyArgs),
    /// List or export zoo arenas.
    Zoo {
        #[command(subcommand)]
        action: ZooAction,
    },
    /// Run every zoo script against the matching adversary.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct ArenaArg {
    /// Arena file or zoo URI such as `zoo:bitarena?unit=1`.
    #[arg(long)]
    arena: String,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    arena: ArenaArg,
    /// Exploration depth for generated arenas.
    #[arg(long, default_value_t = 40)]
    depth: usize,
    /// Strategy file or zoo script to parse alongside.
    #[arg(long)]
    strategy: Option<String>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    arena: ArenaArg,
    #[arg(long)]
    p1: String,
    #[arg(long)]
    p2: String,
    #[arg(long, default_value_t = 100)]
    horizon: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DefeatArgs {
    #[command(flatten)]
    arena: ArenaArg,
    /// Player 1 strategy file or zoo script.
    #[arg(long)]
    strategy: String,
    /// Index window for the clique search on the delay-gadget arenas.
    #[arg(long, default_value_t = 500)]
    window: i64,
    /// Play length, or number of rounds on the outbid and round arenas.
    #[arg(long)]
    horizon: Option<usize>,
    /// Certificate output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SynthesizeArgs {
    #[command(flatten)]
    arena: ArenaArg,
    /// `mp:limsup:>=:0` or `tp:limsup:>=:0`.
    #[arg(long)]
    objective: String,
    /// Winning Player 1 strategy to convert; computed on explicit arenas.
    #[arg(long)]
    strategy: Option<String>,
    /// Number of levels (mean payoff) or bubbles (total payoff).
    #[arg(long, default_value_t = 4)]
    m_max: usize,
    /// Exploration depth per level.
    #[arg(long, default_value_t = 256)]
    depth: usize,
    /// Strategy output; the certificate goes to `<out>.cert.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Certificate file.
    certificate: PathBuf,
    /// Arena to check against instead of the one named in the certificate.
    #[arg(long)]
    arena: Option<String>,
    /// Player 1 strategy instead of the one embedded in the certificate.
    #[arg(long)]
    p1: Option<String>,
    /// Lower bound on the exploration depth of level claims.
    #[arg(long, default_value_t = 0)]
    depth: usize,
}

#[derive(Subcommand, Debug)]
enum ZooAction {
    /// Print the catalogue.
    List,
    /// Write an arena in the text format, or as DOT.
    Export {
        uri: String,
        #[arg(long, value_enum, default_value_t = ExportFormat::Text)]
        format: ExportFormat,
        /// Exploration depth for generated arenas.
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExportFormat {
    Text,
    Dot,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Seed for sampled finite-memory strategies.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// How many sampled finite-memory strategies per delay-gadget arena.
    #[arg(long, default_value_t = 4)]
    samples: u64,
    #[arg(long, default_value_t = 500)]
    window: i64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// An arena together with where it came from.
struct Loaded {
    source: String,
    arena: ArenaRef,
    explicit: Option<Arc<ExplicitArena>>,
    zoo: Option<(String, Params)>,
}

fn load_arena(spec: &str) -> Result<Loaded> {
    if spec.starts_with("zoo:") {
        let entry = zoo::make_uri(spec)?;
        let explicit = entry.arena.as_explicit().map(|a| Arc::new(a.clone()));
        return Ok(Loaded {
            source: spec.to_string(),
            arena: entry.arena,
            explicit,
            zoo: Some((entry.name.to_string(), entry.params)),
        });
    }
    let text = std::fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
    let arena = Arc::new(parse_arena(&text).with_context(|| format!("parsing {spec}"))?);
    Ok(Loaded {
        source: spec.to_string(),
        arena: arena.clone(),
        explicit: Some(arena),
        zoo: None,
    })
}

/// A strategy file, `first`, or a zoo script `name?key=value&…` of the
/// arena's entry.
fn load_strategy(spec: &str, loaded: &Loaded) -> Result<Strategy> {
    if Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
        return parse_strategy(&text).with_context(|| format!("parsing {spec}"));
    }
    if spec == "first" {
        return Ok(Strategy::first_edge("first"));
    }
    let Some((entry, _)) = &loaded.zoo else {
        bail!("`{spec}` is neither a strategy file nor `first`");
    };
    let (name, query) = spec.split_once('?').unwrap_or((spec, ""));
    let (_, params) = zoo::parse_uri(&format!("zoo:{name}?{query}"))?;
    Ok(zoo::script(entry, name, &params)?)
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn emit(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn param(params: &Params, key: &str, default: i64) -> Result<i64> {
    match params.get(key) {
        None => Ok(default),
        Some(s) => s.parse().map_err(|_| anyhow!("parameter `{key}` must be an integer")),
    }
}

fn cmd_validate(args: &ValidateArgs) -> Result<Status> {
    let loaded = load_arena(&args.arena.arena)?;
    let report = validate(loaded.arena.as_ref(), args.depth);
    println!(
        "{}: {} vertices explored{}",
        loaded.source,
        report.explored,
        if report.truncated { " (stopped at the depth limit)" } else { "" }
    );
    for v in &report.violations {
        println!("violation: {v}");
    }
    if let Some(s) = &args.strategy {
        let sigma = load_strategy(s, &loaded)?;
        println!("strategy {} ({})", sigma.name(), sigma.kind());
    }
    Ok(if report.is_valid() { Status::Ok } else { Status::Failed })
}

fn cmd_simulate(args: &SimulateArgs) -> Result<Status> {
    let loaded = load_arena(&args.arena.arena)?;
    let s1 = load_strategy(&args.p1, &loaded)?;
    let s2 = load_strategy(&args.p2, &loaded)?;
    let arena = loaded.arena.as_ref();
    let record = play(arena, arena.start(), &s1, &s2, args.horizon)?;
    emit(args.out.as_deref(), &record.to_csv())?;
    Ok(Status::Ok)
}

/// The adversary for `entry`, with `horizon` defaulted per arena.
fn run_adversary(
    entry: &str,
    params: &Params,
    sigma: &Strategy,
    window: i64,
    horizon: Option<usize>,
) -> Result<Defeat, AdversaryError> {
    let int = |key: &str, default: i64| {
        param(params, key, default).map_err(|e| AdversaryError::NotApplicable(sigma.name().into(), e.to_string()))
    };
    match entry {
        "a4" | "a4guarded" => ramsey_adversary(
            sigma,
            entry == "a4guarded",
            window,
            horizon.unwrap_or(200_000),
            DEFAULT_LABEL_BUDGET,
        ),
        "a1prime" => defeat_fm_match(sigma, MatchTarget::A1Prime { b: int("b", 8)? }, horizon.unwrap_or(8)),
        "a2" => defeat_fm_match(sigma, MatchTarget::A2, horizon.unwrap_or(8)),
        "a3" => defeat_sc_on_a3(sigma, horizon.unwrap_or(400)),
        "buchib" => defeat_sc_buchi(sigma, int("b", 4)?, horizon.unwrap_or(400)),
        "bitarena" => defeat_sc_bit(sigma, int("unit", 0)? == 1, horizon.unwrap_or(8) as i64),
        other => Err(AdversaryError::NotApplicable(
            sigma.name().into(),
            format!("no adversary for zoo entry `{other}`"),
        )),
    }
}

fn adversary_status(e: &AdversaryError) -> Status {
    match e {
        AdversaryError::Inconclusive(_) | AdversaryError::NoCliqueFound { .. } => Status::Inconclusive,
        _ => Status::Failed,
    }
}

fn cmd_defeat(args: &DefeatArgs) -> Result<Status> {
    let loaded = load_arena(&args.arena.arena)?;
    let Some((entry, params)) = &loaded.zoo else {
        bail!("defeat needs a zoo arena");
    };
    let sigma = load_strategy(&args.strategy, &loaded)?;
    match run_adversary(entry, params, &sigma, args.window, args.horizon) {
        Ok(d) => {
            let c = &d.certificate;
            eprintln!(
                "{}: {} after {} steps, final payoff {}",
                sigma.name(),
                c.claim.name(),
                d.play.edges.len(),
                d.play.final_tp()
            );
            if let Some(plan) = &d.plan {
                eprintln!("plan: {}", serde_json::to_string(plan)?);
            }
            emit(args.out.as_deref(), &c.to_json())?;
            Ok(if c.partial { Status::Inconclusive } else { Status::Ok })
        }
        Err(e) => {
            eprintln!("{}: {e}", sigma.name());
            Ok(adversary_status(&e))
        }
    }
}

fn synth_status(rep: &SynthReport) -> Status {
    if rep.certified() {
        Status::Ok
    } else if rep.partial.is_some() {
        Status::Inconclusive
    } else {
        Status::Failed
    }
}

fn cmd_synthesize(args: &SynthesizeArgs) -> Result<Status> {
    let loaded = load_arena(&args.arena.arena)?;
    let objective: Objective = args.objective.parse()?;
    let zero = Extended::Finite(Default::default());
    let family = match &objective {
        Objective::Quant(Quantitative {
            kind,
            mode: LimitMode::Limsup,
            relation: Relation::GreaterEq,
            threshold,
        }) if *threshold == zero => match kind {
            PayoffKind::Mean => ValueFamily::MeanPayoff,
            PayoffKind::Total => ValueFamily::TotalPayoffSup,
        },
        _ => bail!("synthesis supports mp:limsup:>=:0 and tp:limsup:>=:0"),
    };
    let caps = Caps {
        depth: args.depth,
        node_cap: node_cap_from_env(),
    };
    let arena = loaded.arena.as_ref();
    let v0 = arena.start().clone();
    let given = args.strategy.as_deref().map(|s| load_strategy(s, &loaded)).transpose()?;
    let entry = loaded.zoo.as_ref().map(|(n, _)| n.as_str());

    let rep = match (&loaded.explicit, family) {
        (Some(explicit), _) if entry.and_then(zoo_region).is_none() => {
            let values = solve_values(explicit, family)?;
            let oracle = match given {
                Some(s) => s,
                None => values.witness.clone().ok_or_else(|| anyhow!("no witness strategy; pass --strategy"))?,
            };
            match family {
                ValueFamily::MeanPayoff => {
                    let region = Region::Vertices(values.winning());
                    bubble_synthesize(arena, &loaded.source, &v0, &Family::MpSupGe0, args.m_max, &oracle, &region, caps)?
                }
                ValueFamily::TotalPayoffSup => {
                    let (safe, region) = sigma_safe(explicit, &values)?;
                    sc1bit_synthesize(arena, &loaded.source, &v0, args.m_max, &oracle, &safe, &region, caps)?
                }
            }
        }
        _ => {
            let entry = entry.ok_or_else(|| anyhow!("no winning region known for this arena"))?;
            let region = zoo_region(entry).ok_or_else(|| anyhow!("no winning region known for `{entry}`"))?;
            let script = |name: &str| zoo::script(entry, name, &Params::new());
            let oracle = match given {
                Some(s) => s,
                None => {
                    let first = CATALOGUE.iter().find(|c| c.0 == entry).and_then(|c| c.3.first());
                    script(first.ok_or_else(|| anyhow!("pass --strategy"))?)?
                }
            };
            match family {
                ValueFamily::MeanPayoff => {
                    bubble_synthesize(arena, &loaded.source, &v0, &Family::MpSupGe0, args.m_max, &oracle, &region, caps)?
                }
                ValueFamily::TotalPayoffSup => {
                    let safe = script("safe").context("the zoo entry has no memoryless `safe` strategy")?;
                    sc1bit_synthesize(arena, &loaded.source, &v0, args.m_max, &oracle, &safe, &region, caps)?
                }
            }
        }
    };

    println!("{}", rep.to_text());
    if let Some(out) = &args.out {
        write_atomic(out, &write_strategy(&rep.strategy, entry)?)?;
        let mut cert_path = out.clone().into_os_string();
        cert_path.push(".cert.json");
        write_atomic(Path::new(&cert_path), &rep.certificate.to_json())?;
    }
    Ok(synth_status(&rep))
}

fn cmd_verify(args: &VerifyArgs) -> Result<Status> {
    let text = std::fs::read_to_string(&args.certificate)
        .with_context(|| format!("reading {}", args.certificate.display()))?;
    let cert = match Certificate::from_json(&text) {
        Ok(c) => c,
        Err(e) => {
            println!("rejected: malformed certificate: {e}");
            return Ok(Status::Failed);
        }
    };
    let loaded = load_arena(args.arena.as_deref().unwrap_or(&cert.arena))?;
    let p1 = match (&args.p1, &cert.p1) {
        (Some(spec), _) => Some(load_strategy(spec, &loaded)?),
        (None, Some(t)) => match parse_strategy(t) {
            Ok(s) => Some(s),
            Err(e) => {
                println!("rejected: embedded strategy does not parse: {e}");
                return Ok(Status::Failed);
            }
        },
        (None, None) => None,
    };
    let ctx = CheckContext {
        arena: loaded.arena.as_ref(),
        p1: p1.as_ref(),
        depth_cap: args.depth,
        node_cap: node_cap_from_env(),
    };
    let report = check_certificate(&cert, &ctx);
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(match (report.accepted, cert.partial) {
        (false, _) => Status::Failed,
        (true, true) => Status::Inconclusive,
        (true, false) => Status::Ok,
    })
}

fn cmd_zoo(action: &ZooAction) -> Result<Status> {
    match action {
        ZooAction::List => {
            for (name, defaults, provenance, scripts) in CATALOGUE {
                let defaults = if defaults.is_empty() { "-" } else { defaults };
                println!("{name}\t{defaults}\t{}\t{provenance}", scripts.join(","));
            }
        }
        ZooAction::Export { uri, format, depth, out } => {
            let loaded = load_arena(uri)?;
            let arena = loaded.arena.as_ref();
            let text = match (format, &loaded.explicit) {
                (ExportFormat::Text, Some(a)) => write_arena(a),
                (ExportFormat::Text, None) => {
                    let depth = depth.ok_or_else(|| anyhow!("`{uri}` is generated; pass --depth"))?;
                    let prefix = truncate(arena, arena.start(), depth)
                        .with_context(|| format!("the first {depth} steps of `{uri}` do not close off; try --format dot"))?;
                    write_arena(&prefix)
                }
                (ExportFormat::Dot, _) => to_dot(arena, arena.start(), depth.unwrap_or(12))?,
            };
            emit(out.as_deref(), &text)?;
        }
    }
    Ok(Status::Ok)
}

struct BenchRow {
    entry: String,
    strategy: String,
    kind: String,
    outcome: String,
    steps: String,
    payoff: String,
}

fn bench_row(entry: &str, script_name: &str, params: &Params, window: i64) -> BenchRow {
    let mut row = BenchRow {
        entry: entry.to_string(),
        strategy: script_name.to_string(),
        kind: "-".into(),
        outcome: String::new(),
        steps: "-".into(),
        payoff: "-".into(),
    };
    let sigma = match zoo::script(entry, script_name, params) {
        Ok(s) => s,
        Err(e) => {
            row.outcome = format!("error: {e}");
            return row;
        }
    };
    row.strategy = sigma.name().to_string();
    row.kind = sigma.kind().to_string();
    match run_adversary(entry, &Params::new(), &sigma, window, None) {
        Ok(d) => {
            row.outcome = format!("defeated: {}", d.certificate.claim.name());
            row.steps = d.play.edges.len().to_string();
            row.payoff = d.play.final_tp().to_string();
        }
        Err(AdversaryError::NotApplicable(_, why)) => row.outcome = format!("not applicable: {why}"),
        Err(e) => row.outcome = format!("{}: {e}", if adversary_status(&e) == Status::Inconclusive { "inconclusive" } else { "failed" }),
    }
    row
}

fn cmd_bench(args: &BenchArgs) -> Result<Status> {
    let mut tasks: Vec<(String, String, Params)> = Vec::new();
    for (name, _, _, scripts) in CATALOGUE {
        for script in scripts.iter() {
            if *script == "random_fm" {
                for n in 0..args.samples {
                    let seed = args.seed.wrapping_add(n);
                    let params: Params = BTreeMap::from([("seed".to_string(), seed.to_string())]);
                    tasks.push((name.to_string(), script.to_string(), params));
                }
            } else {
                tasks.push((name.to_string(), script.to_string(), Params::new()));
            }
        }
    }
    let rows: Vec<BenchRow> = tasks
        .par_iter()
        .map(|(entry, script, params)| bench_row(entry, script, params, args.window))
        .collect();
    let mut out = String::from("arena\tstrategy\tkind\toutcome\tsteps\tpayoff\n");
    for r in &rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            r.entry, r.strategy, r.kind, r.outcome, r.steps, r.payoff
        ));
    }
    emit(args.out.as_deref(), &out)?;
    Ok(if rows.iter().any(|r| r.outcome.starts_with("error") || r.outcome.starts_with("failed")) {
        Status::Failed
    } else {
        Status::Ok
    })
}

fn run(cli: &Cli) -> Result<Status> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            bail!("--jobs must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match &cli.command {
        Command::Validate(a) => cmd_validate(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Defeat(a) => cmd_defeat(a),
        Command::Synthesize(a) => cmd_synthesize(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Zoo { action } => cmd_zoo(action),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn main() -> ExitCode {
    // Usage errors exit with 1; 2 is reserved for inconclusive results.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(status) => status.into(),
        Err(e) => {
            eprintln!("error: {e:#}");
            Status::Failed.into()
        }
    }
}
