//! `ergoseq` command line: ledgers, sequences, checks, batteries and
//! convergence experiments.
//!
//! Exit status is 2 for configuration errors, 1 when any check fails and 0
//! otherwise. Data goes to `--out` or standard output; diagnostics go to the
//! error stream.

pub mod config;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use config::{parse_pairs, start_phase, ConfigError, Format, RunConfig};
use ergoseq::dynsim::{convergence_report, count_bounds_check, standard_checkpoints, CountRecord, Orbit, SystemSpec};
use ergoseq::ledger::{check_constraints, extend_ledger, ConstraintReport, Ledger, LedgerError, ResourceBounds};
use ergoseq::rational::Rational;
use ergoseq::sequence::{banach_density, build_store, parse_lines, verify_block, BlockReport, SequenceBlock, SequenceStore};
use ergoseq::zops::battery::{fourier_battery, inequality_battery, representation_battery, standard_contexts, BatteryReport, InequalityOptions};
use ergoseq::zops::GridContext;

/// Largest `beta` whose blocks are materialized by `build-seq` and `verify`.
pub const MAX_STORE_HORIZON: u64 = 50_000_000;

#[derive(Parser, Debug)]
#[command(name = "ergoseq", version, about = "Build and check a sparse universally good sequence")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_enum)]
    pub profile: Option<ProfileArg>,
    /// Number of blocks.
    #[arg(long, global = true)]
    pub horizon: Option<u32>,
    /// key = value file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
    /// Ledger JSON to use instead of generating one.
    #[arg(long, global = true)]
    pub ledger: Option<PathBuf>,
    /// File to convert with `export`.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true)]
    pub trials: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Write the ledger JSON.
    GenParams,
    /// Write the sequence, one element per line, and block summaries.
    BuildSeq,
    /// Ledger, sequence and counting checks.
    Verify,
    /// Randomized operator batteries.
    OpsTest,
    /// Convergence report along the sequence.
    Simulate,
    /// Convert a ledger or sequence file to plot data.
    Export,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileArg {
    Faithful,
    Demo,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormatArg {
    Csv,
    Json,
}

enum Failure {
    Config(String),
    Check(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

struct Io<'a> {
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Io<'_> {
    fn emit(&mut self, out: Option<&Path>, data: &str) -> Result<(), Failure> {
        match out {
            Some(p) => std::fs::write(p, data).map_err(|e| Failure::Config(format!("cannot write {}: {e}", p.display()))),
            None => self.stdout.write_all(data.as_bytes()).map_err(|e| Failure::Check(e.to_string())),
        }
    }

    fn note(&mut self, msg: &str) {
        let _ = writeln!(self.stderr, "{msg}");
    }
}

/// Run with the given arguments (program name first) and return the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    2
                }
            };
        }
    };
    let mut io = Io { stdout, stderr };
    let result = config_for(&cli).and_then(|cfg| match cli.command {
        Command::GenParams => gen_params(&cfg, &mut io),
        Command::BuildSeq => build_seq(&cfg, &mut io),
        Command::Verify => verify(&cfg, &mut io),
        Command::OpsTest => ops_test(&cfg, &mut io),
        Command::Simulate => simulate(&cfg, &mut io),
        Command::Export => export(&cfg, &mut io),
    });
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Failure::Check(msg)) => {
            io.note(&format!("error: {msg}"));
            1
        }
        Err(Failure::Config(msg)) => {
            io.note(&format!("config error: {msg}"));
            2
        }
    }
}

fn config_for(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut pairs: BTreeMap<String, String> = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("cannot read {}: {e}", p.display())))?;
            parse_pairs(&text)?
        }
        None => BTreeMap::new(),
    };
    let mut set = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            pairs.insert(k.to_string(), v);
        }
    };
    set(
        "profile",
        cli.profile.map(|p| match p {
            ProfileArg::Faithful => "faithful".into(),
            ProfileArg::Demo => "demo".into(),
        }),
    );
    set("horizon", cli.horizon.map(|h| h.to_string()));
    set("seed", cli.seed.map(|s| s.to_string()));
    set("out", cli.out.as_ref().map(|p| p.display().to_string()));
    set(
        "format",
        cli.format.map(|f| match f {
            FormatArg::Csv => "csv".into(),
            FormatArg::Json => "json".into(),
        }),
    );
    set("ledger", cli.ledger.as_ref().map(|p| p.display().to_string()));
    set("input", cli.input.as_ref().map(|p| p.display().to_string()));
    set("trials", cli.trials.map(|t| t.to_string()));
    Ok(RunConfig::from_pairs(&pairs)?)
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn read_input(p: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("cannot read {}: {e}", p.display())))
}

/// Extend from the base block; on a failed step return what was built.
fn generate(cfg: &RunConfig) -> (Ledger, Option<LedgerError>) {
    let mut l = Ledger::base(cfg.profile.constants());
    while l.last_m() < cfg.horizon {
        match extend_ledger(&l, &ResourceBounds::default()) {
            Ok(next) => l = next,
            Err(e) => return (l, Some(e)),
        }
    }
    (l, None)
}

fn ledger_for(cfg: &RunConfig, io: &mut Io) -> Result<Ledger, Failure> {
    match &cfg.ledger {
        Some(p) => {
            let l: Ledger = serde_json::from_str(&read_input(p)?).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
            l.validate().map_err(|e| Failure::Config(e.to_string()))?;
            Ok(l)
        }
        None => match generate(cfg) {
            (l, None) => Ok(l),
            (l, Some(e)) => {
                io.note(&format!("stopped after block {}: {e}", l.last_m()));
                Err(Failure::Check(e.to_string()))
            }
        },
    }
}

fn store_for(ledger: &Ledger) -> Result<Option<SequenceStore>, Failure> {
    let fin = ledger.finalized_len();
    if fin == 0 {
        return Ok(None);
    }
    let beta = ledger.beta_at(fin as i64).map_err(|e| Failure::Check(e.to_string()))?;
    if beta > MAX_STORE_HORIZON {
        return Ok(None);
    }
    build_store(ledger, Some(fin)).map(Some).map_err(|e| Failure::Check(e.to_string()))
}

fn gen_params(cfg: &RunConfig, io: &mut Io) -> Outcome {
    let (l, err) = generate(cfg);
    io.emit(cfg.out.as_deref(), &json(&l))?;
    match err {
        None => Ok(true),
        Some(e) => {
            io.note(&format!("error: {e}"));
            if let LedgerError::InfeasibleAtScale { quantity, lower_bound, .. } = &e {
                io.note(&format!("{quantity} lower bound: {lower_bound}"));
            }
            Ok(false)
        }
    }
}

fn build_seq(cfg: &RunConfig, io: &mut Io) -> Outcome {
    let l = ledger_for(cfg, io)?;
    let Some(store) = store_for(&l)? else {
        return Err(Failure::Check(format!("no finalized blocks below {MAX_STORE_HORIZON} to build")));
    };
    io.emit(cfg.out.as_deref(), &store.export_lines())?;
    let summaries = store.summaries();
    let text = match cfg.format {
        Format::Json => json(&summaries),
        Format::Csv => {
            let mut s = String::from("m,beta_prev,beta,size,min_gap\n");
            for b in &summaries {
                let gap = b.min_gap.map(|g| g.to_string()).unwrap_or_default();
                writeln!(s, "{},{},{},{},{}", b.m, b.beta_prev, b.beta, b.size, gap).unwrap();
            }
            s
        }
    };
    match &cfg.out {
        Some(p) => {
            let ext = if cfg.format == Format::Json { "blocks.json" } else { "blocks.csv" };
            io.emit(Some(&p.with_extension(ext)), &text)?;
        }
        None => io.note(text.trim_end()),
    }
    Ok(true)
}

#[derive(Serialize)]
struct DensityPoint {
    len: u64,
    #[serde(with = "ergoseq::rational::wire")]
    density: Rational,
}

#[derive(Serialize)]
struct VerifyReport {
    horizon: u32,
    finalized: u32,
    ledger_valid: bool,
    constraints: Vec<ConstraintReport>,
    sequence_checked: bool,
    blocks: Vec<BlockReport>,
    counts: Vec<CountRecord>,
    density: Vec<DensityPoint>,
    density_decreasing: bool,
    overall: bool,
}

fn verify(cfg: &RunConfig, io: &mut Io) -> Outcome {
    let l = ledger_for(cfg, io)?;
    let ledger_valid = l.validate().is_ok();
    let mut constraints = Vec::new();
    for m in 1..=l.last_m() {
        constraints.push(check_constraints(&l, m).map_err(|e| Failure::Check(e.to_string()))?);
    }
    let store = store_for(&l)?;
    let (mut blocks, mut counts, mut density) = (Vec::new(), Vec::new(), Vec::new());
    let mut density_decreasing = true;
    let mut counts_ok = true;
    if let Some(s) = &store {
        for b in s.blocks() {
            blocks.push(verify_block(&l, s, b.m).map_err(|e| Failure::Check(e.to_string()))?);
        }
        let c = count_bounds_check(&l, s).map_err(|e| Failure::Check(e.to_string()))?;
        counts_ok = c.overall;
        counts = c.records;
        let span = s.horizon() - s.start();
        let mut len = 1000;
        while len <= span {
            let d = banach_density(s, len).map_err(|e| Failure::Check(e.to_string()))?;
            if density.last().is_some_and(|p: &DensityPoint| d >= p.density) {
                density_decreasing = false;
            }
            density.push(DensityPoint { len, density: d });
            len *= 10;
        }
    } else {
        io.note("sequence checks skipped: no finalized blocks within the store limit");
    }
    let overall = ledger_valid && constraints.iter().all(|r| r.overall) && blocks.iter().all(BlockReport::ok) && counts_ok && density_decreasing;
    let report = VerifyReport {
        horizon: cfg.horizon,
        finalized: l.finalized_len(),
        ledger_valid,
        constraints,
        sequence_checked: store.is_some(),
        blocks,
        counts,
        density,
        density_decreasing,
        overall,
    };
    let text = match cfg.format {
        Format::Json => json(&report),
        Format::Csv => verify_csv(&report),
    };
    io.emit(cfg.out.as_deref(), &text)?;
    for r in &report.constraints {
        for f in r.failed() {
            io.note(&format!("block {}: constraint {f} failed", r.m));
        }
    }
    for b in &report.blocks {
        for f in &b.failures {
            io.note(&format!("block {}: {f}", b.m));
        }
    }
    for c in report.counts.iter().filter(|c| !c.satisfied) {
        io.note(&format!("block {}: count bound {} failed at N = {:?}", c.m, c.name, c.n));
    }
    Ok(overall)
}

fn verify_csv(r: &VerifyReport) -> String {
    let mut s = String::from("section,m,n,name,lhs,rhs,relation,satisfied\n");
    for c in &r.constraints {
        for rec in &c.records {
            writeln!(s, "constraint,{},,{},{},{},{:?},{}", c.m, rec.name, rec.lhs, rec.rhs, rec.relation, rec.satisfied).unwrap();
        }
    }
    for b in &r.blocks {
        writeln!(s, "window_density,{},,min_ratio,{},{},,{}", b.m, b.min_ratio, b.max_ratio, b.lower_ok && b.upper_ok).unwrap();
        writeln!(s, "gaps,{},,min_gap,{},,,{}", b.m, b.min_gap.map(|g| g.to_string()).unwrap_or_default(), b.gap_ok && b.spacing_ok).unwrap();
    }
    for c in &r.counts {
        let n = c.n.map(|n| n.to_string()).unwrap_or_default();
        writeln!(s, "count,{},{},{},{},{},{:?},{}", c.m, n, c.name, c.lhs, c.rhs, c.relation, c.satisfied).unwrap();
    }
    for d in &r.density {
        writeln!(s, "banach_density,,{},density,{},,,{}", d.len, d.density, r.density_decreasing).unwrap();
    }
    s
}

fn ops_test(cfg: &RunConfig, io: &mut Io) -> Outcome {
    let seed = cfg.seed.ok_or_else(|| Failure::Config("ops-test needs --seed".into()))?;
    let ctxs = standard_contexts();
    let mut report = BatteryReport::default();
    let t = |default: u64| cfg.trials.unwrap_or(default);
    for r in [
        fourier_battery(&ctxs, t(200), seed),
        representation_battery(&ctxs, t(100), seed.wrapping_add(1)),
        inequality_battery(&ctxs, &InequalityOptions { trials: t(1000), seed: seed.wrapping_add(2) }),
    ] {
        report.lines.extend(r.lines);
        report.counterexamples.extend(r.counterexamples);
    }
    // Outside the ratio condition: recorded, not gated.
    let wide = GridContext::new_unchecked(&[5, 7, 11]).map_err(|e| Failure::Check(e.to_string()))?;
    let extra = inequality_battery(&[wide.clone()], &InequalityOptions { trials: t(1000).div_ceil(5), seed: seed.wrapping_add(3) });
    report.lines.extend(extra.lines);
    report.counterexamples.extend(extra.counterexamples);

    let gated = |ctx: &str, test: &str| ctx != wide.label() && !test.ends_with("norm_form");
    let violations = report.lines.iter().filter(|l| !l.pass && gated(&l.ctx, &l.test)).count();
    let text = match cfg.format {
        Format::Json => report.to_json_lines(),
        Format::Csv => {
            let mut s = String::from("test,ctx,trials,violations,max_ratio,gated\n");
            for r in report.summary() {
                writeln!(s, "{},\"{}\",{},{},{},{}", r.test, r.ctx, r.trials, r.violations, r.max_ratio, gated(&r.ctx, &r.test)).unwrap();
            }
            s
        }
    };
    io.emit(cfg.out.as_deref(), &text)?;
    let mut cx = String::new();
    for c in &report.counterexamples {
        cx.push_str(&serde_json::to_string(c).unwrap());
        cx.push('\n');
    }
    if !cx.is_empty() {
        io.note(cx.trim_end());
        if let Some(p) = &cfg.out {
            io.emit(Some(&p.with_extension("counterexamples.jsonl")), &cx)?;
        }
    }
    for r in report.summary() {
        io.note(&format!("{} {}: {} trials, {} violations, max ratio {}", r.test, r.ctx, r.trials, r.violations, r.max_ratio));
    }
    Ok(violations == 0)
}

fn simulate(cfg: &RunConfig, io: &mut Io) -> Outcome {
    let l = ledger_for(cfg, io)?;
    let store = store_for(&l)?.ok_or_else(|| Failure::Check("no finalized blocks to simulate along".into()))?;
    let e = &cfg.experiment;
    let x0 = match e.system {
        SystemSpec::Rotation { .. } => start_phase(cfg.seed, e.x0),
        _ => e.x0.unwrap_or(0),
    };
    let orbit = Orbit::new(e.system.clone(), e.observable.clone(), x0).map_err(|err| Failure::Config(err.to_string()))?;
    let len = e.length.unwrap_or(store.horizon());
    if len == 0 || len > store.horizon() {
        return Err(Failure::Config(format!("length must lie in [1, {}]", store.horizon())));
    }
    let g = orbit.sample(len).map_err(|err| Failure::Check(err.to_string()))?;
    let pts = standard_checkpoints(&store, len, e.per_decade);
    let report = convergence_report(&g, &store, &pts).map_err(|err| Failure::Check(err.to_string()))?;
    let text = match cfg.format {
        Format::Csv => report.to_csv(),
        Format::Json => json(&report),
    };
    io.emit(cfg.out.as_deref(), &text)?;
    io.note(&format!("final deviation {} at N = {}", report.final_deviation, len));
    Ok(true)
}

#[derive(Serialize)]
struct BlockRow {
    m: u32,
    beta_prev: u64,
    beta: Option<u64>,
    k: u32,
    p: u64,
    d: u64,
    gamma: f64,
    count: Option<u64>,
    min_prime: u64,
    max_prime: u64,
}

#[derive(Serialize)]
struct CountPoint {
    n: u64,
    count: u64,
    ratio: f64,
}

fn export(cfg: &RunConfig, io: &mut Io) -> Outcome {
    let p = cfg.input.as_ref().ok_or_else(|| Failure::Config("export needs --input".into()))?;
    let text = read_input(p)?;
    let out = if text.trim_start().starts_with('{') {
        let l: Ledger = serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
        let rows: Vec<BlockRow> = l
            .blocks
            .iter()
            .map(|b| BlockRow {
                m: b.m,
                beta_prev: b.beta_prev,
                beta: b.beta,
                k: b.k,
                p: b.p,
                d: b.d,
                gamma: ergoseq::rational::to_f64(&b.gamma),
                count: b.count,
                min_prime: b.min_prime(),
                max_prime: b.max_prime(),
            })
            .collect();
        match cfg.format {
            Format::Json => json(&rows),
            Format::Csv => {
                let mut s = String::from("m,beta_prev,beta,k,p,d,gamma,count,min_prime,max_prime\n");
                let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
                for r in &rows {
                    writeln!(s, "{},{},{},{},{},{},{},{},{},{}", r.m, r.beta_prev, opt(r.beta), r.k, r.p, r.d, r.gamma, opt(r.count), r.min_prime, r.max_prime).unwrap();
                }
                s
            }
        }
    } else {
        let els = parse_lines(&text).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
        let top = els.last().map(|x| x + 1).unwrap_or(1);
        let store = SequenceStore::from_blocks(vec![SequenceBlock {
            m: 1,
            beta_prev: 0,
            beta: top,
            d: 0,
            elements: els,
            deleted_per_j: vec![],
        }])
        .map_err(|e| Failure::Config(e.to_string()))?;
        let rows: Vec<CountPoint> = standard_checkpoints(&store, top, 10)
            .into_iter()
            .map(|n| {
                let count = store.prefix_count(n).unwrap();
                CountPoint { n, count, ratio: count as f64 / n as f64 }
            })
            .collect();
        match cfg.format {
            Format::Json => json(&rows),
            Format::Csv => {
                let mut s = String::from("N,count,ratio\n");
                for r in &rows {
                    writeln!(s, "{},{},{}", r.n, r.count, r.ratio).unwrap();
                }
                s
            }
        }
    };
    io.emit(cfg.out.as_deref(), &out)?;
    Ok(true)
}
