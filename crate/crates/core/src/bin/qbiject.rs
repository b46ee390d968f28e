use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use malachite_base::num::arithmetic::traits::Pow;
use malachite_base::num::logic::traits::SignificantBits;
use malachite_nz::natural::Natural;

use qbiject::avoid::AvoidFamily;
use qbiject::basic::run_basic;
use qbiject::bounds::SlowFunction;
use qbiject::heights::run_heights;
use qbiject::lex::{lex_cmp, lex_enumerate, lex_index, EnumKind};
use qbiject::pila::{count_cf_poly, run_pila};
use qbiject::poly::{enclosure_with_tail, eval_enclosure};
use qbiject::trace::{
    Config, Mode, ScheduleKind, Trace, DEFAULT_EXPONENT_BUDGET, DEFAULT_NODE_LIMIT,
};
use qbiject::verify::{asymptotic_suite, verify_trace};
use qbiject::{Error, Exec, Rat, UnitRat};

#[derive(Parser)]
#[command(
    name = "qbiject",
    version,
    about = "Analytic bijections of the rationals in [0, 1]"
)]
struct Cli {
    /// Run scans on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Basic,
    Heights,
    Pila,
}

#[derive(Clone, Copy, ValueEnum)]
enum YEnumArg {
    Lex,
    LexDescending,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long, value_enum)]
    mode: ModeArg,
    #[arg(long)]
    depth: Option<u64>,
    #[arg(long)]
    stages: Option<u64>,
    /// `strict` or `scaled:C`.
    #[arg(long, default_value = "strict")]
    schedule: String,
    /// Avoid family: a JSON file, or `defaults`, `nonidentity`, `none`.
    /// Defaults to `defaults`, or `nonidentity` in pila mode.
    #[arg(long)]
    avoid: Option<String>,
    #[arg(long, value_enum, default_value = "lex")]
    y_enum: YEnumArg,
    /// Slow function `c,k` for s(T) = c (ln T)^k.
    #[arg(long, default_value = "2,1")]
    slow: String,
    #[arg(long)]
    exponent_budget: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_NODE_LIMIT)]
    node_limit: u64,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a construction and write its trace.
    Construct(ConstructArgs),
    /// Replay a trace and print the verification report.
    Verify {
        trace: PathBuf,
        /// Expected mode; a mismatch is a usage error.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Exact value at an assigned node, otherwise an enclosure of f(q).
    Eval {
        trace: PathBuf,
        q: String,
        /// Partial sum index to enclose from (defaults to the trace depth).
        #[arg(long)]
        n: Option<u64>,
    },
    /// C_f(T) for a pila trace.
    Count { trace: PathBuf, t: u64 },
    /// Print x_from .. x_(from+count-1), or the index of a rational.
    Enumerate {
        #[arg(long, default_value_t = 0)]
        from: u64,
        #[arg(long, default_value_t = 20)]
        count: u64,
        #[arg(long)]
        index_of: Option<String>,
    },
    /// Dump assigned pairs sorted by height then value.
    Export {
        trace: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Exact scan of H(x_n)^2 >= 2n and the H(x_n) ~ π √(n/3) ratio.
    Asymptotic {
        #[arg(long, default_value_t = 1_000_000)]
        n_max: u64,
    },
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Basic => Mode::Basic,
            ModeArg::Heights => Mode::Heights,
            ModeArg::Pila => Mode::Pila,
        }
    }
}

enum Fail {
    Usage(String),
    Lib(Error),
    Unverified,
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

type CmdResult = std::result::Result<(), Fail>;

/// Decimal digit count, exact.
fn digits(n: &Natural) -> u64 {
    if *n == 0u32 {
        return 1;
    }
    // bits * log10(2) is within one of the answer
    let est = (n.significant_bits().saturating_sub(1)) * 30103 / 100000;
    let mut k = est.max(1);
    while Natural::from(10u32).pow(k) <= *n {
        k += 1;
    }
    while k > 1 && Natural::from(10u32).pow(k - 1) > *n {
        k -= 1;
    }
    k
}

fn parse_schedule(s: &str) -> std::result::Result<ScheduleKind, Fail> {
    if s == "strict" {
        return Ok(ScheduleKind::Strict);
    }
    s.strip_prefix("scaled:")
        .and_then(|c| c.parse().ok())
        .filter(|&c: &u64| c >= 1)
        .map(|c| ScheduleKind::Scaled { c })
        .ok_or_else(|| Fail::Usage(format!("bad schedule {s:?}; use strict or scaled:C")))
}

fn parse_slow(s: &str) -> std::result::Result<SlowFunction, Fail> {
    let bad = || Fail::Usage(format!("bad slow function {s:?}; use c,k"));
    let (c, k) = s.split_once(',').ok_or_else(bad)?;
    let c = c.trim();
    let c: Rat = if c.contains('/') {
        c.parse().map_err(|_| bad())?
    } else {
        Rat::int(c.parse().map_err(|_| bad())?)
    };
    let k: u32 = k.trim().parse().map_err(|_| bad())?;
    if c.is_negative() || k == 0 {
        return Err(bad());
    }
    Ok(SlowFunction::new(c, k))
}

fn load_avoid(spec: &str) -> std::result::Result<AvoidFamily, Fail> {
    Ok(match spec {
        "defaults" => AvoidFamily::lft_defaults(),
        "nonidentity" => AvoidFamily::lft_nonidentity(),
        "none" => AvoidFamily::empty(),
        path => AvoidFamily::load(Path::new(path))?,
    })
}

fn exponent_budget(flag: Option<u64>) -> std::result::Result<u64, Fail> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var("QBIJECT_EXPONENT_BUDGET") {
        Ok(v) => v
            .parse()
            .map_err(|_| Fail::Usage(format!("QBIJECT_EXPONENT_BUDGET={v:?} is not an integer"))),
        Err(_) => Ok(DEFAULT_EXPONENT_BUDGET),
    }
}

fn max_bits<'a>(it: impl Iterator<Item = &'a Natural>) -> Option<&'a Natural> {
    it.max_by_key(|n| n.significant_bits())
}

fn print_summary(trace: &Trace) {
    println!("mode: {}", trace.mode);
    if trace.mode == Mode::Pila {
        for s in &trace.stages {
            println!(
                "stage {}: T = {}, |Q| = {}, case {:?}, C_f(T) = {}, z = {}",
                s.n, s.t_n, s.q_size, s.case, s.c_f, s.z_n
            );
        }
        return;
    }
    let odd = trace
        .steps
        .iter()
        .filter(|s| s.kind == qbiject::trace::StepKind::Odd)
        .count();
    let even = trace
        .steps
        .iter()
        .filter(|s| s.kind == qbiject::trace::StepKind::Even)
        .count();
    println!("steps: {} ({odd} odd, {even} even)", trace.steps.len() - 1);
    println!("assigned pairs: {}", trace.steps.len());
    if let Some(d) = max_bits(trace.steps.iter().map(|s| s.node.value().denom())) {
        println!("largest node denominator: {} digits", digits(d));
    }
    if let Some(d) = max_bits(trace.steps.iter().map(|s| s.value.value().denom())) {
        println!("largest value denominator: {} digits", digits(d));
    }
}

fn construct(args: &ConstructArgs) -> CmdResult {
    let ConstructArgs {
        mode,
        depth,
        stages,
        schedule,
        avoid,
        y_enum,
        slow,
        exponent_budget: budget,
        node_limit,
        out,
    } = args;
    let (mode, depth, stages, budget, node_limit) = (*mode, *depth, *stages, *budget, *node_limit);
    let avoid = match (avoid.as_deref(), mode) {
        (Some(a), _) => load_avoid(a)?,
        (None, ModeArg::Pila) => AvoidFamily::lft_nonidentity(),
        (None, _) => AvoidFamily::lft_defaults(),
    };
    let y_kind = match *y_enum {
        YEnumArg::Lex => EnumKind::Lex,
        YEnumArg::LexDescending => EnumKind::LexDescending,
    };
    let need_depth = || depth.ok_or_else(|| Fail::Usage("--depth is required".into()));
    let mut config = match mode {
        ModeArg::Basic => Config::basic(need_depth()?, avoid),
        ModeArg::Heights => Config::heights(need_depth()?, parse_schedule(schedule)?, avoid),
        ModeArg::Pila => {
            let stages = stages.ok_or_else(|| Fail::Usage("--stages is required".into()))?;
            Config::pila(stages, parse_slow(slow)?, avoid)
        }
    };
    config.y_enum = y_kind;
    config.exponent_budget = exponent_budget(budget)?;
    config.node_limit = node_limit;
    let result = match mode {
        ModeArg::Basic => run_basic(&config).map(|r| r.1),
        ModeArg::Heights => run_heights(&config).map(|r| r.1),
        ModeArg::Pila => run_pila(&config).map(|r| r.1),
    };
    let trace = match result {
        Ok(t) => t,
        Err(Error::ScheduleOverflow {
            step,
            exponent,
            budget,
        }) => {
            eprintln!(
                "step {step} needs grid exponent {exponent}, above the budget {budget}; \
                 lower --depth, use --schedule scaled:C, or raise QBIJECT_EXPONENT_BUDGET"
            );
            return Err(Fail::Lib(Error::ScheduleOverflow {
                step,
                exponent,
                budget,
            }));
        }
        Err(e) => return Err(e.into()),
    };
    trace.save(out)?;
    print_summary(&trace);
    if let (ModeArg::Heights, Some(ScheduleKind::Strict)) = (mode, config.schedule) {
        let sched = qbiject::heights::HeightSchedule::strict();
        let next = trace.steps.last().map_or(0, |s| s.m) + 1;
        let m = if next % 2 == 0 { next - 1 } else { next };
        let e = sched.majorant_exponent(m);
        if e > config.exponent_budget {
            eprintln!(
                "warning: the next even step (step {}) needs grid exponent {e}, above the budget {}",
                m + 1,
                config.exponent_budget
            );
        }
    }
    println!("trace written to {}", out.display());
    Ok(())
}

fn verify(exec: Exec, path: &Path, mode: Option<ModeArg>, report: Option<&Path>) -> CmdResult {
    let trace = Trace::load(path)?;
    if let Some(m) = mode {
        if Mode::from(m) != trace.mode {
            return Err(Fail::Usage(format!(
                "--mode {} does not match the trace mode {}",
                Mode::from(m),
                trace.mode
            )));
        }
    }
    let rep = verify_trace(&trace, exec)?;
    let json = rep.to_json();
    match report {
        Some(p) => {
            std::fs::write(p, &json).map_err(|e| Fail::Usage(format!("{}: {e}", p.display())))?
        }
        None => println!("{json}"),
    }
    eprintln!(
        "pass {}, fail {}, marginal {}",
        rep.summary.pass, rep.summary.fail, rep.summary.marginal
    );
    if rep.all_pass() {
        Ok(())
    } else {
        Err(Fail::Unverified)
    }
}

fn parse_unit(q: &str) -> std::result::Result<UnitRat, Fail> {
    let r: Rat = q.parse()?;
    Ok(UnitRat::new(r)?)
}

fn eval(path: &Path, q: &str, n: Option<u64>) -> CmdResult {
    let trace = Trace::load(path)?;
    let q = parse_unit(q)?;
    if trace.mode == Mode::Pila {
        let f = trace.pila_poly();
        let last = trace.stages.last();
        let frozen = last.is_some_and(|s| *q.value().height_ref() <= Natural::from(s.t_n))
            || trace.stages.iter().any(|s| s.z_n == q);
        if frozen {
            println!("{}", f.eval(q.value()));
            return Ok(());
        }
        let size = last.map_or(0, |s| s.q_size);
        // later corrections are bounded by 4^(-|Q_n|-1) with |Q_n| increasing
        let tail = &Rat::pow4_neg(size + 1) / &Rat::int(3);
        let (lo, hi) = enclosure_with_tail(&f, q.value(), &tail);
        println!("[{lo}, {hi}]");
        return Ok(());
    }
    if let Some(v) = trace.f_exact_at(&q) {
        println!("{v}");
        return Ok(());
    }
    let depth = trace.steps.last().map_or(0, |s| s.m);
    let n = n.unwrap_or(depth);
    if n == 0 {
        return Err(Fail::Usage("--n must be at least 1".into()));
    }
    let f_n = trace.partial_sum(n)?;
    let (lo, hi) = eval_enclosure(&f_n, n, q.value());
    println!("[{lo}, {hi}]");
    Ok(())
}

fn count(exec: Exec, path: &Path, t: u64) -> CmdResult {
    let trace = Trace::load(path)?;
    if trace.mode != Mode::Pila {
        return Err(Fail::Usage("count needs a pila trace".into()));
    }
    let available = trace.stages.last().map_or(0, |s| s.t_n);
    if t > available {
        return Err(Error::StageTooShallow {
            requested: t,
            available,
        }
        .into());
    }
    println!("{}", count_cf_poly(&trace.pila_poly(), t, exec));
    Ok(())
}

fn enumerate(from: u64, count: u64, index_of: Option<&str>) -> CmdResult {
    if let Some(q) = index_of {
        println!("{}", lex_index(&parse_unit(q)?)?);
        return Ok(());
    }
    for i in from..from + count {
        println!("{i}\t{}", lex_enumerate(i));
    }
    Ok(())
}

fn export(path: &Path, format: Format, points: Option<usize>, out: Option<&Path>) -> CmdResult {
    let trace = Trace::load(path)?;
    let mut pairs = trace.assigned_pairs();
    pairs.sort_by(|a, b| lex_cmp(&a.0, &b.0));
    if let Some(k) = points {
        if k > pairs.len() {
            eprintln!("warning: {k} points requested, {} available", pairs.len());
        }
        pairs.truncate(k);
    }
    let text = match format {
        Format::Csv => {
            let mut s = String::from("x,f_x\n");
            for (x, y) in &pairs {
                s.push_str(&format!("{x},{y}\n"));
            }
            s
        }
        Format::Json => {
            let v: Vec<[String; 2]> = pairs
                .iter()
                .map(|(x, y)| [x.to_string(), y.to_string()])
                .collect();
            serde_json::to_string_pretty(&v).expect("pairs serialize")
        }
    };
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| Fail::Usage(format!("{}: {e}", p.display())))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn asymptotic(exec: Exec, n_max: u64) -> CmdResult {
    if n_max < 10 {
        return Err(Fail::Usage("--n-max must be at least 10".into()));
    }
    let r = asymptotic_suite(n_max, exec);
    println!(
        "{}",
        serde_json::to_string_pretty(&r).expect("report serializes")
    );
    if r.all_pass() {
        Ok(())
    } else {
        Err(Fail::Unverified)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::default()
    };
    let res = match &cli.cmd {
        Cmd::Construct(args) => construct(args),
        Cmd::Verify {
            trace,
            mode,
            report,
        } => verify(exec, trace, *mode, report.as_deref()),
        Cmd::Eval { trace, q, n } => eval(trace, q, *n),
        Cmd::Count { trace, t } => count(exec, trace, *t),
        Cmd::Enumerate {
            from,
            count,
            index_of,
        } => enumerate(*from, *count, index_of.as_deref()),
        Cmd::Export {
            trace,
            format,
            points,
            out,
        } => export(trace, *format, *points, out.as_deref()),
        Cmd::Asymptotic { n_max } => asymptotic(exec, *n_max),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Unverified) => ExitCode::from(1),
        Err(Fail::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Fail::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
