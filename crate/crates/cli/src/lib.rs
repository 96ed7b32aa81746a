//! Command-line front end: argument handling, file loading and report rendering.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use gfpsolve::bmdp::{qualitative_reach, reachability_values, to_nonreach_pps, Bssg, ReachClass};
use gfpsolve::certify::{certify_pair, Rejection};
use gfpsolve::format::{
    parse_bmdp, parse_policy, parse_pps, parse_strategy, player_name, write_policy, write_pps, write_strategy,
};
use gfpsolve::qualitative::{gfp_one_set, gfp_zero_set, remove_one_vars};
use gfpsolve::scalar::format_decimal;
use gfpsolve::sim::{simulate_many, summarize, Controller, RunConfig};
use gfpsolve::strategy::{
    describe_queen_worker, describe_randomized, describe_static_max, describe_static_min, describe_threshold,
};
use gfpsolve::synth::lift_residual_policy;
use gfpsolve::{solve_gfp, solve_lfp, to_snf, Error, MaxMinPps, Mode, Player, SolveOptions, SolveReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_REJECTED: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "gfpsolve", version, about = "Fixed points of max/min probabilistic polynomial systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Float,
}

#[derive(Args, Debug, Clone)]
pub struct Numeric {
    /// Target accuracy in the sup norm.
    #[arg(long, default_value_t = 1e-9)]
    pub eps: f64,
    /// Arithmetic; defaults to $GFPSOLVE_MODE, then exact.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Approximate the greatest or least fixed point of a .pps system.
    Solve {
        #[arg(long, conflicts_with = "lfp")]
        gfp: bool,
        #[arg(long)]
        lfp: bool,
        #[command(flatten)]
        num: Numeric,
        /// Run the full number of rounded iterations that guarantees the accuracy.
        #[arg(long)]
        certified: bool,
        /// Also print `key=value` lines.
        #[arg(long)]
        kv: bool,
        /// Print every iterate.
        #[arg(long)]
        trace: bool,
        file: PathBuf,
    },
    /// Variables with value 0 or 1 (.pps), or types reaching the target surely or never (.bmdp).
    Qualitative { file: PathBuf },
    /// Optimal reachability probabilities of a .bmdp model with one controller.
    Reach {
        #[command(flatten)]
        num: Numeric,
        file: PathBuf,
    },
    /// Synthesize a strategy descriptor.
    Policy {
        #[arg(long, value_enum)]
        kind: PolicyKind,
        #[arg(long, default_value_t = 1e-2)]
        eps: f64,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Write the descriptor here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        file: PathBuf,
    },
    /// Check a max policy and a min policy and bracket the value.
    Certify {
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long)]
        tau: PathBuf,
        #[command(flatten)]
        num: Numeric,
        file: PathBuf,
    },
    /// Monte Carlo runs of a .bmdp model under strategy descriptors; CSV on standard output.
    Simulate {
        #[arg(long, default_value_t = 1000)]
        runs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "max-gen", default_value_t = 1000)]
        max_gen: u32,
        #[arg(long = "max-pop", default_value_t = 10_000)]
        max_pop: u64,
        /// Strategy descriptor; repeat for the two controllers of a game.
        #[arg(long)]
        strategy: Vec<PathBuf>,
        /// Initial population such as `A=2,B=1`; defaults to one individual of the first type.
        #[arg(long)]
        init: Option<String>,
        file: PathBuf,
    },
    /// Print the non-reachability system of a .bmdp model in .pps form.
    Convert { file: PathBuf },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolicyKind {
    /// Deterministic static min policy, ε-optimal for the least fixed point.
    Static,
    /// Randomized static min policy, ε-optimal for the greatest fixed point.
    Randomized,
    /// Switch to the witness policy once the population is large.
    Threshold,
    /// Almost-sure reach from every kind with value 0.
    QueenWorker,
    /// Static max policy.
    Max,
}

/// Failure with its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_input_error() {
            EXIT_INVALID
        } else {
            EXIT_SOLVER
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message: message.into(),
    }
}

type Out = std::result::Result<i32, Failure>;

fn read(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn env_parse<T: std::str::FromStr>(key: &str) -> Option<T> {
    std::env::var(key).ok().and_then(|v| v.trim().parse().ok())
}

fn mode_of(arg: Option<ModeArg>) -> std::result::Result<Mode, Failure> {
    match arg {
        Some(ModeArg::Exact) => Ok(Mode::Exact),
        Some(ModeArg::Float) => Ok(Mode::Float),
        None => match std::env::var("GFPSOLVE_MODE").ok().as_deref() {
            None | Some("") | Some("exact") => Ok(Mode::Exact),
            Some("float") => Ok(Mode::Float),
            Some(o) => Err(invalid(format!("GFPSOLVE_MODE must be exact or float, not {o}"))),
        },
    }
}

/// Solver options from flags, with iteration budgets taken from the environment.
fn options(eps: f64, mode: Option<ModeArg>) -> std::result::Result<SolveOptions, Failure> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    let mut o = SolveOptions::with_eps(eps);
    o.mode = mode_of(mode)?;
    if let Some(v) = env_parse("GFPSOLVE_MAX_ITERATIONS") {
        o.max_iterations = v;
    }
    if let Some(v) = env_parse("GFPSOLVE_H_CAP") {
        o.h_cap = v;
    }
    if let Some(v) = env_parse("GFPSOLVE_ENUM_BUDGET") {
        o.enum_budget = v;
    }
    Ok(o)
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Exact => "exact",
        Mode::Float => "float",
    }
}

fn is_bmdp(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "bmdp")
}

fn set_names(mask: &[bool], names: &[String]) -> String {
    let v: Vec<&str> = mask
        .iter()
        .zip(names)
        .filter(|(m, _)| **m)
        .map(|(_, n)| n.as_str())
        .collect();
    format!("{{{}}}", v.join(", "))
}

/// Parses, runs and renders one invocation. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let mut text = String::new();
    let result = dispatch(cli.command, &mut text, err);
    let _ = out.write_all(text.as_bytes());
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: Command, out: &mut String, err: &mut dyn Write) -> Out {
    match cmd {
        Command::Solve {
            gfp: _,
            lfp,
            num,
            certified,
            kv,
            trace,
            file,
        } => {
            let pps = parse_pps(&read(&file)?)?;
            let mut o = options(num.eps, num.mode)?;
            o.certified = certified;
            o.record_trace = trace;
            let rep = if lfp { solve_lfp(&pps, &o)? } else { solve_gfp(&pps, &o)? };
            render_solve(out, &rep, &o, kv);
            Ok(EXIT_OK)
        }
        Command::Qualitative { file } => {
            let text = read(&file)?;
            if is_bmdp(&file) {
                render_reach_classes(out, &parse_bmdp(&text)?)?;
            } else {
                render_qualitative(out, &parse_pps(&text)?)?;
            }
            Ok(EXIT_OK)
        }
        Command::Reach { num, file } => {
            let model = parse_bmdp(&read(&file)?)?;
            let o = options(num.eps, num.mode)?;
            let rep = reachability_values(&model, &o)?;
            let _ = writeln!(out, "class: {}", rep.class.name());
            let _ = writeln!(out, "mode: {}", mode_name(o.mode));
            let _ = writeln!(out, "eps: {}", format_decimal(o.eps));
            let _ = writeln!(out, "iterations: {}", rep.iterations);
            for (t, td) in model.types.iter().enumerate() {
                let line = match rep.reduction.var_of_type[t] {
                    None => format!("{} = 1 (target)", td.name),
                    Some(v) => format!(
                        "{} = {}   non-reach {}",
                        td.name,
                        format_decimal(rep.reach[t]),
                        rep.nonreach.render(v)
                    ),
                };
                let _ = writeln!(out, "reach {line}");
            }
            Ok(EXIT_OK)
        }
        Command::Policy {
            kind,
            eps,
            mode,
            out: target,
            file,
        } => {
            let text = read(&file)?;
            let pps = if is_bmdp(&file) {
                to_nonreach_pps(&parse_bmdp(&text)?)?.pps
            } else {
                parse_pps(&text)?
            };
            let o = options(eps, mode)?;
            let snf = to_snf(&pps)?;
            let s = match kind {
                PolicyKind::Static => describe_static_min(&snf, eps)?,
                PolicyKind::Randomized => describe_randomized(&snf, eps)?,
                PolicyKind::Threshold => describe_threshold(&snf, eps)?,
                PolicyKind::QueenWorker => describe_queen_worker(&snf)?,
                PolicyKind::Max => describe_static_max(&snf, eps, o.mode)?,
            };
            let rendered = write_strategy(&s, &pps.names);
            match target {
                Some(p) => {
                    std::fs::write(&p, &rendered).map_err(|e| invalid(format!("{}: {e}", p.display())))?;
                    let _ = writeln!(out, "strategy: {} written to {}", s.kind_name(), p.display());
                }
                None => out.push_str(&rendered),
            }
            Ok(EXIT_OK)
        }
        Command::Certify { sigma, tau, num, file } => {
            let pps = parse_pps(&read(&file)?)?;
            let o = options(num.eps, num.mode)?;
            let s = parse_policy(&read(&sigma)?, &pps, Player::Max)?;
            let t = parse_policy(&read(&tau)?, &pps, Player::Min)?;
            let rep = certify_pair(&pps, &s, &t, &o)?;
            let _ = writeln!(out, "mode: {}", mode_name(o.mode));
            let _ = writeln!(out, "eps: {}", format_decimal(o.eps));
            if rep.accepted {
                let v = rep.values.expect("accepted certificates carry values");
                let _ = writeln!(out, "accepted: gap {}", format_decimal(rep.gap.unwrap_or(0.0)));
                for (i, n) in pps.names.iter().enumerate() {
                    let _ = writeln!(out, "{n} = {}", v.render(i));
                }
                Ok(EXIT_OK)
            } else {
                let reason = match rep.rejection {
                    Some(Rejection::NotLdf(w)) => {
                        let names: Vec<&str> = w.iter().map(|&i| rep.snf.names[i].as_str()).collect();
                        format!("not LDF: closed set {{{}}}", names.join(", "))
                    }
                    Some(Rejection::LfpOne(w)) => {
                        let names: Vec<&str> = w.iter().map(|&i| rep.snf.names[i].as_str()).collect();
                        format!("least fixed point equals 1 at {{{}}}", names.join(", "))
                    }
                    Some(Rejection::Gap(g)) => format!("gap {} exceeds eps/2", format_decimal(g)),
                    None => "unknown".into(),
                };
                let _ = writeln!(out, "rejected: {reason}");
                Ok(EXIT_REJECTED)
            }
        }
        Command::Simulate {
            runs,
            seed,
            max_gen,
            max_pop,
            strategy,
            init,
            file,
        } => {
            if runs == 0 {
                return Err(invalid("runs must be positive"));
            }
            let model = parse_bmdp(&read(&file)?)?;
            let red = to_nonreach_pps(&model)?;
            let mut strategies = Vec::new();
            for p in &strategy {
                strategies.push(parse_strategy(&read(p)?, &red.pps)?);
            }
            let counts = initial_population(&model, init.as_deref())?;
            let ctrl = Controller::new(&model, &strategies)?;
            let cfg = RunConfig {
                max_generations: max_gen,
                max_population: max_pop,
                seed,
            };
            let outcomes = simulate_many(&ctrl, &counts, runs, &cfg);
            out.push_str("run,verdict,generations,peak\n");
            for (r, o) in outcomes.iter().enumerate() {
                let _ = writeln!(out, "{r},{},{},{}", o.verdict.name(), o.generations, o.peak);
            }
            let e = summarize(&outcomes);
            let _ = writeln!(
                err,
                "reached {} of {} (p = {}, 95% CI [{}, {}]); extinct {}; censored {} (bracket [{}, {}])",
                e.reached,
                e.runs,
                format_decimal(e.p_hat),
                format_decimal(e.wilson.0),
                format_decimal(e.wilson.1),
                e.extinct,
                e.censored,
                format_decimal(e.bracket.0),
                format_decimal(e.bracket.1)
            );
            Ok(EXIT_OK)
        }
        Command::Convert { file } => {
            let model = parse_bmdp(&read(&file)?)?;
            out.push_str(&write_pps(&to_nonreach_pps(&model)?.pps));
            Ok(EXIT_OK)
        }
    }
}

fn initial_population(model: &Bssg, init: Option<&str>) -> std::result::Result<Vec<usize>, Failure> {
    let mut counts = vec![0; model.types.len()];
    let Some(init) = init else {
        counts[0] = 1;
        return Ok(counts);
    };
    for part in init.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, k) = match part.split_once('=') {
            Some((n, k)) => (n.trim(), k.trim().parse().map_err(|_| invalid(format!("bad count in {part}")))?),
            None => (part, 1),
        };
        let t = model
            .type_index(name)
            .ok_or_else(|| invalid(format!("unknown type {name} in --init")))?;
        counts[t] += k;
    }
    Ok(counts)
}

fn render_solve(out: &mut String, rep: &SolveReport, o: &SolveOptions, kv: bool) {
    let fp = match rep.fixed_point {
        gfpsolve::gnm::FixedPoint::Greatest => "greatest",
        gfpsolve::gnm::FixedPoint::Least => "least",
    };
    let _ = writeln!(out, "class: {}", rep.class.name());
    let _ = writeln!(out, "fixed point: {fp}");
    let _ = writeln!(out, "mode: {}", mode_name(o.mode));
    let _ = writeln!(out, "eps: {}", format_decimal(o.eps));
    let _ = writeln!(out, "certified: {}", rep.certified);
    let _ = writeln!(out, "precision bits (h): {}", rep.precision_bits);
    let _ = writeln!(out, "iterations: {}", rep.iterations);
    let _ = writeln!(out, "residual: {}", format_decimal(rep.residual));
    let _ = writeln!(out, "normal form: {} variables, size {}", rep.snf.len(), rep.snf.encoding_size());
    let named = |ix: &[usize]| -> String {
        let v: Vec<&str> = ix.iter().map(|&i| rep.snf.names[i].as_str()).collect();
        format!("{{{}}}", v.join(", "))
    };
    let _ = writeln!(out, "pruned to 1: {}", named(&rep.pruned_one_set));
    let _ = writeln!(out, "pruned to 0: {}", named(&rep.pruned_zero_set));
    let f = rep.values.to_f64();
    let tuple: Vec<String> = f.iter().map(|&v| format_decimal(v)).collect();
    let _ = writeln!(out, "vector: ({})", tuple.join(", "));
    for (i, n) in rep.names.iter().enumerate() {
        let _ = writeln!(out, "{n} = {}", rep.values.render(i));
    }
    for (k, x) in rep.trace.iter().enumerate() {
        let v: Vec<String> = x.iter().map(|&v| format_decimal(v)).collect();
        let _ = writeln!(out, "iterate {k}: ({})", v.join(", "));
    }
    if kv {
        let _ = writeln!(out, "class={}", rep.class.name());
        let _ = writeln!(out, "fixed_point={fp}");
        let _ = writeln!(out, "mode={}", mode_name(o.mode));
        let _ = writeln!(out, "eps={}", o.eps);
        let _ = writeln!(out, "h={}", rep.precision_bits);
        let _ = writeln!(out, "iterations={}", rep.iterations);
        let _ = writeln!(out, "residual={}", rep.residual);
        for (n, v) in rep.names.iter().zip(&f) {
            let _ = writeln!(out, "value.{n}={v}");
        }
    }
}

fn render_qualitative(out: &mut String, pps: &MaxMinPps) -> std::result::Result<(), Failure> {
    let snf = to_snf(pps)?;
    let one = gfp_one_set(&snf);
    let res = remove_one_vars(&snf, &one.in_set);
    let zero = gfp_zero_set(&res.system)?;
    let mut zero_full = vec![false; snf.len()];
    for (r, &p) in res.keep.iter().enumerate() {
        zero_full[p] = zero.in_set[r];
    }
    let names = &pps.names;
    let _ = writeln!(out, "class: {}", snf.classify().name());
    let _ = writeln!(out, "one set: {}", set_names(&snf.project(&one.in_set), names));
    let _ = writeln!(out, "zero set: {}", set_names(&snf.project(&zero_full), names));
    let sections = [
        ("min witness (keeps every value below 1 off the one set)", snf.project_policy(&one.min_witness)),
        ("max witness (keeps the one set at 1)", snf.project_policy(&one.max_witness)),
        (
            "min witness for the zero set",
            snf.project_policy(&lift_residual_policy(&snf, &res, &zero.tau_star)),
        ),
        (
            "max witness outside the zero set",
            snf.project_policy(&lift_residual_policy(&snf, &res, &zero.max_witness)),
        ),
    ];
    for (title, p) in sections {
        if p.choices.is_empty() {
            continue;
        }
        let _ = writeln!(out, "# {title}, player {}", player_name(p.player));
        out.push_str(&write_policy(&p, names));
    }
    Ok(())
}

fn render_reach_classes(out: &mut String, model: &Bssg) -> std::result::Result<(), Failure> {
    let q = qualitative_reach(model)?;
    let _ = writeln!(out, "class: {}", q.class.name());
    for (t, c) in q.per_type.iter().enumerate() {
        let label = match c {
            ReachClass::Sure => "reach value 1",
            ReachClass::Never => "reach value 0",
            ReachClass::Between => "reach value strictly between 0 and 1",
        };
        let _ = writeln!(out, "{}: {label}", model.types[t].name);
    }
    Ok(())
}
