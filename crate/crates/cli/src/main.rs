//! `fbmsup`: closed-form lower bounds for the expected supremum of drifted
//! fractional Brownian motion and the simulations that check them.
//!
//! Exit codes: 0 on success, 1 for invalid arguments or I/O failures, 2 when
//! a numerical routine fails or the self-test finds a violated invariant.

mod format;
mod svg;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fbmsup::closedform::{lower_bound, m_h, m_h_coupled};
use fbmsup::selftest::{self, Report, SelftestOptions};
use fbmsup::simulate::{mc_sup_estimate, pwz_coupled_estimate};
use fbmsup::{CouplingWeights, Horizon, Problem, PwzConfig};
use format::{g17, horizon, SweepRow, SWEEP_HEADER};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "fbmsup", version, about = "Lower bounds for the expected supremum of drifted fractional Brownian motion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimized lower bound for one (H, T, a).
    Bound(BoundArgs),
    /// Grid Monte Carlo estimate of the expected supremum.
    Mc(McArgs),
    /// Sweep over H for one of the three reference cases.
    Figure(FigureArgs),
    /// Closed-form coupling bound against its pathwise simulation.
    Coupling(CouplingArgs),
    /// Run the invariant battery.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug)]
struct ProblemArgs {
    /// Hurst index in (0, 1).
    #[arg(long = "H")]
    h: f64,
    /// Horizon: a positive number or "inf".
    #[arg(long = "T")]
    t: Horizon,
    /// Drift.
    #[arg(long = "a", allow_negative_numbers = true)]
    a: f64,
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[command(flatten)]
    problem: ProblemArgs,
}

#[derive(Args, Debug)]
struct McArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Grid cells, a power of two.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    paths: usize,
    #[arg(long)]
    seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Panel {
    /// H over (0.01, 0.99).
    Left,
    /// H over (0.2, 0.8), where the relative error is read off.
    Right,
}

#[derive(Args, Debug)]
struct FigureArgs {
    /// 1: T = 1, a = 0; 2: T = 1, a = 1; 3: T = inf, a = 1 (simulated at T = 10).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    case: u8,
    /// Number of H values, endpoints included.
    #[arg(long = "h-steps")]
    h_steps: usize,
    #[arg(long)]
    n: usize,
    /// Paths per H value; 0 skips the simulation.
    #[arg(long)]
    paths: usize,
    /// Row i is simulated with seed + i.
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Panel::Left)]
    panel: Panel,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct CouplingArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, allow_negative_numbers = true)]
    cplus: f64,
    #[arg(long, allow_negative_numbers = true)]
    cminus: f64,
    /// Cells on [0, T], a power of two.
    #[arg(long)]
    grid: usize,
    #[arg(long)]
    paths: usize,
    #[arg(long)]
    seed: u64,
    /// Left and right truncation as a multiple of T.
    #[arg(long, default_value_t = 100.0)]
    truncation: f64,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    /// Multiply C_H by this factor inside the battery (mutation testing).
    #[arg(long = "mutate-ch-factor", hide = true)]
    mutate_ch_factor: Option<f64>,
}

/// Why a command stopped, and the exit code that goes with it.
#[derive(Debug)]
enum Failure {
    Invalid(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Invalid(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<fbmsup::Error> for Failure {
    fn from(e: fbmsup::Error) -> Self {
        if e.is_validation() {
            Failure::Invalid(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Invalid(format!("I/O error: {e}"))
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    // Everything goes through one buffer, written once.
    let mut out: Vec<u8> = Vec::new();
    let result = match cli.command {
        Command::Bound(args) => cmd_bound(&args, &mut out),
        Command::Mc(args) => with_threads(args.threads, || cmd_mc(&args, &mut out)),
        Command::Figure(args) => with_threads(args.threads, || cmd_figure(&args, &mut out)),
        Command::Coupling(args) => with_threads(args.threads, || cmd_coupling(&args, &mut out)),
        Command::Selftest(args) => cmd_selftest(&args, &mut out),
    };
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(&out).and_then(|()| stdout.flush());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

/// Runs `f` on a pool of `threads` workers, or on the global pool.
fn with_threads(threads: Option<usize>, f: impl FnOnce() -> Outcome + Send) -> Outcome {
    match threads {
        None => f(),
        Some(0) => Err(Failure::Invalid("--threads must be at least 1".into())),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Failure::Invalid(format!("cannot start {k} threads: {e}")))?;
            pool.install(f)
        }
    }
}

fn problem(p: &ProblemArgs) -> Result<Problem, Failure> {
    Ok(Problem::new(p.h, p.t, p.a)?)
}

fn cmd_bound(args: &BoundArgs, out: &mut impl Write) -> Outcome {
    let p = problem(&args.problem)?;
    let report = p.lower_bound()?;
    writeln!(out, "H,T,a,m_value,rho_star,lower_bound")?;
    writeln!(
        out,
        "{},{},{},{},{},{}",
        g17(p.h()),
        horizon(p.t()),
        g17(p.a()),
        g17(report.m_value),
        g17(report.rho_star),
        g17(report.lower_bound)
    )?;
    Ok(())
}

fn cmd_mc(args: &McArgs, out: &mut impl Write) -> Outcome {
    let p = problem(&args.problem)?;
    let e = mc_sup_estimate(&p, args.n, args.paths, args.seed)?;
    writeln!(out, "H,T,a,n,paths,seed,mean,stderr,ci95_lo,ci95_hi")?;
    writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{}",
        g17(p.h()),
        horizon(p.t()),
        g17(p.a()),
        e.grid_n,
        e.paths,
        e.seed,
        g17(e.mean),
        g17(e.stderr),
        g17(e.ci95_lo),
        g17(e.ci95_hi)
    )?;
    Ok(())
}

/// Evenly spaced values from `lo` to `hi`, both included.
fn h_grid(panel: Panel, steps: usize) -> Vec<f64> {
    let (lo, hi) = match panel {
        Panel::Left => (0.01, 0.99),
        Panel::Right => (0.2, 0.8),
    };
    // Rounded so that e.g. 0.35 prints as 0.35 rather than 0.35000000000000003.
    (0..steps).map(|i| ((lo + (hi - lo) * i as f64 / (steps - 1) as f64) * 1e12).round() / 1e12).collect()
}

fn cmd_figure(args: &FigureArgs, out: &mut impl Write) -> Outcome {
    if args.h_steps < 2 {
        return Err(Failure::Invalid(format!("--h-steps must be at least 2, got {}", args.h_steps)));
    }
    if args.paths == 1 {
        return Err(Failure::Invalid("--paths must be 0 (no simulation) or at least 2".into()));
    }
    // The infinite horizon is simulated on [0, 10].
    let (t, t_sim, a) = match args.case {
        1 => (Horizon::Finite(1.0), 1.0, 0.0),
        2 => (Horizon::Finite(1.0), 1.0, 1.0),
        _ => (Horizon::Infinite, 10.0, 1.0),
    };
    let mut rows = Vec::with_capacity(args.h_steps);
    for (i, h) in h_grid(args.panel, args.h_steps).into_iter().enumerate() {
        // Where the objective keeps rising to the edge of the search bracket
        // there is no optimum to report; the row keeps m_H and the simulation.
        let (bound, m_value, rho_star) = match lower_bound(h, t, a) {
            Ok(r) => (Some(r.lower_bound), r.m_value, Some(r.rho_star)),
            Err(e @ fbmsup::Error::Numerical { .. }) => {
                eprintln!("warning: H = {}: {e}; bound left empty", g17(h));
                (None, m_h(h, t, a)?, None)
            }
            Err(e) => return Err(e.into()),
        };
        let mc = if args.paths == 0 {
            None
        } else {
            let p = Problem::new(h, t_sim, a)?;
            Some(mc_sup_estimate(&p, args.n, args.paths, args.seed.wrapping_add(i as u64))?)
        };
        rows.push(SweepRow {
            h,
            t,
            a,
            bound,
            m_value,
            mc_mean: mc.map(|e| e.mean),
            mc_stderr: mc.map(|e| e.stderr),
            mc_n: mc.map(|e| e.grid_n),
            mc_paths: mc.map(|e| e.paths),
            rho_star,
        });
    }
    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.to_csv());
        csv.push('\n');
    }
    std::fs::write(&args.out, &csv)?;
    if let Some(path) = &args.svg {
        let title = format!("case {}: T = {}, a = {}", args.case, horizon(t), g17(a));
        std::fs::write(path, svg::render(&rows, &title))?;
    }
    writeln!(out, "wrote {} rows to {}", rows.len(), args.out.display())?;
    Ok(())
}

fn cmd_coupling(args: &CouplingArgs, out: &mut impl Write) -> Outcome {
    let p = problem(&args.problem)?;
    let t = match p.t() {
        Horizon::Finite(t) => t,
        Horizon::Infinite => return Err(Failure::Invalid("the coupling simulation needs a finite horizon".into())),
    };
    let c = CouplingWeights::new(args.cplus, args.cminus)?;
    let exact = m_h_coupled(p.h(), t, p.a(), c)?;
    let mut config = PwzConfig::new(t, args.grid, args.paths, args.seed);
    config.left_truncation = args.truncation * t;
    config.right_truncation = args.truncation * t;
    let e = pwz_coupled_estimate(p.h(), t, p.a(), c, &config)?;
    let z = (e.mean - exact) / e.stderr;
    writeln!(out, "H,T,a,c_plus,c_minus,m_closed_form,pwz_mean,pwz_stderr,z_score,grid,paths,seed")?;
    writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        g17(p.h()),
        g17(t),
        g17(p.a()),
        g17(c.c_plus()),
        g17(c.c_minus()),
        g17(exact),
        g17(e.mean),
        g17(e.stderr),
        g17(z),
        e.grid_n,
        e.paths,
        e.seed
    )?;
    Ok(())
}

fn cmd_selftest(args: &SelftestArgs, out: &mut impl Write) -> Outcome {
    let options = SelftestOptions { c_h_factor: args.mutate_ch_factor.unwrap_or(1.0) };
    let mut report = selftest::run(&options);
    cli_checks(&mut report);
    write!(out, "{}", report.render())?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("{} self-test check(s) failed", report.failures())))
    }
}

/// The command-line contract: CSV schema and exit-code classes.
fn cli_checks(report: &mut Report) {
    let samples = [0.1, 1.0 / 3.0, 0.7978845608028654, 6.02e23, 1e-5, 5e-324, -2.5, 1e300];
    let trips = samples.iter().all(|&x| g17(x).parse::<f64>().map(f64::to_bits) == Ok(x.to_bits()));
    let digits = g17(1.0 / 3.0) == "0.33333333333333331";
    report.record(
        "cli",
        "17-digit numbers round-trip",
        if trips && digits { Ok(format!("{} samples", samples.len())) } else { Err("formatting lost digits".into()) },
    );

    let header_ok = SWEEP_HEADER == "H,T,a,bound,m_value,mc_mean,mc_stderr,mc_n,mc_paths,rel_err,rho_star";
    let row = SweepRow {
        h: 0.5,
        t: Horizon::Infinite,
        a: 1.0,
        bound: Some(0.5),
        m_value: 0.5,
        mc_mean: None,
        mc_stderr: None,
        mc_n: None,
        mc_paths: None,
        rho_star: Some(1.0),
    };
    let csv = row.to_csv();
    let fields: Vec<&str> = csv.split(',').collect();
    let row_ok = fields.len() == 11 && fields[5..10].iter().all(|f| f.is_empty()) && !csv.to_lowercase().contains("nan");
    report.record(
        "cli",
        "sweep schema and empty fields",
        if header_ok && row_ok { Ok("11 columns".into()) } else { Err(format!("row {csv:?}")) },
    );

    let invalid = Failure::from(Problem::new(0.5, Horizon::Infinite, -1.0).unwrap_err()).code();
    let paths = Failure::from(mc_sup_estimate(&Problem::new(0.5, 1.0, 0.0).unwrap(), 64, 1, 1).unwrap_err()).code();
    let numeric = Failure::from(
        fbmsup::optimize::maximize_over_rho(|r| r, &fbmsup::optimize::ScanConfig::default()).unwrap_err(),
    )
    .code();
    report.record(
        "cli",
        "exit-code classes",
        if (invalid, paths, numeric) == (1, 1, 2) {
            Ok("validation 1, numerical 2".into())
        } else {
            Err(format!("got {invalid}, {paths}, {numeric}"))
        },
    );
}
