//! Command-line front end: argument definitions and the rendering of
//! every subcommand's results as CSV (the plotting interface) or as a
//! single JSON envelope.
//!
//! Formatting rules the output relies on: floats are printed with Rust's
//! shortest round-trip representation, CSV uses a header row with LF line
//! endings and `.` decimals, and JSON objects keep a fixed key order so
//! that parse-and-reserialize is byte-identical.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::absorption::{cycle_length_pmf, expected_cycle_length, update_rate};
use crate::accuracy::emse;
use crate::error::Result;
use crate::model::WalkParams;
use crate::planner::{min_update_rate, sweep, PlanResult, SweepRow};
use crate::series::{certified_truncation, nsaoi, BoundedValue};
use crate::sim::{simulate_replications, RunLength, SimConfig, SimulationReport};

/// Output encoding selected by `--format`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Header row plus data rows; the plotting interface.
    Csv,
    /// One self-describing envelope object.
    Json,
}

/// Top-level command line.
#[derive(Debug, Parser)]
#[command(
    name = "aoiwalk",
    version,
    about = "Age-of-information analytics for threshold-triggered updates of a lazy random walk"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub output: Option<std::path::PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Update rate, mean cycle, certified NSAoI, and EMSE for one threshold.
    Analyze(AnalyzeArgs),
    /// Cycle-length distribution table.
    Pmf(PmfArgs),
    /// Seeded Monte Carlo simulation of the update process.
    Simulate(SimulateArgs),
    /// One analytics row per threshold in a range.
    Sweep(SweepArgs),
    /// Smallest update rate meeting NSAoI and EMSE ceilings.
    Plan(PlanArgs),
}

/// Walk and threshold parameters shared by every subcommand.
#[derive(Debug, Args)]
pub struct WalkArgs {
    /// Probability of a +1 step per slot.
    #[arg(long)]
    pub p: f64,
    /// Probability of a -1 step per slot.
    #[arg(long)]
    pub q: f64,
    /// Update threshold (an update is sent when the walk drifts T from the
    /// last update).
    #[arg(long = "T")]
    pub t: u32,
}

impl WalkArgs {
    fn params(&self) -> Result<WalkParams> {
        WalkParams::new(self.p, self.q, self.t)
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    /// Maximum width of the certified NSAoI interval.
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
}

#[derive(Debug, Args)]
#[group(multiple = false)]
pub struct PmfExtent {
    /// Emit exactly this many rows.
    #[arg(long)]
    pub lmax: Option<u64>,
    /// Derive the row count from this certification accuracy
    /// (default 1e-9 when neither flag is given, which keeps the emitted
    /// mass within 1e-9 of a full distribution).
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PmfArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    #[command(flatten)]
    pub extent: PmfExtent,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct WindowArgs {
    /// Measure a fixed number of slots.
    #[arg(long)]
    pub slots: Option<u64>,
    /// Measure a fixed number of completed update cycles.
    #[arg(long)]
    pub cycles: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    /// RNG seed; all randomness flows from it (required by design — no
    /// silent clock seeding).
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Slots to discard before measuring (default: 1000 for --slots, 0
    /// for --cycles).
    #[arg(long)]
    pub warmup: Option<u64>,
    /// Number of independent runs; seeds are derived from --seed when
    /// more than one.
    #[arg(long, default_value_t = 1)]
    pub replications: u32,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Probability of a +1 step per slot.
    #[arg(long)]
    pub p: f64,
    /// Probability of a -1 step per slot.
    #[arg(long)]
    pub q: f64,
    /// First threshold of the sweep.
    #[arg(long)]
    pub tmin: u32,
    /// Last threshold of the sweep.
    #[arg(long)]
    pub tmax: u32,
    /// Maximum width of each row's certified NSAoI interval.
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Probability of a +1 step per slot.
    #[arg(long)]
    pub p: f64,
    /// Probability of a -1 step per slot.
    #[arg(long)]
    pub q: f64,
    /// Largest admissible NSAoI.
    #[arg(long = "nsaoi-max")]
    pub nsaoi_max: f64,
    /// Largest admissible EMSE.
    #[arg(long = "emse-max")]
    pub emse_max: f64,
    /// Largest threshold the search considers.
    #[arg(long, default_value_t = 64)]
    pub tmax: u32,
    /// Maximum width of the certified NSAoI intervals used for
    /// feasibility decisions.
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
}

/// Runs the selected subcommand and renders its output in the selected
/// format (without a trailing newline).
pub fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Analyze(args) => run_analyze(args, cli.format),
        Command::Pmf(args) => run_pmf(args, cli.format),
        Command::Simulate(args) => run_simulate(args, cli.format),
        Command::Sweep(args) => run_sweep(args, cli.format),
        Command::Plan(args) => run_plan(args, cli.format),
    }
}

/// Self-describing JSON envelope shared by every subcommand.
fn envelope(command: &str, parameters: Value, result: Value) -> String {
    let doc = json!({
        "format": "json",
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "parameters": parameters,
        "result": result,
    });
    doc.to_string()
}

fn bounded_value_json(bv: &BoundedValue) -> Value {
    json!({
        "value": bv.value,
        "lower": bv.lower,
        "upper": bv.upper,
        "l_s": bv.l_s,
    })
}

fn run_analyze(args: &AnalyzeArgs, format: Format) -> Result<String> {
    let params = args.walk.params()?;
    let lambda = update_rate(&params);
    let el = expected_cycle_length(&params);
    let bound = nsaoi(&params, args.epsilon)?;
    let mse = emse(&params)?;
    let periodic = params.is_periodic();
    Ok(match format {
        Format::Csv => {
            let header =
                "lambda,expected_cycle_length,nsaoi,nsaoi_lower,nsaoi_upper,ls,emse,periodic";
            format!(
                "{header}\n{lambda},{el},{},{},{},{},{mse},{periodic}",
                bound.value, bound.lower, bound.upper, bound.l_s
            )
        }
        Format::Json => envelope(
            "analyze",
            json!({
                "p": args.walk.p,
                "q": args.walk.q,
                "T": args.walk.t,
                "epsilon": args.epsilon,
            }),
            json!({
                "lambda": lambda,
                "expected_cycle_length": el,
                "nsaoi": bounded_value_json(&bound),
                "emse": mse,
                "periodic": periodic,
            }),
        ),
    })
}

fn run_pmf(args: &PmfArgs, format: Format) -> Result<String> {
    let params = args.walk.params()?;
    let l_max = match (args.extent.lmax, args.extent.epsilon) {
        (Some(l), _) => l as usize,
        (None, eps) => certified_truncation(&params, eps.unwrap_or(1e-9))? as usize,
    };
    let pmf = cycle_length_pmf(&params, l_max)?;
    let mut cumulative = 0.0;
    let rows: Vec<(usize, f64, f64)> = (1..=pmf.len())
        .map(|l| {
            cumulative += pmf.prob(l);
            (l, pmf.prob(l), cumulative)
        })
        .collect();
    Ok(match format {
        Format::Csv => {
            let mut out = String::from("l,pmf,cumulative");
            for (l, p, c) in &rows {
                out.push_str(&format!("\n{l},{p},{c}"));
            }
            out
        }
        Format::Json => envelope(
            "pmf",
            json!({
                "p": args.walk.p,
                "q": args.walk.q,
                "T": args.walk.t,
                "lmax": args.extent.lmax,
                "epsilon": args.extent.epsilon,
            }),
            json!({
                "rows": rows
                    .iter()
                    .map(|(l, p, c)| json!({"l": l, "pmf": p, "cumulative": c}))
                    .collect::<Vec<_>>(),
            }),
        ),
    })
}

fn report_csv_row(index: u32, report: &SimulationReport) -> String {
    format!(
        "{index},{},{},{},{},{},{},{},{},{},{},{}",
        report.seed,
        report.warmup_slots,
        report.slots,
        report.cycles,
        report.update_rate,
        report.mean_cycle,
        report.cycle_second_moment,
        report.nsaoi,
        report.nsaoi_stderr,
        report.mse,
        report.mse_stderr
    )
}

fn report_json(report: &SimulationReport) -> Value {
    json!({
        "seed": report.seed,
        "warmup_slots": report.warmup_slots,
        "slots": report.slots,
        "cycles": report.cycles,
        "update_rate": report.update_rate,
        "mean_cycle": report.mean_cycle,
        "cycle_second_moment": report.cycle_second_moment,
        "nsaoi": report.nsaoi,
        "nsaoi_stderr": report.nsaoi_stderr,
        "mse": report.mse,
        "mse_stderr": report.mse_stderr,
        "histogram": report
            .histogram
            .iter()
            .map(|(&l, &c)| json!([l, c]))
            .collect::<Vec<_>>(),
    })
}

fn run_simulate(args: &SimulateArgs, format: Format) -> Result<String> {
    let params = args.walk.params()?;
    let run = match (args.window.slots, args.window.cycles) {
        (Some(s), None) => RunLength::Slots(s),
        (None, Some(c)) => RunLength::Cycles(c),
        // clap's argument group guarantees exactly one is present.
        _ => unreachable!("argument group enforces exactly one window flag"),
    };
    let config = SimConfig {
        params,
        seed: args.seed,
        run,
        warmup: args.warmup,
    };
    let reports = simulate_replications(&config, args.replications)?;
    Ok(match format {
        Format::Csv => {
            let mut out = String::from(
                "replication,seed,warmup_slots,slots,cycles,update_rate,mean_cycle,\
                 cycle_second_moment,nsaoi,nsaoi_stderr,mse,mse_stderr",
            );
            for (i, report) in reports.iter().enumerate() {
                out.push('\n');
                out.push_str(&report_csv_row(i as u32 + 1, report));
            }
            out
        }
        Format::Json => envelope(
            "simulate",
            json!({
                "p": args.walk.p,
                "q": args.walk.q,
                "T": args.walk.t,
                "seed": args.seed,
                "slots": args.window.slots,
                "cycles": args.window.cycles,
                "warmup": args.warmup,
                "replications": args.replications,
            }),
            json!({
                "replications": reports.iter().map(report_json).collect::<Vec<_>>(),
            }),
        ),
    })
}

fn sweep_row_json(row: &SweepRow) -> Value {
    json!({
        "T": row.t,
        "lambda": row.lambda,
        "nsaoi": bounded_value_json(&row.nsaoi),
        "emse": row.emse,
        "periodic": row.periodic,
        "truncated": row.truncated,
    })
}

fn run_sweep(args: &SweepArgs, format: Format) -> Result<String> {
    let rows = sweep(args.p, args.q, args.tmin, args.tmax, args.epsilon)?;
    for row in rows.iter().filter(|r| r.truncated) {
        eprintln!(
            "warning: T={}: NSAoI certification hit the truncation limit; \
             interval is best-effort (width {:e})",
            row.t,
            row.nsaoi.width()
        );
    }
    Ok(match format {
        Format::Csv => {
            let mut out = String::from("T,lambda,nsaoi,nsaoi_lower,nsaoi_upper,ls,emse,periodic");
            for row in &rows {
                out.push_str(&format!(
                    "\n{},{},{},{},{},{},{},{}",
                    row.t,
                    row.lambda,
                    row.nsaoi.value,
                    row.nsaoi.lower,
                    row.nsaoi.upper,
                    row.nsaoi.l_s,
                    row.emse,
                    row.periodic
                ));
            }
            out
        }
        Format::Json => envelope(
            "sweep",
            json!({
                "p": args.p,
                "q": args.q,
                "tmin": args.tmin,
                "tmax": args.tmax,
                "epsilon": args.epsilon,
            }),
            json!({ "rows": rows.iter().map(sweep_row_json).collect::<Vec<_>>() }),
        ),
    })
}

fn plan_json(plan: &PlanResult) -> Value {
    json!({
        "feasible": plan.feasible,
        "chosen_T": plan.chosen_t,
        "lambda_min": plan.lambda_min,
        "binding": plan.binding.as_str(),
        "feasibility_gap": plan.feasibility_gap,
    })
}

fn run_plan(args: &PlanArgs, format: Format) -> Result<String> {
    let plan = min_update_rate(
        args.p,
        args.q,
        args.nsaoi_max,
        args.emse_max,
        args.tmax,
        args.epsilon,
    )?;
    if plan.feasibility_gap {
        eprintln!(
            "warning: feasible thresholds do not form a prefix of 1..={}; \
             reported optimum is the largest feasible T",
            args.tmax
        );
    }
    Ok(match format {
        Format::Csv => {
            let chosen = plan.chosen_t.map(|t| t.to_string()).unwrap_or_default();
            let lambda = plan.lambda_min.map(|l| l.to_string()).unwrap_or_default();
            format!(
                "feasible,chosen_T,lambda_min,binding,feasibility_gap\n{},{chosen},{lambda},{},{}",
                plan.feasible,
                plan.binding.as_str(),
                plan.feasibility_gap
            )
        }
        Format::Json => envelope(
            "plan",
            json!({
                "p": args.p,
                "q": args.q,
                "nsaoi_max": args.nsaoi_max,
                "emse_max": args.emse_max,
                "tmax": args.tmax,
                "epsilon": args.epsilon,
            }),
            plan_json(&plan),
        ),
    })
}
