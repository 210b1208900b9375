use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use rayon::prelude::*;
use serde::Serialize;

use mtbudget::graph::GraphSpec;
use mtbudget::harness::{baseline_active_size, drive, Confusion, TrajectoryPoint};
use mtbudget::learners::{Algorithm, BackProjection, OnlineLearner, PerceptronBattery};
use mtbudget::{BudgetSpec, DatasetStream, KernelSpec, KernelSpec64, LearnerConfig, Scalar, StreamMetrics};

use crate::{BaselineArgs, Failure, Format, Precision, RunArgs};

/// One run of the grid, as emitted in JSON.
#[derive(Debug, Clone, Serialize)]
struct RunRecord {
    source: String,
    algo: &'static str,
    graph: String,
    kernel: String,
    precision: &'static str,
    budget: Option<String>,
    budget_resolved: Option<usize>,
    baseline_active: Option<usize>,
    eta: Option<f64>,
    seed: Option<u64>,
    back_projection: Option<&'static str>,
    epochs: u32,
    steps: u64,
    f_measure: f64,
    mistakes: u64,
    final_active: usize,
    micro: Confusion,
    per_task: Vec<Confusion>,
    trajectory: Vec<TrajectoryPoint>,
    warnings: Vec<String>,
    #[serde(skip)]
    wall_ms: u128,
}

impl RunRecord {
    fn new(common: &Common, algo: Algorithm, metrics: StreamMetrics, final_active: usize, wall_ms: u128) -> Self {
        RunRecord {
            source: common.source.clone(),
            algo: algo.name(),
            graph: String::new(),
            kernel: common.kernel.to_string(),
            precision: common.precision,
            budget: None,
            budget_resolved: None,
            baseline_active: None,
            eta: None,
            seed: None,
            back_projection: None,
            epochs: common.epochs,
            steps: metrics.steps(),
            f_measure: metrics.f_measure(),
            mistakes: metrics.mistakes,
            final_active,
            micro: metrics.micro,
            per_task: metrics.per_task,
            trajectory: metrics.trajectory,
            warnings: Vec::new(),
            wall_ms,
        }
    }
}

struct Common {
    source: String,
    kernel: KernelSpec64,
    precision: &'static str,
    epochs: u32,
}

struct Job {
    algo: Algorithm,
    graph: GraphSpec,
    budget: BudgetSpec,
    seed: u64,
}

fn precision_name(p: Precision) -> &'static str {
    match p {
        Precision::F32 => "f32",
        Precision::F64 => "f64",
    }
}

fn convert_kernel<T: Scalar>(spec: &KernelSpec64) -> anyhow::Result<KernelSpec<T>> {
    spec.to_string()
        .parse()
        .with_context(|| format!("kernel {spec} is not representable at this precision"))
}

pub fn run(args: &RunArgs, out: &mut impl Write) -> Result<ExitCode, Failure> {
    if args.algo.contains(&Algorithm::PerceptronBattery) {
        return Err(Failure::Usage("the Perceptron battery is unbudgeted; use the `baseline` subcommand".into()));
    }
    if !(args.eta > 0.0 && args.eta.is_finite()) {
        return Err(Failure::Usage(format!("eta must be positive, got {}", args.eta)));
    }
    let records = match args.precision {
        Precision::F32 => run_grid::<f32>(args)?,
        Precision::F64 => run_grid::<f64>(args)?,
    };
    emit(&records, args.output.format(), out)?;
    Ok(ExitCode::SUCCESS)
}

fn run_grid<T: Scalar>(args: &RunArgs) -> anyhow::Result<Vec<RunRecord>> {
    let stream = args.source.load::<T>()?;
    let kernel = convert_kernel::<T>(&args.kernel)?;
    let eta = T::from_f64(args.eta).context("eta not representable")?;
    let baseline = if args.budget.iter().any(BudgetSpec::needs_baseline) {
        Some(baseline_active_size(&stream, kernel)?)
    } else {
        None
    };
    let common = Common {
        source: args.source.label(),
        kernel: args.kernel,
        precision: precision_name(args.precision),
        epochs: args.epochs,
    };
    let mut jobs = Vec::new();
    for graph in &args.graph {
        for &algo in &args.algo {
            for &budget in &args.budget {
                // only mtrbp draws random numbers
                let seeds: &[u64] = if algo == Algorithm::Mtrbp { &args.seed } else { &args.seed[..1] };
                for &seed in seeds {
                    jobs.push(Job {
                        algo,
                        graph: graph.clone(),
                        budget,
                        seed,
                    });
                }
            }
        }
    }
    jobs.par_iter()
        .map(|job| run_job(&stream, &common, kernel, eta, baseline, args.back_projection, job))
        .collect()
}

fn run_job<T: Scalar>(
    stream: &DatasetStream<T>,
    common: &Common,
    kernel: KernelSpec<T>,
    eta: T,
    baseline: Option<usize>,
    rule: BackProjection,
    job: &Job,
) -> anyhow::Result<RunRecord> {
    let graph = job.graph.resolve(stream.k)?;
    let budget = job.budget.resolve(baseline.unwrap_or(0));
    let config = LearnerConfig::new(job.algo, graph, budget, kernel)
        .with_eta(eta)
        .with_seed(job.seed)
        .with_back_projection(rule);
    let mut learner = config.build()?;
    let start = Instant::now();
    let metrics = drive(stream, &mut learner, common.epochs as usize, |_, _| {})?;
    let wall_ms = start.elapsed().as_millis();
    let mut record = RunRecord::new(common, job.algo, metrics, learner.active_len(), wall_ms);
    record.graph = job.graph.label();
    record.budget = Some(job.budget.to_string());
    record.budget_resolved = Some(budget);
    record.baseline_active = if job.budget.needs_baseline() { baseline } else { None };
    record.warnings = config.warnings();
    match job.algo {
        Algorithm::Mtbprj => record.eta = Some(eta.as_f64()),
        Algorithm::Mtbprj2 => {
            record.eta = Some(eta.as_f64());
            record.back_projection = Some(rule.name());
        }
        Algorithm::Mtrbp => record.seed = Some(job.seed),
        _ => {}
    }
    Ok(record)
}

pub fn baseline(args: &BaselineArgs, out: &mut impl Write) -> Result<ExitCode, Failure> {
    let record = match args.precision {
        Precision::F32 => run_baseline::<f32>(args)?,
        Precision::F64 => run_baseline::<f64>(args)?,
    };
    emit(&[record], args.output.format(), out)?;
    Ok(ExitCode::SUCCESS)
}

fn run_baseline<T: Scalar>(args: &BaselineArgs) -> anyhow::Result<RunRecord> {
    let stream = args.source.load::<T>()?;
    let kernel = convert_kernel::<T>(&args.kernel)?;
    let common = Common {
        source: args.source.label(),
        kernel: args.kernel,
        precision: precision_name(args.precision),
        epochs: args.epochs,
    };
    let mut battery = PerceptronBattery::new(stream.k.max(1), kernel)?;
    let start = Instant::now();
    let metrics = drive(&stream, &mut battery, args.epochs as usize, |_, _| {})?;
    let wall_ms = start.elapsed().as_millis();
    let mut record = RunRecord::new(&common, Algorithm::PerceptronBattery, metrics, battery.active_len(), wall_ms);
    record.graph = "disconnected".into();
    Ok(record)
}

fn emit(records: &[RunRecord], format: Format, out: &mut impl Write) -> anyhow::Result<()> {
    match format {
        Format::Json => {
            // one object per line, in grid order
            for r in records {
                writeln!(out, "{}", serde_json::to_string(r)?)?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["algo", "graph", "B", "eta", "seed", "f_measure", "mistakes", "final_active", "wall_ms"])?;
            for r in records {
                w.write_record([
                    r.algo.to_string(),
                    r.graph.clone(),
                    r.budget_resolved.map(|b| b.to_string()).unwrap_or_default(),
                    r.eta.map(|e| e.to_string()).unwrap_or_default(),
                    r.seed.map(|s| s.to_string()).unwrap_or_default(),
                    format!("{:.6}", r.f_measure),
                    r.mistakes.to_string(),
                    r.final_active.to_string(),
                    r.wall_ms.to_string(),
                ])?;
            }
            w.flush()?;
        }
        Format::Table => write_table(records, out)?,
    }
    for w in records.iter().flat_map(|r| &r.warnings) {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn write_table(records: &[RunRecord], out: &mut impl Write) -> std::io::Result<()> {
    let header = ["algo", "graph", "budget", "B", "seed", "F", "mistakes", "|S|"];
    let rows: Vec<[String; 8]> = records
        .iter()
        .map(|r| {
            [
                r.algo.to_string(),
                r.graph.clone(),
                r.budget.clone().unwrap_or_else(|| "-".into()),
                r.budget_resolved.map_or("-".into(), |b| b.to_string()),
                r.seed.map_or("-".into(), |s| s.to_string()),
                format!("{:.2}%", 100.0 * r.f_measure),
                r.mistakes.to_string(),
                r.final_active.to_string(),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| if i < 2 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect::<Vec<_>>()
            .join("  ")
    };
    writeln!(out, "{}", line(&header.map(String::from)))?;
    for row in &rows {
        writeln!(out, "{}", line(row))?;
    }
    Ok(())
}
