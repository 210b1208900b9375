use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use mtbudget::graph::{resistance_identity_error, GraphSpec};
use mtbudget::learners::{
    forgetron_comparator_cap, mtforg_bound, mtrbp_bound, rbp_comparator_cap, BoundError,
};
use mtbudget::{InteractionModel64, TaskGraph};

use crate::Failure;

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Tasks per random graph.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=2000))]
    pub k: u64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Edge probabilities, cycled over the trials.
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.5,0.8")]
    pub p: Vec<f64>,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
}

#[derive(Serialize)]
struct VerifyReport {
    k: usize,
    trials: usize,
    seed: u64,
    max_error: f64,
    worst: String,
    tolerance: f64,
    pass: bool,
}

pub fn verify_graph(args: &VerifyArgs, out: &mut impl Write) -> Result<ExitCode, Failure> {
    if args.p.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Failure::Usage("edge probabilities must lie in [0, 1]".into()));
    }
    let k = args.k as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut graphs = vec![
        ("complete".to_string(), TaskGraph::complete(k)),
        ("edgeless".to_string(), TaskGraph::edgeless(k)),
        ("path".to_string(), TaskGraph::path(k)),
    ];
    for t in 0..args.trials {
        let p = args.p[t % args.p.len()];
        graphs.push((format!("trial {t} (p = {p})"), TaskGraph::erdos_renyi(k, p, &mut rng)));
    }
    let mut max_error = 0.0f64;
    let mut worst = String::new();
    for (name, g) in &graphs {
        let err = resistance_identity_error::<f64>(g).map_err(anyhow::Error::from)?;
        if worst.is_empty() || err > max_error {
            max_error = err;
            worst = name.clone();
        }
    }
    let pass = max_error <= args.tolerance;
    let report = VerifyReport {
        k,
        trials: args.trials,
        seed: args.seed,
        max_error,
        worst,
        tolerance: args.tolerance,
        pass,
    };
    writeln!(out, "{}", serde_json::to_string(&report).map_err(anyhow::Error::from)?).map_err(anyhow::Error::from)?;
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(subcommand)]
    pub which: BoundKind,
}

#[derive(Debug, Subcommand)]
pub enum BoundKind {
    /// `4L + (B+1)/(2 ln(B+1))`, valid for B ≥ 84.
    Mtforg {
        #[arg(long = "B", alias = "budget")]
        budget: usize,
        /// Cumulative hinge loss of the comparator.
        #[arg(long = "L", alias = "loss", default_value_t = 0.0)]
        loss: f64,
        #[command(flatten)]
        cg: CgArgs,
    },
    /// Expected mistakes of mtrbp against a shifting comparator.
    Mtrbp {
        #[arg(long = "B", alias = "budget")]
        budget: usize,
        #[arg(long = "L", alias = "loss", default_value_t = 0.0)]
        loss: f64,
        /// Shift term of the comparator sequence.
        #[arg(long = "S", alias = "shift", default_value_t = 0.0)]
        shift: f64,
        #[arg(long, alias = "epsilon")]
        eps: f64,
        #[command(flatten)]
        cg: CgArgs,
    },
}

/// `c_G` given directly or through a graph.
#[derive(Debug, Args)]
pub struct CgArgs {
    #[arg(long, conflicts_with = "graph")]
    pub cg: Option<f64>,
    #[arg(long, requires = "k")]
    pub graph: Option<GraphSpec>,
    /// Tasks of a keyword graph.
    #[arg(long)]
    pub k: Option<usize>,
}

impl CgArgs {
    fn resolve(&self) -> Result<Option<f64>, Failure> {
        if let Some(cg) = self.cg {
            if !(cg > 0.0 && cg.is_finite()) {
                return Err(Failure::Usage(format!("c_G must be positive, got {cg}")));
            }
            return Ok(Some(cg));
        }
        let Some(spec) = &self.graph else { return Ok(None) };
        let graph = spec.resolve(self.k.unwrap_or(0)).map_err(anyhow::Error::from)?;
        let model = InteractionModel64::new(&graph).map_err(anyhow::Error::from)?;
        Ok(Some(model.cg()))
    }
}

#[derive(Serialize)]
struct BoundReport {
    bound: &'static str,
    value: f64,
    budget: usize,
    cum_loss: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    shift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cg: Option<f64>,
    /// Largest comparator norm the bound covers.
    #[serde(skip_serializing_if = "Option::is_none")]
    comparator_cap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    log_term_nonpositive: Option<bool>,
}

fn usage(e: BoundError) -> Failure {
    Failure::Usage(e.to_string())
}

pub fn bounds(args: &BoundsArgs, out: &mut impl Write) -> Result<ExitCode, Failure> {
    let report = match &args.which {
        BoundKind::Mtforg { budget, loss, cg } => {
            let value = mtforg_bound(*loss, *budget).map_err(usage)?;
            let cg = cg.resolve()?;
            BoundReport {
                bound: "mtforg",
                value,
                budget: *budget,
                cum_loss: *loss,
                shift: None,
                epsilon: None,
                cg,
                comparator_cap: cg.map(|c| forgetron_comparator_cap(c, *budget)),
                log_term_nonpositive: None,
            }
        }
        BoundKind::Mtrbp { budget, loss, shift, eps, cg } => {
            let Some(c) = cg.resolve()? else {
                return Err(Failure::Usage("mtrbp needs --cg or --graph with --k".into()));
            };
            let b = mtrbp_bound(*loss, c, *shift, *budget, *eps).map_err(usage)?;
            BoundReport {
                bound: "mtrbp",
                value: b.value,
                budget: *budget,
                cum_loss: *loss,
                shift: Some(*shift),
                epsilon: Some(*eps),
                cg: Some(c),
                comparator_cap: Some(rbp_comparator_cap(c, *budget, *eps)),
                log_term_nonpositive: Some(b.log_term_nonpositive),
            }
        }
    };
    writeln!(out, "{}", serde_json::to_string(&report).map_err(anyhow::Error::from)?).map_err(anyhow::Error::from)?;
    Ok(ExitCode::SUCCESS)
}
