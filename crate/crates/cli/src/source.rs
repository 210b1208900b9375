use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::Context;
use clap::Args;
use serde::Serialize;

use mtbudget::graph::GraphSpec;
use mtbudget::harness::{
    binarize_by_percentile, generate_synthetic, read_dataset, rescale_features, shift_term, write_dataset,
};
use mtbudget::{DatasetStream, Scalar, SyntheticConfig};

use crate::Failure;

/// Where the stream comes from: an mtsvm file or an inline synthetic description.
#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Dataset in mtsvm format (`<task> <label> <id>:<value> ...`, 1-based ids).
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    pub data: Option<PathBuf>,
    /// Synthetic stream, e.g. `k=10,d=10,n=10000,relatedness=0.9,noise=0.1,seed=0`.
    #[arg(long)]
    pub synthetic: Option<SyntheticSpec>,
    /// Number of tasks in the data file; inferred from the largest task id if absent.
    #[arg(long, requires = "data")]
    pub k: Option<usize>,
    /// Binarize real labels at this percentile (75 when labels are not ±1).
    #[arg(long, requires = "data")]
    pub binarize: Option<f64>,
    /// Map every non-binary feature onto [0, 1] before the pass.
    #[arg(long, requires = "data")]
    pub rescale: bool,
}

impl SourceArgs {
    pub fn label(&self) -> String {
        match (&self.data, &self.synthetic) {
            (Some(path), _) => path.display().to_string(),
            (None, Some(spec)) => format!("synthetic:{}", spec.text),
            (None, None) => unreachable!("clap requires a source"),
        }
    }

    pub fn load<T: Scalar>(&self) -> anyhow::Result<DatasetStream<T>> {
        if let Some(spec) = &self.synthetic {
            let (stream, _) = generate_synthetic::<T>(&spec.config)?;
            return Ok(stream);
        }
        let path = self.data.as_ref().expect("clap requires a source");
        let raw = read_dataset::<T>(path, self.k).with_context(|| format!("reading {}", path.display()))?;
        let mut stream = match self.binarize {
            None if raw.is_binary() => raw.into_stream()?,
            pct => binarize_by_percentile(raw, pct.unwrap_or(75.0))?,
        };
        if self.rescale {
            rescale_features(&mut stream);
        }
        Ok(stream)
    }
}

/// `key=value` list describing a synthetic stream. `shift=<step>@<angle>`
/// may repeat.
#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub config: SyntheticConfig,
    text: String,
}

impl FromStr for SyntheticSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut cfg = SyntheticConfig::new(0, 0, 0, 0.9, 0.1, 0);
        let (mut k, mut d, mut n) = (None, None, None);
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part.split_once('=').ok_or_else(|| format!("expected key=value, got `{part}`"))?;
            let num = |v: &str| v.parse::<f64>().map_err(|_| format!("bad number `{v}` for `{key}`"));
            let count = |v: &str| v.parse::<usize>().map_err(|_| format!("bad count `{v}` for `{key}`"));
            match key {
                "k" => k = Some(count(value)?),
                "d" => d = Some(count(value)?),
                "n" => n = Some(count(value)?),
                "relatedness" | "rel" => cfg.relatedness = num(value)?,
                "noise" => cfg.noise = num(value)?,
                "seed" => cfg.seed = value.parse().map_err(|_| format!("bad seed `{value}`"))?,
                "margin" => cfg.min_margin = num(value)?,
                "shift" => cfg.shifts.push(parse_shift(value)?),
                other => return Err(format!("unknown synthetic key `{other}`")),
            }
        }
        cfg.k = k.ok_or("synthetic stream needs k")?;
        cfg.d = d.ok_or("synthetic stream needs d")?;
        cfg.n = n.ok_or("synthetic stream needs n")?;
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(SyntheticSpec {
            config: cfg,
            text: s.trim().to_string(),
        })
    }
}

fn parse_shift(s: &str) -> Result<(usize, f64), String> {
    let (step, angle) = s.split_once('@').ok_or_else(|| format!("shift must be <step>@<angle>, got `{s}`"))?;
    let step = step.parse().map_err(|_| format!("bad shift step `{step}`"))?;
    let angle: f64 = angle.parse().map_err(|_| format!("bad shift angle `{angle}`"))?;
    if !angle.is_finite() {
        return Err(format!("bad shift angle `{angle}`"));
    }
    Ok((step, angle))
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.9)]
    pub relatedness: f64,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Redraw instances closer than this to a reference hyperplane.
    #[arg(long, default_value_t = 0.0)]
    pub margin: f64,
    /// Rotate every reference vector from `<step>` on, e.g. `5000@0.3`.
    #[arg(long = "shift", value_parser = parse_shift)]
    pub shifts: Vec<(usize, f64)>,
    /// Output file in mtsvm format.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the reference vectors as JSON.
    #[arg(long)]
    pub refs: Option<PathBuf>,
    /// Report shift and trace terms of the reference vectors under this graph.
    #[arg(long)]
    pub graph: Option<GraphSpec>,
}

#[derive(Serialize)]
struct SynthSummary {
    out: String,
    k: usize,
    d: usize,
    n: usize,
    positive_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    graph: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    shift_total: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    traces: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct RefsFile<'a> {
    initial: &'a [Vec<f64>],
    shifts: Vec<RefsShift<'a>>,
}

#[derive(Serialize)]
struct RefsShift<'a> {
    step: usize,
    vectors: &'a [Vec<f64>],
}

pub fn synth(args: &SynthArgs, out: &mut impl Write) -> Result<ExitCode, Failure> {
    let mut cfg = SyntheticConfig::new(args.k, args.d, args.n, args.relatedness, args.noise, args.seed);
    cfg.min_margin = args.margin;
    cfg.shifts = args.shifts.clone();
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let (stream, refs) = generate_synthetic::<f64>(&cfg).map_err(anyhow::Error::from)?;
    std::fs::write(&args.out, write_dataset(&stream))
        .with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(path) = &args.refs {
        let file = RefsFile {
            initial: &refs.initial,
            shifts: refs.shifts.iter().map(|(step, g)| RefsShift { step: *step, vectors: g }).collect(),
        };
        let json = serde_json::to_string_pretty(&file).map_err(anyhow::Error::from)?;
        std::fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    let mut summary = SynthSummary {
        out: args.out.display().to_string(),
        k: stream.k,
        d: args.d,
        n: stream.len(),
        positive_fraction: stream.positive_fraction(),
        graph: None,
        shift_total: None,
        traces: None,
    };
    if let Some(spec) = &args.graph {
        let graph = spec.resolve(args.k).map_err(anyhow::Error::from)?;
        let term = shift_term(&refs.sequence(), &graph).map_err(anyhow::Error::from)?;
        summary.graph = Some(spec.label());
        summary.shift_total = Some(term.total);
        summary.traces = Some(term.traces);
    }
    let json = serde_json::to_string(&summary).map_err(anyhow::Error::from)?;
    writeln!(out, "{json}").map_err(anyhow::Error::from)?;
    Ok(ExitCode::SUCCESS)
}
