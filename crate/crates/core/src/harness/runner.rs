use std::fmt;
use std::str::FromStr;

use crate::harness::{DatasetStream, HarnessError, StreamMetrics};
use crate::kernel::KernelSpec;
use crate::learners::{LearnerConfig, LearnerError, OnlineLearner, PerceptronBattery, StepOutcome};
use crate::scalar::Scalar;

/// Budget given directly or as a percentage of the baseline's final active set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BudgetSpec {
    Absolute(usize),
    Percent(f64),
}

impl BudgetSpec {
    pub fn needs_baseline(&self) -> bool {
        matches!(self, BudgetSpec::Percent(_))
    }

    /// Percentages round up, and never below 1.
    pub fn resolve(&self, baseline: usize) -> usize {
        match *self {
            BudgetSpec::Absolute(b) => b,
            BudgetSpec::Percent(p) => {
                // guard against 10% of 30 evaluating to 3.0000000000000004
                let exact = p * baseline as f64 / 100.0;
                ((exact - 1e-9).ceil() as usize).max(1)
            }
        }
    }
}

impl FromStr for BudgetSpec {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HarnessError::InvalidBudget(s.to_string());
        let s = s.trim();
        if let Some(p) = s.strip_suffix('%') {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            if !(p > 0.0 && p.is_finite()) {
                return Err(bad());
            }
            Ok(BudgetSpec::Percent(p))
        } else {
            let b: usize = s.parse().map_err(|_| bad())?;
            if b == 0 {
                return Err(bad());
            }
            Ok(BudgetSpec::Absolute(b))
        }
    }
}

impl fmt::Display for BudgetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BudgetSpec::Absolute(b) => write!(f, "{b}"),
            BudgetSpec::Percent(p) => write!(f, "{p}%"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub metrics: StreamMetrics,
    pub final_active: usize,
}

/// Feeds `epochs` passes of `stream` to `learner`, scoring each prediction
/// before the update. `observe` sees the learner after every trial.
pub fn drive<T: Scalar, L: OnlineLearner<T>>(
    stream: &DatasetStream<T>,
    learner: &mut L,
    epochs: usize,
    mut observe: impl FnMut(&L, &StepOutcome<T>),
) -> Result<StreamMetrics, LearnerError> {
    let mut metrics = StreamMetrics::new(stream.k);
    let total = stream.len() * epochs;
    let every = (total / 100).max(1) as u64;
    for _ in 0..epochs {
        for ex in &stream.examples {
            let out = learner.step(ex)?;
            metrics.record(ex.instance.task, out.prediction, ex.label, out.mistake);
            observe(learner, &out);
            if metrics.steps().is_multiple_of(every) {
                metrics.snapshot(learner.active_len());
            }
        }
    }
    Ok(metrics)
}

pub fn run_stream<T: Scalar>(
    stream: &DatasetStream<T>,
    config: &LearnerConfig<T>,
    epochs: usize,
) -> Result<RunOutput, HarnessError> {
    if stream.k > config.graph.k() {
        return Err(HarnessError::InvalidParameter(format!(
            "stream has {} tasks but the graph only {}",
            stream.k,
            config.graph.k()
        )));
    }
    let mut learner = config.build()?;
    let metrics = drive(stream, &mut learner, epochs, |_, _| {})?;
    Ok(RunOutput {
        metrics,
        final_active: learner.active_len(),
    })
}

/// Final active-set size of the Perceptron battery after one pass.
pub fn baseline_active_size<T: Scalar>(stream: &DatasetStream<T>, kernel: KernelSpec<T>) -> Result<usize, HarnessError> {
    let mut battery = PerceptronBattery::new(stream.k.max(1), kernel)?;
    drive(stream, &mut battery, 1, |_, _| {})?;
    Ok(battery.active_len())
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::TaskGraph;
    use crate::kernel::{Label, MultitaskExample, SparseVector};
    use crate::learners::Algorithm;

    #[test]
    fn budget_parsing_and_resolution() {
        assert_eq!("10%".parse::<BudgetSpec>().unwrap(), BudgetSpec::Percent(10.0));
        assert_eq!("25".parse::<BudgetSpec>().unwrap(), BudgetSpec::Absolute(25));
        assert!("0".parse::<BudgetSpec>().is_err());
        assert!("-5%".parse::<BudgetSpec>().is_err());
        assert!("x%".parse::<BudgetSpec>().is_err());
        assert_eq!(BudgetSpec::Percent(10.0).resolve(30), 3);
        assert_eq!(BudgetSpec::Percent(10.0).resolve(31), 4);
        assert_eq!(BudgetSpec::Percent(5.0).resolve(0), 1);
        assert_eq!(BudgetSpec::Absolute(7).resolve(1000), 7);
    }

    fn trivial_stream() -> DatasetStream<f64> {
        // each task sees the same positive instance three times
        let examples = (0..9)
            .map(|i| MultitaskExample::new(SparseVector::new(vec![1], vec![1.0]).unwrap(), i % 3, Label::Positive))
            .collect();
        DatasetStream::new(examples, 3)
    }

    #[test]
    fn baseline_examples() {
        let s = trivial_stream();
        // score 0 on the first visit of each task is a mistake
        assert_eq!(baseline_active_size(&s, KernelSpec::linear()).unwrap(), 3);
        let empty = DatasetStream::<f64>::new(Vec::new(), 3);
        assert_eq!(baseline_active_size(&empty, KernelSpec::linear()).unwrap(), 0);
    }

    #[test]
    fn metrics_from_run() {
        let s = trivial_stream();
        let cfg = LearnerConfig::new(Algorithm::Mtrbp, TaskGraph::edgeless(3), 5, KernelSpec::linear());
        let out = run_stream(&s, &cfg, 1).unwrap();
        // score 0 predicts +1: every prediction is a true positive
        assert_eq!(out.metrics.f_measure(), 1.0);
        assert_eq!(out.metrics.mistakes, 3);
        assert_eq!(out.final_active, 3);
        assert_eq!(out.metrics.trajectory.len(), 9);
        assert_eq!(out.metrics.per_task[1].tp, 3);
    }
}
