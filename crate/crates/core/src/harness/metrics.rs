use serde::Serialize;

use crate::kernel::Label;

/// Confusion counts with `+1` as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl Confusion {
    pub fn record(&mut self, predicted: Label, actual: Label) {
        match (predicted, actual) {
            (Label::Positive, Label::Positive) => self.tp += 1,
            (Label::Positive, Label::Negative) => self.fp += 1,
            (Label::Negative, Label::Positive) => self.fn_ += 1,
            (Label::Negative, Label::Negative) => self.tn += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// `2tp / (2tp + fp + fn)`, or 0 when nothing is positive.
    pub fn f_measure(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            (2 * self.tp) as f64 / denom as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub step: u64,
    pub f_measure: f64,
    pub active: usize,
}

/// Online metrics computed from pre-update predictions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StreamMetrics {
    /// Micro-averaged over all tasks.
    pub micro: Confusion,
    /// Trials with `y · score ≤ 0`; differs from `fp + fn` only at score 0.
    pub mistakes: u64,
    pub per_task: Vec<Confusion>,
    pub trajectory: Vec<TrajectoryPoint>,
}

impl StreamMetrics {
    pub fn new(k: usize) -> Self {
        StreamMetrics {
            micro: Confusion::default(),
            mistakes: 0,
            per_task: vec![Confusion::default(); k],
            trajectory: Vec::new(),
        }
    }

    pub fn record(&mut self, task: usize, predicted: Label, actual: Label, mistake: bool) {
        self.micro.record(predicted, actual);
        self.per_task[task].record(predicted, actual);
        self.mistakes += mistake as u64;
    }

    pub fn steps(&self) -> u64 {
        self.micro.total()
    }

    pub fn f_measure(&self) -> f64 {
        self.micro.f_measure()
    }

    pub fn snapshot(&mut self, active: usize) {
        self.trajectory.push(TrajectoryPoint {
            step: self.steps(),
            f_measure: self.f_measure(),
            active,
        });
    }
}
