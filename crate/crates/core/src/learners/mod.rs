//! Budgeted multitask online learners and their mistake bounds.
//!
//! Every learner follows the same trial protocol: score the incoming
//! instance with the current hypothesis, emit `sign(score)` (ties go to
//! `+1`), and update only when `y·score ≤ 0`.

mod battery;
mod bounds;
mod forgetron;
mod projectron;
mod projectron2;
mod rbp;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use battery::PerceptronBattery;
pub use bounds::{
    forgetron_comparator_cap, mtforg_bound, mtrbp_bound, rbp_comparator_cap, rbp_epsilon_for_norm, BoundError,
    RbpBound,
};
pub use forgetron::{compute_phi, deficit_cap, psi, Forgetron, ShrinkStep};
pub use projectron::BudgetProjectron;
pub use projectron2::{BackProjection, BudgetProjectron2};
pub use rbp::RandomizedBudgetPerceptron;

use crate::active_set::ActiveSetError;
use crate::graph::{GraphError, InteractionModel, TaskGraph};
use crate::kernel::{KernelError, KernelSpec, Label, MultitaskExample, MultitaskInstance, MultitaskKernel};
use crate::scalar::Scalar;

/// Smallest budget for which the Forgetron mistake bound holds.
pub const FORGETRON_MIN_BUDGET: usize = 84;

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    ActiveSet(#[from] ActiveSetError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("task {task} out of range for {k} tasks")]
    TaskOutOfRange { task: usize, k: usize },
    #[error("no shrink factor in (0, 1] keeps the deficit below its cap (Q = {deficit}, cap = {cap})")]
    NoFeasibleShrink { deficit: f64, cap: f64 },
    #[error("invalid learner configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Multitask budget Projectron, projections under the multitask kernel.
    Mtbprj,
    /// Multitask budget Projectron with per-task weights and task-blind projections.
    Mtbprj2,
    /// Multitask randomized budget Perceptron.
    Mtrbp,
    /// Multitask self-tuned Forgetron.
    Mtforg,
    /// `k` independent unbudgeted kernel Perceptrons.
    PerceptronBattery,
}

impl Algorithm {
    pub const BUDGETED: [Algorithm; 4] = [Algorithm::Mtbprj, Algorithm::Mtbprj2, Algorithm::Mtrbp, Algorithm::Mtforg];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Mtbprj => "mtbprj",
            Algorithm::Mtbprj2 => "mtbprj2",
            Algorithm::Mtrbp => "mtrbp",
            Algorithm::Mtforg => "mtforg",
            Algorithm::PerceptronBattery => "perceptron_battery",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = LearnerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "mtbprj" => Algorithm::Mtbprj,
            "mtbprj2" | "mtbprj-2" => Algorithm::Mtbprj2,
            "mtrbp" => Algorithm::Mtrbp,
            "mtforg" => Algorithm::Mtforg,
            "perceptron_battery" | "battery" | "baseline" => Algorithm::PerceptronBattery,
            other => return Err(LearnerError::InvalidConfig(format!("unknown algorithm `{other}`"))),
        })
    }
}

/// What a trial did to the learner state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    None,
    /// New kernel function absorbed by reweighting the active set.
    WeightUpdateProjection,
    Insert,
    InsertEvict,
    InsertEvictShrink,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome<T> {
    pub prediction: Label,
    pub score: T,
    pub mistake: bool,
    pub action: Action,
}

impl<T: Scalar> StepOutcome<T> {
    fn correct(score: T) -> Self {
        StepOutcome {
            prediction: Label::from_score(score),
            score,
            mistake: false,
            action: Action::None,
        }
    }

    fn mistake(score: T, action: Action) -> Self {
        StepOutcome {
            prediction: Label::from_score(score),
            score,
            mistake: true,
            action,
        }
    }
}

#[inline]
pub(crate) fn is_mistake<T: Scalar>(score: T, label: Label) -> bool {
    label.value::<T>() * score <= T::zero()
}

pub(crate) fn check_task<T: Scalar>(model: &InteractionModel<T>, instance: &MultitaskInstance<T>) -> Result<(), LearnerError> {
    if instance.task >= model.k() {
        return Err(LearnerError::TaskOutOfRange {
            task: instance.task,
            k: model.k(),
        });
    }
    Ok(())
}

/// Uniform trial interface shared by all learners.
pub trait OnlineLearner<T: Scalar> {
    /// Current hypothesis evaluated on `instance`.
    fn score(&self, instance: &MultitaskInstance<T>) -> Result<T, LearnerError>;

    /// Runs one trial: predict, then update on a mistake.
    fn step(&mut self, example: &MultitaskExample<T>) -> Result<StepOutcome<T>, LearnerError>;

    fn active_len(&self) -> usize;

    fn mistakes(&self) -> usize;
}

#[derive(Debug, Clone)]
pub struct LearnerConfig<T> {
    pub algorithm: Algorithm,
    pub graph: TaskGraph,
    /// Ignored by the Perceptron battery.
    pub budget: usize,
    /// Projection threshold, used by the two Projectron variants.
    pub eta: T,
    pub kernel: KernelSpec<T>,
    /// Seeds the eviction draws of mtrbp.
    pub seed: u64,
    /// Eviction weight transfer of mtbprj-2.
    pub back_projection: BackProjection,
}

impl<T: Scalar> LearnerConfig<T> {
    pub fn new(algorithm: Algorithm, graph: TaskGraph, budget: usize, kernel: KernelSpec<T>) -> Self {
        LearnerConfig {
            algorithm,
            graph,
            budget,
            eta: T::lit(0.01),
            kernel,
            seed: 0,
            back_projection: BackProjection::default(),
        }
    }

    pub fn with_eta(mut self, eta: T) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_back_projection(mut self, rule: BackProjection) -> Self {
        self.back_projection = rule;
        self
    }

    pub fn validate(&self) -> Result<(), LearnerError> {
        if !self.kernel.normalize {
            return Err(LearnerError::InvalidConfig(
                "learners require a normalized kernel (append `:norm`)".into(),
            ));
        }
        if self.algorithm != Algorithm::PerceptronBattery && self.budget == 0 {
            return Err(LearnerError::InvalidConfig("budget must be positive".into()));
        }
        if !(self.eta > T::zero()) {
            return Err(LearnerError::InvalidConfig("eta must be positive".into()));
        }
        Ok(())
    }

    /// Non-fatal remarks about the configuration.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.algorithm == Algorithm::Mtforg && self.budget < FORGETRON_MIN_BUDGET {
            out.push(format!(
                "mtforg budget {} is below {}; its mistake bound does not apply",
                self.budget, FORGETRON_MIN_BUDGET
            ));
        }
        out
    }

    pub fn build(&self) -> Result<Learner<T>, LearnerError> {
        self.validate()?;
        let model = InteractionModel::new(&self.graph)?;
        let kernel = MultitaskKernel::new(model, self.kernel);
        Ok(match self.algorithm {
            Algorithm::Mtbprj => Learner::Mtbprj(BudgetProjectron::new(kernel, self.budget, self.eta)),
            Algorithm::Mtbprj2 => Learner::Mtbprj2(BudgetProjectron2::with_rule(kernel, self.budget, self.eta, self.back_projection)),
            Algorithm::Mtrbp => Learner::Mtrbp(RandomizedBudgetPerceptron::new(kernel, self.budget, self.seed)),
            Algorithm::Mtforg => Learner::Mtforg(Forgetron::new(kernel, self.budget)),
            Algorithm::PerceptronBattery => Learner::Battery(PerceptronBattery::new(self.graph.k(), self.kernel)?),
        })
    }
}

/// Any of the learners, dispatched statically.
#[derive(Debug, Clone)]
pub enum Learner<T: Scalar> {
    Mtbprj(BudgetProjectron<T>),
    Mtbprj2(BudgetProjectron2<T>),
    Mtrbp(RandomizedBudgetPerceptron<T>),
    Mtforg(Forgetron<T>),
    Battery(PerceptronBattery<T>),
}

macro_rules! dispatch {
    ($self:ident, $l:ident => $e:expr) => {
        match $self {
            Learner::Mtbprj($l) => $e,
            Learner::Mtbprj2($l) => $e,
            Learner::Mtrbp($l) => $e,
            Learner::Mtforg($l) => $e,
            Learner::Battery($l) => $e,
        }
    };
}

impl<T: Scalar> OnlineLearner<T> for Learner<T> {
    fn score(&self, instance: &MultitaskInstance<T>) -> Result<T, LearnerError> {
        dispatch!(self, l => l.score(instance))
    }

    fn step(&mut self, example: &MultitaskExample<T>) -> Result<StepOutcome<T>, LearnerError> {
        dispatch!(self, l => l.step(example))
    }

    fn active_len(&self) -> usize {
        dispatch!(self, l => l.active_len())
    }

    fn mistakes(&self) -> usize {
        dispatch!(self, l => l.mistakes())
    }
}
