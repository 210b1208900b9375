use crate::active_set::{ActiveSet, Prepared};
use crate::graph::{InteractionModel, TaskGraph};
use crate::kernel::{KernelMode, KernelSpec, MultitaskExample, MultitaskInstance, MultitaskKernel};
use crate::learners::{check_task, is_mistake, Action, LearnerError, OnlineLearner, StepOutcome};
use crate::scalar::Scalar;

/// `k` independent kernel Perceptrons with unbounded memory.
///
/// Implemented as a multitask Perceptron over the edgeless graph: the
/// coupling is the identity, so task `i` only sees its own entries.
#[derive(Debug, Clone)]
pub struct PerceptronBattery<T: Scalar> {
    kernel: MultitaskKernel<T>,
    set: ActiveSet<T>,
    mistakes: usize,
}

impl<T: Scalar> PerceptronBattery<T> {
    pub fn new(k: usize, spec: KernelSpec<T>) -> Result<Self, LearnerError> {
        let model = InteractionModel::new(&TaskGraph::edgeless(k))?;
        Ok(PerceptronBattery {
            kernel: MultitaskKernel::new(model, spec),
            set: ActiveSet::without_gram(usize::MAX, KernelMode::Multitask),
            mistakes: 0,
        })
    }

    pub fn active_set(&self) -> &ActiveSet<T> {
        &self.set
    }

    /// Number of stored entries belonging to `task`.
    pub fn task_len(&self, task: usize) -> usize {
        self.set.entries().iter().filter(|e| e.instance.task == task).count()
    }
}

impl<T: Scalar> OnlineLearner<T> for PerceptronBattery<T> {
    fn score(&self, instance: &MultitaskInstance<T>) -> Result<T, LearnerError> {
        check_task(&self.kernel.model, instance)?;
        Ok(self.set.predict(&self.kernel, Prepared::new(instance, &self.kernel)?))
    }

    fn step(&mut self, example: &MultitaskExample<T>) -> Result<StepOutcome<T>, LearnerError> {
        check_task(&self.kernel.model, &example.instance)?;
        let q = Prepared::new(&example.instance, &self.kernel)?;
        let score = self.set.predict(&self.kernel, q);
        if !is_mistake(score, example.label) {
            return Ok(StepOutcome::correct(score));
        }
        self.mistakes += 1;
        self.set.insert(&self.kernel, q, example.label, example.label.value::<T>())?;
        Ok(StepOutcome::mistake(score, Action::Insert))
    }

    fn active_len(&self) -> usize {
        self.set.len()
    }

    fn mistakes(&self) -> usize {
        self.mistakes
    }
}
