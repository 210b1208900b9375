use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::active_set::{ActiveSet, Prepared};
use crate::kernel::{KernelMode, MultitaskExample, MultitaskInstance, MultitaskKernel};
use crate::learners::{check_task, is_mistake, Action, LearnerError, OnlineLearner, StepOutcome};
use crate::scalar::Scalar;

/// Multitask randomized budget Perceptron (mtrbp).
///
/// Perceptron updates under the multitask kernel; at capacity a uniformly
/// random entry is discarded (weight and all) to make room.
#[derive(Debug, Clone)]
pub struct RandomizedBudgetPerceptron<T: Scalar> {
    kernel: MultitaskKernel<T>,
    set: ActiveSet<T>,
    rng: ChaCha8Rng,
    mistakes: usize,
}

impl<T: Scalar> RandomizedBudgetPerceptron<T> {
    /// Eviction draws come from a ChaCha8 stream seeded with `seed`.
    pub fn new(kernel: MultitaskKernel<T>, budget: usize, seed: u64) -> Self {
        RandomizedBudgetPerceptron {
            kernel,
            set: ActiveSet::without_gram(budget, KernelMode::Multitask),
            rng: ChaCha8Rng::seed_from_u64(seed),
            mistakes: 0,
        }
    }

    pub fn active_set(&self) -> &ActiveSet<T> {
        &self.set
    }
}

impl<T: Scalar> OnlineLearner<T> for RandomizedBudgetPerceptron<T> {
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
        let y = example.label.value::<T>();
        let action = if self.set.is_full() {
            let r = self.rng.random_range(0..self.set.len());
            self.set.evict(r);
            Action::InsertEvict
        } else {
            Action::Insert
        };
        self.set.insert(&self.kernel, q, example.label, y)?;
        Ok(StepOutcome::mistake(score, action))
    }

    fn active_len(&self) -> usize {
        self.set.len()
    }

    fn mistakes(&self) -> usize {
        self.mistakes
    }
}
