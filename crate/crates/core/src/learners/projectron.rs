use crate::active_set::{ActiveSet, Prepared};
use crate::kernel::{KernelMode, MultitaskExample, MultitaskInstance, MultitaskKernel};
use crate::learners::{check_task, is_mistake, Action, LearnerError, OnlineLearner, StepOutcome};
use crate::scalar::Scalar;

/// Multitask budget Projectron (mtbprj).
///
/// On a mistake the new kernel function `K([x_t,i_t],·)` is projected onto
/// the span of the active multitask instances. A residual of at most `η`
/// is absorbed by reweighting (`β_j += y_t α_j`). Otherwise the instance is
/// stored; at capacity the entry whose removal loses the least,
/// `|β_j| · ‖P^⊥_{J∖{j}∪{t}} K([x_j,i_j],·)‖`, is evicted and projected back
/// onto the survivors (`β_j += β_r γ_j`).
#[derive(Debug, Clone)]
pub struct BudgetProjectron<T: Scalar> {
    kernel: MultitaskKernel<T>,
    set: ActiveSet<T>,
    eta: T,
    mistakes: usize,
}

impl<T: Scalar> BudgetProjectron<T> {
    /// `eta = 0` disables the projection branch for instances outside the span.
    pub fn new(kernel: MultitaskKernel<T>, budget: usize, eta: T) -> Self {
        BudgetProjectron {
            kernel,
            set: ActiveSet::with_gram(budget, KernelMode::Multitask),
            eta,
            mistakes: 0,
        }
    }

    pub fn active_set(&self) -> &ActiveSet<T> {
        &self.set
    }

    pub fn kernel(&self) -> &MultitaskKernel<T> {
        &self.kernel
    }

    /// Index of the pre-existing entry to evict once `t` sits last in `set`.
    /// Ties go to the lowest index.
    fn eviction_choice(set: &ActiveSet<T>) -> usize {
        let residuals = set.leave_one_out_residuals().expect("gram tracked");
        let candidates = set.len() - 1;
        let mut best = 0;
        let mut best_score = T::infinity();
        for (j, (e, &res)) in set.entries()[..candidates].iter().zip(&residuals).enumerate() {
            let damage = e.weight.abs() * res;
            if damage < best_score {
                best = j;
                best_score = damage;
            }
        }
        best
    }
}

impl<T: Scalar> OnlineLearner<T> for BudgetProjectron<T> {
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

        let projection = self.set.projection(&self.kernel, q)?;
        if projection.residual <= self.eta {
            for (w, &a) in self.set.weights_mut().zip(&projection.alphas) {
                *w += y * a;
            }
            return Ok(StepOutcome::mistake(score, Action::WeightUpdateProjection));
        }
        if !self.set.is_full() {
            self.set.insert_projected(q, example.label, y, projection)?;
            return Ok(StepOutcome::mistake(score, Action::Insert));
        }
        let evicted = self
            .set
            .insert_and_evict_projected(q, example.label, y, projection, Self::eviction_choice)?;
        let beta_r = evicted.entry.weight;
        for (w, &g) in self.set.weights_mut().zip(&evicted.gammas) {
            *w += beta_r * g;
        }
        Ok(StepOutcome::mistake(score, Action::InsertEvict))
    }

    fn active_len(&self) -> usize {
        self.set.len()
    }

    fn mistakes(&self) -> usize {
        self.mistakes
    }
}
