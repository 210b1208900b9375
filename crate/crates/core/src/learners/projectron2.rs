use crate::active_set::{ActiveSet, EntryWeight, Prepared, TaskWeights};
use crate::graph::InteractionModel;
use crate::kernel::{KernelMode, MultitaskExample, MultitaskInstance, MultitaskKernel};
use crate::learners::{check_task, is_mistake, Action, LearnerError, OnlineLearner, StepOutcome};
use crate::scalar::Scalar;

/// How mtbprj-2 folds the evicted entry's weights back into the survivors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BackProjection {
    /// `(β_l)_j += γ_j (β_l)_r`: every task predictor changes by exactly
    /// `(β_l)_r · P^⊥ K'(x_r,·)`, the damage the eviction score measures.
    Preserving,
    /// `(β_l)_j += γ_j (β_l)_r (A_G⁻¹)_{l,i_j}`, the rule as printed. The
    /// extra coupling factor discards most of the evicted weight and, across
    /// unrelated tasks, all of it.
    #[default]
    Coupled,
}

impl BackProjection {
    pub fn name(self) -> &'static str {
        match self {
            BackProjection::Preserving => "preserving",
            BackProjection::Coupled => "coupled",
        }
    }
}

impl std::str::FromStr for BackProjection {
    type Err = LearnerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "preserving" => Ok(BackProjection::Preserving),
            "coupled" => Ok(BackProjection::Coupled),
            other => Err(LearnerError::InvalidConfig(format!("unknown back-projection rule `{other}`"))),
        }
    }
}

/// Multitask budget Projectron with per-task weights (mtbprj-2).
///
/// Entries live in the base-kernel space `K'(x_j,·)` and each carries one
/// weight per task, so task `i` predicts with `Σ_j (β_i)_j K'(x_j, x)`.
/// Projections ignore task markers; the task coupling `(A_G⁻¹)_{l,i_t}`
/// instead spreads every update across the related tasks `l`.
#[derive(Debug, Clone)]
pub struct BudgetProjectron2<T: Scalar> {
    kernel: MultitaskKernel<T>,
    set: ActiveSet<T, TaskWeights<T>>,
    eta: T,
    rule: BackProjection,
    mistakes: usize,
}

impl<T: Scalar> BudgetProjectron2<T> {
    pub fn new(kernel: MultitaskKernel<T>, budget: usize, eta: T) -> Self {
        Self::with_rule(kernel, budget, eta, BackProjection::default())
    }

    pub fn with_rule(kernel: MultitaskKernel<T>, budget: usize, eta: T, rule: BackProjection) -> Self {
        BudgetProjectron2 {
            kernel,
            set: ActiveSet::with_gram(budget, KernelMode::SingleTask),
            eta,
            rule,
            mistakes: 0,
        }
    }

    pub fn rule(&self) -> BackProjection {
        self.rule
    }

    pub fn active_set(&self) -> &ActiveSet<T, TaskWeights<T>> {
        &self.set
    }

    pub fn kernel(&self) -> &MultitaskKernel<T> {
        &self.kernel
    }

    /// `‖d_j‖` for every entry of `set`: the leave-one-out residual times
    /// the norm of the entry's per-task weight column.
    pub fn eviction_scores(set: &ActiveSet<T, TaskWeights<T>>) -> Vec<T> {
        let residuals = set.leave_one_out_residuals().expect("gram tracked");
        set.entries()
            .iter()
            .zip(residuals)
            .map(|(e, r)| r * e.weight.norm())
            .collect()
    }

    fn eviction_choice(set: &ActiveSet<T, TaskWeights<T>>) -> usize {
        let scores = Self::eviction_scores(set);
        let candidates = set.len() - 1;
        let mut best = 0;
        for j in 1..candidates {
            if scores[j] < scores[best] {
                best = j;
            }
        }
        best
    }
}

/// Adds `scale · (A_G⁻¹)_{l, task}` to `(β_l)` for every `l` related to `task`.
fn add_coupled<T: Scalar>(w: &mut TaskWeights<T>, model: &InteractionModel<T>, task: usize, scale: T) {
    let c = model.component_of(task);
    let members = &model.components()[c];
    let block = w.block_mut(c, members.len());
    for (slot, &l) in block.iter_mut().zip(members) {
        *slot += scale * model.coupling(l, task);
    }
}

impl<T: Scalar> OnlineLearner<T> for BudgetProjectron2<T> {
    fn score(&self, instance: &MultitaskInstance<T>) -> Result<T, LearnerError> {
        check_task(&self.kernel.model, instance)?;
        Ok(self.set.predict(&self.kernel, Prepared::new(instance, &self.kernel)?))
    }

    fn step(&mut self, example: &MultitaskExample<T>) -> Result<StepOutcome<T>, LearnerError> {
        let model = &self.kernel.model;
        check_task(model, &example.instance)?;
        let q = Prepared::new(&example.instance, &self.kernel)?;
        let score = self.set.predict(&self.kernel, q);
        if !is_mistake(score, example.label) {
            return Ok(StepOutcome::correct(score));
        }
        self.mistakes += 1;
        let y = example.label.value::<T>();
        let task = example.instance.task;

        let projection = self.set.projection(&self.kernel, q)?;
        if projection.residual <= self.eta {
            for (w, &a) in self.set.weights_mut().zip(&projection.alphas) {
                if a != T::zero() {
                    add_coupled(w, model, task, a * y);
                }
            }
            return Ok(StepOutcome::mistake(score, Action::WeightUpdateProjection));
        }

        let mut column = TaskWeights::new();
        add_coupled(&mut column, model, task, y);
        if !self.set.is_full() {
            self.set.insert_projected(q, example.label, column, projection)?;
            return Ok(StepOutcome::mistake(score, Action::Insert));
        }
        let evicted = self
            .set
            .insert_and_evict_projected(q, example.label, column, projection, Self::eviction_choice)?;
        let removed = &evicted.entry.weight;
        for (j, &gamma) in evicted.gammas.iter().enumerate() {
            if gamma == T::zero() {
                continue;
            }
            if self.rule == BackProjection::Preserving {
                self.set.weight_mut(j).add_scaled(removed, gamma);
                continue;
            }
            // (β_l)_j += γ_j (β_l)_r (A_G⁻¹)_{l, i_j}
            let task_j = self.set.entries()[j].instance.task;
            let c = model.component_of(task_j);
            let Some(from) = removed.block(c) else { continue };
            let members = &model.components()[c];
            let block = self.set.weight_mut(j).block_mut(c, members.len());
            for ((slot, &l), &b) in block.iter_mut().zip(members).zip(from) {
                *slot += gamma * b * model.coupling(l, task_j);
            }
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

impl<T: Scalar> BudgetProjectron2<T> {
    /// Weight of entry `j` for task `l`.
    pub fn weight(&self, j: usize, task: usize) -> T {
        self.set.entries()[j].weight.coefficient(task, &self.kernel.model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::TaskGraph;
    use crate::kernel::{KernelSpec, Label, SparseVector};
    use approx::assert_abs_diff_eq;

    fn learner(graph: TaskGraph, budget: usize) -> BudgetProjectron2<f64> {
        let k = MultitaskKernel::new(InteractionModel::new(&graph).unwrap(), KernelSpec::linear());
        BudgetProjectron2::new(k, budget, 0.01)
    }

    fn learner_with(graph: TaskGraph, budget: usize, rule: BackProjection) -> BudgetProjectron2<f64> {
        let k = MultitaskKernel::new(InteractionModel::new(&graph).unwrap(), KernelSpec::linear());
        BudgetProjectron2::with_rule(k, budget, 0.01, rule)
    }

    #[test]
    fn back_projection_rules_on_unrelated_tasks() {
        // a = e1 (task 0) and b = (0.6, 0.8, 0) (task 1) tie on damage, so a
        // goes when e3 arrives; P(a) onto span{b, e3} is 0.6·b
        let stream = [
            ex(&[1.0, 0.0, 0.0], 0, Label::Positive),
            ex(&[0.6, 0.8, 0.0], 1, Label::Positive),
            ex(&[0.0, 0.0, 1.0], 0, Label::Positive),
        ];
        let run = |rule| {
            let mut l = learner_with(TaskGraph::edgeless(2), 2, rule);
            for e in &stream {
                l.step(e).unwrap();
            }
            l
        };
        let probe = |l: &BudgetProjectron2<f64>, dense: &[f64]| {
            l.score(&MultitaskInstance::new(SparseVector::from_dense(dense, 0), 0)).unwrap()
        };
        let preserving = run(BackProjection::Preserving);
        assert_eq!(preserving.active_len(), 2);
        assert_eq!(preserving.active_set().entries()[0].insertion_time, 1);
        // task 0 keeps the projected part of e1: f_0 = ⟨(0.36, 0.48, 1), ·⟩
        assert_abs_diff_eq!(probe(&preserving, &[1.0, 0.0, 0.0]), 0.36, epsilon = 1e-12);
        assert_abs_diff_eq!(probe(&preserving, &[0.0, 1.0, 0.0]), 0.48, epsilon = 1e-12);
        assert_abs_diff_eq!(probe(&preserving, &[0.0, 0.0, 1.0]), 1.0, epsilon = 1e-12);

        // b belongs to task 1, so the coupled rule drops all of it
        let coupled = run(BackProjection::Coupled);
        assert_abs_diff_eq!(probe(&coupled, &[1.0, 0.0, 0.0]), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(probe(&coupled, &[0.0, 0.0, 1.0]), 1.0, epsilon = 1e-12);
    }

    fn ex(dense: &[f64], task: usize, label: Label) -> MultitaskExample<f64> {
        MultitaskExample::new(SparseVector::from_dense(dense, 0), task, label)
    }

    #[test]
    fn first_mistake_spreads_over_related_tasks() {
        let mut l = learner(TaskGraph::complete(3), 4);
        let out = l.step(&ex(&[0.0, 1.0], 0, Label::Positive)).unwrap();
        assert_eq!(out.action, Action::Insert);
        assert_abs_diff_eq!(l.weight(0, 0), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(l.weight(0, 1), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(l.weight(0, 2), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn correct_prediction_leaves_state() {
        let mut l = learner(TaskGraph::complete(3), 4);
        l.step(&ex(&[0.0, 1.0], 0, Label::Positive)).unwrap();
        let out = l.step(&ex(&[0.0, 1.0], 1, Label::Positive)).unwrap();
        assert_eq!(out.action, Action::None);
        assert_eq!(l.active_len(), 1);
    }

    #[test]
    fn task_blind_projection_on_isolated_task() {
        let mut l = learner(TaskGraph::edgeless(2), 4);
        l.step(&ex(&[1.0, 0.0], 0, Label::Positive)).unwrap();
        l.step(&ex(&[0.0, 1.0], 0, Label::Positive)).unwrap();
        assert_eq!(l.active_len(), 2);
        // task 1 is unrelated but its x lies in the span of stored vectors
        let out = l.step(&ex(&[0.6, 0.8], 1, Label::Positive)).unwrap();
        assert_eq!(out.action, Action::WeightUpdateProjection);
        assert_eq!(l.active_len(), 2);
        assert_abs_diff_eq!(l.weight(0, 1), 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(l.weight(1, 1), 0.8, epsilon = 1e-12);
        // task 0 weights untouched
        assert_abs_diff_eq!(l.weight(0, 0), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn eviction_keeps_budget_and_inverse() {
        let mut l = learner(TaskGraph::path(3), 2);
        l.step(&ex(&[1.0, 0.0, 0.0], 0, Label::Positive)).unwrap();
        l.step(&ex(&[0.0, 1.0, 0.0], 1, Label::Negative)).unwrap();
        let out = l.step(&ex(&[0.0, 0.0, 1.0], 2, Label::Positive)).unwrap();
        assert_eq!(out.action, Action::InsertEvict);
        assert_eq!(l.active_len(), 2);
        assert!(l.active_set().inverse_residual().unwrap() < 1e-9);
    }
}
