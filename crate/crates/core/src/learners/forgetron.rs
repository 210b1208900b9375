use crate::active_set::{ActiveSet, EntryWeight, Prepared};
use crate::kernel::{KernelMode, Label, MultitaskExample, MultitaskInstance, MultitaskKernel};
use crate::learners::{check_task, is_mistake, Action, LearnerError, OnlineLearner, StepOutcome};
use crate::scalar::Scalar;

/// `(15/32) · c_G² · M`, the ceiling on the accumulated deficit `Q`.
#[inline]
pub fn deficit_cap<T: Scalar>(cg: T, mistakes: usize) -> T {
    T::lit(15.0 / 32.0) * cg * cg * T::from_count(mistakes)
}

/// `Ψ_G(λ, μ) = c_G² λ² + 2 c_G λ − 2 λ μ`
#[inline]
pub fn psi<T: Scalar>(cg: T, lambda: T, mu: T) -> T {
    cg * cg * lambda * lambda + T::lit(2.0) * cg * lambda - T::lit(2.0) * lambda * mu
}

/// Shrink factor and the deficit increment it causes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShrinkStep<T> {
    pub phi: T,
    pub psi: T,
}

/// Largest `φ ∈ (0, 1]` with `Q + Ψ_G(β_r y_r φ, β_r φ f_r) ≤ (15/32) c_G² M`.
///
/// The constraint is the quadratic `aφ² + bφ ≤ C` with
/// `a = β_r²(c_G² − 2 y_r f_r)`, `b = 2 c_G β_r y_r`, `C = cap − Q`. When
/// `φ = 1` is infeasible the answer is the largest root in `(0, 1)`. The
/// returned pair satisfies the constraint exactly in floating point, so a
/// caller adding `psi` to `Q` never overshoots the cap.
pub fn compute_phi<T: Scalar>(
    beta_r: T,
    label_r: Label,
    f_r: T,
    cg: T,
    deficit: T,
    mistakes: usize,
) -> Result<ShrinkStep<T>, LearnerError> {
    let y = label_r.value::<T>();
    let cap = deficit_cap(cg, mistakes);
    let step = |phi: T| ShrinkStep {
        phi,
        psi: psi(cg, beta_r * y * phi, beta_r * phi * f_r),
    };
    let feasible = |s: &ShrinkStep<T>| deficit + s.psi <= cap;

    let full = step(T::one());
    if feasible(&full) {
        return Ok(full);
    }

    let two = T::lit(2.0);
    let a = beta_r * beta_r * (cg * cg - two * y * f_r);
    let b = two * cg * beta_r * y;
    let c = cap - deficit;
    let infeasible = || LearnerError::NoFeasibleShrink {
        deficit: deficit.as_f64(),
        cap: cap.as_f64(),
    };

    let mut roots = [T::nan(); 2];
    if a == T::zero() {
        if b != T::zero() {
            roots[0] = c / b;
        }
    } else {
        let disc = b * b + T::lit(4.0) * a * c;
        if disc >= T::zero() {
            // stable pair: q = −(b + sign(b)√disc)/2, roots q/a and −C/q
            let sq = disc.sqrt();
            let q = -(b + if b >= T::zero() { sq } else { -sq }) / two;
            roots[0] = q / a;
            if q != T::zero() {
                roots[1] = -c / q;
            }
        }
    }
    let mut phi = roots
        .into_iter()
        .filter(|r| *r > T::zero() && *r < T::one())
        .fold(T::nan(), |m, r| if m.is_nan() || r > m { r } else { m });
    if phi.is_nan() {
        return Err(infeasible());
    }

    // Pull the root inside the feasible side if rounding left it just outside.
    let shave = T::epsilon() * T::lit(4.0);
    for _ in 0..256 {
        let s = step(phi);
        if feasible(&s) {
            return Ok(s);
        }
        phi -= phi * shave;
        if !(phi > T::zero()) {
            break;
        }
    }
    Err(infeasible())
}

/// Multitask self-tuned Forgetron (mtforg).
///
/// Perceptron updates while the set has room. At capacity a mistake
/// removes the oldest entry, inserts the new one with `β_t = y_t`, and
/// shrinks every weight by the self-tuned factor `φ` that keeps the
/// accumulated deficit `Q` under `(15/32) c_G² M`.
#[derive(Debug, Clone)]
pub struct Forgetron<T: Scalar> {
    kernel: MultitaskKernel<T>,
    set: ActiveSet<T>,
    mistakes: usize,
    deficit: T,
}

impl<T: Scalar> Forgetron<T> {
    pub fn new(kernel: MultitaskKernel<T>, budget: usize) -> Self {
        Forgetron {
            kernel,
            set: ActiveSet::without_gram(budget, KernelMode::Multitask),
            mistakes: 0,
            deficit: T::zero(),
        }
    }

    pub fn active_set(&self) -> &ActiveSet<T> {
        &self.set
    }

    /// Accumulated deficit `Q`.
    pub fn deficit(&self) -> T {
        self.deficit
    }

    pub fn cg(&self) -> T {
        self.kernel.model.cg()
    }
}

impl<T: Scalar> OnlineLearner<T> for Forgetron<T> {
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
        if !self.set.is_full() {
            self.set.insert(&self.kernel, q, example.label, y)?;
            return Ok(StepOutcome::mistake(score, Action::Insert));
        }

        // f_{i_r}(x_r) under the hypothesis before this trial's update
        let oldest = &self.set.entries()[0];
        let f_r = self.set.predict(&self.kernel, oldest.prepared());
        let (beta_r, label_r) = (oldest.weight, oldest.label);

        self.set.evict(0);
        self.set.insert(&self.kernel, q, example.label, y)?;
        let shrink = compute_phi(beta_r, label_r, f_r, self.cg(), self.deficit, self.mistakes)?;
        if shrink.phi != T::one() {
            for w in self.set.weights_mut() {
                w.scale(shrink.phi);
            }
        }
        self.deficit += shrink.psi;
        Ok(StepOutcome::mistake(score, Action::InsertEvictShrink))
    }

    fn active_len(&self) -> usize {
        self.set.len()
    }

    fn mistakes(&self) -> usize {
        self.mistakes
    }
}
