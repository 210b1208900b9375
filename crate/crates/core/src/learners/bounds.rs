use thiserror::Error;

use crate::learners::FORGETRON_MIN_BUDGET;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error("epsilon must lie in (0, 1), got {0}")]
    Epsilon(f64),
    #[error("budget must be positive")]
    ZeroBudget,
    #[error("the Forgetron bound needs a budget above 83, got {0}")]
    ForgetronBudget(usize),
    #[error("{name} must be finite and nonnegative, got {value}")]
    Negative { name: &'static str, value: f64 },
}

/// Value of the randomized budget Perceptron bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbpBound {
    pub value: f64,
    /// `ln(B/3) ≤ 0`: the last term helps rather than hurts (B ≤ 3).
    pub log_term_nonpositive: bool,
}

fn nonneg(name: &'static str, value: f64) -> Result<(), BoundError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(BoundError::Negative { name, value })
    }
}

/// Expected mistakes of mtrbp against a shifting comparator:
/// `(L + c_G S √B + ε B^{3/2}/2 + (ε B/4) ln(B/3)) / (1 − ε)`.
pub fn mtrbp_bound(cum_loss: f64, cg: f64, shift: f64, budget: usize, epsilon: f64) -> Result<RbpBound, BoundError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(BoundError::Epsilon(epsilon));
    }
    if budget == 0 {
        return Err(BoundError::ZeroBudget);
    }
    nonneg("cumulative loss", cum_loss)?;
    nonneg("c_G", cg)?;
    nonneg("shift", shift)?;
    let b = budget as f64;
    let log_term = (b / 3.0).ln();
    let inner = cum_loss + cg * shift * b.sqrt() + epsilon * b.powf(1.5) / 2.0 + epsilon * b / 4.0 * log_term;
    Ok(RbpBound {
        value: inner / (1.0 - epsilon),
        log_term_nonpositive: log_term <= 0.0,
    })
}

/// Mistakes of mtforg against a fixed comparator: `4L + (B+1)/(2 ln(B+1))`.
pub fn mtforg_bound(cum_loss: f64, budget: usize) -> Result<f64, BoundError> {
    if budget < FORGETRON_MIN_BUDGET {
        return Err(BoundError::ForgetronBudget(budget));
    }
    nonneg("cumulative loss", cum_loss)?;
    let b1 = budget as f64 + 1.0;
    Ok(4.0 * cum_loss + b1 / (2.0 * b1.ln()))
}

/// Largest comparator norm `sqrt(trace(K_ḡḡ A_G))` covered by the mtforg bound:
/// `(1/(4 c_G)) sqrt((B+1)/ln(B+1))`.
pub fn forgetron_comparator_cap(cg: f64, budget: usize) -> f64 {
    let b1 = budget as f64 + 1.0;
    (b1 / b1.ln()).sqrt() / (4.0 * cg)
}

/// Largest comparator norm covered by the mtrbp bound at a given `ε`: `ε √B / (2 c_G)`.
pub fn rbp_comparator_cap(cg: f64, budget: usize, epsilon: f64) -> f64 {
    epsilon * (budget as f64).sqrt() / (2.0 * cg)
}

/// Smallest `ε` whose comparator cap admits `norm`: `2 c_G norm / √B`.
pub fn rbp_epsilon_for_norm(cg: f64, budget: usize, norm: f64) -> f64 {
    2.0 * cg * norm / (budget as f64).sqrt()
}
