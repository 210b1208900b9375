use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::harness::{DatasetStream, HarnessError};
use crate::kernel::{Label, MultitaskExample, SparseVector};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub k: usize,
    pub d: usize,
    pub n: usize,
    /// 1 makes every task share the same reference vector, 0 makes them independent.
    pub relatedness: f64,
    /// Probability of flipping each label.
    pub noise: f64,
    /// `(step, angle)`: from 0-based example `step` on, every reference vector
    /// is rotated by `angle` radians in one fixed random plane.
    pub shifts: Vec<(usize, f64)>,
    pub seed: u64,
    /// Instances with `|⟨g_i, x⟩| < min_margin` are redrawn; 0 disables.
    pub min_margin: f64,
}

impl SyntheticConfig {
    pub fn new(k: usize, d: usize, n: usize, relatedness: f64, noise: f64, seed: u64) -> Self {
        SyntheticConfig {
            k,
            d,
            n,
            relatedness,
            noise,
            shifts: Vec::new(),
            seed,
            min_margin: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::InvalidParameter(m.to_string()));
        if self.k == 0 || self.d == 0 {
            return bad("k and d must be positive");
        }
        if !(0.0..=1.0).contains(&self.relatedness) {
            return bad("relatedness must lie in [0, 1]");
        }
        if !(0.0..1.0).contains(&self.noise) {
            return bad("noise must lie in [0, 1)");
        }
        if !(0.0..1.0).contains(&self.min_margin) {
            return bad("min_margin must lie in [0, 1)");
        }
        if self.d == 1 && !self.shifts.is_empty() {
            return bad("shifts need d ≥ 2");
        }
        if self.shifts.windows(2).any(|w| w[0].0 >= w[1].0) {
            return bad("shift steps must be strictly increasing");
        }
        Ok(())
    }
}

/// Per-task reference vectors `g_1..g_k` and their scheduled replacements.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTaskSet {
    pub initial: Vec<Vec<f64>>,
    /// `(step, vectors in force from that step on)`, increasing in step.
    pub shifts: Vec<(usize, Vec<Vec<f64>>)>,
}

impl ReferenceTaskSet {
    pub fn k(&self) -> usize {
        self.initial.len()
    }

    /// Vectors in force at 0-based `step`.
    pub fn at(&self, step: usize) -> &[Vec<f64>] {
        self.shifts
            .iter()
            .rev()
            .find(|(s, _)| *s <= step)
            .map(|(_, g)| g.as_slice())
            .unwrap_or(&self.initial)
    }

    /// Initial vectors followed by every scheduled replacement.
    pub fn sequence(&self) -> Vec<Vec<Vec<f64>>> {
        std::iter::once(self.initial.clone())
            .chain(self.shifts.iter().map(|(_, g)| g.clone()))
            .collect()
    }

    /// Every vector multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> ReferenceTaskSet {
        let scale = |g: &Vec<Vec<f64>>| g.iter().map(|v| v.iter().map(|x| x * factor).collect()).collect();
        ReferenceTaskSet {
            initial: scale(&self.initial),
            shifts: self.shifts.iter().map(|(s, g)| (*s, scale(g))).collect(),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> bool {
    let norm = dot(v, v).sqrt();
    if norm < 1e-12 {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    true
}

fn unit_vector(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        if normalize(&mut v) {
            return v;
        }
    }
}

/// Rotation by `angle` in the plane spanned by orthonormal `p`, `q`.
fn rotate(x: &[f64], p: &[f64], q: &[f64], angle: f64) -> Vec<f64> {
    let (xp, xq) = (dot(x, p), dot(x, q));
    let (c, s) = (angle.cos(), angle.sin());
    x.iter()
        .zip(p.iter().zip(q))
        .map(|(&xi, (&pi, &qi))| xi + (c - 1.0) * (xp * pi + xq * qi) + s * (xp * qi - xq * pi))
        .collect()
}

/// Draws a stream of unit-norm instances, task ids round-robin, labelled by
/// the sign of `⟨g_i, x⟩` and flipped with probability `noise`.
pub fn generate_synthetic<T: Scalar>(
    config: &SyntheticConfig,
) -> Result<(DatasetStream<T>, ReferenceTaskSet), HarnessError> {
    config.validate()?;
    let SyntheticConfig { k, d, n, relatedness: r, .. } = *config;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let u = unit_vector(d, &mut rng);
    let initial: Vec<Vec<f64>> = (0..k)
        .map(|_| loop {
            let v = unit_vector(d, &mut rng);
            let mut g: Vec<f64> = u.iter().zip(&v).map(|(a, b)| r * a + (1.0 - r) * b).collect();
            if normalize(&mut g) {
                break g;
            }
        })
        .collect();

    let mut shifts = Vec::with_capacity(config.shifts.len());
    if !config.shifts.is_empty() {
        let p = unit_vector(d, &mut rng);
        let q = loop {
            let mut q = unit_vector(d, &mut rng);
            let c = dot(&q, &p);
            q.iter_mut().zip(&p).for_each(|(qi, pi)| *qi -= c * pi);
            if normalize(&mut q) {
                break q;
            }
        };
        let mut current = initial.clone();
        for &(step, angle) in &config.shifts {
            current = current.iter().map(|g| rotate(g, &p, &q, angle)).collect();
            shifts.push((step, current.clone()));
        }
    }
    let refs = ReferenceTaskSet { initial, shifts };

    let mut examples = Vec::with_capacity(n);
    for t in 0..n {
        let task = t % k;
        let g = &refs.at(t)[task];
        let (x, margin) = loop {
            let x = unit_vector(d, &mut rng);
            let m = dot(g, &x);
            if m.abs() >= config.min_margin && m != 0.0 {
                break (x, m);
            }
        };
        let mut label = if margin > 0.0 { Label::Positive } else { Label::Negative };
        if config.noise > 0.0 && rng.random::<f64>() < config.noise {
            label = if label.is_positive() { Label::Negative } else { Label::Positive };
        }
        let xs: Vec<T> = x.iter().map(|&v| T::lit(v)).collect();
        examples.push(MultitaskExample::new(SparseVector::from_dense(&xs, 1), task, label));
    }
    Ok((DatasetStream::new(examples, k), refs))
}
