//! Dense reference implementations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use mtbudget::{Label, MultitaskExample, MultitaskInstance, SparseVector, TaskGraph};

/// `(I + L_G)⁻¹` by dense inversion, built straight from the edge list.
pub fn dense_inverse(g: &TaskGraph) -> DMatrix<f64> {
    let k = g.k();
    let mut a = DMatrix::<f64>::identity(k, k);
    for (i, j) in g.edges() {
        a[(i, i)] += 1.0;
        a[(j, j)] += 1.0;
        a[(i, j)] -= 1.0;
        a[(j, i)] -= 1.0;
    }
    a.try_inverse().expect("I + L is positive definite")
}

/// Base kernels evaluated on dense vectors, normalized to unit diagonal.
#[derive(Debug, Clone, Copy)]
pub enum Base {
    Linear,
    Poly(u32, f64),
    Gauss(f64),
}

impl Base {
    pub fn spec(self) -> String {
        match self {
            Base::Linear => "linear:norm".into(),
            Base::Poly(d, c) => format!("poly:{d}:{c}:norm"),
            Base::Gauss(g) => format!("gauss:{g}:norm"),
        }
    }

    fn raw(self, a: &[f64], b: &[f64]) -> f64 {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        match self {
            Base::Linear => dot,
            Base::Poly(d, c) => (dot + c).powi(d as i32),
            Base::Gauss(g) => {
                let dist: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-g * dist).exp()
            }
        }
    }

    pub fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        self.raw(a, b) / (self.raw(a, a) * self.raw(b, b)).sqrt()
    }
}

/// Dense vector with roughly a third of its coordinates zeroed, never all.
pub fn random_dense(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d)
            .map(|_| if rng.random::<f64>() < 0.33 { 0.0 } else { rng.random_range(-1.0..1.0) })
            .collect();
        if v.iter().any(|x| *x != 0.0) {
            return v;
        }
    }
}

pub fn sparse(dense: &[f64]) -> SparseVector<f64> {
    SparseVector::from_dense(dense, 0)
}

pub fn to_dense(x: &SparseVector<f64>, d: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    for (i, val) in x.iter() {
        v[i as usize] = val;
    }
    v
}

pub fn instance(dense: &[f64], task: usize) -> MultitaskInstance<f64> {
    MultitaskInstance::new(sparse(dense), task)
}

pub fn example(dense: &[f64], task: usize, positive: bool) -> MultitaskExample<f64> {
    let label = if positive { Label::Positive } else { Label::Negative };
    MultitaskExample::new(sparse(dense), task, label)
}

/// Stream labelled by a random linear teacher per task, with label noise.
pub fn random_stream(rng: &mut ChaCha8Rng, k: usize, d: usize, n: usize, noise: f64) -> Vec<MultitaskExample<f64>> {
    let teachers: Vec<Vec<f64>> = (0..k).map(|_| random_dense(rng, d)).collect();
    (0..n)
        .map(|_| {
            let x = random_dense(rng, d);
            let task = rng.random_range(0..k);
            let margin: f64 = x.iter().zip(&teachers[task]).map(|(a, b)| a * b).sum();
            let flip = rng.random::<f64>() < noise;
            example(&x, task, (margin >= 0.0) != flip)
        })
        .collect()
}

/// Squared distance from `target` to the span of `basis` in the RKHS, and
/// the least-squares coefficients, from the Gram matrix by eigendecomposition.
pub fn ls_projection(gram: &DMatrix<f64>, cross: &DVector<f64>, self_kernel: f64) -> (f64, DVector<f64>) {
    let n = gram.nrows();
    if n == 0 {
        return (self_kernel, DVector::zeros(0));
    }
    let eig = SymmetricEigen::new(gram.clone());
    let cutoff = 1e-12 * eig.eigenvalues.amax().max(1.0);
    let mut coef = DVector::zeros(n);
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > cutoff {
            let u = eig.eigenvectors.column(i);
            coef += u * (u.dot(cross) / lambda);
        }
    }
    let explained = cross.dot(&coef);
    ((self_kernel - explained).max(0.0), coef)
}

/// Multitask kernel Perceptron without a budget, from dense kernel values.
pub struct ReferencePerceptron {
    inverse: DMatrix<f64>,
    base: Base,
    d: usize,
    stored: Vec<(Vec<f64>, usize, f64)>,
}

impl ReferencePerceptron {
    pub fn new(graph: &TaskGraph, base: Base, d: usize) -> Self {
        ReferencePerceptron {
            inverse: dense_inverse(graph),
            base,
            d,
            stored: Vec::new(),
        }
    }

    pub fn score(&self, x: &[f64], task: usize) -> f64 {
        self.stored
            .iter()
            .map(|(xs, ts, w)| w * self.inverse[(*ts, task)] * self.base.eval(xs, x))
            .sum()
    }

    /// Returns whether the trial was a mistake.
    pub fn step(&mut self, ex: &MultitaskExample<f64>) -> bool {
        let x = to_dense(&ex.instance.x, self.d);
        let y = ex.label.value::<f64>();
        let mistake = y * self.score(&x, ex.instance.task) <= 0.0;
        if mistake {
            self.stored.push((x, ex.instance.task, y));
        }
        mistake
    }
}
