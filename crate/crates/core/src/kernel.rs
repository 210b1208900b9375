//! Sparse instances, base kernels with unit self-similarity, and the
//! graph-induced multitask kernel.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::InteractionModel;
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("instance has zero norm under the base kernel; cannot normalize")]
    ZeroNormInstance,
    #[error("feature indices must be strictly increasing (position {position})")]
    UnsortedIndices { position: usize },
    #[error("{indices} indices but {values} values")]
    LengthMismatch { indices: usize, values: usize },
    #[error("invalid kernel spec `{0}`")]
    InvalidSpec(String),
}

/// Sparse real vector with strictly increasing feature ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector<T> {
    indices: Vec<u32>,
    values: Vec<T>,
}

impl<T: Scalar> SparseVector<T> {
    pub fn new(indices: Vec<u32>, values: Vec<T>) -> Result<Self, KernelError> {
        if indices.len() != values.len() {
            return Err(KernelError::LengthMismatch {
                indices: indices.len(),
                values: values.len(),
            });
        }
        if let Some(p) = indices.windows(2).position(|w| w[0] >= w[1]) {
            return Err(KernelError::UnsortedIndices { position: p + 1 });
        }
        Ok(SparseVector { indices, values })
    }

    /// Dense vector as a sparse one with ids `offset, offset+1, …`; zeros are skipped.
    pub fn from_dense(dense: &[T], offset: u32) -> Self {
        let (indices, values) = dense
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != T::zero())
            .map(|(i, &v)| (offset + i as u32, v))
            .unzip();
        SparseVector { indices, values }
    }

    pub fn empty() -> Self {
        SparseVector {
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, T)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    /// Value at feature `id`, zero if absent.
    pub fn get(&self, id: u32) -> T {
        self.indices
            .binary_search(&id)
            .map_or(T::zero(), |p| self.values[p])
    }

    pub fn max_index(&self) -> Option<u32> {
        self.indices.last().copied()
    }

    pub fn squared_norm(&self) -> T {
        self.values.iter().map(|&v| v * v).sum()
    }

    /// Inner product; walks the shorter vector and searches the longer one.
    pub fn dot(&self, other: &Self) -> T {
        let (short, long) = if self.nnz() <= other.nnz() { (self, other) } else { (other, self) };
        if short.is_empty() {
            return T::zero();
        }
        if short.nnz() * 8 >= long.nnz() {
            return merge_dot(short, long);
        }
        let mut acc = T::zero();
        let mut lo = 0;
        for (id, v) in short.iter() {
            match long.indices[lo..].binary_search(&id) {
                Ok(p) => {
                    acc += v * long.values[lo + p];
                    lo += p + 1;
                }
                Err(p) => lo += p,
            }
            if lo >= long.nnz() {
                break;
            }
        }
        acc
    }

    /// `‖self − other‖²` without cancellation.
    pub fn squared_distance(&self, other: &Self) -> T {
        let (a, b) = (self, other);
        let (mut i, mut j) = (0, 0);
        let mut acc = T::zero();
        while i < a.nnz() && j < b.nnz() {
            let (ia, ib) = (a.indices[i], b.indices[j]);
            let d = if ia == ib {
                let d = a.values[i] - b.values[j];
                i += 1;
                j += 1;
                d
            } else if ia < ib {
                i += 1;
                a.values[i - 1]
            } else {
                j += 1;
                b.values[j - 1]
            };
            acc += d * d;
        }
        acc += a.values[i..].iter().map(|&v| v * v).sum::<T>();
        acc += b.values[j..].iter().map(|&v| v * v).sum::<T>();
        acc
    }
}

fn merge_dot<T: Scalar>(a: &SparseVector<T>, b: &SparseVector<T>) -> T {
    let (mut i, mut j) = (0, 0);
    let mut acc = T::zero();
    while i < a.indices.len() && j < b.indices.len() {
        match a.indices[i].cmp(&b.indices[j]) {
            std::cmp::Ordering::Equal => {
                acc += a.values[i] * b.values[j];
                i += 1;
                j += 1;
            }
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
        }
    }
    acc
}

/// Binary label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    /// `+1` for scores ≥ 0, `−1` otherwise.
    pub fn from_score<T: Scalar>(score: T) -> Self {
        if score >= T::zero() {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn from_sign(sign: i8) -> Option<Self> {
        match sign {
            1 => Some(Label::Positive),
            -1 => Some(Label::Negative),
            _ => None,
        }
    }

    #[inline]
    pub fn value<T: Scalar>(self) -> T {
        match self {
            Label::Positive => T::one(),
            Label::Negative => -T::one(),
        }
    }

    #[inline]
    pub fn sign(self) -> i8 {
        match self {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Positive => "+1",
            Label::Negative => "-1",
        })
    }
}

/// Instance vector paired with the 0-based id of its task.
#[derive(Debug, Clone, PartialEq)]
pub struct MultitaskInstance<T> {
    pub x: SparseVector<T>,
    pub task: usize,
}

impl<T> MultitaskInstance<T> {
    pub fn new(x: SparseVector<T>, task: usize) -> Self {
        MultitaskInstance { x, task }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultitaskExample<T> {
    pub instance: MultitaskInstance<T>,
    pub label: Label,
}

impl<T> MultitaskExample<T> {
    pub fn new(x: SparseVector<T>, task: usize, label: Label) -> Self {
        MultitaskExample {
            instance: MultitaskInstance { x, task },
            label,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind<T> {
    Linear,
    Polynomial { degree: u32, offset: T },
    Gaussian { gamma: T },
}

/// Base kernel between single-task instances, optionally cosine-normalized
/// so that `K'(x, x) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec<T> {
    pub kind: KernelKind<T>,
    pub normalize: bool,
}

impl<T: Scalar> KernelSpec<T> {
    pub fn linear() -> Self {
        KernelSpec { kind: KernelKind::Linear, normalize: true }
    }

    pub fn polynomial(degree: u32, offset: T) -> Self {
        KernelSpec {
            kind: KernelKind::Polynomial { degree, offset },
            normalize: true,
        }
    }

    pub fn gaussian(gamma: T) -> Self {
        KernelSpec {
            kind: KernelKind::Gaussian { gamma },
            normalize: true,
        }
    }

    pub fn unnormalized(mut self) -> Self {
        self.normalize = false;
        self
    }

    /// Unnormalized kernel value.
    pub fn raw(&self, a: &SparseVector<T>, b: &SparseVector<T>) -> T {
        match self.kind {
            KernelKind::Linear => a.dot(b),
            KernelKind::Polynomial { degree, offset } => (a.dot(b) + offset).powi(degree as i32),
            KernelKind::Gaussian { gamma } => (-gamma * a.squared_distance(b)).exp(),
        }
    }

    /// Raw self-similarity of `x`, checked to be usable as a normalizer.
    pub fn self_similarity(&self, x: &SparseVector<T>) -> Result<T, KernelError> {
        let s = self.raw(x, x);
        if self.normalize && !(s > T::zero()) {
            return Err(KernelError::ZeroNormInstance);
        }
        Ok(s)
    }

    /// Kernel value given both raw self-similarities; avoids recomputing them
    /// for stored instances.
    #[inline]
    pub fn eval_with_norms(&self, a: &SparseVector<T>, a_self: T, b: &SparseVector<T>, b_self: T) -> T {
        let raw = self.raw(a, b);
        if !self.normalize {
            return raw;
        }
        match self.kind {
            KernelKind::Gaussian { .. } => raw,
            _ => raw / (a_self * b_self).sqrt(),
        }
    }

    pub fn eval(&self, a: &SparseVector<T>, b: &SparseVector<T>) -> Result<T, KernelError> {
        let sa = self.self_similarity(a)?;
        let sb = self.self_similarity(b)?;
        Ok(self.eval_with_norms(a, sa, b, sb))
    }
}

impl<T: Scalar> fmt::Display for KernelSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            KernelKind::Linear => write!(f, "linear")?,
            KernelKind::Polynomial { degree, offset } => write!(f, "poly:{degree}:{offset}")?,
            KernelKind::Gaussian { gamma } => write!(f, "gauss:{gamma}")?,
        }
        if self.normalize {
            write!(f, ":norm")?;
        }
        Ok(())
    }
}

/// Parses `linear`, `poly:<degree>:<offset>`, `gauss:<gamma>`, each with an
/// optional `:norm` suffix.
impl<T: Scalar> FromStr for KernelSpec<T> {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let invalid = || KernelError::InvalidSpec(s.to_string());
        let mut parts: Vec<&str> = s.trim().split(':').collect();
        let normalize = parts.last() == Some(&"norm");
        if normalize {
            parts.pop();
        }
        let real = |tok: &str| -> Result<T, KernelError> {
            let v: f64 = tok.parse().map_err(|_| invalid())?;
            if !v.is_finite() {
                return Err(invalid());
            }
            T::from_f64(v).ok_or_else(invalid)
        };
        let kind = match parts.as_slice() {
            ["linear"] => KernelKind::Linear,
            ["poly", degree, offset] => {
                let degree: u32 = degree.parse().map_err(|_| invalid())?;
                let offset = real(offset)?;
                if degree == 0 || offset < T::zero() {
                    return Err(invalid());
                }
                KernelKind::Polynomial { degree, offset }
            }
            ["gauss", gamma] => {
                let gamma = real(gamma)?;
                if !(gamma > T::zero()) {
                    return Err(invalid());
                }
                KernelKind::Gaussian { gamma }
            }
            _ => return Err(invalid()),
        };
        Ok(KernelSpec { kind, normalize })
    }
}

/// Whether stored instances interact through the task coupling or through
/// the base kernel alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMode {
    /// `K([x,i],[x',j]) = (A_G⁻¹)_ij K'(x,x')`
    Multitask,
    /// `K'(x,x')`, task markers ignored.
    SingleTask,
}

/// Base kernel plus interaction model: everything needed to evaluate the
/// multitask kernel.
#[derive(Debug, Clone)]
pub struct MultitaskKernel<T> {
    pub model: InteractionModel<T>,
    pub spec: KernelSpec<T>,
}

impl<T: Scalar> MultitaskKernel<T> {
    pub fn new(model: InteractionModel<T>, spec: KernelSpec<T>) -> Self {
        MultitaskKernel { model, spec }
    }

    pub fn base(&self, a: &SparseVector<T>, b: &SparseVector<T>) -> Result<T, KernelError> {
        self.spec.eval(a, b)
    }

    /// `(A_G⁻¹)_{task(a), task(b)} · K'(a.x, b.x)`
    pub fn eval(&self, a: &MultitaskInstance<T>, b: &MultitaskInstance<T>) -> Result<T, KernelError> {
        let c = self.model.coupling(a.task, b.task);
        Ok(c * self.spec.eval(&a.x, &b.x)?)
    }
}

/// `max{0, 1 − y·score}`
pub fn hinge_loss<T: Scalar>(score: T, label: Label) -> T {
    (T::one() - label.value::<T>() * score).max(T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::TaskGraph;
    use approx::assert_abs_diff_eq;

    fn sv(pairs: &[(u32, f64)]) -> SparseVector<f64> {
        SparseVector::new(pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect()).unwrap()
    }

    #[test]
    fn sparse_vector_validation() {
        assert_eq!(
            SparseVector::new(vec![1, 1], vec![1.0, 2.0]),
            Err(KernelError::UnsortedIndices { position: 1 })
        );
        assert!(SparseVector::new(vec![1], vec![1.0, 2.0]).is_err());
        let v = sv(&[(2, 1.5), (9, -1.0)]);
        assert_eq!(v.get(9), -1.0);
        assert_eq!(v.get(3), 0.0);
        assert_eq!(v.max_index(), Some(9));
    }

    #[test]
    fn dot_and_distance_against_dense() {
        let a = sv(&[(0, 1.0), (3, 2.0), (5, -1.0)]);
        let b = sv(&[(1, 4.0), (3, 0.5), (5, 2.0), (7, 1.0)]);
        let dense = |v: &SparseVector<f64>| (0..8).map(|i| v.get(i)).collect::<Vec<_>>();
        let (da, db) = (dense(&a), dense(&b));
        let dot: f64 = da.iter().zip(&db).map(|(x, y)| x * y).sum();
        let dist: f64 = da.iter().zip(&db).map(|(x, y)| (x - y) * (x - y)).sum();
        assert_abs_diff_eq!(a.dot(&b), dot, epsilon = 1e-12);
        assert_abs_diff_eq!(b.dot(&a), dot, epsilon = 1e-12);
        assert_abs_diff_eq!(a.squared_distance(&b), dist, epsilon = 1e-12);

        // binary-search path: very short against long
        let long = SparseVector::from_dense(&(1..=100).map(|i| i as f64).collect::<Vec<_>>(), 0);
        let short = sv(&[(10, 1.0), (50, 2.0), (200, 3.0)]);
        assert_abs_diff_eq!(short.dot(&long), 11.0 + 2.0 * 51.0, epsilon = 1e-12);
    }

    #[test]
    fn base_kernel_examples() {
        let a = sv(&[(1, 0.3), (4, 2.0)]);
        assert_eq!(KernelSpec::gaussian(0.7).eval(&a, &a).unwrap(), 1.0);
        assert_abs_diff_eq!(KernelSpec::linear().eval(&a, &a).unwrap(), 1.0, epsilon = 1e-15);
        let e1 = sv(&[(0, 1.0)]);
        let e2 = sv(&[(1, 1.0)]);
        // (0 + 1)² / sqrt(2² · 2²)
        assert_abs_diff_eq!(KernelSpec::polynomial(2, 1.0).eval(&e1, &e2).unwrap(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn zero_norm_rejected_only_when_normalizing() {
        let z = SparseVector::<f64>::empty();
        let a = sv(&[(0, 1.0)]);
        assert_eq!(KernelSpec::linear().eval(&z, &a), Err(KernelError::ZeroNormInstance));
        assert_eq!(KernelSpec::polynomial(3, 0.0).eval(&z, &a), Err(KernelError::ZeroNormInstance));
        assert_eq!(KernelSpec::linear().unnormalized().eval(&z, &a), Ok(0.0));
        assert_abs_diff_eq!(KernelSpec::polynomial(2, 1.0).eval(&z, &a).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn multitask_kernel_examples() {
        let x = sv(&[(0, 0.6), (1, 0.8)]);
        let edgeless = MultitaskKernel::new(
            InteractionModel::new(&TaskGraph::edgeless(2)).unwrap(),
            KernelSpec::linear(),
        );
        let a = MultitaskInstance::new(x.clone(), 0);
        assert_abs_diff_eq!(edgeless.eval(&a, &a).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(edgeless.eval(&a, &MultitaskInstance::new(x.clone(), 1)).unwrap(), 0.0);

        let complete = MultitaskKernel::new(
            InteractionModel::new(&TaskGraph::complete(3)).unwrap(),
            KernelSpec::linear(),
        );
        let b = MultitaskInstance::new(x, 1);
        assert_abs_diff_eq!(complete.eval(&a, &b).unwrap(), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn hinge_examples() {
        assert_eq!(hinge_loss(1.0, Label::Positive), 0.0);
        assert_eq!(hinge_loss(0.0, Label::Positive), 1.0);
        assert_eq!(hinge_loss(-0.5, Label::Positive), 1.5);
        assert_eq!(hinge_loss(-0.5, Label::Negative), 0.5);
    }

    #[test]
    fn kernel_spec_strings() {
        let k: KernelSpec<f64> = "gauss:0.5:norm".parse().unwrap();
        assert_eq!(k, KernelSpec::gaussian(0.5));
        let k: KernelSpec<f64> = "poly:3:1".parse().unwrap();
        assert_eq!(k, KernelSpec::polynomial(3, 1.0).unnormalized());
        assert_eq!(k.to_string(), "poly:3:1");
        assert_eq!("linear:norm".parse::<KernelSpec<f64>>().unwrap(), KernelSpec::linear());
        for bad in ["", "rbf:1", "gauss:-1", "gauss:0", "poly:0:1", "poly:2", "poly:2:-1", "linear:1", "gauss:nan"] {
            assert!(bad.parse::<KernelSpec<f64>>().is_err(), "accepted {bad}");
        }
    }

    #[test]
    fn label_from_score_breaks_ties_positive() {
        assert_eq!(Label::from_score(0.0), Label::Positive);
        assert_eq!(Label::from_score(-1e-300), Label::Negative);
    }
}
