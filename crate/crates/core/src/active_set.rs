//! Budgeted store of active multitask instances.
//!
//! Besides instances and weights the set can track the Gram matrix `H` of
//! its entries together with `H⁻¹`. The inverse is kept current
//! incrementally: bordering on insertion and a rank-one downdate on
//! eviction, so each event costs `O(|S|²)` kernel-free work.
//!
//! Two quantities fall out of `H⁻¹` directly:
//!
//! * the residual of entry `j` projected onto all other entries is
//!   `1 / sqrt((H⁻¹)_jj)`;
//! * the coefficients of that projection are `−(H⁻¹)_jr / (H⁻¹)_rr`.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::graph::InteractionModel;
use crate::kernel::{KernelError, KernelMode, Label, MultitaskInstance, MultitaskKernel, SparseVector};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ActiveSetError {
    #[error("active set is full (budget {budget}); evict before inserting")]
    BudgetFull { budget: usize },
    #[error("operation needs the Gram inverse but this set does not track it")]
    GramNotTracked,
    #[error("ridged Gram matrix is not positive definite")]
    SingularGram,
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("snapshot line {line}: {message}")]
    Snapshot { line: usize, message: String },
}

/// A query instance with its raw base-kernel self-similarity precomputed.
#[derive(Debug, Clone, Copy)]
pub struct Prepared<'a, T> {
    pub instance: &'a MultitaskInstance<T>,
    pub self_sim: T,
}

impl<'a, T: Scalar> Prepared<'a, T> {
    pub fn new(instance: &'a MultitaskInstance<T>, kernel: &MultitaskKernel<T>) -> Result<Self, KernelError> {
        Ok(Prepared {
            instance,
            self_sim: kernel.spec.self_similarity(&instance.x)?,
        })
    }
}

/// Weight attached to an active entry.
pub trait EntryWeight<T: Scalar>: Clone + fmt::Debug + Send {
    /// Factor multiplying this entry's kernel value when scoring `task`.
    fn coefficient(&self, task: usize, model: &InteractionModel<T>) -> T;

    fn scale(&mut self, factor: T);

    fn write_token(&self, out: &mut String, model: &InteractionModel<T>);

    fn parse_token(token: &str, model: &InteractionModel<T>) -> Result<Self, String>;
}

/// A single real weight `β_j`.
impl<T: Scalar> EntryWeight<T> for T {
    #[inline]
    fn coefficient(&self, _task: usize, _model: &InteractionModel<T>) -> T {
        *self
    }

    fn scale(&mut self, factor: T) {
        *self *= factor;
    }

    fn write_token(&self, out: &mut String, _model: &InteractionModel<T>) {
        let _ = write!(out, "{self}");
    }

    fn parse_token(token: &str, _model: &InteractionModel<T>) -> Result<Self, String> {
        parse_real(token)
    }
}

fn parse_real<T: Scalar>(token: &str) -> Result<T, String> {
    token
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .and_then(T::from_f64)
        .ok_or_else(|| format!("invalid number `{token}`"))
}

/// One weight per task, `(β_1)_j … (β_k)_j`, stored as dense blocks for the
/// connected components that hold a nonzero contribution. Tasks of other
/// components are implicitly zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TaskWeights<T> {
    // (component id, weights indexed by position within the component), sorted by id
    blocks: Vec<(usize, Vec<T>)>,
}

impl<T: Scalar> TaskWeights<T> {
    pub fn new() -> Self {
        TaskWeights { blocks: Vec::new() }
    }

    pub fn block(&self, component: usize) -> Option<&[T]> {
        self.blocks
            .binary_search_by_key(&component, |b| b.0)
            .ok()
            .map(|p| self.blocks[p].1.as_slice())
    }

    /// Mutable block for `component`, created as zeros of length `size`.
    pub fn block_mut(&mut self, component: usize, size: usize) -> &mut [T] {
        let p = match self.blocks.binary_search_by_key(&component, |b| b.0) {
            Ok(p) => p,
            Err(p) => {
                self.blocks.insert(p, (component, vec![T::zero(); size]));
                p
            }
        };
        &mut self.blocks[p].1
    }

    pub fn get(&self, task: usize, model: &InteractionModel<T>) -> T {
        self.block(model.component_of(task))
            .map_or(T::zero(), |b| b[model.position_in_component(task)])
    }

    /// `sqrt(Σ_l (β_l)_j²)`
    pub fn norm(&self) -> T {
        self.blocks
            .iter()
            .flat_map(|b| b.1.iter())
            .map(|&v| v * v)
            .sum::<T>()
            .sqrt()
    }

    /// Dense `k`-vector view.
    pub fn to_dense(&self, model: &InteractionModel<T>) -> Vec<T> {
        (0..model.k()).map(|t| self.get(t, model)).collect()
    }

    pub fn stored_len(&self) -> usize {
        self.blocks.iter().map(|b| b.1.len()).sum()
    }

    /// `self += factor · other`, block by block.
    pub fn add_scaled(&mut self, other: &TaskWeights<T>, factor: T) {
        for (c, values) in &other.blocks {
            let block = self.block_mut(*c, values.len());
            for (v, &o) in block.iter_mut().zip(values) {
                *v += factor * o;
            }
        }
    }
}

impl<T: Scalar> EntryWeight<T> for TaskWeights<T> {
    #[inline]
    fn coefficient(&self, task: usize, model: &InteractionModel<T>) -> T {
        self.get(task, model)
    }

    fn scale(&mut self, factor: T) {
        for b in &mut self.blocks {
            b.1.iter_mut().for_each(|v| *v *= factor);
        }
    }

    /// `task=value` pairs (1-based tasks) joined by commas, or `-`.
    fn write_token(&self, out: &mut String, model: &InteractionModel<T>) {
        if self.blocks.is_empty() {
            out.push('-');
            return;
        }
        let mut first = true;
        for (c, values) in &self.blocks {
            for (&task, v) in model.components()[*c].iter().zip(values) {
                if !first {
                    out.push(',');
                }
                first = false;
                let _ = write!(out, "{}={}", task + 1, v);
            }
        }
    }

    fn parse_token(token: &str, model: &InteractionModel<T>) -> Result<Self, String> {
        let mut w = TaskWeights::new();
        if token == "-" {
            return Ok(w);
        }
        for pair in token.split(',') {
            let (task, value) = pair.split_once('=').ok_or_else(|| format!("expected task=value, got `{pair}`"))?;
            let task: usize = task.parse().map_err(|_| format!("invalid task `{task}`"))?;
            if task == 0 || task > model.k() {
                return Err(format!("task {task} out of range"));
            }
            let t = task - 1;
            let c = model.component_of(t);
            let size = model.components()[c].len();
            w.block_mut(c, size)[model.position_in_component(t)] = parse_real(value)?;
        }
        Ok(w)
    }
}

#[derive(Debug, Clone)]
pub struct Entry<T, W> {
    pub instance: MultitaskInstance<T>,
    pub label: Label,
    pub weight: W,
    pub insertion_time: u64,
    self_sim: T,
}

impl<T: Scalar, W> Entry<T, W> {
    pub fn prepared(&self) -> Prepared<'_, T> {
        Prepared {
            instance: &self.instance,
            self_sim: self.self_sim,
        }
    }
}

/// Result of removing an entry.
#[derive(Debug, Clone)]
pub struct Evicted<T, W> {
    pub entry: Entry<T, W>,
    /// Coefficients of the removed kernel function projected onto the
    /// remaining entries, in their order. Empty when the Gram matrix is not
    /// tracked.
    pub gammas: Vec<T>,
}

/// Orthogonal projection of a query onto the span of the active entries.
#[derive(Debug, Clone)]
pub struct Projection<T> {
    pub alphas: Vec<T>,
    pub residual: T,
    /// Kernel between `q` and every entry.
    pub column: Vec<T>,
    /// `K(q, q)`.
    pub self_kernel: T,
}

#[derive(Debug, Clone)]
struct Gram<T> {
    h: DenseMatrix<T>,
    h_inv: DenseMatrix<T>,
    regularized: bool,
}

#[derive(Debug, Clone)]
pub struct ActiveSet<T, W = T> {
    entries: Vec<Entry<T, W>>,
    budget: usize,
    mode: KernelMode,
    gram: Option<Gram<T>>,
    clock: u64,
}

impl<T: Scalar, W: EntryWeight<T>> ActiveSet<T, W> {
    /// Set that maintains `H` and `H⁻¹`. `usize::MAX` means unbounded.
    pub fn with_gram(budget: usize, mode: KernelMode) -> Self {
        ActiveSet {
            entries: Vec::new(),
            budget,
            mode,
            gram: Some(Gram {
                h: DenseMatrix::zeros(0, 0),
                h_inv: DenseMatrix::zeros(0, 0),
                regularized: false,
            }),
            clock: 0,
        }
    }

    /// Set that only stores instances and weights.
    pub fn without_gram(budget: usize, mode: KernelMode) -> Self {
        ActiveSet {
            entries: Vec::new(),
            budget,
            mode,
            gram: None,
            clock: 0,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    #[inline]
    pub fn budget(&self) -> usize {
        self.budget
    }

    #[inline]
    pub fn is_full(&self) -> bool {
        self.entries.len() >= self.budget
    }

    pub fn mode(&self) -> KernelMode {
        self.mode
    }

    pub fn entries(&self) -> &[Entry<T, W>] {
        &self.entries
    }

    pub fn weight_mut(&mut self, j: usize) -> &mut W {
        &mut self.entries[j].weight
    }

    pub fn weights_mut(&mut self) -> impl Iterator<Item = &mut W> {
        self.entries.iter_mut().map(|e| &mut e.weight)
    }

    pub fn tracks_gram(&self) -> bool {
        self.gram.is_some()
    }

    pub fn gram(&self) -> Option<&DenseMatrix<T>> {
        self.gram.as_ref().map(|g| &g.h)
    }

    pub fn gram_inverse(&self) -> Option<&DenseMatrix<T>> {
        self.gram.as_ref().map(|g| &g.h_inv)
    }

    /// True once a near-singular insertion forced a ridge onto `H`'s diagonal.
    pub fn is_regularized(&self) -> bool {
        self.gram.as_ref().is_some_and(|g| g.regularized)
    }

    /// Kernel between two prepared instances under this set's mode.
    #[inline]
    pub fn pair_kernel(&self, kernel: &MultitaskKernel<T>, a: Prepared<'_, T>, b: Prepared<'_, T>) -> T {
        let coupling = match self.mode {
            KernelMode::Multitask => {
                let c = kernel.model.coupling(a.instance.task, b.instance.task);
                if c == T::zero() {
                    return T::zero();
                }
                c
            }
            KernelMode::SingleTask => T::one(),
        };
        coupling * kernel.spec.eval_with_norms(&a.instance.x, a.self_sim, &b.instance.x, b.self_sim)
    }

    pub fn kernel_column(&self, kernel: &MultitaskKernel<T>, q: Prepared<'_, T>) -> Vec<T> {
        self.entries
            .iter()
            .map(|e| self.pair_kernel(kernel, e.prepared(), q))
            .collect()
    }

    /// Score of `q`: `Σ_j coefficient_j(task(q)) · kernel(entry_j, q)`.
    /// Entries whose coefficient is zero are skipped without a kernel call.
    pub fn predict(&self, kernel: &MultitaskKernel<T>, q: Prepared<'_, T>) -> T {
        let task = q.instance.task;
        let mut score = T::zero();
        for e in &self.entries {
            let c = e.weight.coefficient(task, &kernel.model);
            if c != T::zero() {
                score += c * self.pair_kernel(kernel, e.prepared(), q);
            }
        }
        score
    }

    /// `α = H⁻¹ k_q` and `‖P^⊥ K(q,·)‖ = sqrt(max{0, K(q,q) − k_qᵀα})`.
    pub fn projection(&self, kernel: &MultitaskKernel<T>, q: Prepared<'_, T>) -> Result<Projection<T>, ActiveSetError> {
        let gram = self.gram.as_ref().ok_or(ActiveSetError::GramNotTracked)?;
        let kqq = self.pair_kernel(kernel, q, q);
        let col = self.kernel_column(kernel, q);
        let alphas = gram.h_inv.matvec(&col);
        let explained: T = col.iter().zip(&alphas).map(|(&c, &a)| c * a).sum();
        Ok(Projection {
            alphas,
            residual: (kqq - explained).max(T::zero()).sqrt(),
            column: col,
            self_kernel: kqq,
        })
    }

    /// [`insert`](Self::insert) reusing a projection of `q` taken on the
    /// current state, which spares the kernel column and the solve.
    pub fn insert_projected(
        &mut self,
        q: Prepared<'_, T>,
        label: Label,
        weight: W,
        projection: Projection<T>,
    ) -> Result<(), ActiveSetError> {
        if self.is_full() {
            return Err(ActiveSetError::BudgetFull { budget: self.budget });
        }
        self.push_projected(q, label, weight, projection)
    }

    /// [`insert_and_evict`](Self::insert_and_evict) reusing a projection of
    /// `q` taken on the current state.
    pub fn insert_and_evict_projected(
        &mut self,
        q: Prepared<'_, T>,
        label: Label,
        weight: W,
        projection: Projection<T>,
        choose: impl FnOnce(&Self) -> usize,
    ) -> Result<Evicted<T, W>, ActiveSetError> {
        self.push_projected(q, label, weight, projection)?;
        let r = choose(self);
        Ok(self.evict(r))
    }

    fn push_projected(
        &mut self,
        q: Prepared<'_, T>,
        label: Label,
        weight: W,
        projection: Projection<T>,
    ) -> Result<(), ActiveSetError> {
        let gram = self.gram.as_mut().ok_or(ActiveSetError::GramNotTracked)?;
        assert_eq!(projection.column.len(), self.entries.len(), "stale projection");
        gram.border_solved(projection.column, projection.alphas, projection.self_kernel)?;
        self.append(q, label, weight);
        Ok(())
    }

    /// Appends an entry. Fails with `BudgetFull` at capacity.
    pub fn insert(
        &mut self,
        kernel: &MultitaskKernel<T>,
        q: Prepared<'_, T>,
        label: Label,
        weight: W,
    ) -> Result<(), ActiveSetError> {
        if self.is_full() {
            return Err(ActiveSetError::BudgetFull { budget: self.budget });
        }
        self.push(kernel, q, label, weight)
    }

    fn push(&mut self, kernel: &MultitaskKernel<T>, q: Prepared<'_, T>, label: Label, weight: W) -> Result<(), ActiveSetError> {
        if self.tracks_gram() {
            let col = self.kernel_column(kernel, q);
            let kqq = self.pair_kernel(kernel, q, q);
            if let Some(gram) = self.gram.as_mut() {
                gram.border(col, kqq)?;
            }
        }
        self.append(q, label, weight);
        Ok(())
    }

    fn append(&mut self, q: Prepared<'_, T>, label: Label, weight: W) {
        self.entries.push(Entry {
            instance: q.instance.clone(),
            label,
            weight,
            insertion_time: self.clock,
            self_sim: q.self_sim,
        });
        self.clock += 1;
    }

    /// `‖P^⊥_{J∖{j}} K(entry_j,·)‖` for every entry, from `1/(H⁻¹)_jj`.
    pub fn leave_one_out_residuals(&self) -> Result<Vec<T>, ActiveSetError> {
        let gram = self.gram.as_ref().ok_or(ActiveSetError::GramNotTracked)?;
        Ok((0..self.len())
            .map(|j| {
                let d = gram.h_inv[(j, j)];
                if d > T::zero() {
                    (T::one() / d).sqrt()
                } else {
                    T::zero()
                }
            })
            .collect())
    }

    /// Removes entry `r`. Weights of the remaining entries are left to the
    /// caller; the projection coefficients are returned for that purpose.
    pub fn evict(&mut self, r: usize) -> Evicted<T, W> {
        assert!(r < self.len(), "evict index {r} out of range");
        let gammas = match self.gram.as_mut() {
            Some(g) => g.remove(r),
            None => Vec::new(),
        };
        let entry = self.entries.remove(r);
        Evicted { entry, gammas }
    }

    /// Inserts `q` on top of a full set, lets `choose` pick the entry to drop
    /// among the `len() + 1` entries (the new one is last), and evicts it.
    /// The set never stays above budget.
    pub fn insert_and_evict(
        &mut self,
        kernel: &MultitaskKernel<T>,
        q: Prepared<'_, T>,
        label: Label,
        weight: W,
        choose: impl FnOnce(&Self) -> usize,
    ) -> Result<Evicted<T, W>, ActiveSetError> {
        self.push(kernel, q, label, weight)?;
        let r = choose(self);
        Ok(self.evict(r))
    }

    /// `max_ij |H_ij − kernel(entry_i, entry_j)|`, ridge included when the set
    /// is regularized. Zero for untracked sets.
    pub fn gram_drift(&self, kernel: &MultitaskKernel<T>) -> T {
        let Some(g) = &self.gram else { return T::zero() };
        let ridge = if g.regularized { T::ridge() } else { T::zero() };
        let mut worst = T::zero();
        for (i, a) in self.entries.iter().enumerate() {
            for (j, b) in self.entries.iter().enumerate() {
                let mut want = self.pair_kernel(kernel, a.prepared(), b.prepared());
                if i == j {
                    want += ridge;
                }
                worst = worst.max((g.h[(i, j)] - want).abs());
            }
        }
        worst
    }

    /// `‖H·H⁻¹ − I‖_max`.
    pub fn inverse_residual(&self) -> Option<T> {
        self.gram.as_ref().map(|g| {
            if g.h.rows() == 0 {
                T::zero()
            } else {
                g.h.matmul(&g.h_inv).identity_deviation()
            }
        })
    }

    /// Line-oriented text snapshot: a `budget` header, a `mode` header, then
    /// one `<task> <label> <weight> <idx>:<val> …` line per entry (1-based
    /// tasks), in insertion order.
    pub fn to_snapshot(&self, model: &InteractionModel<T>) -> String {
        let mut out = String::from("# active set snapshot\n");
        if self.budget == usize::MAX {
            out.push_str("budget unbounded\n");
        } else {
            let _ = writeln!(out, "budget {}", self.budget);
        }
        let _ = writeln!(
            out,
            "mode {}",
            match self.mode {
                KernelMode::Multitask => "multitask",
                KernelMode::SingleTask => "single-task",
            }
        );
        for e in &self.entries {
            let _ = write!(out, "{} {} ", e.instance.task + 1, e.label);
            e.weight.write_token(&mut out, model);
            for (id, v) in e.instance.x.iter() {
                let _ = write!(out, " {id}:{v}");
            }
            out.push('\n');
        }
        out
    }

    /// Rebuilds a set from [`to_snapshot`](Self::to_snapshot) output.
    pub fn from_snapshot(text: &str, kernel: &MultitaskKernel<T>, track_gram: bool) -> Result<Self, ActiveSetError> {
        let mut budget = None;
        let mut mode = None;
        let mut set: Option<Self> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |message: String| ActiveSetError::Snapshot { line: line_no, message };
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens[0] {
                "budget" if tokens.len() == 2 => {
                    budget = Some(if tokens[1] == "unbounded" {
                        usize::MAX
                    } else {
                        tokens[1].parse().map_err(|_| err(format!("invalid budget `{}`", tokens[1])))?
                    });
                    continue;
                }
                "mode" if tokens.len() == 2 => {
                    mode = Some(match tokens[1] {
                        "multitask" => KernelMode::Multitask,
                        "single-task" => KernelMode::SingleTask,
                        other => return Err(err(format!("unknown mode `{other}`"))),
                    });
                    continue;
                }
                _ => {}
            }
            let set = match &mut set {
                Some(s) => s,
                None => {
                    let b = budget.ok_or_else(|| err("entry before `budget` header".into()))?;
                    let m = mode.ok_or_else(|| err("entry before `mode` header".into()))?;
                    set.insert(if track_gram { Self::with_gram(b, m) } else { Self::without_gram(b, m) })
                }
            };
            if tokens.len() < 3 {
                return Err(err("expected `<task> <label> <weight> …`".into()));
            }
            let task: usize = tokens[0].parse().map_err(|_| err(format!("invalid task `{}`", tokens[0])))?;
            if task == 0 || task > kernel.model.k() {
                return Err(err(format!("task {task} out of range")));
            }
            let label = match tokens[1] {
                "+1" | "1" => Label::Positive,
                "-1" => Label::Negative,
                other => return Err(err(format!("invalid label `{other}`"))),
            };
            let weight = W::parse_token(tokens[2], &kernel.model).map_err(err)?;
            let mut indices = Vec::new();
            let mut values = Vec::new();
            for tok in &tokens[3..] {
                let (i, v) = tok.split_once(':').ok_or_else(|| err(format!("invalid feature `{tok}`")))?;
                indices.push(i.parse::<u32>().map_err(|_| err(format!("invalid feature id `{i}`")))?);
                values.push(parse_real::<T>(v).map_err(err)?);
            }
            let x = SparseVector::new(indices, values).map_err(|e| err(e.to_string()))?;
            let instance = MultitaskInstance::new(x, task - 1);
            let q = Prepared::new(&instance, kernel)?;
            set.insert(kernel, q, label, weight)?;
        }
        match set {
            Some(s) => Ok(s),
            None => {
                let err = |m: &str| ActiveSetError::Snapshot { line: 0, message: m.into() };
                let b = budget.ok_or_else(|| err("missing `budget` header"))?;
                let m = mode.ok_or_else(|| err("missing `mode` header"))?;
                Ok(if track_gram { Self::with_gram(b, m) } else { Self::without_gram(b, m) })
            }
        }
    }
}

impl<T: Scalar> Gram<T> {
    fn border(&mut self, col: Vec<T>, kqq: T) -> Result<(), ActiveSetError> {
        let alphas = self.h_inv.matvec(&col);
        self.border_solved(col, alphas, kqq)
    }

    /// Borders with `alphas = H⁻¹ col` already in hand.
    fn border_solved(&mut self, col: Vec<T>, alphas: Vec<T>, kqq: T) -> Result<(), ActiveSetError> {
        let n = self.h.rows();
        let ridge = T::ridge();
        let diag = if self.regularized { kqq + ridge } else { kqq };
        let delta = diag - col.iter().zip(&alphas).map(|(&c, &a)| c * a).sum::<T>();
        self.h.border_symmetric(&col, diag);
        if delta >= ridge {
            // [H k; kᵀ c]⁻¹ = [H⁻¹ + ααᵀ/δ, −α/δ; −αᵀ/δ, 1/δ]
            // (α_i α_j) / δ keeps the update exactly symmetric
            let inv_delta = T::one() / delta;
            let edge: Vec<T> = alphas.iter().map(|&a| -a * inv_delta).collect();
            self.h_inv.border_symmetric_with(&edge, inv_delta, |i, row| {
                let ai = alphas[i];
                for (v, &aj) in row.iter_mut().zip(&alphas) {
                    *v += ai * aj * inv_delta;
                }
            });
            debug_assert_eq!(n + 1, self.h_inv.rows());
            return Ok(());
        }
        // Near-dependent column: ridge the whole diagonal once, then re-invert.
        if !self.regularized {
            for i in 0..=n {
                self.h[(i, i)] += ridge;
            }
            self.regularized = true;
        }
        self.h_inv = self.h.spd_inverse().ok_or(ActiveSetError::SingularGram)?;
        Ok(())
    }

    /// Drops entry `r` and returns `γ_j = −(H⁻¹)_jr / (H⁻¹)_rr` for `j ≠ r`.
    fn remove(&mut self, r: usize) -> Vec<T> {
        let n = self.h.rows();
        let pivot = self.h_inv[(r, r)];
        // H⁻¹ is symmetric, so row r doubles as column r
        let full_row = self.h_inv.row(r).to_vec();
        let column: Vec<T> = full_row.iter().enumerate().filter(|&(j, _)| j != r).map(|(_, &v)| v).collect();
        let gammas: Vec<T> = column.iter().map(|&c| -c / pivot).collect();
        let inv_pivot = T::one() / pivot;
        // (c_i c_j) / p keeps the downdate exactly symmetric
        self.h_inv.remove_row_col_with(r, |i, row| {
            let ci = full_row[i];
            for (v, &cj) in row.iter_mut().zip(&column) {
                *v -= ci * cj * inv_pivot;
            }
        });
        self.h.remove_row_col(r);
        if n == 1 {
            self.regularized = false;
        }
        gammas
    }
}
