//! Task-relation graphs and the interaction matrix they induce.
//!
//! Tasks are identified by 0-based indices in the API. The text formats
//! (graph files, datasets) are 1-based and converted at the parse boundary.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("a task graph needs at least one task")]
    NoTasks,
    #[error("self-loop on task {task}")]
    SelfLoop { task: usize },
    #[error("task {task} out of range for a graph with {k} tasks")]
    TaskOutOfRange { task: usize, k: usize },
    #[error("edge ({i}, {j}) listed more than once")]
    DuplicateEdge { i: usize, j: usize },
    #[error("graph has {components} connected components, expected one")]
    DisconnectedGraph { components: usize },
    #[error("interaction matrix inversion residual {residual:e} exceeds tolerance")]
    NumericalFailure { residual: f64 },
    #[error("graph file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("graph file declares k = {declared} but {expected} tasks are required")]
    TaskCountMismatch { declared: usize, expected: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Undirected, unweighted relation graph over `k` tasks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskGraph {
    k: usize,
    // (i, j) with i < j
    edges: BTreeSet<(usize, usize)>,
}

impl TaskGraph {
    /// Builds a graph from 0-based edge pairs. Each unordered pair may
    /// appear once; `(j, i)` counts as a duplicate of `(i, j)`.
    pub fn new(k: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        if k == 0 {
            return Err(GraphError::NoTasks);
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            for t in [a, b] {
                if t >= k {
                    return Err(GraphError::TaskOutOfRange { task: t, k });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop { task: a });
            }
            let pair = (a.min(b), a.max(b));
            if !set.insert(pair) {
                return Err(GraphError::DuplicateEdge { i: pair.0, j: pair.1 });
            }
        }
        Ok(TaskGraph { k, edges: set })
    }

    /// `k` isolated tasks (no relations).
    pub fn edgeless(k: usize) -> Self {
        assert!(k > 0, "a task graph needs at least one task");
        TaskGraph { k, edges: BTreeSet::new() }
    }

    pub fn complete(k: usize) -> Self {
        assert!(k > 0, "a task graph needs at least one task");
        let edges = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
        TaskGraph { k, edges }
    }

    /// Path `0 – 1 – … – k−1`.
    pub fn path(k: usize) -> Self {
        assert!(k > 0, "a task graph needs at least one task");
        TaskGraph {
            k,
            edges: (1..k).map(|j| (j - 1, j)).collect(),
        }
    }

    /// G(k, p) random graph: each pair is related independently with
    /// probability `p`.
    pub fn erdos_renyi<R: Rng + ?Sized>(k: usize, p: f64, rng: &mut R) -> Self {
        assert!(k > 0, "a task graph needs at least one task");
        let mut edges = BTreeSet::new();
        for i in 0..k {
            for j in i + 1..k {
                if rng.random::<f64>() < p {
                    edges.insert((i, j));
                }
            }
        }
        TaskGraph { k, edges }
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn degree(&self, task: usize) -> usize {
        self.edges.iter().filter(|&&(i, j)| i == task || j == task).count()
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.k).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(i, j) in &self.edges {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; self.k];
        for t in 0..self.k {
            let root = find(&mut parent, t);
            if slot[root] == usize::MAX {
                slot[root] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[root]].push(t);
        }
        groups
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    pub fn has_isolated_task(&self) -> bool {
        (0..self.k).any(|t| self.degree(t) == 0)
    }

    /// Adds a dummy task `k` related to every original task.
    pub fn augmented(&self) -> TaskGraph {
        let mut edges = self.edges.clone();
        edges.extend((0..self.k).map(|i| (i, self.k)));
        TaskGraph { k: self.k + 1, edges }
    }

    /// Graph Laplacian: degrees on the diagonal, −1 per relation.
    pub fn laplacian<T: Scalar>(&self) -> DenseMatrix<T> {
        let mut l = DenseMatrix::zeros(self.k, self.k);
        for &(i, j) in &self.edges {
            l[(i, j)] = -T::one();
            l[(j, i)] = -T::one();
            l[(i, i)] += T::one();
            l[(j, j)] += T::one();
        }
        l
    }

    /// Parses the graph file format: a `k <int>` header followed by one
    /// 1-based `<i> <j>` pair per line. Blank lines and `#` comments are
    /// skipped.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut k = None;
        let mut edges = Vec::new();
        let mut seen = BTreeSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| GraphError::Parse { line: line_no, message };
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match k {
                None => {
                    if tokens.len() != 2 || tokens[0] != "k" {
                        return Err(err(format!("expected header `k <int>`, found `{line}`")));
                    }
                    let n: usize = tokens[1]
                        .parse()
                        .map_err(|_| err(format!("invalid task count `{}`", tokens[1])))?;
                    if n == 0 {
                        return Err(GraphError::NoTasks);
                    }
                    k = Some(n);
                }
                Some(n) => {
                    if tokens.len() != 2 {
                        return Err(err(format!("expected `<i> <j>`, found `{line}`")));
                    }
                    let mut ids = [0usize; 2];
                    for (slot, tok) in ids.iter_mut().zip(&tokens) {
                        let v: usize = tok.parse().map_err(|_| err(format!("invalid task id `{tok}`")))?;
                        if v == 0 || v > n {
                            return Err(err(format!("task id {v} outside 1..={n}")));
                        }
                        *slot = v - 1;
                    }
                    if ids[0] == ids[1] {
                        return Err(err(format!("self-loop on task {}", ids[0] + 1)));
                    }
                    let pair = (ids[0].min(ids[1]), ids[0].max(ids[1]));
                    if !seen.insert(pair) {
                        return Err(err(format!("duplicate pair ({}, {})", pair.0 + 1, pair.1 + 1)));
                    }
                    edges.push(pair);
                }
            }
        }
        let k = k.ok_or(GraphError::Parse {
            line: 0,
            message: "missing `k <int>` header".into(),
        })?;
        TaskGraph::new(k, edges)
    }

    /// Serializes to the graph file format (1-based).
    pub fn to_file_string(&self) -> String {
        let mut out = format!("k {}\n", self.k);
        for &(i, j) in &self.edges {
            let _ = writeln!(out, "{} {}", i + 1, j + 1);
        }
        out
    }
}

/// How a graph is requested on the command line: a keyword resolved
/// against the dataset's task count, or a graph file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphSpec {
    Complete,
    Disconnected,
    File(PathBuf),
}

impl GraphSpec {
    pub fn resolve(&self, k: usize) -> Result<TaskGraph, GraphError> {
        if k == 0 {
            return Err(GraphError::NoTasks);
        }
        match self {
            GraphSpec::Complete => Ok(TaskGraph::complete(k)),
            GraphSpec::Disconnected => Ok(TaskGraph::edgeless(k)),
            GraphSpec::File(path) => {
                let g = TaskGraph::parse(&std::fs::read_to_string(path)?)?;
                if g.k() != k {
                    return Err(GraphError::TaskCountMismatch { declared: g.k(), expected: k });
                }
                Ok(g)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            GraphSpec::Complete => "complete".into(),
            GraphSpec::Disconnected => "disconnected".into(),
            GraphSpec::File(p) => p.display().to_string(),
        }
    }
}

impl FromStr for GraphSpec {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "complete" | "C" => GraphSpec::Complete,
            "disconnected" | "D" => GraphSpec::Disconnected,
            other => GraphSpec::File(PathBuf::from(other)),
        })
    }
}

/// `A_G = I + L_G`, its inverse and the norm constant `c_G`.
///
/// The inverse is block diagonal over connected components; component
/// membership is cached for learners that store per-component weights.
#[derive(Debug, Clone)]
pub struct InteractionModel<T> {
    laplacian: DenseMatrix<T>,
    interaction: DenseMatrix<T>,
    inverse: DenseMatrix<T>,
    cg: T,
    components: Vec<Vec<usize>>,
    component_of: Vec<usize>,
    position: Vec<usize>,
}

impl<T: Scalar> InteractionModel<T> {
    pub fn new(graph: &TaskGraph) -> Result<Self, GraphError> {
        let k = graph.k();
        let laplacian = graph.laplacian::<T>();
        let mut interaction = laplacian.clone();
        for i in 0..k {
            interaction[(i, i)] += T::one();
        }
        let inverse = interaction
            .spd_inverse()
            .ok_or(GraphError::NumericalFailure { residual: f64::INFINITY })?;
        let residual = interaction.matmul(&inverse).identity_deviation();
        if !(residual <= T::solve_tolerance()) {
            return Err(GraphError::NumericalFailure { residual: residual.as_f64() });
        }
        let cg = (0..k).fold(T::zero(), |m, i| m.max(inverse[(i, i)].sqrt()));

        let components = graph.components();
        let mut component_of = vec![0; k];
        let mut position = vec![0; k];
        for (c, members) in components.iter().enumerate() {
            for (p, &t) in members.iter().enumerate() {
                component_of[t] = c;
                position[t] = p;
            }
        }
        Ok(InteractionModel {
            laplacian,
            interaction,
            inverse,
            cg,
            components,
            component_of,
            position,
        })
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.inverse.rows()
    }

    pub fn laplacian(&self) -> &DenseMatrix<T> {
        &self.laplacian
    }

    pub fn interaction(&self) -> &DenseMatrix<T> {
        &self.interaction
    }

    /// `A_G⁻¹`.
    pub fn inverse(&self) -> &DenseMatrix<T> {
        &self.inverse
    }

    /// `(A_G⁻¹)_{i,j}`, the task coupling of the multitask kernel.
    #[inline]
    pub fn coupling(&self, i: usize, j: usize) -> T {
        self.inverse[(i, j)]
    }

    /// `max_i sqrt((A_G⁻¹)_ii)`: bounds the norm of every multitask instance.
    #[inline]
    pub fn cg(&self) -> T {
        self.cg
    }

    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    #[inline]
    pub fn component_of(&self, task: usize) -> usize {
        self.component_of[task]
    }

    /// Index of `task` inside its component's member list.
    #[inline]
    pub fn position_in_component(&self, task: usize) -> usize {
        self.position[task]
    }
}

/// Pairwise effective resistances of a connected graph with unit edges.
#[derive(Debug, Clone)]
pub struct ResistanceMatrix<T> {
    entries: DenseMatrix<T>,
}

impl<T: Scalar> ResistanceMatrix<T> {
    /// `R_ij = L⁺_ii + L⁺_jj − 2 L⁺_ij`.
    pub fn new(graph: &TaskGraph) -> Result<Self, GraphError> {
        let components = graph.components().len();
        if components != 1 {
            return Err(GraphError::DisconnectedGraph { components });
        }
        let pinv = graph.laplacian::<T>().symmetric_pseudoinverse();
        let n = graph.k();
        let two = T::lit(2.0);
        let entries = DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                T::zero()
            } else {
                (pinv[(i, i)] + pinv[(j, j)] - two * pinv[(i, j)]).max(T::zero())
            }
        });
        Ok(ResistanceMatrix { entries })
    }

    pub fn entries(&self) -> &DenseMatrix<T> {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[(i, j)]
    }

    pub fn len(&self) -> usize {
        self.entries.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entrywise 1-norm.
    pub fn one_norm(&self) -> T {
        (0..self.len()).map(|i| self.entries.row(i).iter().map(|v| v.abs()).sum::<T>()).sum()
    }
}

/// Reconstructs `A_G⁻¹` from resistance distances on the augmented graph:
///
/// `−½R_ij + (Σ_l R_il + Σ_l R_jl)/(2(k+1)) − ‖R‖₁/(2(k+1)²) + (k+2)/(k+1)²`
///
/// The `‖R‖₁` term carries a factor ½: the pseudoinverse of a Laplacian on
/// `n` nodes is `−½(R − (R11ᵀ + 11ᵀR)/n + 11ᵀR11ᵀ/n²)`, and with a unit
/// coefficient the edgeless graph on two tasks would give `5/9` instead of 1.
pub fn inverse_from_resistance<T: Scalar>(graph: &TaskGraph) -> Result<DenseMatrix<T>, GraphError> {
    let k = graph.k();
    let r = ResistanceMatrix::<T>::new(&graph.augmented())?;
    let n1 = T::from_count(k + 1);
    let row_sums: Vec<T> = (0..=k).map(|i| r.entries().row(i).iter().copied().sum()).collect();
    let norm = r.one_norm();
    let half = T::lit(0.5);
    let constant = T::from_count(k + 2) / (n1 * n1) - half * norm / (n1 * n1);
    Ok(DenseMatrix::from_fn(k, k, |i, j| {
        -half * r.get(i, j) + (row_sums[i] + row_sums[j]) / (T::lit(2.0) * n1) + constant
    }))
}

/// `max_ij |resistance reconstruction − dense inverse|` for `A_G⁻¹`.
pub fn resistance_identity_error<T: Scalar>(graph: &TaskGraph) -> Result<T, GraphError> {
    let model = InteractionModel::<T>::new(graph)?;
    let rebuilt = inverse_from_resistance::<T>(graph)?;
    Ok(rebuilt.max_abs_diff(model.inverse()))
}
