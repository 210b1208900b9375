use crate::graph::TaskGraph;
use crate::harness::HarnessError;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Movement of a comparator sequence measured in the `A_G^{1/2}` norm.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftTerm {
    /// `Σ_t ‖A_G^{1/2}(ḡ_t − ḡ_{t−1})‖`.
    pub total: f64,
    /// One summand per consecutive pair.
    pub per_step: Vec<f64>,
    /// `trace(K_{ḡ_t,ḡ_t} A_G)` for every element of the sequence.
    pub traces: Vec<f64>,
}

/// `Σ_i ‖g_i‖² + Σ_{(i,j)∈E} ‖g_i − g_j‖²`, the squared multitask norm of `ḡ`.
pub fn trace_term(g: &[Vec<f64>], graph: &TaskGraph) -> f64 {
    let own: f64 = g.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>()).sum();
    let coupled: f64 = graph.edges().map(|(i, j)| sq_dist(&g[i], &g[j])).sum();
    own + coupled
}

pub fn shift_term(sequence: &[Vec<Vec<f64>>], graph: &TaskGraph) -> Result<ShiftTerm, HarnessError> {
    let k = graph.k();
    let d = sequence.first().and_then(|g| g.first()).map_or(0, |v| v.len());
    if sequence.iter().any(|g| g.len() != k || g.iter().any(|v| v.len() != d)) {
        return Err(HarnessError::DimensionMismatch);
    }
    let per_step: Vec<f64> = sequence
        .windows(2)
        .map(|w| {
            let delta: Vec<Vec<f64>> = w[1]
                .iter()
                .zip(&w[0])
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
                .collect();
            trace_term(&delta, graph).sqrt()
        })
        .collect();
    Ok(ShiftTerm {
        // fold from +0 so an empty sequence reports 0, not -0
        total: per_step.iter().fold(0.0, |a, b| a + b),
        per_step,
        traces: sequence.iter().map(|g| trace_term(g, graph)).collect(),
    })
}
