use std::collections::HashMap;

use crate::harness::{DatasetStream, HarnessError, RawDataset};
use crate::kernel::{Label, MultitaskExample, SparseVector};
use crate::scalar::Scalar;

/// Linear-interpolation percentile of `values` (`pct` in `[0, 100]`).
pub fn percentile(values: &[f64], pct: f64) -> Result<f64, HarnessError> {
    if values.is_empty() {
        return Err(HarnessError::EmptyStream);
    }
    if !(0.0..=100.0).contains(&pct) {
        return Err(HarnessError::InvalidParameter(format!("percentile {pct} outside [0, 100]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = pct / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Ok(sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// Labels `+1` the examples whose score lies strictly above the `pct`-th
/// percentile of all scores, `−1` the rest (ties included).
pub fn binarize_by_percentile<T: Scalar>(raw: RawDataset<T>, pct: f64) -> Result<DatasetStream<T>, HarnessError> {
    let scores: Vec<f64> = raw.rows.iter().map(|r| r.score).collect();
    let threshold = percentile(&scores, pct)?;
    let examples = raw
        .rows
        .into_iter()
        .map(|r| {
            let label = if r.score > threshold { Label::Positive } else { Label::Negative };
            MultitaskExample::new(r.x, r.task, label)
        })
        .collect();
    Ok(DatasetStream {
        examples,
        k: raw.k,
        d: raw.d,
    })
}

/// Maps each non-binary feature affinely onto `[0, 1]` using the min and max
/// of its stored values over the whole stream. Features whose stored values
/// are all 0 or 1 are left alone; constant features become 0 (and drop out
/// of the sparse vectors).
pub fn rescale_features<T: Scalar>(stream: &mut DatasetStream<T>) {
    #[derive(Clone, Copy)]
    struct Range {
        min: f64,
        max: f64,
        binary: bool,
    }
    let mut ranges: HashMap<u32, Range> = HashMap::new();
    for e in &stream.examples {
        for (id, v) in e.instance.x.iter() {
            let v = v.as_f64();
            let r = ranges.entry(id).or_insert(Range {
                min: v,
                max: v,
                binary: true,
            });
            r.min = r.min.min(v);
            r.max = r.max.max(v);
            r.binary &= v == 0.0 || v == 1.0;
        }
    }
    for e in &mut stream.examples {
        let x = &e.instance.x;
        let mut indices = Vec::with_capacity(x.nnz());
        let mut values = Vec::with_capacity(x.nnz());
        for (id, v) in x.iter() {
            let r = ranges[&id];
            let scaled = if r.binary {
                v
            } else if r.max > r.min {
                T::lit((v.as_f64() - r.min) / (r.max - r.min))
            } else {
                T::zero()
            };
            if scaled != T::zero() {
                indices.push(id);
                values.push(scaled);
            }
        }
        e.instance.x = SparseVector::new(indices, values).expect("order preserved");
    }
}
