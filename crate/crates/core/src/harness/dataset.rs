use std::fmt::Write as _;
use std::path::Path;

use crate::harness::HarnessError;
use crate::kernel::{Label, MultitaskExample, SparseVector};
use crate::scalar::Scalar;

/// One parsed line before binarization; `score` may be any real.
#[derive(Debug, Clone, PartialEq)]
pub struct RawExample<T> {
    pub x: SparseVector<T>,
    /// 0-based.
    pub task: usize,
    pub score: f64,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset<T> {
    pub rows: Vec<RawExample<T>>,
    pub k: usize,
    pub d: u32,
}

/// Labelled examples in stream order; tasks are 0-based, `d` is the largest feature id.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStream<T> {
    pub examples: Vec<MultitaskExample<T>>,
    pub k: usize,
    pub d: u32,
}

impl<T: Scalar> DatasetStream<T> {
    pub fn new(examples: Vec<MultitaskExample<T>>, k: usize) -> Self {
        let d = examples
            .iter()
            .filter_map(|e| e.instance.x.max_index())
            .max()
            .unwrap_or(0);
        DatasetStream { examples, k, d }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn positive_fraction(&self) -> f64 {
        if self.examples.is_empty() {
            return 0.0;
        }
        self.examples.iter().filter(|e| e.label.is_positive()).count() as f64 / self.len() as f64
    }
}

impl<T: Scalar> RawDataset<T> {
    pub fn is_binary(&self) -> bool {
        self.rows.iter().all(|r| r.score == 1.0 || r.score == -1.0)
    }

    /// Accepts the labels as they are; every score must be exactly ±1.
    pub fn into_stream(self) -> Result<DatasetStream<T>, HarnessError> {
        let mut examples = Vec::with_capacity(self.rows.len());
        for r in self.rows {
            let label = match r.score {
                s if s == 1.0 => Label::Positive,
                s if s == -1.0 => Label::Negative,
                value => return Err(HarnessError::NonBinaryLabel { line: r.line, value }),
            };
            examples.push(MultitaskExample::new(r.x, r.task, label));
        }
        Ok(DatasetStream {
            examples,
            k: self.k,
            d: self.d,
        })
    }
}

/// Parses the `mtsvm` format: `<task> <label> <id>:<value> ...` per line,
/// 1-based task and feature ids, `#` starts a comment.
///
/// With `k = None` the task count is the largest task id seen.
pub fn parse_dataset<T: Scalar>(text: &str, k: Option<usize>) -> Result<RawDataset<T>, HarnessError> {
    let mut rows = Vec::new();
    let mut max_task = 0usize;
    let mut d = 0u32;
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| HarnessError::Parse { line, message };
        let mut tokens = content.split_whitespace();
        let task_tok = tokens.next().ok_or_else(|| err("missing task id".into()))?;
        let task: i64 = task_tok
            .parse()
            .map_err(|_| err(format!("bad task id `{task_tok}`")))?;
        let label_tok = tokens.next().ok_or_else(|| err("missing label".into()))?;
        let score: f64 = label_tok
            .parse()
            .map_err(|_| err(format!("bad label `{label_tok}`")))?;
        if !score.is_finite() {
            return Err(err(format!("bad label `{label_tok}`")));
        }
        if task < 1 || k.is_some_and(|k| task as usize > k) {
            return Err(HarnessError::TaskOutOfRange {
                line,
                task,
                k: k.unwrap_or(max_task),
            });
        }

        let mut pairs: Vec<(u32, f64)> = Vec::new();
        for tok in tokens {
            let (id, val) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("expected <id>:<value>, got `{tok}`")))?;
            let id: u32 = id.parse().map_err(|_| err(format!("bad feature id `{id}`")))?;
            if id == 0 {
                return Err(err("feature ids are 1-based".into()));
            }
            let val: f64 = val.parse().map_err(|_| err(format!("bad feature value `{val}`")))?;
            if !val.is_finite() {
                return Err(err(format!("bad feature value `{val}`")));
            }
            pairs.push((id, val));
        }
        pairs.sort_by_key(|p| p.0);
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(err(format!("duplicate feature id {}", w[0].0)));
        }
        let (indices, values): (Vec<u32>, Vec<T>) = pairs
            .into_iter()
            .filter(|p| p.1 != 0.0)
            .map(|(id, v)| (id, T::lit(v)))
            .unzip();
        if let Some(&last) = indices.last() {
            d = d.max(last);
        }
        let x = SparseVector::new(indices, values).expect("sorted and deduplicated");
        let task = task as usize;
        max_task = max_task.max(task);
        rows.push(RawExample {
            x,
            task: task - 1,
            score,
            line,
        });
    }
    Ok(RawDataset {
        rows,
        k: k.unwrap_or(max_task),
        d,
    })
}

pub fn read_dataset<T: Scalar>(path: &Path, k: Option<usize>) -> Result<RawDataset<T>, HarnessError> {
    parse_dataset(&std::fs::read_to_string(path)?, k)
}

/// Inverse of [`parse_dataset`] for binary streams.
pub fn write_dataset<T: Scalar>(stream: &DatasetStream<T>) -> String {
    let mut out = String::new();
    for e in &stream.examples {
        write!(out, "{} {}", e.instance.task + 1, e.label).unwrap();
        for (id, v) in e.instance.x.iter() {
            write!(out, " {id}:{v}").unwrap();
        }
        out.push('\n');
    }
    out
}
