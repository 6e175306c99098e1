use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::objectives::LogisticProblem;

/// Label substitutions applied before the `{-1, +1}` check, e.g. `2:-1`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelMap {
    pairs: Vec<(f64, f64)>,
}

impl LabelMap {
    pub fn new(pairs: Vec<(f64, f64)>) -> Self {
        Self { pairs }
    }

    /// Parses comma- or whitespace-separated `from:to` pairs.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for item in text.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()) {
            let (from, to) = item
                .split_once(':')
                .ok_or_else(|| Error::InvalidArgument(format!("label remap entry `{item}` is not from:to")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("label `{s}` is not a number")))
            };
            pairs.push((parse(from)?, parse(to)?));
        }
        Ok(Self { pairs })
    }

    pub fn apply(&self, label: f64) -> f64 {
        self.pairs
            .iter()
            .find(|(from, _)| *from == label)
            .map_or(label, |(_, to)| *to)
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    pub label_map: LabelMap,
    /// Feature dimension to use instead of the largest index seen.
    pub n_override: Option<usize>,
}

/// Sparse binary-classification data with 0-based feature indices.
#[derive(Debug, Clone, PartialEq)]
pub struct LibsvmDataset {
    pub cols: usize,
    pub labels: Vec<f64>,
    pub features: Vec<Vec<(usize, f64)>>,
}

impl LibsvmDataset {
    pub fn rows(&self) -> usize {
        self.labels.len()
    }

    /// Row-major dense `m × n` feature matrix.
    pub fn dense_features(&self) -> Vec<f64> {
        let n = self.cols;
        let mut out = vec![0.0; self.rows() * n];
        for (j, row) in self.features.iter().enumerate() {
            for &(i, v) in row {
                out[j * n + i] = v;
            }
        }
        out
    }

    pub fn to_logistic(&self, gamma: f64) -> Result<LogisticProblem> {
        LogisticProblem::new(self.cols, self.dense_features(), self.labels.clone(), gamma)
    }
}

/// Parses LIBSVM text: `label index:value ...` per line, 1-based strictly
/// increasing indices, `#` starting a comment.
pub fn parse_libsvm(text: &str, options: &ParseOptions) -> Result<LibsvmDataset> {
    let mut labels = Vec::new();
    let mut features = Vec::new();
    let mut max_index = 0usize;

    for (line_idx, raw) in text.lines().enumerate() {
        let line_no = line_idx + 1;
        let content = raw.split_once('#').map_or(raw, |(before, _)| before);
        let mut tokens = content.split_whitespace();
        let Some(label_tok) = tokens.next() else {
            continue;
        };
        let malformed = |reason: String| Error::MalformedLine { line: line_no, reason };
        let raw_label: f64 = label_tok
            .parse()
            .map_err(|_| malformed(format!("label `{label_tok}` is not a number")))?;
        if !raw_label.is_finite() {
            return Err(malformed(format!("label `{label_tok}` is not finite")));
        }

        let mut row = Vec::new();
        let mut last: Option<usize> = None;
        for tok in tokens {
            let (idx_s, val_s) = tok
                .split_once(':')
                .ok_or_else(|| malformed(format!("token `{tok}` is not index:value")))?;
            let idx: usize = idx_s
                .parse()
                .map_err(|_| malformed(format!("index `{idx_s}` is not a positive integer")))?;
            if idx == 0 {
                return Err(malformed("feature indices are 1-based".into()));
            }
            let val: f64 = val_s
                .parse()
                .map_err(|_| malformed(format!("value `{val_s}` is not a number")))?;
            if !val.is_finite() {
                return Err(malformed(format!("value `{val_s}` is not finite")));
            }
            if last.is_some_and(|prev| idx <= prev) {
                return Err(Error::NonMonotoneIndices { line: line_no });
            }
            last = Some(idx);
            max_index = max_index.max(idx);
            row.push((idx - 1, val));
        }

        let label = options.label_map.apply(raw_label);
        if label != 1.0 && label != -1.0 {
            return Err(Error::UnmappedLabel(label_tok.to_owned()));
        }
        labels.push(label);
        features.push(row);
    }

    let cols = match options.n_override {
        Some(n) if n < max_index => {
            return Err(Error::InvalidArgument(format!(
                "dimension override {n} is below the largest feature index {max_index}"
            )))
        }
        Some(n) => n,
        None => max_index,
    };
    Ok(LibsvmDataset { cols, labels, features })
}

pub fn read_libsvm(path: impl AsRef<Path>, options: &ParseOptions) -> Result<LibsvmDataset> {
    let text = std::fs::read_to_string(path)?;
    parse_libsvm(&text, options)
}

/// Serializes with 1-based indices and round-trip float formatting.
pub fn write_libsvm(data: &LibsvmDataset) -> String {
    let mut out = String::new();
    for (label, row) in data.labels.iter().zip(&data.features) {
        let _ = write!(out, "{}", if *label > 0.0 { "+1" } else { "-1" });
        for &(i, v) in row {
            let _ = write!(out, " {}:{}", i + 1, v);
        }
        out.push('\n');
    }
    out
}
