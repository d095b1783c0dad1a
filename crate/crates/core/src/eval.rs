//! Confusion matrices and per-class accuracy.
//!
//! Overall accuracy is the unweighted mean of the four per-class accuracies,
//! not the frame-weighted hit rate. Percentages are kept at full precision;
//! rounding happens only in the renderers.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::game::DecisionRecord;
use crate::pose::{LabeledFrame, TouchLabel};

/// Counts indexed `[truth][predicted]`, rows and columns in [`TouchLabel::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 4]; 4],
}

impl ConfusionMatrix {
    pub fn record(&mut self, truth: TouchLabel, predicted: TouchLabel) {
        self.counts[truth.index()][predicted.index()] += 1;
    }

    pub fn get(&self, truth: TouchLabel, predicted: TouchLabel) -> u64 {
        self.counts[truth.index()][predicted.index()]
    }

    pub fn row_total(&self, truth: TouchLabel) -> u64 {
        self.counts[truth.index()].iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

impl AddAssign for ConfusionMatrix {
    fn add_assign(&mut self, rhs: Self) {
        for (row, other) in self.counts.iter_mut().zip(rhs.counts) {
            for (c, o) in row.iter_mut().zip(other) {
                *c += o;
            }
        }
    }
}

impl Add for ConfusionMatrix {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

pub fn build_confusion(
    pairs: impl IntoIterator<Item = (TouchLabel, TouchLabel)>,
) -> Result<ConfusionMatrix, EvalError> {
    let mut matrix = ConfusionMatrix::default();
    for (truth, predicted) in pairs {
        matrix.record(truth, predicted);
    }
    if matrix.total() == 0 {
        return Err(EvalError::EmptyInput);
    }
    Ok(matrix)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub matrix: ConfusionMatrix,
    pub row_percentages: [[f64; 4]; 4],
    pub per_class_accuracy: [f64; 4],
    pub overall_accuracy: f64,
}

impl EvalReport {
    pub fn accuracy(&self, label: TouchLabel) -> f64 {
        self.per_class_accuracy[label.index()]
    }
}

pub fn report(matrix: &ConfusionMatrix) -> Result<EvalReport, EvalError> {
    let mut row_percentages = [[0.0; 4]; 4];
    for truth in TouchLabel::ALL {
        let total = matrix.row_total(truth);
        if total == 0 {
            return Err(EvalError::EmptyClassRow(truth));
        }
        for predicted in TouchLabel::ALL {
            row_percentages[truth.index()][predicted.index()] =
                100.0 * matrix.get(truth, predicted) as f64 / total as f64;
        }
    }
    let per_class_accuracy: [f64; 4] = std::array::from_fn(|i| row_percentages[i][i]);
    let overall_accuracy = per_class_accuracy.iter().sum::<f64>() / 4.0;
    Ok(EvalReport {
        matrix: *matrix,
        row_percentages,
        per_class_accuracy,
        overall_accuracy,
    })
}

/// Signed differences `b - a`, in percentage points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyDelta {
    pub per_class: [f64; 4],
    pub overall: f64,
}

impl AccuracyDelta {
    pub fn get(&self, label: TouchLabel) -> f64 {
        self.per_class[label.index()]
    }
}

pub fn compare_reports(a: &EvalReport, b: &EvalReport) -> AccuracyDelta {
    AccuracyDelta {
        per_class: std::array::from_fn(|i| b.per_class_accuracy[i] - a.per_class_accuracy[i]),
        overall: b.overall_accuracy - a.overall_accuracy,
    }
}

/// Result of joining decisions with ground-truth labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Joined {
    pub pairs: Vec<(TouchLabel, TouchLabel)>,
    /// Decisions whose frame had no ground truth.
    pub skipped: usize,
}

/// Pairs every labelled frame with its decision. Decisions without a label
/// are skipped and counted; a label without a decision is an error.
pub fn join_labels(
    decisions: &[DecisionRecord],
    labels: &[LabeledFrame],
) -> Result<Joined, EvalError> {
    let predicted: HashMap<u64, TouchLabel> = decisions
        .iter()
        .map(|d| (d.frame_id, d.decision.label))
        .collect();
    let pairs = labels
        .iter()
        .map(|l| {
            predicted
                .get(&l.frame_id)
                .map(|&p| (l.truth, p))
                .ok_or(EvalError::UnknownFrame(l.frame_id))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Joined {
        skipped: predicted.len() - pairs.len(),
        pairs,
    })
}

const HEADERS: [&str; 4] = ["Head", "Shoulder", "Knee", "Toe"];

/// Aligned text table: rows are ground truth, columns are predictions,
/// followed by the row sum and a per-class / overall accuracy summary.
pub fn render_table(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10}{:>10}{:>10}{:>10}{:>10}{:>10}",
        "truth\\pred", HEADERS[0], HEADERS[1], HEADERS[2], HEADERS[3], "Sum"
    );
    for (i, row) in report.row_percentages.iter().enumerate() {
        let _ = write!(out, "{:<10}", HEADERS[i]);
        for v in row {
            let _ = write!(out, "{v:>10.2}");
        }
        let _ = writeln!(out, "{:>10.2}", row.iter().sum::<f64>());
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<10}{:>10}{:>10}{:>10}{:>10}{:>10}",
        "", "Overall", "H", "S", "K", "T"
    );
    let _ = write!(out, "{:<10}{:>10.2}", "accuracy", report.overall_accuracy);
    for v in report.per_class_accuracy {
        let _ = write!(out, "{v:>10.2}");
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "frames: {}", report.matrix.total());
    out
}

/// Comma-delimited rendering, one row per ground-truth class plus an overall
/// line: `truth,head,shoulders,knees,toes,count,accuracy`.
pub fn render_delimited(report: &EvalReport) -> String {
    let mut out = String::from("truth,head,shoulders,knees,toes,count,accuracy\n");
    for label in TouchLabel::ALL {
        let row = &report.row_percentages[label.index()];
        let _ = writeln!(
            out,
            "{},{:.2},{:.2},{:.2},{:.2},{},{:.2}",
            label,
            row[0],
            row[1],
            row[2],
            row[3],
            report.matrix.row_total(label),
            report.accuracy(label)
        );
    }
    let _ = writeln!(
        out,
        "overall,,,,,{},{:.2}",
        report.matrix.total(),
        report.overall_accuracy
    );
    out
}

pub fn render_delta(delta: &AccuracyDelta) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10}{:>10}{:>10}{:>10}{:>10}{:>10}",
        "", "Overall", "H", "S", "K", "T"
    );
    let _ = write!(out, "{:<10}{:>+10.2}", "delta", delta.overall);
    for v in delta.per_class {
        let _ = write!(out, "{v:>+10.2}");
    }
    let _ = writeln!(out);
    out
}
