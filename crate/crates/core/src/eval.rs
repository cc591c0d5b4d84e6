//! Confusion matrices, per-class metrics and the side-by-side comparison table.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::SentimentLabel;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("cannot report on an empty confusion matrix")]
    EmptyMatrix,
    #[error("invalid report: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Rows are gold labels, columns predictions, both in
/// (positive, negative, neutral) order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix(pub [[u64; 3]; 3]);

impl ConfusionMatrix {
    pub fn get(&self, gold: SentimentLabel, predicted: SentimentLabel) -> u64 {
        self.0[gold.index()][predicted.index()]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..3).map(|i| self.0[i][i]).sum()
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        self.0[i].iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> u64 {
        self.0.iter().map(|r| r[j]).sum()
    }
}

pub fn confusion(pairs: &[(SentimentLabel, SentimentLabel)]) -> ConfusionMatrix {
    let mut m = ConfusionMatrix::default();
    for (gold, pred) in pairs {
        m.0[gold.index()][pred.index()] += 1;
    }
    m
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    /// Per-class accuracy, i.e. recall of the class.
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassBreakdown {
    pub positive: ClassMetrics,
    pub negative: ClassMetrics,
    pub neutral: ClassMetrics,
}

impl ClassBreakdown {
    pub fn get(&self, label: SentimentLabel) -> &ClassMetrics {
        match label {
            SentimentLabel::Positive => &self.positive,
            SentimentLabel::Negative => &self.negative,
            SentimentLabel::Neutral => &self.neutral,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub total: u64,
    pub overall_accuracy: f64,
    pub macro_f1: f64,
    pub classes: ClassBreakdown,
    pub confusion: ConfusionMatrix,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Overall accuracy plus per-class recall, precision and F1. Zero
/// denominators yield 0.
pub fn report(m: &ConfusionMatrix, model: &str) -> Result<EvalReport, EvalError> {
    let total = m.total();
    if total == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    let class = |i: usize| {
        let tp = m.0[i][i];
        let recall = ratio(tp, m.row_sum(i));
        let precision = ratio(tp, m.col_sum(i));
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        ClassMetrics {
            accuracy: recall,
            precision,
            recall,
            f1,
            support: m.row_sum(i),
        }
    };
    let classes = ClassBreakdown {
        positive: class(0),
        negative: class(1),
        neutral: class(2),
    };
    Ok(EvalReport {
        model: model.to_string(),
        total,
        overall_accuracy: ratio(m.trace(), total),
        macro_f1: (classes.positive.f1 + classes.negative.f1 + classes.neutral.f1) / 3.0,
        classes,
        confusion: *m,
    })
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, EvalError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Two decimals, halves rounded up. A tiny slack absorbs binary
/// representation error so that 0.675 renders as 0.68.
pub fn format_rate(x: f64) -> String {
    let cents = (x * 100.0 + 0.5 + 1e-9).floor();
    format!("{:.2}", cents / 100.0)
}

/// Fixed-column table: Model, Overall, Pos, Neg, Neu.
pub fn compare_table(reports: &[&EvalReport]) -> String {
    let width = reports.iter().map(|r| r.model.chars().count()).max().unwrap_or(0).max(5);
    let mut out = format!("{:<width$}  {:<7}  {:<4}  {:<4}  {}\n", "Model", "Overall", "Pos", "Neg", "Neu");
    for r in reports {
        out.push_str(&format!(
            "{:<width$}  {:<7}  {:<4}  {:<4}  {}\n",
            r.model,
            format_rate(r.overall_accuracy),
            format_rate(r.classes.positive.accuracy),
            format_rate(r.classes.negative.accuracy),
            format_rate(r.classes.neutral.accuracy),
        ));
    }
    out
}

pub fn compare(a: &EvalReport, b: &EvalReport) -> String {
    compare_table(&[a, b])
}
