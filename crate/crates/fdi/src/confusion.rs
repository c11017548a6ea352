use serde::Serialize;

use crate::HealthClass;

/// Confusion matrix over the four severity classes. Rows are the actual
/// class, columns the predicted class, both in [`HealthClass::ALL`] order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    counts: [[u64; 4]; 4],
}

/// Precision/recall/F1 for one class, one-vs-rest.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Number of runs whose actual class this is.
    pub support: u64,
}

/// Unweighted averages of the per-class metrics over the classes that
/// actually occur. Classes with zero support would contribute undefined
/// ratios, so they are excluded rather than imputed.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MacroMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Number of classes with nonzero support that entered the averages.
    pub classes_present: usize,
}

/// `num / den`, with the empty ratio defined as zero. Used for precision
/// against a class that was never predicted and F1 when both components
/// vanish.
fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

impl ConfusionMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    /// Tally one classified run.
    pub fn record(&mut self, actual: HealthClass, predicted: HealthClass) {
        self.counts[actual.index()][predicted.index()] += 1;
    }

    /// Fold another matrix into this one; used to combine per-worker
    /// tallies after a parallel sweep.
    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (row, other_row) in self.counts.iter_mut().zip(&other.counts) {
            for (cell, value) in row.iter_mut().zip(other_row) {
                *cell += value;
            }
        }
    }

    /// Raw counts, `counts[actual][predicted]`.
    pub fn counts(&self) -> &[[u64; 4]; 4] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Runs per actual class (row sums).
    pub fn actual_totals(&self) -> [u64; 4] {
        let mut out = [0u64; 4];
        for (row, total) in self.counts.iter().zip(out.iter_mut()) {
            *total = row.iter().sum();
        }
        out
    }

    /// Row-normalized rates: `rates[actual][predicted]` is the fraction of
    /// runs of an actual class that were predicted as each class. Rows with
    /// no runs stay all-zero.
    pub fn rates(&self) -> [[f64; 4]; 4] {
        let mut out = [[0.0f64; 4]; 4];
        for (row, out_row) in self.counts.iter().zip(out.iter_mut()) {
            let total: u64 = row.iter().sum();
            if total > 0 {
                for (cell, out_cell) in row.iter().zip(out_row.iter_mut()) {
                    *out_cell = *cell as f64 / total as f64;
                }
            }
        }
        out
    }

    /// One-vs-rest metrics for one class. Precision with an empty
    /// prediction column is defined as zero, as is F1 when both precision
    /// and recall vanish.
    pub fn class_metrics(&self, class: HealthClass) -> ClassMetrics {
        let i = class.index();
        let tp = self.counts[i][i] as f64;
        let predicted: u64 = self.counts.iter().map(|row| row[i]).sum();
        let support: u64 = self.counts[i].iter().sum();
        let precision = ratio(tp, predicted as f64);
        let recall = ratio(tp, support as f64);
        let f1 = ratio(2.0 * precision * recall, precision + recall);
        ClassMetrics {
            precision,
            recall,
            f1,
            support,
        }
    }

    /// Macro-averaged metrics over the classes with nonzero support.
    pub fn macro_metrics(&self) -> MacroMetrics {
        let mut precision = 0.0;
        let mut recall = 0.0;
        let mut f1 = 0.0;
        let mut present = 0usize;
        for class in HealthClass::ALL {
            let m = self.class_metrics(class);
            if m.support > 0 {
                precision += m.precision;
                recall += m.recall;
                f1 += m.f1;
                present += 1;
            }
        }
        if present > 0 {
            let n = present as f64;
            precision /= n;
            recall /= n;
            f1 /= n;
        }
        MacroMetrics {
            precision,
            recall,
            f1,
            classes_present: present,
        }
    }

    /// True-positive rate for the severe class — the fraction of actually
    /// severe runs flagged severe. `None` when no severe runs occurred.
    pub fn severe_tpr(&self) -> Option<f64> {
        let row = &self.counts[HealthClass::SevereFault.index()];
        let total: u64 = row.iter().sum();
        if total == 0 {
            None
        } else {
            Some(row[HealthClass::SevereFault.index()] as f64 / total as f64)
        }
    }
}
