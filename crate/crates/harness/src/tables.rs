//! Plain-text rendering of sweep results: fixed-width tables meant for
//! terminals and for diffing between runs.

use std::fmt::Write as _;

use gasgen_fdi::{ConfusionMatrix, HealthClass};

use crate::runner::CaseResult;

/// Render the full result summary as aligned plain-text tables.
pub fn render_tables(result: &CaseResult) -> String {
    let mut out = String::new();
    let estimators = &result.provenance.estimators;

    heading(
        &mut out,
        &format!("Case {} sweep summary", result.case),
        '=',
    );
    let _ = writeln!(out, "seed:         {}", result.provenance.seed);
    let _ = writeln!(out, "config hash:  {}", result.provenance.config_hash);
    let _ = writeln!(
        out,
        "runs:         {} requested, {} usable, {} failed ({} per class)",
        result.n_runs, result.n_succeeded, result.n_failed, result.runs_per_class
    );
    let _ = writeln!(
        out,
        "horizon:      {} steps (burn-in {}, classification window {})",
        result.horizon, result.burn_in, result.window
    );
    let _ = writeln!(out, "estimators:   {}", estimators.join(", "));
    out.push('\n');

    let name_width = result
        .coordinates
        .iter()
        .map(|c| c.len())
        .max()
        .unwrap_or(4)
        .max("coordinate".len());

    heading(&mut out, "RMSE by estimated coordinate", '-');
    let _ = write!(out, "{:<name_width$}", "coordinate");
    for est in estimators {
        let _ = write!(out, "  {est:>14}");
    }
    out.push('\n');
    for (i, coord) in result.coordinates.iter().enumerate() {
        let _ = write!(out, "{coord:<name_width$}");
        for est in estimators {
            match result.rmse.get(est) {
                Some(row) => {
                    let _ = write!(out, "  {:>14.6e}", row[i]);
                }
                None => {
                    let _ = write!(out, "  {:>14}", "-");
                }
            }
        }
        out.push('\n');
    }
    out.push('\n');

    if !result.improvement_vs_pens_pct.is_empty() {
        heading(
            &mut out,
            "RMSE reduction vs power-agnostic baseline (%)",
            '-',
        );
        let improved: Vec<&String> = estimators
            .iter()
            .filter(|est| result.improvement_vs_pens_pct.contains_key(*est))
            .collect();
        let _ = write!(out, "{:<name_width$}", "coordinate");
        for est in &improved {
            let _ = write!(out, "  {est:>10}");
        }
        out.push('\n');
        for (i, coord) in result.coordinates.iter().enumerate() {
            let _ = write!(out, "{coord:<name_width$}");
            for est in &improved {
                let _ = write!(out, "  {:>10.2}", result.improvement_vs_pens_pct[*est][i]);
            }
            out.push('\n');
        }
        out.push('\n');
    }

    heading(
        &mut out,
        "Classification quality (macro over health parameters)",
        '-',
    );
    let _ = writeln!(
        out,
        "{:<10}{:>11}{:>11}{:>11}{:>13}",
        "estimator", "precision", "recall", "F1", "severe TPR"
    );
    for est in estimators {
        if let Some(summary) = result.classification.get(est) {
            let _ = writeln!(
                out,
                "{:<10}{:>11.4}{:>11.4}{:>11.4}{:>13.4}",
                est,
                summary.macro_precision,
                summary.macro_recall,
                summary.macro_f1,
                summary.severe_tpr
            );
        }
    }
    out.push('\n');

    for param in &result.health_parameters {
        for est in estimators {
            let Some(summary) = result.classification.get(est) else {
                continue;
            };
            let Some(pc) = summary.per_parameter.get(param) else {
                continue;
            };
            heading(
                &mut out,
                &format!("Confusion for {param}, estimator {est} (rows actual, columns predicted)"),
                '-',
            );
            render_confusion(&mut out, &pc.confusion);
            let _ = writeln!(
                out,
                "macro precision {:.4}, recall {:.4}, F1 {:.4}; severe TPR {}",
                pc.metrics.precision,
                pc.metrics.recall,
                pc.metrics.f1,
                pc.severe_tpr
                    .map(|t| format!("{t:.4}"))
                    .unwrap_or_else(|| "n/a".to_string())
            );
            out.push('\n');
        }
    }

    out
}

fn heading(out: &mut String, title: &str, rule: char) {
    out.push_str(title);
    out.push('\n');
    out.extend(std::iter::repeat_n(rule, title.len()));
    out.push('\n');
}

fn render_confusion(out: &mut String, confusion: &ConfusionMatrix) {
    let label_width = HealthClass::ALL
        .iter()
        .map(|c| c.to_string().len())
        .max()
        .unwrap_or(8);
    let _ = write!(out, "{:<label_width$}", "");
    for predicted in HealthClass::ALL {
        let _ = write!(out, "  {:>12}", predicted.slug());
    }
    let _ = writeln!(out, "  {:>7}", "total");
    let counts = confusion.counts();
    for actual in HealthClass::ALL {
        let _ = write!(out, "{:<label_width$}", actual.to_string());
        let row = &counts[actual.index()];
        for cell in row {
            let _ = write!(out, "  {cell:>12}");
        }
        let _ = writeln!(out, "  {:>7}", row.iter().sum::<u64>());
    }
}

/// Confusion matrix as CSV: header row of predicted classes, one row per
/// actual class, raw counts.
pub fn confusion_csv(confusion: &ConfusionMatrix) -> String {
    let mut out = String::from("actual");
    for predicted in HealthClass::ALL {
        out.push(',');
        out.push_str(predicted.slug());
    }
    out.push('\n');
    let counts = confusion.counts();
    for actual in HealthClass::ALL {
        out.push_str(actual.slug());
        for cell in &counts[actual.index()] {
            let _ = write!(out, ",{cell}");
        }
        out.push('\n');
    }
    out
}
