//! Per-variant summaries of run metrics (mean and population standard
//! deviation): duration, travelled path length and mapped volume per variant.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// The three headline numbers of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub duration: f64,
    pub path_length: f64,
    pub mapped_volume: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> MeanStd {
    if values.is_empty() {
        return MeanStd { mean: f64::NAN, std: f64::NAN };
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    MeanStd { mean, std: var.sqrt() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantRow {
    pub variant: String,
    pub runs: usize,
    pub duration: MeanStd,
    pub path_length: MeanStd,
    pub mapped_volume: MeanStd,
    /// Relative change of each mean against the first row, in percent.
    pub delta_pct: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub rows: Vec<VariantRow>,
}

pub const SUMMARY_HEADER: &str = "variant,runs,duration_mean_s,duration_std_s,path_length_mean_m,path_length_std_m,mapped_volume_mean_m3,mapped_volume_std_m3,duration_delta_pct,path_length_delta_pct,mapped_volume_delta_pct";

/// Summarizes each variant's runs; deltas are relative to the first variant.
pub fn compare_variants(tables: &[(String, Vec<RunSummary>)]) -> Result<Summary> {
    let mut rows: Vec<VariantRow> = Vec::with_capacity(tables.len());
    for (name, runs) in tables {
        if runs.is_empty() {
            return Err(Error::Config(format!("variant {name} has no completed runs")));
        }
        let col = |f: fn(&RunSummary) -> f64| mean_std(&runs.iter().map(f).collect::<Vec<_>>());
        rows.push(VariantRow {
            variant: name.clone(),
            runs: runs.len(),
            duration: col(|r| r.duration),
            path_length: col(|r| r.path_length),
            mapped_volume: col(|r| r.mapped_volume),
            delta_pct: [0.0; 3],
        });
    }
    if let Some(base) = rows.first().cloned() {
        let rel = |v: f64, b: f64| if b == 0.0 { 0.0 } else { (v - b) / b * 100.0 };
        for r in &mut rows {
            r.delta_pct = [
                rel(r.duration.mean, base.duration.mean),
                rel(r.path_length.mean, base.path_length.mean),
                rel(r.mapped_volume.mean, base.mapped_volume.mean),
            ];
        }
    }
    Ok(Summary { rows })
}

impl Summary {
    pub fn row(&self, variant: &str) -> Option<&VariantRow> {
        self.rows.iter().find(|r| r.variant == variant)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("# std: population; deltas relative to the first row\n");
        out.push_str(SUMMARY_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3},{:.2},{:.2},{:.2}",
                r.variant,
                r.runs,
                r.duration.mean,
                r.duration.std,
                r.path_length.mean,
                r.path_length.std,
                r.mapped_volume.mean,
                r.mapped_volume.std,
                r.delta_pct[0],
                r.delta_pct[1],
                r.delta_pct[2],
            );
        }
        out
    }
}
