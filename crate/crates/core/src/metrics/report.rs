use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::basis::RowLabel;
use crate::error::{Error, Result};

/// Scores of one fit. Fields that do not apply are `None` and are omitted
/// from JSON and left empty in CSV.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    /// `gqn` or `var1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// `latent` (simulations) or `observed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mspe_target: Option<String>,
    /// `identity`, `log` or `probability`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forecast_error: Option<f64>,
    /// Forecast MSPE at steps 1, 2, ...
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forecast_by_step: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_sample_mspe: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_of_sample_mspe: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_mse: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waic: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cpu_seconds: Option<f64>,
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ScoreReport {
    /// CSV column names, with `forecast_step_k` for `k = 1..=steps`.
    pub fn csv_header(steps: usize) -> Vec<String> {
        let mut h: Vec<String> = ["label", "mspe_target", "scale", "forecast_error"].iter().map(|s| s.to_string()).collect();
        h.extend((1..=steps).map(|k| format!("forecast_step_{k}")));
        h.extend(
            ["in_sample_mspe", "out_of_sample_mspe", "beta_mse", "crps", "waic", "auc", "cpu_seconds"]
                .iter()
                .map(|s| s.to_string()),
        );
        h
    }

    pub fn csv_record(&self, steps: usize) -> Vec<String> {
        let mut r = vec![
            self.label.clone().unwrap_or_default(),
            self.mspe_target.clone().unwrap_or_default(),
            self.scale.clone().unwrap_or_default(),
            cell(self.forecast_error),
        ];
        r.extend((0..steps).map(|k| cell(self.forecast_by_step.get(k).copied())));
        r.extend(
            [self.in_sample_mspe, self.out_of_sample_mspe, self.beta_mse, self.crps, self.waic, self.auc, self.cpu_seconds]
                .into_iter()
                .map(cell),
        );
        r
    }

    /// Writes one or more reports as CSV with a shared header.
    pub fn write_csv<W: Write>(reports: &[ScoreReport], w: W) -> Result<()> {
        let steps = reports.iter().map(|r| r.forecast_by_step.len()).max().unwrap_or(0);
        let mut out = csv::Writer::from_writer(w);
        out.write_record(Self::csv_header(steps))?;
        for r in reports {
            out.write_record(r.csv_record(steps))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checks the sign and range constraints.
    pub fn validate(&self) -> Result<()> {
        let nonneg = [self.forecast_error, self.in_sample_mspe, self.out_of_sample_mspe, self.beta_mse, self.crps, self.cpu_seconds];
        if nonneg.iter().flatten().chain(self.forecast_by_step.iter()).any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidParameter("score report has a negative or NaN error metric".into()));
        }
        if let Some(a) = self.auc {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::InvalidParameter(format!("auc {a} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub site_id: String,
    pub time: i64,
    /// `fit`, `holdout` or `forecast`.
    pub split: String,
    pub pred: f64,
    pub truth: f64,
    pub residual: f64,
}

impl ResidualRow {
    pub fn new(label: &RowLabel, split: &str, pred: f64, truth: f64) -> Self {
        ResidualRow { site_id: label.site_id.clone(), time: label.time, split: split.into(), pred, truth, residual: pred - truth }
    }
}

pub fn write_residuals_csv<W: Write>(rows: &[ResidualRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absent_fields_are_omitted() {
        let r = ScoreReport { in_sample_mspe: Some(0.1), ..Default::default() };
        let j = r.to_json().unwrap();
        assert!(j.contains("in_sample_mspe") && !j.contains("auc") && !j.contains("forecast"));
        let mut buf = Vec::new();
        ScoreReport::write_csv(&[r], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("label,mspe_target,scale,forecast_error,in_sample_mspe"));
    }

    #[test]
    fn step_columns() {
        let r = ScoreReport { forecast_by_step: vec![0.1, 0.2, 0.3], ..Default::default() };
        let h = ScoreReport::csv_header(3);
        assert!(h.contains(&"forecast_step_3".to_string()));
        assert_eq!(r.csv_record(3).len(), h.len());
        assert!(ScoreReport { auc: Some(1.5), ..Default::default() }.validate().is_err());
    }
}
