//! CSV files for observation panels.

use std::collections::HashMap;
use std::io::{Read, Write};

use gqnfit::basis::RowLabel;
use nalgebra::DMatrix;

use crate::error::{CliError, CliResult};
use crate::pipeline::Panel;

fn parse(row: usize, col: &str, s: &str) -> CliResult<f64> {
    s.trim().parse::<f64>().map_err(|_| CliError::Runtime(format!("row {row}: column {col}: cannot parse {s:?}")))
}

/// `site_id, time, value[, latent], covariates...`.
pub fn write_panel<W: Write>(panel: &Panel, with_latent: bool, w: W) -> CliResult<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["site_id".to_string(), "time".into(), "value".into()];
    if with_latent {
        header.push("latent".into());
    }
    header.extend(panel.covariates.iter().cloned());
    out.write_record(&header)?;
    for (i, r) in panel.rows.iter().enumerate() {
        let mut rec = vec![r.site_id.clone(), r.time.to_string(), panel.z[i].to_string()];
        if with_latent {
            let l = panel.latent.as_ref().ok_or_else(|| CliError::Runtime("panel has no latent values".into()))?;
            rec.push(l[i].to_string());
        }
        rec.extend(panel.x.row(i).iter().map(|v| v.to_string()));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// `site_id, time, value` of the latent truth.
pub fn write_latent<W: Write>(panel: &Panel, w: W) -> CliResult<()> {
    let l = panel.latent.as_ref().ok_or_else(|| CliError::Runtime("panel has no latent values".into()))?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["site_id", "time", "value"])?;
    for (r, v) in panel.rows.iter().zip(l) {
        out.write_record([r.site_id.clone(), r.time.to_string(), v.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a panel; an optional `latent` column is picked up, every other
/// column after `value` is a covariate.
pub fn read_panel<R: Read>(r: R) -> CliResult<Panel> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if header.len() < 3 || header[0] != "site_id" || header[1] != "time" || header[2] != "value" {
        return Err(CliError::Runtime("observation file must start with columns site_id,time,value".into()));
    }
    let latent_col = header.iter().position(|h| h == "latent");
    let cov_cols: Vec<usize> = (3..header.len()).filter(|&c| Some(c) != latent_col).collect();
    let mut rows = Vec::new();
    let mut z = Vec::new();
    let mut latent = Vec::new();
    let mut xs = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let time = rec[1].trim().parse::<i64>().map_err(|_| CliError::Runtime(format!("row {k}: bad time {:?}", &rec[1])))?;
        rows.push(RowLabel { site_id: rec[0].trim().to_string(), time });
        z.push(parse(k, "value", &rec[2])?);
        if let Some(c) = latent_col {
            latent.push(parse(k, "latent", &rec[c])?);
        }
        for &c in &cov_cols {
            xs.push(parse(k, &header[c], &rec[c])?);
        }
    }
    let p = cov_cols.len();
    if p == 0 {
        return Err(CliError::Runtime("observation file has no covariate columns".into()));
    }
    Ok(Panel {
        x: DMatrix::from_row_slice(rows.len(), p, &xs),
        rows,
        z,
        covariates: cov_cols.iter().map(|&c| header[c].clone()).collect(),
        latent: latent_col.map(|_| latent),
    })
}

/// Attaches latent truth from a `site_id, time, value` file.
pub fn attach_latent<R: Read>(panel: &mut Panel, r: R) -> CliResult<()> {
    let mut map = HashMap::new();
    for (k, rec) in csv::Reader::from_reader(r).records().enumerate() {
        let rec = rec?;
        let time = rec[1].trim().parse::<i64>().map_err(|_| CliError::Runtime(format!("latent row {k}: bad time")))?;
        map.insert(RowLabel { site_id: rec[0].trim().to_string(), time }, parse(k, "value", &rec[2])?);
    }
    let latent = panel
        .rows
        .iter()
        .map(|r| map.get(r).copied().ok_or_else(|| CliError::Runtime(format!("no latent value for site {} at time {}", r.site_id, r.time))))
        .collect::<CliResult<Vec<_>>>()?;
    panel.latent = Some(latent);
    Ok(())
}
