//! JSON files and the CSV tables.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::energy::EnergyReport;
use crate::error::Result;
use crate::lattice::ModelParams;
use crate::optimize::IterRow;
use crate::recovery::SweepRow;

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRow {
    pub lambda: f64,
    pub delta: f64,
    pub epsilon: f64,
    #[serde(rename = "H_total")]
    pub h_total: f64,
    #[serde(rename = "H_hor")]
    pub h_hor: f64,
    #[serde(rename = "H_ver")]
    pub h_ver: f64,
    /// Empty when the report has no decomposition.
    pub potential: Option<f64>,
    pub gradient: Option<f64>,
}

impl EnergyRow {
    pub fn new(params: &ModelParams<f64>, r: &EnergyReport<f64>) -> Self {
        EnergyRow {
            lambda: params.lambda,
            delta: params.delta,
            epsilon: params.epsilon,
            h_total: r.total,
            h_hor: r.horizontal,
            h_ver: r.vertical,
            potential: r.potential_part,
            gradient: r.gradient_part,
        }
    }
}

#[derive(Serialize)]
struct SweepCsv {
    epsilon: f64,
    lambda: f64,
    delta: f64,
    #[serde(rename = "H_n_total")]
    h_n_total: f64,
    #[serde(rename = "H_n_hor")]
    h_n_hor: f64,
    #[serde(rename = "H_n_ver")]
    h_n_ver: f64,
    #[serde(rename = "H_limit")]
    h_limit: f64,
    ratio: f64,
    overflow_count: usize,
}

fn csv_string<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn energy_csv(rows: &[EnergyRow]) -> Result<String> {
    if rows.is_empty() {
        return Ok("lambda,delta,epsilon,H_total,H_hor,H_ver,potential,gradient\n".into());
    }
    csv_string(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    if rows.is_empty() {
        return Ok("epsilon,lambda,delta,H_n_total,H_n_hor,H_n_ver,H_limit,ratio,overflow_count\n".into());
    }
    csv_string(rows.iter().map(|r| SweepCsv {
        epsilon: r.epsilon,
        lambda: r.lambda,
        delta: r.delta,
        h_n_total: r.h_n_total,
        h_n_hor: r.h_n_hor,
        h_n_ver: r.h_n_ver,
        h_limit: r.h_limit,
        ratio: r.ratio,
        overflow_count: r.overflow_count,
    }))
}

pub fn iteration_csv(rows: &[IterRow]) -> Result<String> {
    if rows.is_empty() {
        return Ok("iter,energy,grad_norm,step\n".into());
    }
    csv_string(rows)
}

/// Sweep rows back from CSV, with the diagnostic columns left empty.
pub fn read_sweep_csv(text: &str) -> Result<Vec<SweepRow>> {
    #[derive(Deserialize)]
    struct Row {
        epsilon: f64,
        lambda: f64,
        delta: f64,
        #[serde(rename = "H_n_total")]
        h_n_total: f64,
        #[serde(rename = "H_n_hor")]
        h_n_hor: f64,
        #[serde(rename = "H_n_ver")]
        h_n_ver: f64,
        #[serde(rename = "H_limit")]
        h_limit: f64,
        ratio: f64,
        overflow_count: usize,
    }
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize::<Row>()
        .map(|row| {
            let row = row?;
            Ok(SweepRow {
                epsilon: row.epsilon,
                lambda: row.lambda,
                delta: row.delta,
                h_n_total: row.h_n_total,
                h_n_hor: row.h_n_hor,
                h_n_ver: row.h_n_ver,
                h_limit: row.h_limit,
                ratio: row.ratio,
                overflow_count: row.overflow_count,
                curl_residual: None,
                identity_residual: f64::NAN,
                failure: None,
            })
        })
        .collect()
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}
