//! Output records. The field order of each struct is its CSV header.

use std::io::Write;

use effconc_core::classical::{BoundResult, Sided};
use effconc_core::Problem;
use serde::Serialize;

use crate::error::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct TailRow {
    pub n: u64,
    pub r: f64,
    pub sigma: f64,
    pub u: f64,
    pub sided: &'static str,
    pub bound: &'static str,
    pub value: f64,
    pub is_min: bool,
    pub winner: &'static str,
    pub p: Option<u32>,
    pub rho: Option<f64>,
    pub kappa: Option<f64>,
    pub lambda: Option<f64>,
    pub flag: Option<&'static str>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct QuantileRow {
    pub n: u64,
    pub r: f64,
    pub sigma: f64,
    pub delta: f64,
    pub sided: &'static str,
    pub bound: &'static str,
    pub value: f64,
    /// `σΦ^{-1}(1 − δ)` or `σΦ^{-1}(1 − δ/2)`.
    pub reference: f64,
    pub ratio: f64,
    pub is_min: bool,
    pub winner: &'static str,
    pub p: Option<u32>,
    pub rho: Option<f64>,
    pub kappa: Option<f64>,
    pub lambda: Option<f64>,
    pub flag: Option<&'static str>,
}

impl TailRow {
    pub fn new(prob: &Problem, u: f64, sided: Sided, bound: &'static str, b: &BoundResult) -> Self {
        TailRow {
            n: prob.n(),
            r: prob.r(),
            sigma: prob.sigma(),
            u,
            sided: sided.as_str(),
            bound,
            value: b.value,
            is_min: false,
            winner: b.winner,
            p: b.settings.p,
            rho: b.settings.rho,
            kappa: b.settings.kappa,
            lambda: b.settings.lambda,
            flag: b.flag,
        }
    }
}

impl QuantileRow {
    pub fn new(prob: &Problem, delta: f64, sided: Sided, bound: &'static str, reference: f64, b: &BoundResult) -> Self {
        QuantileRow {
            n: prob.n(),
            r: prob.r(),
            sigma: prob.sigma(),
            delta,
            sided: sided.as_str(),
            bound,
            value: b.value,
            reference,
            ratio: b.value / reference,
            is_min: false,
            winner: b.winner,
            p: b.settings.p,
            rho: b.settings.rho,
            kappa: b.settings.kappa,
            lambda: b.settings.lambda,
            flag: b.flag,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct EmpiricalRow {
    pub n: u64,
    pub r: f64,
    pub mean: f64,
    pub emp_var: f64,
    pub delta: f64,
    pub sided: &'static str,
    pub bound: &'static str,
    pub value: f64,
    /// The Gaussian quantile at `σ̂`.
    pub reference: f64,
    pub is_min: bool,
    pub winner: &'static str,
    pub flag: Option<&'static str>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct StopRow {
    pub replication: u32,
    pub rule: &'static str,
    pub ell: u32,
    pub check_index: usize,
    pub n: u64,
    pub half_width: f64,
    pub stopped: bool,
    pub correct: Option<bool>,
}

/// Sets `is_min` on the smallest value of each run of rows sharing `group`.
pub fn mark_min<T, K: PartialEq>(
    rows: &mut [T],
    group: impl Fn(&T) -> K,
    value: impl Fn(&T) -> f64,
    set: impl Fn(&mut T),
) {
    let mut start = 0;
    while start < rows.len() {
        let key = group(&rows[start]);
        let mut end = start + 1;
        while end < rows.len() && group(&rows[end]) == key {
            end += 1;
        }
        let best = (start..end).min_by(|&a, &b| value(&rows[a]).total_cmp(&value(&rows[b])));
        if let Some(i) = best {
            set(&mut rows[i]);
        }
        start = end;
    }
}

/// Writes `rows` as CSV with a header row, or as JSON lines.
pub fn write_rows<T: Serialize, W: Write>(rows: &[T], format: Format, mut out: W) -> CliResult<()> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        Format::Json => {
            for row in rows {
                serde_json::to_writer(&mut out, row)?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}
