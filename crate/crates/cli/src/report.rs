//! Serializable views of fits, studies and probes.

use std::io::{self, Write};

use depcens_core::estimation::BootstrapSummary;
use depcens_core::model::IdentifiabilityProbe;
use depcens_core::{CellSummary, FitResult, SubdensityPoint};
use serde::Serialize;

use crate::io::{num, write_comment_header, Meta};

fn square(flat: &[f64], d: usize) -> Vec<Vec<f64>> {
    flat.chunks(d.max(1)).map(<[f64]>::to_vec).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct BootstrapReport {
    pub replicates: usize,
    pub dropped: usize,
    pub se: Vec<f64>,
    pub se_natural: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
}

impl BootstrapReport {
    pub fn new(summary: &BootstrapSummary) -> Self {
        Self {
            replicates: summary.requested,
            dropped: summary.dropped,
            se: summary.se.clone(),
            se_natural: summary.se_natural.clone(),
            covariance: square(&summary.covariance, summary.se.len()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub copula: String,
    pub margin_t: String,
    pub margin_c: String,
    pub transform: String,
    pub names: Vec<String>,
    pub estimate: Vec<f64>,
    pub natural_names: Vec<String>,
    pub natural: Vec<f64>,
    pub theta: Option<f64>,
    pub tau: f64,
    pub loglik: f64,
    pub n: usize,
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
    pub gradient_norm: f64,
    pub at_boundary: bool,
    pub restarts_used: usize,
    pub sandwich_se: Option<Vec<f64>>,
    pub sandwich_covariance: Option<Vec<Vec<f64>>>,
    pub sandwich_error: Option<String>,
    pub bootstrap: Option<BootstrapReport>,
    pub fitted_prob_uncensored: f64,
}

impl FitReport {
    pub fn new(fit: &FitResult, bootstrap: Option<&BootstrapSummary>) -> Self {
        let layout = fit.layout();
        Self {
            copula: layout.copula.to_string(),
            margin_t: layout.margin_t.to_string(),
            margin_c: layout.margin_c.to_string(),
            transform: layout.transform.coordinate_name().to_owned(),
            names: layout.names(),
            estimate: fit.estimate.values.clone(),
            natural_names: layout.natural_names(),
            natural: fit.natural_values(),
            theta: fit.model.copula.theta(),
            tau: fit.model.copula.tau(),
            loglik: fit.loglik,
            n: fit.n,
            converged: fit.converged,
            iterations: fit.iterations,
            evaluations: fit.evaluations,
            gradient_norm: fit.gradient_norm,
            at_boundary: fit.at_boundary,
            restarts_used: fit.restarts_used,
            sandwich_se: fit.sandwich_se(),
            sandwich_covariance: fit.cov_sandwich.as_deref().map(|c| square(c, layout.dim())),
            sandwich_error: fit.sandwich_error.clone(),
            bootstrap: bootstrap.map(BootstrapReport::new),
            fitted_prob_uncensored: fit.fitted_prob_uncensored,
        }
    }
}

/// One row of the cross-family comparison.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub copula: String,
    pub loglik: Option<f64>,
    pub converged: bool,
    pub at_boundary: bool,
    pub theta: Option<f64>,
    pub tau: Option<f64>,
    pub natural_names: Vec<String>,
    pub natural: Vec<f64>,
    pub fitted_prob_uncensored: Option<f64>,
    pub error: Option<String>,
}

impl ComparisonRow {
    pub fn from_fit(fit: &FitResult) -> Self {
        Self {
            copula: fit.layout().copula.to_string(),
            loglik: Some(fit.loglik),
            converged: fit.converged,
            at_boundary: fit.at_boundary,
            theta: fit.model.copula.theta(),
            tau: Some(fit.model.copula.tau()),
            natural_names: fit.layout().natural_names(),
            natural: fit.natural_values(),
            fitted_prob_uncensored: Some(fit.fitted_prob_uncensored),
            error: None,
        }
    }

    pub fn failed(copula: &str, error: String) -> Self {
        Self {
            copula: copula.to_owned(),
            loglik: None,
            converged: false,
            at_boundary: false,
            theta: None,
            tau: None,
            natural_names: Vec::new(),
            natural: Vec::new(),
            fitted_prob_uncensored: None,
            error: Some(error),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DataReport {
    pub path: String,
    pub n: usize,
    pub n_uncensored: usize,
    pub n_censored: usize,
    pub excluded_nonpositive: usize,
    pub empirical_prob_uncensored: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitDocument {
    pub meta: Meta,
    pub data: DataReport,
    pub fit: FitReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Vec<ComparisonRow>>,
}

pub fn write_json<T: Serialize>(out: &mut dyn Write, doc: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, doc)?;
    writeln!(out)?;
    out.flush()
}

/// Statistic labels of the study table, in row order.
pub const STATISTICS: [&str; 4] = ["average.estimate", "sd.of.average.estimate", "average.bias", "RMSE"];

/// Write study summaries as one CSV with four statistic rows per cell.
pub fn write_study(out: &mut dyn Write, meta: &Meta, summaries: &[CellSummary], failures: &[String]) -> io::Result<()> {
    let extra: Vec<String> = failures.iter().map(|f| format!("failed cell: {f}")).collect();
    write_comment_header(out, meta, &extra)?;
    let columns = summaries.first().map(|s| s.columns.clone()).unwrap_or_default();
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["scenario", "copula", "tau", "n", "reps", "used", "dropped", "warning", "statistic"]
        .map(String::from)
        .to_vec();
    header.extend(columns.iter().cloned());
    w.write_record(&header)?;
    for s in summaries {
        let stats: [Option<&Vec<f64>>; 4] =
            [Some(&s.average_estimate), s.sd_of_average_estimate.as_ref(), Some(&s.average_bias), Some(&s.rmse)];
        for (label, values) in STATISTICS.iter().zip(stats) {
            let mut row = vec![
                s.cell.scenario.id.to_string(),
                s.cell.family.to_string(),
                num(s.cell.tau),
                s.cell.n.to_string(),
                s.cell.reps.to_string(),
                s.used.to_string(),
                s.dropped.to_string(),
                s.warning.to_string(),
                (*label).to_owned(),
            ];
            match values {
                Some(v) => row.extend(v.iter().copied().map(num)),
                None => row.extend(std::iter::repeat_n(String::new(), s.columns.len())),
            }
            w.write_record(&row)?;
        }
    }
    w.flush()
}

pub fn write_density(out: &mut dyn Write, meta: &Meta, points: &[SubdensityPoint]) -> io::Result<()> {
    write_comment_header(out, meta, &[])?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["y", "f_y", "f_y_delta1", "f_y_delta0"])?;
    for p in points {
        w.write_record([p.y, p.f_y, p.f_y_delta1, p.f_y_delta0].map(num))?;
    }
    w.flush()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn write_probe(out: &mut dyn Write, meta: &Meta, probe: &IdentifiabilityProbe) -> io::Result<()> {
    write_comment_header(out, meta, &probe.verdict_lines())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "t",
        "u",
        "v",
        "h_t_given_c",
        "h_c_given_t",
        "log_cdf_ratio",
        "log_cdf_quotient",
        "gaussian_a_tc",
        "gaussian_a_ct",
        "clamped",
        "finite",
    ])?;
    for r in &probe.rows {
        w.write_record([
            num(r.t),
            num(r.u),
            num(r.v),
            num(r.h_t_given_c),
            num(r.h_c_given_t),
            num(r.log_cdf_ratio),
            num(r.log_cdf_quotient),
            opt(r.gaussian_a_tc),
            opt(r.gaussian_a_ct),
            r.clamped.to_string(),
            r.finite.to_string(),
        ])?;
    }
    w.flush()
}
