//! Data generation and the Monte-Carlo simulation-study harness.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::copulas::{transform_tau, CopulaFamily, CopulaSpec, TransformKind};
use crate::error::{domain, Error, Result};
use crate::estimation::{fit_layout, Dataset, FitOptions, ParamLayout, Record};
use crate::margins::{MarginFamily, MarginParams};
use crate::math;
use crate::model::{ModelSpec, SubdensityPoint};
use crate::rng;

/// Log-normal margins of a simulation scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Scenario {
    pub id: u8,
    pub mu_t: f64,
    pub sigma_t: f64,
    pub mu_c: f64,
    pub sigma_c: f64,
}

impl Scenario {
    pub const TAU_GRID: [f64; 3] = [0.2, 0.5, 0.8];
    pub const SAMPLE_SIZES: [usize; 3] = [200, 500, 1000];

    pub const ONE: Scenario = Scenario { id: 1, mu_t: 2.2, sigma_t: 1.0, mu_c: 2.0, sigma_c: 0.25 };
    pub const TWO: Scenario = Scenario { id: 2, mu_t: 2.5, sigma_t: 1.0, mu_c: 2.0, sigma_c: 0.5 };

    pub fn by_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(Self::ONE),
            2 => Ok(Self::TWO),
            _ => Err(domain!("unknown scenario {id}; expected 1 or 2")),
        }
    }

    pub fn margin_t(&self) -> MarginParams {
        MarginParams::log_normal(self.mu_t, self.sigma_t).expect("scenario margins are valid")
    }

    pub fn margin_c(&self) -> MarginParams {
        MarginParams::log_normal(self.mu_c, self.sigma_c).expect("scenario margins are valid")
    }

    pub fn model(&self, family: CopulaFamily, tau: f64) -> Result<ModelSpec> {
        Ok(ModelSpec::new(CopulaSpec::from_tau(family, tau)?, self.margin_t(), self.margin_c()))
    }

    /// True unconstrained coordinates `(mu_T, log sigma_T, mu_C, log sigma_C, z(tau))`.
    pub fn truth(&self, family: CopulaFamily, tau: f64, transform: TransformKind) -> Result<Vec<f64>> {
        let mut v = alloc::vec![self.mu_t, math::ln(self.sigma_t), self.mu_c, math::ln(self.sigma_c)];
        if family.has_parameter() {
            v.push(transform_tau(transform, tau)?);
        }
        Ok(v)
    }
}

/// One cell of a simulation study.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StudyCell {
    pub scenario: Scenario,
    pub family: CopulaFamily,
    pub tau: f64,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
}

impl StudyCell {
    pub fn new(scenario: Scenario, family: CopulaFamily, tau: f64, n: usize, reps: usize, seed: u64) -> Result<Self> {
        if reps == 0 {
            return Err(domain!("a study cell needs at least one replicate"));
        }
        if !family.has_parameter() {
            return Err(domain!("study cells need a parametric copula family"));
        }
        CopulaSpec::from_tau(family, tau)?;
        Ok(Self { scenario, family, tau, n, reps, seed })
    }

    /// Seed of this cell, derived from the master seed and the cell coordinates
    /// so any cell can be reproduced on its own.
    pub fn cell_seed(&self) -> u64 {
        let family = self.family as u64;
        let id =
            (self.scenario.id as u64) << 56 ^ family << 48 ^ (self.n as u64) << 16 ^ self.tau.to_bits().rotate_left(7);
        rng::mix(self.seed, id)
    }

    pub fn model(&self) -> Result<ModelSpec> {
        self.scenario.model(self.family, self.tau)
    }

    pub fn layout(&self, transform: TransformKind) -> Result<ParamLayout> {
        ParamLayout::new(self.family, MarginFamily::LogNormal, MarginFamily::LogNormal, transform)
    }

    /// Simulated dataset of replicate `index`.
    pub fn dataset(&self, index: usize) -> Result<Dataset> {
        let mut r = rng::stream(self.cell_seed(), rng::domain::SIMULATE, index as u64);
        sample_observed(&self.model()?, self.n, &mut r)
    }
}

/// Outcome of one simulation replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOutcome {
    pub index: usize,
    /// Unconstrained estimate; `None` when the fit failed.
    pub estimate: Option<Vec<f64>>,
    pub converged: bool,
    pub error: Option<String>,
}

/// Simulate replicate `index` of `cell` and refit the true families.
pub fn run_replicate(cell: &StudyCell, index: usize, base: &FitOptions) -> ReplicateOutcome {
    let attempt = || -> Result<(Vec<f64>, bool)> {
        let data = cell.dataset(index)?;
        let layout = cell.layout(base.transform)?;
        let opts = FitOptions {
            seed: rng::mix(cell.cell_seed(), index as u64),
            compute_sandwich: false,
            compute_prob_uncensored: false,
            ..base.clone()
        };
        let fit = fit_layout(&data, &layout, &opts)?;
        Ok((fit.estimate.values, fit.converged))
    };
    match attempt() {
        Ok((x, converged)) => ReplicateOutcome { index, estimate: Some(x), converged, error: None },
        Err(e) => ReplicateOutcome { index, estimate: None, converged: false, error: Some(format!("{e}")) },
    }
}

/// Fraction of non-converged replicates above which a cell is flagged.
pub const WARNING_FRACTION: f64 = 0.2;

/// Summary statistics of one cell on the unconstrained scale plus a `tau` column.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CellSummary {
    pub cell: StudyCell,
    pub transform: TransformKind,
    /// Column names: unconstrained coordinates, then `tau`.
    pub columns: Vec<String>,
    pub truth: Vec<f64>,
    pub average_estimate: Vec<f64>,
    /// `SD / sqrt(used)`; absent with fewer than two usable replicates.
    pub sd_of_average_estimate: Option<Vec<f64>>,
    pub average_bias: Vec<f64>,
    pub rmse: Vec<f64>,
    /// Sample standard deviation of the estimates (absent with fewer than two).
    pub sd: Option<Vec<f64>>,
    pub used: usize,
    pub dropped: usize,
    pub warning: bool,
}

/// Summarize replicate outcomes. Failed and non-converged replicates are dropped.
pub fn summarize_cell(
    cell: &StudyCell,
    transform: TransformKind,
    outcomes: &[ReplicateOutcome],
) -> Result<CellSummary> {
    let layout = cell.layout(transform)?;
    let mut columns = layout.names();
    columns.push(String::from("tau"));
    let mut truth = cell.scenario.truth(cell.family, cell.tau, transform)?;
    truth.push(cell.tau);

    let rows: Vec<Vec<f64>> = outcomes
        .iter()
        .filter(|o| o.converged)
        .filter_map(|o| o.estimate.as_ref())
        .map(|x| {
            let mut row = x.clone();
            row.push(crate::copulas::untransform_tau(transform, x[x.len() - 1]));
            row
        })
        .collect();
    let used = rows.len();
    let dropped = outcomes.len() - used;
    let warning = dropped as f64 > WARNING_FRACTION * outcomes.len() as f64;
    if used == 0 {
        return Err(Error::Numeric(format!("no replicate of the cell converged ({} attempted)", outcomes.len())));
    }
    let k = columns.len();
    let m = used as f64;
    let column = |j: usize| rows.iter().map(move |r| r[j]);
    let average_estimate: Vec<f64> = (0..k).map(|j| column(j).sum::<f64>() / m).collect();
    let average_bias: Vec<f64> = (0..k).map(|j| average_estimate[j] - truth[j]).collect();
    let rmse: Vec<f64> =
        (0..k).map(|j| math::sqrt(column(j).map(|v| (v - truth[j]) * (v - truth[j])).sum::<f64>() / m)).collect();
    let sd: Option<Vec<f64>> = (used >= 2).then(|| {
        (0..k)
            .map(|j| {
                math::sqrt(
                    column(j).map(|v| (v - average_estimate[j]) * (v - average_estimate[j])).sum::<f64>() / (m - 1.0),
                )
            })
            .collect()
    });
    let sd_of_average_estimate = sd.as_ref().map(|s| s.iter().map(|v| v / math::sqrt(m)).collect());
    Ok(CellSummary {
        cell: *cell,
        transform,
        columns,
        truth,
        average_estimate,
        sd_of_average_estimate,
        average_bias,
        rmse,
        sd,
        used,
        dropped,
        warning,
    })
}

/// Run all replicates of `cell` sequentially and summarize them.
pub fn run_cell(cell: &StudyCell, opts: &FitOptions) -> Result<CellSummary> {
    let outcomes: Vec<ReplicateOutcome> = (0..cell.reps).map(|i| run_replicate(cell, i, opts)).collect();
    summarize_cell(cell, opts.transform, &outcomes)
}

/// Latent draw `(T, C)` from the model.
pub fn sample_pair<R: RngCore + ?Sized>(m: &ModelSpec, rng: &mut R) -> Result<(f64, f64)> {
    m.sample_latent(rng)
}

/// `n` observed records `(min(T, C), 1{T <= C})`.
pub fn sample_observed<R: RngCore + ?Sized>(m: &ModelSpec, n: usize, rng: &mut R) -> Result<Dataset> {
    let mut records = Vec::with_capacity(n);
    for _ in 0..n {
        let (t, c) = m.sample_latent(rng)?;
        records.push(Record { y: t.min(c), delta: u8::from(t <= c) });
    }
    Dataset::new(records)
}

/// Subdensities tabulated over `grid`.
pub fn theoretical_density_grid(m: &ModelSpec, grid: &[f64]) -> Result<Vec<SubdensityPoint>> {
    grid.iter().map(|&y| m.subdensity_point(y)).collect()
}

/// Kendall's tau of paired samples in `O(n log n)` (Knight's algorithm).
/// Ties are not adjusted for; the samples are assumed continuous.
pub fn empirical_kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(domain!("paired samples differ in length ({} vs {})", x.len(), y.len()));
    }
    let n = x.len();
    if n < 2 {
        return Err(domain!("Kendall's tau needs at least two pairs"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));
    let mut ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let mut buf = ys.clone();
    let discordant = count_inversions(&mut ys, &mut buf);
    let pairs = n as f64 * (n as f64 - 1.0) / 2.0;
    Ok(1.0 - 2.0 * discordant as f64 / pairs)
}

// Bottom-up merge sort counting pairs i < j with v[i] > v[j].
fn count_inversions(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    let mut count = 0u64;
    let mut width = 1;
    while width < n {
        let mut start = 0;
        while start < n {
            let mid = (start + width).min(n);
            let end = (start + 2 * width).min(n);
            let (mut i, mut j, mut k) = (start, mid, start);
            while i < mid && j < end {
                if v[j] < v[i] {
                    count += (mid - i) as u64;
                    buf[k] = v[j];
                    j += 1;
                } else {
                    buf[k] = v[i];
                    i += 1;
                }
                k += 1;
            }
            buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
            k += mid - i;
            buf[k..k + end - j].copy_from_slice(&v[j..end]);
            start = end;
        }
        v.copy_from_slice(buf);
        width *= 2;
    }
    count
}

/// Kolmogorov distance between the empirical CDF of `sample` and `cdf`.
pub fn kolmogorov_distance<F: FnMut(f64) -> f64>(sample: &[f64], mut cdf: F) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
    })
}
