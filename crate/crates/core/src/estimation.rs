//! Maximum-likelihood estimation under dependent censoring, with sandwich and
//! bootstrap covariance estimates.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::copulas::{transform_tau, untransform_tau, CopulaFamily, CopulaSpec, TransformKind};
use crate::error::{domain, Error, Result};
use crate::margins::{MarginFamily, MarginParams};
use crate::math;
use crate::model::ModelSpec;
use crate::optim::{self, QuasiNewtonOptions, SimplexOptions};
use crate::rng;

/// One observation: `y = min(T, C)` and `delta = 1{T <= C}`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Record {
    pub y: f64,
    pub delta: u8,
}

impl Record {
    pub fn new(y: f64, delta: u8) -> Result<Self> {
        if !(y.is_finite() && y > 0.0) {
            return Err(domain!("observation y = {y} must be positive and finite"));
        }
        if delta > 1 {
            return Err(domain!("censoring indicator must be 0 or 1, got {delta}"));
        }
        Ok(Self { y, delta })
    }

    pub fn uncensored(&self) -> bool {
        self.delta == 1
    }
}

/// A validated censored sample.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    records: Vec<Record>,
    log_y: Vec<f64>,
    n_uncensored: usize,
}

impl Dataset {
    pub fn new(records: Vec<Record>) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            Record::new(r.y, r.delta).map_err(|e| domain!("record {i}: {e}"))?;
        }
        let log_y = records.iter().map(|r| math::ln(r.y)).collect();
        let n_uncensored = records.iter().filter(|r| r.uncensored()).count();
        Ok(Self { records, log_y, n_uncensored })
    }

    pub fn from_pairs(pairs: &[(f64, u8)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(y, delta)| Record { y, delta }).collect())
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn n_uncensored(&self) -> usize {
        self.n_uncensored
    }

    pub fn n_censored(&self) -> usize {
        self.records.len() - self.n_uncensored
    }

    /// Empirical `P(Δ = 1)`.
    pub fn fraction_uncensored(&self) -> f64 {
        if self.records.is_empty() {
            f64::NAN
        } else {
            self.n_uncensored as f64 / self.records.len() as f64
        }
    }

    /// The dataset made of the records at `indices` (with repetition).
    pub fn resample(&self, indices: &[usize]) -> Self {
        let records: Vec<Record> = indices.iter().map(|&i| self.records[i]).collect();
        let log_y = indices.iter().map(|&i| self.log_y[i]).collect();
        let n_uncensored = records.iter().filter(|r| r.uncensored()).count();
        Self { records, log_y, n_uncensored }
    }
}

/// Which model is fitted and how its parameters map to the unconstrained vector
/// `(margin_T coordinates, margin_C coordinates, dependence transform)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamLayout {
    pub copula: CopulaFamily,
    pub margin_t: MarginFamily,
    pub margin_c: MarginFamily,
    pub transform: TransformKind,
    /// Degrees of freedom held fixed for a log-Student-t margin of `T`.
    pub fixed_nu_t: Option<f64>,
    pub fixed_nu_c: Option<f64>,
}

fn nu_fixed(family: MarginFamily, nu: Option<f64>) -> Option<f64> {
    if family == MarginFamily::LogStudentT {
        nu
    } else {
        None
    }
}

fn margin_dim(family: MarginFamily, nu: Option<f64>) -> usize {
    family.n_params() - usize::from(nu_fixed(family, nu).is_some())
}

fn margin_from(family: MarginFamily, nu: Option<f64>, coords: &[f64]) -> Result<MarginParams> {
    match nu_fixed(family, nu) {
        Some(nu) => MarginParams::from_unconstrained(family, &[math::ln(nu), coords[0], coords[1]]),
        None => MarginParams::from_unconstrained(family, coords),
    }
}

fn margin_coords(m: &MarginParams, nu: Option<f64>) -> Vec<f64> {
    let mut c = m.unconstrained();
    if nu_fixed(m.family(), nu).is_some() {
        c.remove(0);
    }
    c
}

impl ParamLayout {
    pub fn new(
        copula: CopulaFamily,
        margin_t: MarginFamily,
        margin_c: MarginFamily,
        transform: TransformKind,
    ) -> Result<Self> {
        if !copula.supports(transform) {
            return Err(domain!("{copula} copula does not support the {} transform", transform.coordinate_name()));
        }
        Ok(Self { copula, margin_t, margin_c, transform, fixed_nu_t: None, fixed_nu_c: None })
    }

    pub fn with_fixed_nu(mut self, nu_t: Option<f64>, nu_c: Option<f64>) -> Result<Self> {
        for nu in [nu_t, nu_c].into_iter().flatten() {
            if !(nu.is_finite() && nu > 0.0) {
                return Err(domain!("fixed degrees of freedom must be positive, got {nu}"));
            }
        }
        self.fixed_nu_t = nu_t;
        self.fixed_nu_c = nu_c;
        Ok(self)
    }

    fn dim_t(&self) -> usize {
        margin_dim(self.margin_t, self.fixed_nu_t)
    }

    fn dim_c(&self) -> usize {
        margin_dim(self.margin_c, self.fixed_nu_c)
    }

    pub fn dim(&self) -> usize {
        self.dim_t() + self.dim_c() + usize::from(self.copula.has_parameter())
    }

    /// Names of the unconstrained coordinates, e.g. `mu_T, log_sigma_T, ..., logit_tau`.
    pub fn names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.dim());
        for (family, nu, suffix) in [(self.margin_t, self.fixed_nu_t, "T"), (self.margin_c, self.fixed_nu_c, "C")] {
            let skip = usize::from(nu_fixed(family, nu).is_some());
            names.extend(family.unconstrained_names()[skip..].iter().map(|n| format!("{n}_{suffix}")));
        }
        if self.copula.has_parameter() {
            names.push(String::from(self.transform.coordinate_name()));
        }
        names
    }

    /// Names of the natural-scale quantities reported by [`ParamLayout::natural_values`].
    pub fn natural_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for (family, nu, suffix) in [(self.margin_t, self.fixed_nu_t, "T"), (self.margin_c, self.fixed_nu_c, "C")] {
            let skip = usize::from(nu_fixed(family, nu).is_some());
            names.extend(family.natural_names()[skip..].iter().map(|n| format!("{n}_{suffix}")));
        }
        if self.copula.has_parameter() {
            names.push(String::from("theta"));
            names.push(String::from("tau"));
        }
        names
    }

    /// The model at an unconstrained point, and whether a parameter had to be
    /// confined to the numerically safe range.
    pub fn to_model(&self, values: &[f64]) -> Result<(ModelSpec, bool)> {
        if values.len() != self.dim() {
            return Err(domain!("parameter vector has {} entries, layout expects {}", values.len(), self.dim()));
        }
        let (dt, dc) = (self.dim_t(), self.dim_c());
        let mt = margin_from(self.margin_t, self.fixed_nu_t, &values[..dt])?;
        let mc = margin_from(self.margin_c, self.fixed_nu_c, &values[dt..dt + dc])?;
        let (copula, boundary) = if self.copula.has_parameter() {
            let z = values[dt + dc];
            if !z.is_finite() {
                return Err(domain!("dependence coordinate is not finite"));
            }
            CopulaSpec::from_tau_confined(self.copula, untransform_tau(self.transform, z))?
        } else {
            (CopulaSpec::independence(), false)
        };
        Ok((ModelSpec::new(copula, mt, mc), boundary))
    }

    /// Unconstrained coordinates of a model with this layout's families.
    pub fn from_model(&self, model: &ModelSpec) -> Result<Vec<f64>> {
        if model.margin_t.family() != self.margin_t
            || model.margin_c.family() != self.margin_c
            || model.copula.family() != self.copula
        {
            return Err(domain!("model families do not match the parameter layout"));
        }
        let mut v = margin_coords(&model.margin_t, self.fixed_nu_t);
        v.extend(margin_coords(&model.margin_c, self.fixed_nu_c));
        if self.copula.has_parameter() {
            v.push(transform_tau(self.transform, model.copula.tau())?);
        }
        Ok(v)
    }

    /// Natural-scale values (margin parameters, then `theta`, `tau`) at an unconstrained point.
    pub fn natural_values(&self, values: &[f64]) -> Result<Vec<f64>> {
        let (m, _) = self.to_model(values)?;
        let mut out = Vec::new();
        for (margin, nu) in [(&m.margin_t, self.fixed_nu_t), (&m.margin_c, self.fixed_nu_c)] {
            let skip = usize::from(nu_fixed(margin.family(), nu).is_some());
            out.extend_from_slice(&margin.natural()[skip..]);
        }
        if let Some(theta) = m.copula.theta() {
            out.push(theta);
            out.push(m.copula.tau());
        }
        Ok(out)
    }
}

/// A point on the unconstrained scale together with its layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    pub layout: ParamLayout,
    pub values: Vec<f64>,
}

impl ParamVector {
    pub fn new(layout: ParamLayout, values: Vec<f64>) -> Result<Self> {
        layout.to_model(&values)?;
        Ok(Self { layout, values })
    }

    pub fn from_model(layout: ParamLayout, model: &ModelSpec) -> Result<Self> {
        Ok(Self { layout, values: layout.from_model(model)? })
    }

    pub fn model(&self) -> Result<ModelSpec> {
        Ok(self.layout.to_model(&self.values)?.0)
    }

    pub fn names(&self) -> Vec<String> {
        self.layout.names()
    }
}

/// Sum of log-likelihood contributions; may be non-finite.
pub fn log_likelihood_value(model: &ModelSpec, data: &Dataset) -> f64 {
    data.log_y.iter().zip(&data.records).map(|(&s, r)| model.log_subdensity_at_log(s, r.uncensored())).sum()
}

/// Per-record log-likelihood contributions.
pub fn record_log_likelihoods(model: &ModelSpec, data: &Dataset) -> Vec<f64> {
    data.log_y.iter().zip(&data.records).map(|(&s, r)| model.log_subdensity_at_log(s, r.uncensored())).collect()
}

/// Censored-data log-likelihood of the model at `p`.
pub fn log_likelihood(p: &ParamVector, data: &Dataset) -> Result<f64> {
    model_log_likelihood(&p.model()?, data)
}

/// Censored-data log-likelihood of a fully specified model; non-finite
/// contributions are reported with the offending record.
pub fn model_log_likelihood(model: &ModelSpec, data: &Dataset) -> Result<f64> {
    let mut total = 0.0;
    for (i, (&s, r)) in data.log_y.iter().zip(&data.records).enumerate() {
        let l = model.log_subdensity_at_log(s, r.uncensored());
        if !l.is_finite() {
            return Err(Error::NonFiniteLikelihood { index: i, y: r.y, delta: r.delta });
        }
        total += l;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum StartPolicy {
    /// Each margin fitted to its censoring-status subsample ignoring censoring;
    /// dependence transform at zero.
    #[default]
    Naive,
    /// Explicit unconstrained starting point.
    Given(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub transform: TransformKind,
    pub start: StartPolicy,
    pub simplex: SimplexOptions,
    /// Iteration cap of the quasi-Newton polish (0 disables it).
    pub polish_iterations: usize,
    /// Random restarts attempted when the first run does not converge.
    pub restarts: usize,
    pub seed: u64,
    pub fixed_nu_t: Option<f64>,
    pub fixed_nu_c: Option<f64>,
    pub compute_sandwich: bool,
    pub compute_prob_uncensored: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            transform: TransformKind::LogitTau,
            start: StartPolicy::Naive,
            simplex: SimplexOptions { max_evals: 4000, ..SimplexOptions::default() },
            polish_iterations: 200,
            restarts: 5,
            seed: 0,
            fixed_nu_t: None,
            fixed_nu_c: None,
            compute_sandwich: true,
            compute_prob_uncensored: true,
        }
    }
}

impl FitOptions {
    pub fn layout(&self, copula: CopulaFamily, mt: MarginFamily, mc: MarginFamily) -> Result<ParamLayout> {
        ParamLayout::new(copula, mt, mc, self.transform)?.with_fixed_nu(self.fixed_nu_t, self.fixed_nu_c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub estimate: ParamVector,
    pub model: ModelSpec,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
    /// Infinity norm of the numeric log-likelihood gradient at the estimate.
    pub gradient_norm: f64,
    /// The dependence parameter was confined to its safe range at the estimate.
    pub at_boundary: bool,
    pub restarts_used: usize,
    pub n: usize,
    /// Row-major `d × d` sandwich covariance of the unconstrained estimate.
    pub cov_sandwich: Option<Vec<f64>>,
    /// Why the sandwich covariance is absent, when it was requested.
    pub sandwich_error: Option<String>,
    pub cov_bootstrap: Option<Vec<f64>>,
    pub bootstrap_se: Option<Vec<f64>>,
    pub bootstrap_se_natural: Option<Vec<f64>>,
    pub bootstrap_dropped: Option<usize>,
    pub fitted_prob_uncensored: f64,
}

impl FitResult {
    pub fn layout(&self) -> &ParamLayout {
        &self.estimate.layout
    }

    pub fn sandwich_se(&self) -> Option<Vec<f64>> {
        let d = self.estimate.values.len();
        self.cov_sandwich.as_ref().map(|c| (0..d).map(|i| math::sqrt(c[i * d + i].max(0.0))).collect())
    }

    pub fn natural_values(&self) -> Vec<f64> {
        self.estimate.layout.natural_values(&self.estimate.values).unwrap_or_default()
    }

    pub fn attach_bootstrap(&mut self, summary: &BootstrapSummary) {
        self.cov_bootstrap = Some(summary.covariance.clone());
        self.bootstrap_se = Some(summary.se.clone());
        self.bootstrap_se_natural = Some(summary.se_natural.clone());
        self.bootstrap_dropped = Some(summary.dropped);
    }
}

fn naive_start(layout: &ParamLayout, data: &Dataset) -> Result<Vec<f64>> {
    let pick = |want: u8| -> Vec<f64> {
        let sub: Vec<f64> = data.records.iter().filter(|r| r.delta == want).map(|r| r.y).collect();
        if sub.is_empty() {
            data.records.iter().map(|r| r.y).collect()
        } else {
            sub
        }
    };
    let mut start = Vec::with_capacity(layout.dim());
    for (family, nu, want) in [(layout.margin_t, layout.fixed_nu_t, 1u8), (layout.margin_c, layout.fixed_nu_c, 0u8)] {
        let mut m = MarginParams::fit_complete_sample(family, &pick(want))?;
        if let Some(nu) = nu_fixed(family, nu) {
            let p = m.natural();
            m = MarginParams::log_student_t(nu, p[1], p[2])?;
        }
        start.extend(margin_coords(&m, nu));
    }
    if layout.copula.has_parameter() {
        start.push(0.0);
    }
    Ok(start)
}

/// Convergence threshold on the infinity norm of the log-likelihood gradient.
pub fn gradient_tolerance(loglik: f64, n: usize) -> f64 {
    1e-4 * (1.0 + loglik.abs()) / n.max(1) as f64
}

const NEWTON_STEPS: usize = 3;

struct Run {
    x: Vec<f64>,
    f: f64,
    iterations: usize,
    evals: usize,
}

/// Minimize the average negative log-likelihood from `x0`: simplex search then quasi-Newton polish.
fn optimize(objective: &mut dyn FnMut(&[f64]) -> f64, x0: &[f64], opts: &FitOptions, n: usize) -> Run {
    let simplex = optim::nelder_mead(&mut *objective, x0, &opts.simplex);
    let mut run = Run { x: simplex.x, f: simplex.f, iterations: simplex.iterations, evals: simplex.evals };
    if opts.polish_iterations > 0 && run.f.is_finite() {
        // The objective is -loglik/n, so the loglik criterion scales by 1/n.
        let tol = gradient_tolerance(run.f * n as f64, n) / n as f64;
        let polish = optim::bfgs(
            &mut *objective,
            &run.x,
            &QuasiNewtonOptions { grad_tol: tol, max_iter: opts.polish_iterations },
        );
        run.iterations += polish.iterations;
        run.evals += polish.evals;
        if polish.f <= run.f {
            run.x = polish.x;
            run.f = polish.f;
        }
    }
    run
}

/// Newton steps with the numeric Hessian. Near the optimum of a large sample the
/// objective changes by less than its rounding error, which stalls line-search
/// methods before the gradient criterion is met; full Newton steps do not need
/// a measurable decrease.
fn newton_refine(objective: &mut dyn FnMut(&[f64]) -> f64, run: &mut Run, steps: usize) {
    let d = run.x.len();
    for _ in 0..steps {
        let g = optim::numeric_gradient(&mut *objective, &run.x);
        let h = optim::numeric_hessian(&mut *objective, &run.x);
        run.evals += 2 * d + 2 * d * d + 1;
        let Ok(inv) = invert_symmetric(&h, d) else { return };
        let step: Vec<f64> = (0..d).map(|i| -(0..d).map(|j| inv[i * d + j] * g[j]).sum::<f64>()).collect();
        let descent: f64 = step.iter().zip(&g).map(|(s, g)| s * g).sum();
        if !(descent < 0.0) || optim::grad_norm(&step) > 0.1 {
            return;
        }
        let x: Vec<f64> = run.x.iter().zip(&step).map(|(x, s)| x + s).collect();
        let f = objective(&x);
        run.evals += 1;
        run.iterations += 1;
        // Accept equal values up to a few hundred ulps: the step is driven by the gradient.
        if !(f <= run.f + 256.0 * f64::EPSILON * (1.0 + run.f.abs())) {
            return;
        }
        run.x = x;
        run.f = run.f.min(f);
    }
}

/// Maximum-likelihood fit of the given families to `data`.
pub fn fit(
    data: &Dataset,
    copula: CopulaFamily,
    mt: MarginFamily,
    mc: MarginFamily,
    opts: &FitOptions,
) -> Result<FitResult> {
    let layout = opts.layout(copula, mt, mc)?;
    fit_layout(data, &layout, opts)
}

pub fn fit_layout(data: &Dataset, layout: &ParamLayout, opts: &FitOptions) -> Result<FitResult> {
    let n = data.len();
    if n == 0 {
        return Err(Error::Degenerate(String::from("cannot fit an empty dataset")));
    }
    if layout.copula.has_parameter() && (data.n_uncensored == 0 || data.n_uncensored == n) {
        return Err(Error::Degenerate(format!(
            "all {n} records have delta = {}; a copula model needs both censoring states",
            u8::from(data.n_uncensored == n)
        )));
    }
    let x0 = match &opts.start {
        StartPolicy::Naive => naive_start(layout, data)?,
        StartPolicy::Given(v) => {
            layout.to_model(v)?;
            v.clone()
        }
    };
    let nf = n as f64;
    let mut objective = |x: &[f64]| -> f64 {
        match layout.to_model(x) {
            Ok((m, _)) => -log_likelihood_value(&m, data) / nf,
            Err(_) => f64::INFINITY,
        }
    };
    let f0 = objective(&x0);
    if !f0.is_finite() {
        return Err(Error::Numeric(format!("log-likelihood is not finite at the starting point {x0:?}")));
    }

    let converged_at = |x: &[f64], f: f64, objective: &mut dyn FnMut(&[f64]) -> f64| -> (bool, f64) {
        let g = optim::numeric_gradient(&mut *objective, x);
        let norm = optim::grad_norm(&g) * nf;
        (norm <= gradient_tolerance(f * nf, n), norm)
    };

    let mut best = optimize(&mut objective, &x0, opts, n);
    let (mut converged, mut gnorm) = converged_at(&best.x, best.f, &mut objective);
    if !converged && best.f.is_finite() {
        newton_refine(&mut objective, &mut best, NEWTON_STEPS);
        (converged, gnorm) = converged_at(&best.x, best.f, &mut objective);
    }
    let mut iterations = best.iterations;
    let mut evals = best.evals;
    let mut restarts_used = 0;
    while !converged && restarts_used < opts.restarts {
        let mut r = rng::stream(opts.seed, rng::domain::RESTART, restarts_used as u64);
        restarts_used += 1;
        let anchor = if best.f.is_finite() { &best.x } else { &x0 };
        let xr: Vec<f64> = anchor.iter().map(|&x| x + 0.5 * rng::standard_normal(&mut r)).collect();
        if !objective(&xr).is_finite() {
            continue;
        }
        let mut run = optimize(&mut objective, &xr, opts, n);
        newton_refine(&mut objective, &mut run, NEWTON_STEPS);
        iterations += run.iterations;
        evals += run.evals;
        if run.f < best.f {
            best = run;
        }
        let (c, g) = converged_at(&best.x, best.f, &mut objective);
        converged = c;
        gnorm = g;
    }
    if !best.f.is_finite() {
        return Err(Error::Numeric(String::from("optimizer failed to find a finite log-likelihood at every restart")));
    }

    let (model, at_boundary) = layout.to_model(&best.x)?;
    let loglik = model_log_likelihood(&model, data)?;
    let estimate = ParamVector { layout: *layout, values: best.x };
    let (cov_sandwich, sandwich_error) = if opts.compute_sandwich {
        match sandwich_covariance(&estimate, data) {
            Ok(c) => (Some(c), None),
            Err(e) => (None, Some(format!("{e}"))),
        }
    } else {
        (None, None)
    };
    let fitted_prob_uncensored =
        if opts.compute_prob_uncensored { model.prob_uncensored().unwrap_or(f64::NAN) } else { f64::NAN };
    Ok(FitResult {
        estimate,
        model,
        loglik,
        converged,
        iterations,
        evaluations: evals,
        gradient_norm: gnorm,
        at_boundary,
        restarts_used,
        n,
        cov_sandwich,
        sandwich_error,
        cov_bootstrap: None,
        bootstrap_se: None,
        bootstrap_se_natural: None,
        bootstrap_dropped: None,
        fitted_prob_uncensored,
    })
}

/// Per-record numeric score vectors, row-major `n × d`.
pub fn record_scores(p: &ParamVector, data: &Dataset) -> Result<Vec<f64>> {
    let d = p.values.len();
    let n = data.len();
    let mut scores = vec![0.0; n * d];
    let mut x = p.values.clone();
    for j in 0..d {
        let h = optim::gradient_step(p.values[j]);
        x[j] = p.values[j] + h;
        let plus = record_log_likelihoods(&p.layout.to_model(&x)?.0, data);
        x[j] = p.values[j] - h;
        let minus = record_log_likelihoods(&p.layout.to_model(&x)?.0, data);
        x[j] = p.values[j];
        for i in 0..n {
            scores[i * d + j] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Numeric(String::from("non-finite per-record score")));
    }
    Ok(scores)
}

/// Inverse of a symmetric matrix via its eigendecomposition; singular or
/// ill-conditioned input (condition number above 1e12) is an error.
pub fn invert_symmetric(a: &[f64], d: usize) -> Result<Vec<f64>> {
    let m = nalgebra::DMatrix::from_row_slice(d, d, a);
    let eig = nalgebra::SymmetricEigen::new(m);
    let (lo, hi) =
        eig.eigenvalues.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &l| (lo.min(l.abs()), hi.max(l.abs())));
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= 1e12) {
        return Err(Error::Singular { condition });
    }
    let inv_diag = nalgebra::DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l));
    let inv = &eig.eigenvectors * inv_diag * eig.eigenvectors.transpose();
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            out[i * d + j] = 0.5 * (inv[(i, j)] + inv[(j, i)]);
        }
    }
    Ok(out)
}

fn mat_mul(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            for j in 0..d {
                out[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    out
}

/// Sandwich covariance `A^-1 B A^-1 / n` of the unconstrained estimate.
///
/// `A` is the numeric Hessian of the average log-likelihood and `B` the
/// average outer product of per-record scores.
pub fn sandwich_covariance(p: &ParamVector, data: &Dataset) -> Result<Vec<f64>> {
    let d = p.values.len();
    let n = data.len();
    if n == 0 {
        return Err(Error::Degenerate(String::from("sandwich covariance of an empty dataset")));
    }
    let nf = n as f64;
    let layout = p.layout;
    let avg = |x: &[f64]| match layout.to_model(x) {
        Ok((m, _)) => log_likelihood_value(&m, data) / nf,
        Err(_) => f64::NAN,
    };
    let a = optim::numeric_hessian(avg, &p.values);
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(String::from("non-finite Hessian entry")));
    }
    let scores = record_scores(p, data)?;
    let mut b = vec![0.0; d * d];
    for i in 0..n {
        let s = &scores[i * d..(i + 1) * d];
        for j in 0..d {
            for k in 0..d {
                b[j * d + k] += s[j] * s[k] / nf;
            }
        }
    }
    let a_inv = invert_symmetric(&a, d)?;
    let mut c = mat_mul(&mat_mul(&a_inv, &b, d), &a_inv, d);
    for i in 0..d {
        for j in 0..i {
            let v = 0.5 * (c[i * d + j] + c[j * d + i]) / nf;
            c[i * d + j] = v;
            c[j * d + i] = v;
        }
        c[i * d + i] /= nf;
    }
    Ok(c)
}

/// Inverse observed information `(-H)^-1` of the total log-likelihood.
pub fn inverse_information(p: &ParamVector, data: &Dataset) -> Result<Vec<f64>> {
    let d = p.values.len();
    let layout = p.layout;
    let total = |x: &[f64]| match layout.to_model(x) {
        Ok((m, _)) => -log_likelihood_value(&m, data),
        Err(_) => f64::NAN,
    };
    let h = optim::numeric_hessian(total, &p.values);
    invert_symmetric(&h, d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapSummary {
    pub requested: usize,
    pub dropped: usize,
    /// Standard deviations on the unconstrained scale.
    pub se: Vec<f64>,
    /// Standard deviations of the natural-scale values (see [`ParamLayout::natural_names`]).
    pub se_natural: Vec<f64>,
    /// Row-major covariance on the unconstrained scale.
    pub covariance: Vec<f64>,
    pub estimates: Vec<Vec<f64>>,
}

/// Options for a bootstrap refit: warm start at the full-data estimate with a
/// smaller simplex, no covariance or probability side computations.
pub fn bootstrap_fit_options(base: &FitOptions, estimate: &[f64]) -> FitOptions {
    FitOptions {
        start: StartPolicy::Given(estimate.to_vec()),
        simplex: SimplexOptions { initial_step: 0.1, ..base.simplex },
        compute_sandwich: false,
        compute_prob_uncensored: false,
        ..base.clone()
    }
}

/// One bootstrap replicate: resample with the stream `(seed, index)` and refit.
/// Returns `None` when the refit did not converge or failed.
pub fn bootstrap_replicate(
    data: &Dataset,
    layout: &ParamLayout,
    opts: &FitOptions,
    seed: u64,
    index: u64,
) -> Option<Vec<f64>> {
    let mut r = rng::stream(seed, rng::domain::BOOTSTRAP, index);
    let n = data.len();
    let indices: Vec<usize> = (0..n).map(|_| rng::index(&mut r, n)).collect();
    let sample = data.resample(&indices);
    let opts = FitOptions { seed: rng::mix(seed, index), ..opts.clone() };
    match fit_layout(&sample, layout, &opts) {
        Ok(f) if f.converged => Some(f.estimate.values),
        _ => None,
    }
}

fn sample_sd(values: &[f64]) -> f64 {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    math::sqrt(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0))
}

/// Aggregate replicate outcomes (in replicate order) into standard errors.
pub fn summarize_bootstrap(layout: &ParamLayout, outcomes: Vec<Option<Vec<f64>>>) -> Result<BootstrapSummary> {
    let requested = outcomes.len();
    let estimates: Vec<Vec<f64>> = outcomes.into_iter().flatten().collect();
    let dropped = requested - estimates.len();
    if 2 * dropped > requested || estimates.len() < 2 {
        return Err(Error::BootstrapFailure { failed: dropped, requested });
    }
    let d = layout.dim();
    let m = estimates.len() as f64;
    let mean: Vec<f64> = (0..d).map(|j| estimates.iter().map(|e| e[j]).sum::<f64>() / m).collect();
    let mut covariance = vec![0.0; d * d];
    for e in &estimates {
        for i in 0..d {
            for j in 0..d {
                covariance[i * d + j] += (e[i] - mean[i]) * (e[j] - mean[j]) / (m - 1.0);
            }
        }
    }
    let se = (0..d).map(|j| math::sqrt(covariance[j * d + j])).collect();
    let natural: Vec<Vec<f64>> = estimates.iter().map(|e| layout.natural_values(e)).collect::<Result<_>>()?;
    let k = natural[0].len();
    let se_natural = (0..k).map(|j| sample_sd(&natural.iter().map(|v| v[j]).collect::<Vec<_>>())).collect();
    Ok(BootstrapSummary { requested, dropped, se, se_natural, covariance, estimates })
}

/// Sequential nonparametric bootstrap with `b` resamples.
pub fn bootstrap(
    data: &Dataset,
    fitted: &FitResult,
    opts: &FitOptions,
    b: usize,
    seed: u64,
) -> Result<BootstrapSummary> {
    if b < 2 {
        return Err(domain!("bootstrap needs at least 2 resamples, got {b}"));
    }
    let layout = fitted.estimate.layout;
    let ropts = bootstrap_fit_options(opts, &fitted.estimate.values);
    let outcomes = (0..b as u64).map(|i| bootstrap_replicate(data, &layout, &ropts, seed, i)).collect();
    summarize_bootstrap(&layout, outcomes)
}
