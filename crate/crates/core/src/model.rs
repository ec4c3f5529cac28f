//! The joint model of `(T, C)` and the law of the observables `(Y, Δ)`.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::copulas::CopulaSpec;
use crate::error::{domain, numeric, Result};
use crate::margins::MarginParams;
use crate::math;
use crate::quad::{integrate, QuadOptions};
use crate::rng;

/// Lower clamp for `1 - h` inside logarithms.
pub const ONE_MINUS_H_FLOOR: f64 = 1e-14;

/// Log-densities below this are treated as outside the support when choosing
/// integration ranges (`ln 1e-300`).
const LOG_DENSITY_CUTOFF: f64 = -690.775_527_898_213_7;
const LOG_AXIS_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub copula: CopulaSpec,
    pub margin_t: MarginParams,
    pub margin_c: MarginParams,
}

/// Observable densities at one point; `f_y == f_y_delta1 + f_y_delta0`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SubdensityPoint {
    pub y: f64,
    pub f_y: f64,
    pub f_y_delta1: f64,
    pub f_y_delta0: f64,
}

impl ModelSpec {
    pub fn new(copula: CopulaSpec, margin_t: MarginParams, margin_c: MarginParams) -> Self {
        Self { copula, margin_t, margin_c }
    }

    /// The model with the roles of `T` and `C` exchanged.
    pub fn swapped(&self) -> Self {
        Self { copula: self.copula, margin_t: self.margin_c, margin_c: self.margin_t }
    }

    fn check_y(y: f64) -> Result<f64> {
        if !(y.is_finite() && y > 0.0) {
            return Err(domain!("observation y = {y} must be positive and finite"));
        }
        Ok(math::ln(y))
    }

    /// `ln f_{Y,Δ}(e^s, δ)`, with `1 - h` floored at [`ONE_MINUS_H_FLOOR`].
    #[inline]
    pub fn log_subdensity_at_log(&self, s: f64, uncensored: bool) -> f64 {
        let u = self.margin_t.cdf_sf_at_log(s).0;
        let v = self.margin_c.cdf_sf_at_log(s).0;
        if uncensored {
            let (_, one_minus_h) = self.copula.h_with_complement(v, u);
            self.margin_t.log_pdf_at_log(s) + math::ln(one_minus_h.max(ONE_MINUS_H_FLOOR))
        } else {
            let (_, one_minus_h) = self.copula.h_with_complement(u, v);
            self.margin_c.log_pdf_at_log(s) + math::ln(one_minus_h.max(ONE_MINUS_H_FLOOR))
        }
    }

    fn subdensities_at_log(&self, s: f64) -> (f64, f64) {
        let u = self.margin_t.cdf_sf_at_log(s).0;
        let v = self.margin_c.cdf_sf_at_log(s).0;
        let f1 = math::exp(self.margin_t.log_pdf_at_log(s)) * self.copula.h_with_complement(v, u).1;
        let f0 = math::exp(self.margin_c.log_pdf_at_log(s)) * self.copula.h_with_complement(u, v).1;
        (f1, f0)
    }

    /// `f_{Y,Δ}(y, 1) = f_T(y) [1 - h_{C|T}(F_C(y) | F_T(y))]`.
    pub fn subdensity_uncensored(&self, y: f64) -> Result<f64> {
        let s = Self::check_y(y)?;
        Ok(self.subdensities_at_log(s).0)
    }

    /// `f_{Y,Δ}(y, 0) = f_C(y) [1 - h_{T|C}(F_T(y) | F_C(y))]`.
    pub fn subdensity_censored(&self, y: f64) -> Result<f64> {
        let s = Self::check_y(y)?;
        Ok(self.subdensities_at_log(s).1)
    }

    pub fn subdensity_point(&self, y: f64) -> Result<SubdensityPoint> {
        let s = Self::check_y(y)?;
        let (f1, f0) = self.subdensities_at_log(s);
        Ok(SubdensityPoint { y, f_y: f1 + f0, f_y_delta1: f1, f_y_delta0: f0 })
    }

    pub fn density_y(&self, y: f64) -> Result<f64> {
        Ok(self.subdensity_point(y)?.f_y)
    }

    /// `F_Y(y) = F_T(y) + F_C(y) - C(F_T(y), F_C(y))`.
    pub fn cdf_y(&self, y: f64) -> Result<f64> {
        let s = Self::check_y(y)?;
        let u = self.margin_t.cdf_sf_at_log(s).0;
        let v = self.margin_c.cdf_sf_at_log(s).0;
        Ok((u + v - self.copula.cdf(u, v)?).clamp(0.0, 1.0))
    }

    /// Range of `s = ln y` outside which both margin densities are below 1e-300.
    pub fn log_support(&self) -> (f64, f64) {
        let center =
            0.5 * (self.margin_t.quantile_unchecked(0.5).ln_safe() + self.margin_c.quantile_unchecked(0.5).ln_safe());
        let alive = |s: f64| {
            self.margin_t.log_pdf_at_log(s) + s > LOG_DENSITY_CUTOFF
                || self.margin_c.log_pdf_at_log(s) + s > LOG_DENSITY_CUTOFF
        };
        let mut step = 0.25;
        let mut lo = center;
        while lo > -LOG_AXIS_LIMIT && alive(lo) {
            lo -= step;
            step *= 1.05;
        }
        let mut step = 0.25;
        let mut hi = center;
        while hi < LOG_AXIS_LIMIT && alive(hi) {
            hi += step;
            step *= 1.05;
        }
        (lo.max(-LOG_AXIS_LIMIT), hi.min(LOG_AXIS_LIMIT))
    }

    fn integrate_on_log_axis<F: FnMut(f64) -> f64>(&self, f: F, tol: f64) -> Result<f64> {
        let (lo, hi) = self.log_support();
        let pieces = (libm::ceil((hi - lo) / 0.5) as usize).clamp(16, 512);
        let opts = QuadOptions { abs_tol: tol, rel_tol: tol, max_intervals: 4000, initial_pieces: pieces };
        Ok(integrate(f, lo, hi, opts)?.value)
    }

    /// `P(Δ = 1) = ∫ f_{Y,Δ}(y, 1) dy` by adaptive quadrature on `s = ln y`.
    pub fn prob_uncensored(&self) -> Result<f64> {
        let p = self.integrate_on_log_axis(|s| self.subdensities_at_log(s).0 * math::exp(s), 1e-12)?;
        if !(-1e-9..=1.0 + 1e-9).contains(&p) {
            return Err(numeric!("uncensoring probability integrated to {p}"));
        }
        Ok(p.clamp(0.0, 1.0))
    }

    /// `∫ f_Y(y) dy`, which should be one.
    pub fn total_mass(&self) -> Result<f64> {
        self.integrate_on_log_axis(
            |s| {
                let (f1, f0) = self.subdensities_at_log(s);
                (f1 + f0) * math::exp(s)
            },
            1e-12,
        )
    }

    /// Monte-Carlo estimate of `P(Δ = 1)` from `n` simulated pairs, with its standard error.
    pub fn prob_uncensored_mc<R: RngCore + ?Sized>(&self, n: usize, rng: &mut R) -> Result<(f64, f64)> {
        if n == 0 {
            return Err(domain!("Monte-Carlo estimate needs at least one draw"));
        }
        let mut hits = 0usize;
        for _ in 0..n {
            let (t, c) = self.sample_latent(rng)?;
            if t <= c {
                hits += 1;
            }
        }
        let p = hits as f64 / n as f64;
        Ok((p, math::sqrt(p * (1.0 - p) / n as f64)))
    }

    /// Copula-scale draw `(u, v) ~ C` by conditional inversion.
    pub fn sample_copula<R: RngCore + ?Sized>(&self, rng: &mut R) -> Result<(f64, f64)> {
        let u = rng::uniform(rng);
        let w = rng::uniform(rng);
        let v = self.copula.inverse_h(w, u)?;
        Ok((u, v))
    }

    /// Latent draw `(T, C)`.
    pub fn sample_latent<R: RngCore + ?Sized>(&self, rng: &mut R) -> Result<(f64, f64)> {
        let (u, v) = self.sample_copula(rng)?;
        let t = self.margin_t.quantile_unchecked(u);
        let c = self.margin_c.quantile_unchecked(v);
        if !(t > 0.0 && c > 0.0 && t.is_finite() && c.is_finite()) {
            return Err(numeric!("margin quantile produced a non-positive or infinite draw (t = {t}, c = {c})"));
        }
        Ok((t, c))
    }

    /// Evaluate the identifiability diagnostics along `grid` (sorted ascending).
    pub fn probe_identifiability(&self, grid: &[f64]) -> Result<IdentifiabilityProbe> {
        if grid.len() < 2 {
            return Err(domain!("identifiability probe needs at least two grid points"));
        }
        let mut rows = Vec::with_capacity(grid.len());
        let gaussian = self.copula.family() == crate::copulas::CopulaFamily::Gaussian;
        let theta = self.copula.theta().unwrap_or(0.0);
        for &t in grid {
            let s = Self::check_y(t)?;
            let u = self.margin_t.cdf_sf_at_log(s).0;
            let v = self.margin_c.cdf_sf_at_log(s).0;
            let (ln_u, _) = self.margin_t.log_cdf_sf_at_log(s);
            let (ln_v, _) = self.margin_c.log_cdf_sf_at_log(s);
            let h_tc = self.copula.h_with_complement(u, v).0;
            let h_ct = self.copula.h_with_complement(v, u).0;
            let (a_tc, a_ct) = if gaussian {
                let x = math::norm_quantile(u.clamp(crate::copulas::ARG_EPS, 1.0 - crate::copulas::ARG_EPS));
                let y = math::norm_quantile(v.clamp(crate::copulas::ARG_EPS, 1.0 - crate::copulas::ARG_EPS));
                (Some(x - theta * y), Some(y - theta * x))
            } else {
                (None, None)
            };
            let finite = h_tc.is_finite() && h_ct.is_finite();
            rows.push(ProbeRow {
                t,
                u,
                v,
                h_t_given_c: h_tc,
                h_c_given_t: h_ct,
                log_cdf_ratio: ln_u - ln_v,
                log_cdf_quotient: ln_u / ln_v,
                gaussian_a_tc: a_tc,
                gaussian_a_ct: a_ct,
                clamped: !(crate::copulas::ARG_EPS..=1.0 - crate::copulas::ARG_EPS).contains(&u)
                    || !(crate::copulas::ARG_EPS..=1.0 - crate::copulas::ARG_EPS).contains(&v),
                finite,
            });
        }
        let h_tc = LimitReport::from_series(rows.iter().map(|r| r.h_t_given_c));
        let h_ct = LimitReport::from_series(rows.iter().map(|r| r.h_c_given_t));
        let first = &rows[0];
        let ratio_at_zero = if first.log_cdf_ratio < -RATIO_LOG_THRESHOLD {
            RatioLimit::Zero
        } else if first.log_cdf_ratio > RATIO_LOG_THRESHOLD {
            RatioLimit::Infinity
        } else {
            RatioLimit::Finite
        };
        Ok(IdentifiabilityProbe {
            c2a: h_tc.vanishes(),
            c2b: h_ct.vanishes(),
            h_t_given_c: h_tc,
            h_c_given_t: h_ct,
            ratio_at_zero,
            log_cdf_ratio_at_zero: first.log_cdf_ratio,
            log_cdf_quotient_at_zero: first.log_cdf_quotient,
            non_finite: rows.iter().filter(|r| !r.finite).count(),
            rows,
        })
    }

    /// Default probe grid: 1e-6 to 1e6 times the geometric mean of the margin medians.
    pub fn default_probe_grid(&self, points: usize) -> Vec<f64> {
        let median = math::sqrt(self.margin_t.quantile_unchecked(0.5) * self.margin_c.quantile_unchecked(0.5));
        log_grid(median * 1e-6, median * 1e6, points.max(2))
    }
}

trait LnSafe {
    fn ln_safe(self) -> f64;
}

impl LnSafe for f64 {
    fn ln_safe(self) -> f64 {
        if self > 0.0 && self.is_finite() {
            math::ln(self)
        } else {
            0.0
        }
    }
}

/// `points` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (math::ln(lo), math::ln(hi));
    let last = (points.max(2) - 1) as f64;
    (0..points.max(2)).map(|i| math::exp(a + (b - a) * i as f64 / last)).collect()
}

/// An h-function value below this at a grid end counts as a vanishing limit.
pub const VANISHING_THRESHOLD: f64 = 1e-4;
const RATIO_LOG_THRESHOLD: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ProbeRow {
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub h_t_given_c: f64,
    pub h_c_given_t: f64,
    /// `ln F_T(t) - ln F_C(t)`.
    pub log_cdf_ratio: f64,
    /// `ln F_T(t) / ln F_C(t)`.
    pub log_cdf_quotient: f64,
    /// Gaussian copula only: `Φ^-1(F_T) - θ Φ^-1(F_C)`.
    pub gaussian_a_tc: Option<f64>,
    /// Gaussian copula only: `Φ^-1(F_C) - θ Φ^-1(F_T)`.
    pub gaussian_a_ct: Option<f64>,
    /// A copula argument fell outside the clamp range.
    pub clamped: bool,
    pub finite: bool,
}

/// Endpoint values of a trajectory and whether it is monotone.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LimitReport {
    pub at_zero: f64,
    pub at_infinity: f64,
    pub monotone: bool,
}

impl LimitReport {
    fn from_series<I: Iterator<Item = f64>>(series: I) -> Self {
        let values: Vec<f64> = series.collect();
        let up = values.windows(2).all(|w| w[1] >= w[0] - 1e-12);
        let down = values.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        Self { at_zero: values[0], at_infinity: values[values.len() - 1], monotone: up || down }
    }

    fn vanishes(&self) -> bool {
        self.at_zero.min(self.at_infinity) < VANISHING_THRESHOLD
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum RatioLimit {
    Zero,
    Infinity,
    Finite,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct IdentifiabilityProbe {
    pub rows: Vec<ProbeRow>,
    pub h_t_given_c: LimitReport,
    pub h_c_given_t: LimitReport,
    /// Some endpoint of `h_{T|C}(F_T | F_C)` vanishes.
    pub c2a: bool,
    /// Some endpoint of `h_{C|T}(F_C | F_T)` vanishes.
    pub c2b: bool,
    /// Behaviour of `F_T(t) / F_C(t)` at the small end of the grid.
    pub ratio_at_zero: RatioLimit,
    pub log_cdf_ratio_at_zero: f64,
    pub log_cdf_quotient_at_zero: f64,
    pub non_finite: usize,
}

impl IdentifiabilityProbe {
    pub fn verdict_lines(&self) -> Vec<alloc::string::String> {
        let word = |ok: bool| if ok { "satisfied" } else { "not satisfied" };
        let mut lines = alloc::vec![
            alloc::format!("(C2a): {} (numeric)", word(self.c2a)),
            alloc::format!("(C2b): {} (numeric)", word(self.c2b)),
        ];
        let ratio = match self.ratio_at_zero {
            RatioLimit::Zero => "F_T/F_C -> 0 as t -> 0 (numeric)",
            RatioLimit::Infinity => "F_T/F_C -> inf as t -> 0 (numeric)",
            RatioLimit::Finite => "F_T/F_C has no 0/inf limit on the grid",
        };
        lines.push(alloc::format!("ratio condition: {ratio}"));
        if !(self.c2a && self.c2b) && self.ratio_at_zero != RatioLimit::Finite {
            lines.push(alloc::string::String::from(
                "(C2) fails on the grid but the margin ratio tends to 0 or inf (sufficient for Clayton)",
            ));
        }
        if !self.h_t_given_c.monotone || !self.h_c_given_t.monotone {
            lines.push(alloc::string::String::from(
                "note: an h-trajectory is not monotone; endpoint values may not be limits",
            ));
        }
        if self.non_finite > 0 {
            lines.push(alloc::format!("warning: {} grid points gave non-finite values", self.non_finite));
        }
        lines
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copulas::CopulaFamily;

    fn scenario1(family: CopulaFamily, tau: f64) -> ModelSpec {
        let copula = if family == CopulaFamily::Independence {
            CopulaSpec::independence()
        } else {
            CopulaSpec::from_tau(family, tau).unwrap()
        };
        ModelSpec::new(
            copula,
            MarginParams::log_normal(2.2, 1.0).unwrap(),
            MarginParams::log_normal(2.0, 0.25).unwrap(),
        )
    }

    #[test]
    fn independence_subdensities_match_closed_forms() {
        let m = scenario1(CopulaFamily::Independence, 0.0);
        for &y in &[3.0, 5.0, 7.4, 12.0, 14.0] {
            let f1 = m.margin_t.pdf(y).unwrap() * m.margin_c.sf(y).unwrap();
            let f0 = m.margin_c.pdf(y).unwrap() * m.margin_t.sf(y).unwrap();
            assert!((m.subdensity_uncensored(y).unwrap() - f1).abs() <= 1e-13 * f1);
            assert!((m.subdensity_censored(y).unwrap() - f0).abs() <= 1e-13 * f0);
            let (ft, fc) = (m.margin_t.cdf(y).unwrap(), m.margin_c.cdf(y).unwrap());
            assert!((m.cdf_y(y).unwrap() - (ft + fc - ft * fc)).abs() < 1e-15);
        }
        let g = scenario1(CopulaFamily::Independence, 0.0);
        let g = ModelSpec { copula: CopulaSpec::from_theta(CopulaFamily::Gaussian, 0.0).unwrap(), ..g };
        for &y in &[2.0, 7.0, 20.0] {
            assert!((g.subdensity_uncensored(y).unwrap() - m.subdensity_uncensored(y).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn censored_subdensity_is_swapped_uncensored() {
        let m = scenario1(CopulaFamily::Clayton, 0.5);
        for &y in &[3.0, 7.0, 9.0, 15.0] {
            let a = m.subdensity_censored(y).unwrap();
            let b = m.swapped().subdensity_uncensored(y).unwrap();
            assert!((a - b).abs() <= 1e-15 * (1.0 + a));
        }
    }

    #[test]
    fn point_is_additive() {
        let m = scenario1(CopulaFamily::Gumbel, 0.8);
        for &y in &[0.5, 6.0, 30.0] {
            let p = m.subdensity_point(y).unwrap();
            assert_eq!(p.f_y, p.f_y_delta1 + p.f_y_delta0);
            assert_eq!(m.density_y(y).unwrap(), p.f_y);
        }
        assert!(m.subdensity_point(0.0).is_err());
        assert!(m.subdensity_point(f64::INFINITY).is_err());
    }

    #[test]
    fn cdf_derivative_is_density() {
        for family in [CopulaFamily::Frank, CopulaFamily::Clayton, CopulaFamily::Gumbel, CopulaFamily::Gaussian] {
            let m = scenario1(family, 0.5);
            for &y in &[4.0, 7.5, 10.0, 20.0] {
                let h = 1e-5 * y;
                let fd = (m.cdf_y(y + h).unwrap() - m.cdf_y(y - h).unwrap()) / (2.0 * h);
                let d = m.density_y(y).unwrap();
                assert!((fd - d).abs() < 1e-6, "{family} y {y}: {fd} vs {d}");
            }
        }
    }

    #[test]
    fn mass_and_probability_identities() {
        for family in [CopulaFamily::Frank, CopulaFamily::Clayton, CopulaFamily::Gumbel, CopulaFamily::Gaussian] {
            for &tau in &[0.2, 0.5, 0.8] {
                let m = scenario1(family, tau);
                assert!((m.total_mass().unwrap() - 1.0).abs() < 1e-6, "{family} {tau}");
                let p1 = m.prob_uncensored().unwrap();
                let p0 = m.swapped().prob_uncensored().unwrap();
                assert!((p1 + p0 - 1.0).abs() < 1e-6);
            }
        }
        // Identical margins and an exchangeable copula give one half.
        let mt = MarginParams::weibull(1.5, 3.0).unwrap();
        let m = ModelSpec::new(CopulaSpec::from_tau(CopulaFamily::Gumbel, 0.4).unwrap(), mt, mt);
        assert!((m.prob_uncensored().unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn comonotone_gaussian_limit() {
        let mt = MarginParams::log_normal(1.0, 0.5).unwrap();
        let m = ModelSpec::new(CopulaSpec::from_theta(CopulaFamily::Gaussian, 1.0 - 1e-6).unwrap(), mt, mt);
        for &y in &[1.0, 2.7, 6.0] {
            assert!((m.cdf_y(y).unwrap() - mt.cdf(y).unwrap()).abs() < 2e-3);
        }
    }

    #[test]
    fn monte_carlo_matches_quadrature() {
        let m = scenario1(CopulaFamily::Frank, 0.5);
        let mut r = rng::stream(11, rng::domain::MONTE_CARLO, 0);
        let (p, se) = m.prob_uncensored_mc(200_000, &mut r).unwrap();
        let exact = m.prob_uncensored().unwrap();
        assert!((p - exact).abs() < 4.0 * se, "{p} vs {exact}");
    }

    #[test]
    fn probe_frank_and_clayton() {
        let m = scenario1(CopulaFamily::Frank, 0.5);
        let probe = m.probe_identifiability(&m.default_probe_grid(61)).unwrap();
        assert!(probe.h_t_given_c.at_zero < 1e-4);
        assert!(probe.c2a);
        assert_eq!(probe.verdict_lines()[0], "(C2a): satisfied (numeric)");

        let mut m = scenario1(CopulaFamily::Clayton, 0.5);
        m.margin_t = MarginParams::log_normal(2.2, 0.25).unwrap();
        m.margin_c = MarginParams::log_normal(2.0, 1.0).unwrap();
        let probe = m.probe_identifiability(&m.default_probe_grid(61)).unwrap();
        assert_eq!(probe.ratio_at_zero, RatioLimit::Zero);
        assert!(!probe.c2a);
    }

    #[test]
    fn probe_gumbel_log_quotient() {
        let m = scenario1(CopulaFamily::Gumbel, 0.5);
        let probe = m.probe_identifiability(&m.default_probe_grid(41)).unwrap();
        let target = 0.25f64 * 0.25 / 1.0;
        assert!((probe.log_cdf_quotient_at_zero - target).abs() < 0.1 * target, "{}", probe.log_cdf_quotient_at_zero);
    }

    #[test]
    fn probe_gaussian_trajectories() {
        let m = scenario1(CopulaFamily::Gaussian, 0.5);
        let probe = m.probe_identifiability(&m.default_probe_grid(21)).unwrap();
        assert!(probe.rows.iter().all(|r| r.gaussian_a_tc.is_some() && r.gaussian_a_ct.is_some()));
        assert!(m.probe_identifiability(&[1.0]).is_err());
    }
}
