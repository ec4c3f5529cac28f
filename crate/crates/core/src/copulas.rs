//! One-parameter bivariate copulas: CDF, density, conditional distribution
//! functions (h-functions) and their inverses, Kendall's tau parametrization,
//! and the unconstrained transforms of tau used for estimation.
//!
//! Convention: `u` is the survival-time coordinate `F_T(t)` and `v` the
//! censoring coordinate `F_C(c)`. `h_t_given_c(u, v) = ∂C/∂v` is the
//! conditional CDF of `U` given `V = v`; `h_c_given_t(v, u) = ∂C/∂u`.
//! All families here are exchangeable, so both h-functions share one kernel.

use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use crate::error::{domain, numeric, Error, Result};
use crate::math::{self, log_add_exp, norm_cdf, norm_quantile, one_minus_exp_neg};
use crate::quad::{integrate, QuadOptions};

/// Copula arguments are clamped to `[EPS, 1 - EPS]` before h/density evaluation.
pub const ARG_EPS: f64 = 1e-12;
/// Frank parameters are confined to `|theta| <= FRANK_THETA_MAX` (where `e^-theta` underflows).
pub const FRANK_THETA_MAX: f64 = 746.0;
/// Gaussian correlation is confined to `|theta| <= 1 - GAUSS_MARGIN` during estimation.
pub const GAUSS_MARGIN: f64 = 1e-6;
/// Clayton and Gumbel parameters are capped here during estimation.
pub const ARCHIMEDEAN_THETA_MAX: f64 = 1e4;
/// Smallest Clayton parameter produced by the estimation transform.
pub const CLAYTON_THETA_MIN: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum CopulaFamily {
    Independence,
    Frank,
    Clayton,
    Gumbel,
    Gaussian,
}

impl CopulaFamily {
    pub const ALL: [CopulaFamily; 5] = [
        CopulaFamily::Independence,
        CopulaFamily::Frank,
        CopulaFamily::Clayton,
        CopulaFamily::Gumbel,
        CopulaFamily::Gaussian,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            CopulaFamily::Independence => "independence",
            CopulaFamily::Frank => "frank",
            CopulaFamily::Clayton => "clayton",
            CopulaFamily::Gumbel => "gumbel",
            CopulaFamily::Gaussian => "gauss",
        }
    }

    pub fn has_parameter(self) -> bool {
        self != CopulaFamily::Independence
    }

    /// Transforms admissible for this family. Clayton and Gumbel only model
    /// positive dependence, so only the logit transform applies.
    pub fn supports(self, kind: TransformKind) -> bool {
        match self {
            CopulaFamily::Independence => true,
            CopulaFamily::Clayton | CopulaFamily::Gumbel => kind == TransformKind::LogitTau,
            CopulaFamily::Frank | CopulaFamily::Gaussian => true,
        }
    }
}

impl fmt::Display for CopulaFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for CopulaFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "independence" | "indep" | "independent" => Ok(CopulaFamily::Independence),
            "frank" => Ok(CopulaFamily::Frank),
            "clayton" => Ok(CopulaFamily::Clayton),
            "gumbel" => Ok(CopulaFamily::Gumbel),
            "gauss" | "gaussian" | "normal" => Ok(CopulaFamily::Gaussian),
            other => Err(Error::Parse(alloc::format!("unknown copula family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TransformKind {
    /// `z = ln(tau / (1 - tau))`, tau in (0, 1).
    #[default]
    LogitTau,
    /// `z = atanh(tau)`, tau in (-1, 1).
    FisherZTau,
}

impl TransformKind {
    pub fn coordinate_name(self) -> &'static str {
        match self {
            TransformKind::LogitTau => "logit_tau",
            TransformKind::FisherZTau => "fisher_z_tau",
        }
    }
}

impl FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "logit" | "logit-tau" | "logittau" => Ok(TransformKind::LogitTau),
            "fisher" | "fisher-z" | "fisherz" | "fisher-z-tau" | "fisherztau" => Ok(TransformKind::FisherZTau),
            other => Err(Error::Parse(alloc::format!("unknown dependence transform `{other}`"))),
        }
    }
}

/// A dependence parameter on the unconstrained scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DependenceTransform {
    pub kind: TransformKind,
    pub value: f64,
}

impl DependenceTransform {
    pub fn from_tau(kind: TransformKind, tau: f64) -> Result<Self> {
        Ok(Self { kind, value: transform_tau(kind, tau)? })
    }

    pub fn tau(&self) -> f64 {
        untransform_tau(self.kind, self.value)
    }
}

pub fn transform_tau(kind: TransformKind, tau: f64) -> Result<f64> {
    match kind {
        TransformKind::LogitTau => {
            if !(tau > 0.0 && tau < 1.0) {
                return Err(domain!("logit transform needs tau in (0, 1), got {tau}"));
            }
            Ok(math::ln(tau) - math::ln_1p(-tau))
        }
        TransformKind::FisherZTau => {
            if !(tau > -1.0 && tau < 1.0) {
                return Err(domain!("Fisher z transform needs tau in (-1, 1), got {tau}"));
            }
            Ok(libm::atanh(tau))
        }
    }
}

pub fn untransform_tau(kind: TransformKind, z: f64) -> f64 {
    match kind {
        TransformKind::LogitTau => math::logistic(z),
        TransformKind::FisherZTau => libm::tanh(z),
    }
}

/// A copula family with its parameter and the equivalent Kendall's tau.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopulaSpec {
    family: CopulaFamily,
    theta: f64,
    tau: f64,
}

impl CopulaSpec {
    pub fn independence() -> Self {
        Self { family: CopulaFamily::Independence, theta: 0.0, tau: 0.0 }
    }

    pub fn from_theta(family: CopulaFamily, theta: f64) -> Result<Self> {
        if family == CopulaFamily::Independence {
            return Ok(Self::independence());
        }
        let tau = theta_to_kendall_tau(family, theta)?;
        Ok(Self { family, theta, tau })
    }

    pub fn from_tau(family: CopulaFamily, tau: f64) -> Result<Self> {
        if family == CopulaFamily::Independence {
            if tau != 0.0 {
                return Err(domain!("independence copula has tau = 0, got {tau}"));
            }
            return Ok(Self::independence());
        }
        let theta = kendall_tau_to_theta(family, tau)?;
        Ok(Self { family, theta, tau })
    }

    /// Build from a tau produced by an unconstrained transform, confining the
    /// parameter to the numerically safe range. The flag reports whether the
    /// confinement was active.
    pub fn from_tau_confined(family: CopulaFamily, tau: f64) -> Result<(Self, bool)> {
        if !tau.is_finite() {
            return Err(domain!("tau is not finite"));
        }
        match family {
            CopulaFamily::Independence => Ok((Self::independence(), false)),
            CopulaFamily::Gaussian => {
                let raw = libm::sin(core::f64::consts::FRAC_PI_2 * tau);
                let limit = 1.0 - GAUSS_MARGIN;
                let theta = raw.clamp(-limit, limit);
                Ok((Self::from_theta(family, theta)?, theta != raw))
            }
            CopulaFamily::Frank => {
                let max_tau = frank_tau(FRANK_THETA_MAX);
                if tau.abs() >= max_tau {
                    let theta = FRANK_THETA_MAX.copysign(tau);
                    return Ok((Self { family, theta, tau: max_tau.copysign(tau) }, true));
                }
                Ok((Self::from_tau(family, tau)?, false))
            }
            CopulaFamily::Clayton => {
                let raw = if tau < 1.0 { 2.0 * tau / (1.0 - tau) } else { f64::INFINITY };
                let theta = raw.clamp(CLAYTON_THETA_MIN, ARCHIMEDEAN_THETA_MAX);
                Ok((Self::from_theta(family, theta)?, theta != raw))
            }
            CopulaFamily::Gumbel => {
                let raw = if tau < 1.0 { 1.0 / (1.0 - tau) } else { f64::INFINITY };
                let theta = raw.clamp(1.0, ARCHIMEDEAN_THETA_MAX);
                Ok((Self::from_theta(family, theta)?, theta != raw))
            }
        }
    }

    pub fn family(&self) -> CopulaFamily {
        self.family
    }

    /// The copula parameter; `None` for the independence copula.
    pub fn theta(&self) -> Option<f64> {
        self.family.has_parameter().then_some(self.theta)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `C(u, v)`.
    pub fn cdf(&self, u: f64, v: f64) -> Result<f64> {
        check_unit_closed(u, "u")?;
        check_unit_closed(v, "v")?;
        if u == 0.0 || v == 0.0 {
            return Ok(0.0);
        }
        if u == 1.0 {
            return Ok(v);
        }
        if v == 1.0 {
            return Ok(u);
        }
        Ok(self.cdf_interior(u, v).clamp(0.0, u.min(v)))
    }

    pub(crate) fn cdf_interior(&self, u: f64, v: f64) -> f64 {
        let th = self.theta;
        match self.family {
            CopulaFamily::Independence => u * v,
            CopulaFamily::Frank => {
                if th == 0.0 {
                    u * v
                } else if th > 0.0 {
                    frank_cdf_pos(th, u, v)
                } else {
                    u - frank_cdf_pos(-th, u, 1.0 - v)
                }
            }
            CopulaFamily::Clayton => {
                let (ln_s, _, _) = clayton_ln_s(th, u, v);
                math::exp(-ln_s / th)
            }
            CopulaFamily::Gumbel => {
                let x = -math::ln(u);
                let y = -math::ln(v);
                let ls = log_add_exp(th * math::ln(x), th * math::ln(y));
                math::exp(-math::exp(ls / th))
            }
            CopulaFamily::Gaussian => math::bivariate_norm_cdf(norm_quantile(u), norm_quantile(v), th),
        }
    }

    /// `h_{T|C}(u | v) = ∂C(u, v)/∂v`.
    pub fn h_t_given_c(&self, u: f64, v: f64) -> Result<f64> {
        check_not_nan(u, v)?;
        Ok(self.h_with_complement(u, v).0)
    }

    /// `h_{C|T}(v | u) = ∂C(u, v)/∂u`.
    pub fn h_c_given_t(&self, v: f64, u: f64) -> Result<f64> {
        check_not_nan(u, v)?;
        Ok(self.h_with_complement(v, u).0)
    }

    /// `(h(a | b), 1 - h(a | b))` for the conditioning kernel `∂C(a, b)/∂b`,
    /// with arguments clamped to `[ARG_EPS, 1 - ARG_EPS]`. Each component is
    /// computed directly so the complement keeps full relative precision.
    #[inline]
    pub fn h_with_complement(&self, a: f64, b: f64) -> (f64, f64) {
        let a = clamp_arg(a);
        let b = clamp_arg(b);
        let th = self.theta;
        match self.family {
            CopulaFamily::Independence => (a, 1.0 - a),
            CopulaFamily::Frank => {
                if th == 0.0 {
                    (a, 1.0 - a)
                } else if th > 0.0 {
                    frank_h_pos(th, a, b)
                } else {
                    frank_h_pos(-th, a, 1.0 - b)
                }
            }
            CopulaFamily::Clayton => {
                let (ln_s, _, q) = clayton_ln_s(th, a, b);
                let ln_h = -(th + 1.0) / th * (ln_s - q);
                (math::exp(ln_h), -math::exp_m1(ln_h))
            }
            CopulaFamily::Gumbel => {
                let ln_h = gumbel_ln_h(th, -math::ln(a), -math::ln(b));
                (math::exp(ln_h), -math::exp_m1(ln_h))
            }
            CopulaFamily::Gaussian => {
                let s = math::sqrt((1.0 - th) * (1.0 + th));
                let z = (norm_quantile(a) - th * norm_quantile(b)) / s;
                (norm_cdf(z), norm_cdf(-z))
            }
        }
    }

    /// Solve `h_t_given_c(u, v) = w` for `u`.
    pub fn inverse_h(&self, w: f64, v: f64) -> Result<f64> {
        if !(w > 0.0 && w < 1.0) || !(v > 0.0 && v < 1.0) {
            return Err(domain!("inverse h-function needs w, v in (0, 1), got w = {w}, v = {v}"));
        }
        let th = self.theta;
        let u = match self.family {
            CopulaFamily::Independence => w,
            CopulaFamily::Frank => {
                if th == 0.0 {
                    w
                } else if th > 0.0 {
                    frank_inverse_h_pos(th, w, v)
                } else {
                    frank_inverse_h_pos(-th, w, 1.0 - v)
                }
            }
            CopulaFamily::Clayton => {
                let a = -th / (1.0 + th) * math::ln(w);
                let q = -th * math::ln(v);
                let ln_k = math::ln(math::exp_m1(a)) + q;
                let ln1p_k =
                    if ln_k > 30.0 { ln_k + math::ln_1p(math::exp(-ln_k)) } else { math::ln_1p(math::exp(ln_k)) };
                math::exp(-ln1p_k / th)
            }
            CopulaFamily::Gumbel => gumbel_inverse_h(th, w, v)?,
            CopulaFamily::Gaussian => {
                let s = math::sqrt((1.0 - th) * (1.0 + th));
                norm_cdf(th * norm_quantile(v) + s * norm_quantile(w))
            }
        };
        if !u.is_finite() {
            return Err(numeric!("inverse h-function produced {u} for w = {w}, v = {v}"));
        }
        Ok(u.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
    }

    /// Copula density `∂²C/∂u∂v`.
    pub fn density(&self, u: f64, v: f64) -> Result<f64> {
        Ok(math::exp(self.log_density(u, v)?))
    }

    pub fn log_density(&self, u: f64, v: f64) -> Result<f64> {
        check_not_nan(u, v)?;
        let u = clamp_arg(u);
        let v = clamp_arg(v);
        let th = self.theta;
        Ok(match self.family {
            CopulaFamily::Independence => 0.0,
            CopulaFamily::Frank => {
                if th == 0.0 {
                    0.0
                } else if th > 0.0 {
                    frank_log_density_pos(th, u, v)
                } else {
                    frank_log_density_pos(-th, u, 1.0 - v)
                }
            }
            CopulaFamily::Clayton => {
                let (ln_s, _, _) = clayton_ln_s(th, u, v);
                math::ln_1p(th) - (th + 1.0) * (math::ln(u) + math::ln(v)) - (2.0 + 1.0 / th) * ln_s
            }
            CopulaFamily::Gumbel => {
                let x = -math::ln(u);
                let y = -math::ln(v);
                let (lx, ly) = (math::ln(x), math::ln(y));
                let ls = log_add_exp(th * lx, th * ly);
                let a = math::exp(ls / th);
                -a + x + y + (th - 1.0) * (lx + ly) + (1.0 / th - 2.0) * ls + math::ln(a + th - 1.0)
            }
            CopulaFamily::Gaussian => {
                let x = norm_quantile(u);
                let y = norm_quantile(v);
                let one_m = (1.0 - th) * (1.0 + th);
                -0.5 * math::ln(one_m) - (th * th * (x * x + y * y) - 2.0 * th * x * y) / (2.0 * one_m)
            }
        })
    }
}

impl fmt::Display for CopulaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.theta() {
            Some(theta) => write!(f, "{}(theta = {theta}, tau = {})", self.family, self.tau),
            None => write!(f, "{}", self.family),
        }
    }
}

fn check_unit_closed(x: f64, name: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(domain!("copula argument {name} = {x} is outside [0, 1]"));
    }
    Ok(())
}

fn check_not_nan(u: f64, v: f64) -> Result<()> {
    if u.is_nan() || v.is_nan() {
        return Err(domain!("copula argument is NaN"));
    }
    Ok(())
}

#[inline]
fn clamp_arg(x: f64) -> f64 {
    x.clamp(ARG_EPS, 1.0 - ARG_EPS)
}

// ----- Frank (theta > 0; negative theta via C_{-θ}(u, v) = u - C_θ(u, 1 - v)) -----

// -D = e^{-θu}(1 - e^{-θ(1-u)})(1 - e^{-θv}) + e^{-θv}(1 - e^{-θ}); a sum of positive terms.
#[inline]
fn frank_denominator(th: f64, u: f64, v: f64) -> (f64, f64, f64) {
    let eu = math::exp(-th * u);
    let ev = math::exp(-th * v);
    let den = eu * one_minus_exp_neg(th * (1.0 - u)) * one_minus_exp_neg(th * v) + ev * one_minus_exp_neg(th);
    (den, eu, ev)
}

fn frank_cdf_pos(th: f64, u: f64, v: f64) -> f64 {
    let (den, _, _) = frank_denominator(th, u, v);
    -(math::ln(den) - math::ln(one_minus_exp_neg(th))) / th
}

#[inline]
fn frank_h_pos(th: f64, u: f64, v: f64) -> (f64, f64) {
    let (den, eu, ev) = frank_denominator(th, u, v);
    let h = ev * one_minus_exp_neg(th * u) / den;
    let hc = eu * one_minus_exp_neg(th * (1.0 - u)) / den;
    (h, hc)
}

fn frank_log_density_pos(th: f64, u: f64, v: f64) -> f64 {
    let (den, _, _) = frank_denominator(th, u, v);
    math::ln(th) + math::ln(one_minus_exp_neg(th)) - th * (u + v) - 2.0 * math::ln(den)
}

fn frank_inverse_h_pos(th: f64, w: f64, v: f64) -> f64 {
    let ev = math::exp(-th * v);
    let r = w * one_minus_exp_neg(th) / (w + (1.0 - w) * ev);
    if r < 0.5 {
        -math::ln_1p(-r) / th
    } else {
        let lw = math::ln(w);
        let l1w = math::ln_1p(-w);
        let ln_num = log_add_exp(lw - th, l1w - th * v);
        let ln_den = log_add_exp(lw, l1w - th * v);
        (ln_den - ln_num) / th
    }
}

/// Kendall's tau of the Frank copula, `1 - 4/θ (1 - D_1(θ))`.
pub fn frank_tau(theta: f64) -> f64 {
    let t = theta.abs();
    let tau = if t == 0.0 {
        0.0
    } else if t < 1e-2 {
        let t2 = t * t;
        t / 9.0 * (1.0 - t2 / 100.0 * (1.0 - t2 / 58.8))
    } else {
        1.0 - 4.0 / t * (1.0 - debye1(t))
    };
    tau.copysign(theta)
}

/// First Debye function `D_1(x) = (1/x) ∫_0^x t / (e^t - 1) dt`, `x > 0`.
pub fn debye1(x: f64) -> f64 {
    let integrand = |t: f64| if t == 0.0 { 1.0 } else { t / math::exp_m1(t) };
    let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-15, max_intervals: 200, initial_pieces: 1 };
    match integrate(integrand, 0.0, x, opts) {
        Ok(q) => q.value / x,
        // Tolerance is at the resolution of f64; keep the best estimate.
        Err(_) => {
            let coarse = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-13, ..opts };
            integrate(integrand, 0.0, x, coarse).map(|q| q.value / x).unwrap_or(f64::NAN)
        }
    }
}

// ----- Clayton -----

// Returns (ln S, p, q) with S = u^{-θ} + v^{-θ} - 1, p = -θ ln u, q = -θ ln v.
#[inline]
fn clayton_ln_s(th: f64, u: f64, v: f64) -> (f64, f64, f64) {
    let p = -th * math::ln(u);
    let q = -th * math::ln(v);
    let (hi, lo) = if p >= q { (p, q) } else { (q, p) };
    let ln_s = hi + math::ln_1p(math::exp(-hi) * math::exp_m1(lo));
    (ln_s, p, q)
}

// ----- Gumbel -----

// ln h_{T|C}(u | v) in terms of x = -ln u, y = -ln v.
#[inline]
fn gumbel_ln_h(th: f64, x: f64, y: f64) -> f64 {
    let ly = math::ln(y);
    let ls = log_add_exp(th * math::ln(x), th * ly);
    -math::exp(ls / th) + (1.0 / th - 1.0) * ls + (th - 1.0) * ly + y
}

fn gumbel_inverse_h(th: f64, w: f64, v: f64) -> Result<f64> {
    if th == 1.0 {
        return Ok(w);
    }
    let y = -math::ln(v);
    let ln_w = math::ln(w);
    // Solve in s = ln(-ln u); ln h is decreasing in s.
    let f = |s: f64| gumbel_ln_h(th, math::exp(s), y) - ln_w;
    let (lo, hi) = (-60.0, 7.0);
    let (flo, fhi) = (f(lo), f(hi));
    if flo <= 0.0 {
        return Ok(math::exp(-math::exp(lo)));
    }
    if fhi >= 0.0 {
        return Ok(math::exp(-math::exp(hi)));
    }
    let s = math::brent(f, lo, hi, 1e-13, 200)?;
    Ok(math::exp(-math::exp(s)))
}

// ----- tau <-> theta -----

/// Copula parameter with the given Kendall's tau.
pub fn kendall_tau_to_theta(family: CopulaFamily, tau: f64) -> Result<f64> {
    if !tau.is_finite() {
        return Err(domain!("tau is not finite"));
    }
    match family {
        CopulaFamily::Independence => {
            if tau == 0.0 {
                Ok(0.0)
            } else {
                Err(domain!("independence copula has tau = 0, got {tau}"))
            }
        }
        CopulaFamily::Clayton => {
            if !(tau > 0.0 && tau < 1.0) {
                return Err(domain!("Clayton tau must lie in (0, 1), got {tau}"));
            }
            Ok(2.0 * tau / (1.0 - tau))
        }
        CopulaFamily::Gumbel => {
            if !(0.0..1.0).contains(&tau) {
                return Err(domain!("Gumbel tau must lie in [0, 1), got {tau}"));
            }
            Ok(1.0 / (1.0 - tau))
        }
        CopulaFamily::Gaussian => {
            if !(tau > -1.0 && tau < 1.0) {
                return Err(domain!("Gaussian tau must lie in (-1, 1), got {tau}"));
            }
            Ok(libm::sin(core::f64::consts::FRAC_PI_2 * tau))
        }
        CopulaFamily::Frank => {
            if tau == 0.0 {
                return Ok(0.0);
            }
            let max_tau = frank_tau(FRANK_THETA_MAX);
            if !(tau.abs() < max_tau) {
                return Err(domain!(
                    "Frank tau must satisfy |tau| < {max_tau} (|theta| <= {FRANK_THETA_MAX}), got {tau}"
                ));
            }
            let target = tau.abs();
            // Bracket tightly using tau ~ theta/9 near zero and tau -> 1 - 4/theta far out.
            let theta = math::brent(|th| frank_tau(th) - target, 0.0, FRANK_THETA_MAX, 1e-13, 300)?;
            Ok(theta.copysign(tau))
        }
    }
}

/// Kendall's tau of the copula with parameter `theta`.
pub fn theta_to_kendall_tau(family: CopulaFamily, theta: f64) -> Result<f64> {
    if !theta.is_finite() {
        return Err(domain!("copula parameter is not finite"));
    }
    match family {
        CopulaFamily::Independence => Ok(0.0),
        CopulaFamily::Clayton => {
            if !(theta > 0.0) {
                return Err(domain!("Clayton theta must be positive, got {theta}"));
            }
            Ok(theta / (theta + 2.0))
        }
        CopulaFamily::Gumbel => {
            if !(theta >= 1.0) {
                return Err(domain!("Gumbel theta must be at least 1, got {theta}"));
            }
            Ok(1.0 - 1.0 / theta)
        }
        CopulaFamily::Gaussian => {
            if !(theta > -1.0 && theta < 1.0) {
                return Err(domain!("Gaussian theta must lie in (-1, 1), got {theta}"));
            }
            Ok(core::f64::consts::FRAC_2_PI * libm::asin(theta))
        }
        CopulaFamily::Frank => {
            if theta.abs() > FRANK_THETA_MAX {
                return Err(domain!("Frank theta must satisfy |theta| <= {FRANK_THETA_MAX}, got {theta}"));
            }
            Ok(frank_tau(theta))
        }
    }
}

/// Human-readable summary used in diagnostics.
pub fn describe(spec: &CopulaSpec) -> String {
    alloc::format!("{spec}")
}
