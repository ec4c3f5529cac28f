//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
//! on any failure that does not match a documented deviation.

use std::process::{Command, ExitCode};
use std::time::Instant;

use depcens::parallel;
use depcens_core::copulas::{kendall_tau_to_theta, theta_to_kendall_tau, transform_tau, untransform_tau};
use depcens_core::rng::{self, domain};
use depcens_core::simulation::{empirical_kendall_tau, kolmogorov_distance, sample_observed};
use depcens_core::{
    estimation, CellSummary, CopulaFamily, CopulaSpec, FitOptions, MarginFamily, ModelSpec, Scenario, StudyCell,
    TransformKind,
};

const PARAMETRIC: [CopulaFamily; 4] =
    [CopulaFamily::Frank, CopulaFamily::Clayton, CopulaFamily::Gumbel, CopulaFamily::Gaussian];
const TAUS: [f64; 3] = [0.2, 0.5, 0.8];
const SEED: u64 = 20_240_601;

const TABLE2_DEVIATION: &str =
    "published Scenario 2 Frank tau=.2 cell (0.28) disagrees with the model value 0.299 confirmed by Monte Carlo";
const BIAS_DEVIATION: &str = "published small-tau Frank bias matches data generated near tau=0.33, not tau=0.2";

struct Outcome {
    id: u8,
    title: &'static str,
    pass: bool,
    details: Vec<String>,
    /// Set when a failure is exactly the documented deviation.
    known: Option<&'static str>,
}

type Table2 = [[[f64; 3]; 4]; 2];

const TABLE2: Table2 = [
    [[0.41, 0.40, 0.39], [0.43, 0.43, 0.40], [0.41, 0.40, 0.39], [0.42, 0.41, 0.40]],
    [[0.28, 0.24, 0.16], [0.31, 0.27, 0.18], [0.30, 0.24, 0.18], [0.30, 0.25, 0.18]],
];

fn model(s: Scenario, family: CopulaFamily, tau: f64) -> ModelSpec {
    s.model(family, tau).expect("valid scenario model")
}

fn criterion_1() -> Outcome {
    let mut pass = true;
    let mut only_known = true;
    let mut details = Vec::new();
    for (si, s) in [Scenario::ONE, Scenario::TWO].into_iter().enumerate() {
        for (fi, family) in PARAMETRIC.into_iter().enumerate() {
            for (ti, tau) in TAUS.into_iter().enumerate() {
                let m = model(s, family, tau);
                let p = m.prob_uncensored().unwrap();
                let cell = (si * 12 + fi * 3 + ti) as u64;
                let (mc, se) =
                    m.prob_uncensored_mc(1_000_000, &mut rng::stream(SEED, domain::MONTE_CARLO, cell)).unwrap();
                let published = TABLE2[si][fi][ti];
                let ok_pub = (p - published).abs() <= 0.01;
                let ok_mc = (p - mc).abs() <= 3.0 * se;
                if !(ok_pub && ok_mc) {
                    pass = false;
                    only_known &= ok_mc && s.id == 2 && family == CopulaFamily::Frank && tau == 0.2;
                    details.push(format!(
                        "scenario {} {family} tau={tau}: quadrature {p:.4}, published {published:.2}, MC {mc:.4} (se {se:.4})",
                        s.id
                    ));
                }
            }
        }
    }
    let known = (!pass && only_known).then_some(TABLE2_DEVIATION);
    Outcome { id: 1, title: "P(Delta=1) table by quadrature and Monte Carlo", pass, details, known }
}

fn study(family: CopulaFamily, tau: f64) -> CellSummary {
    let cell = StudyCell::new(Scenario::ONE, family, tau, 1000, 100, SEED).unwrap();
    parallel::run_cells(&[cell], &FitOptions::default()).pop().unwrap().expect("cell summary")
}

fn criterion_2() -> Outcome {
    let frank = study(CopulaFamily::Frank, 0.5);
    let gumbel = study(CopulaFamily::Gumbel, 0.8);
    let target = [2.20, 0.00, 2.00, -1.38];
    let margins_ok = frank.average_estimate[..4].iter().zip(target).all(|(a, t)| (a - t).abs() <= 0.03);
    let rmse_frank = frank.rmse[4];
    let rmse_gumbel = gumbel.rmse[4];
    let pass = margins_ok && (0.15..=0.30).contains(&rmse_frank) && (0.09..=0.18).contains(&rmse_gumbel);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ");
    let details = vec![
        format!(
            "Frank tau=.5 average.estimate ({}), RMSE(logit tau) {rmse_frank:.3}, dropped {}",
            fmt(&frank.average_estimate),
            frank.dropped
        ),
        format!("Gumbel tau=.8 RMSE(logit tau) {rmse_gumbel:.3}, dropped {}", gumbel.dropped),
    ];
    Outcome { id: 2, title: "simulation study, Frank tau=.5 and Gumbel tau=.8 at n=1000", pass, details, known: None }
}

fn criterion_3() -> Outcome {
    let s = study(CopulaFamily::Frank, 0.2);
    let bias = *s.average_bias.last().unwrap();
    let pass = (0.08..=0.18).contains(&bias);
    let details = vec![format!(
        "average bias of tau-hat {bias:.4} (target [0.08, 0.18]), average tau-hat {:.4}, dropped {}",
        s.average_estimate.last().unwrap(),
        s.dropped
    )];
    // The deviation is an unbiased estimate; anything else is a genuine failure.
    let known = (!pass && bias.abs() <= 0.03).then_some(BIAS_DEVIATION);
    Outcome { id: 3, title: "small-tau Frank bias", pass, details, known }
}

fn criterion_4() -> Outcome {
    let mut r = rng::stream(SEED, domain::MONTE_CARLO, 1000);
    let grid: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
    let step = 1e-5;
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for family in PARAMETRIC {
        for _ in 0..5 {
            let tau = 0.05 + 0.85 * rng::uniform(&mut r);
            let theta = kendall_tau_to_theta(family, tau).unwrap();
            let c = CopulaSpec::from_theta(family, theta).unwrap();
            let mut family_worst: f64 = 0.0;
            for &u in &grid {
                for &v in &grid {
                    let dv = (c.cdf(u, v + step).unwrap() - c.cdf(u, v - step).unwrap()) / (2.0 * step);
                    let du = (c.cdf(u + step, v).unwrap() - c.cdf(u - step, v).unwrap()) / (2.0 * step);
                    family_worst = family_worst
                        .max((c.h_t_given_c(u, v).unwrap() - dv).abs())
                        .max((c.h_c_given_t(v, u).unwrap() - du).abs());
                }
            }
            if family_worst > 1e-6 {
                details.push(format!("{family} theta={theta:.4}: {family_worst:.2e}"));
            }
            worst = worst.max(family_worst);
        }
    }
    details.push(format!("largest deviation {worst:.2e}"));
    Outcome { id: 4, title: "h-functions against finite differences", pass: worst <= 1e-6, details, known: None }
}

fn criterion_5() -> Outcome {
    let mut worst: f64 = 0.0;
    for family in PARAMETRIC {
        for tau in TAUS {
            let back = theta_to_kendall_tau(family, kendall_tau_to_theta(family, tau).unwrap()).unwrap();
            worst = worst.max((back - tau).abs());
        }
    }
    let anchor = theta_to_kendall_tau(CopulaFamily::Frank, 17.81).unwrap();
    let logit = transform_tau(TransformKind::LogitTau, 0.80).unwrap();
    let pass = worst <= 1e-10
        && (anchor - 0.80).abs() <= 0.005
        && (untransform_tau(TransformKind::LogitTau, 1.39) - 0.80).abs() < 0.005;
    let details = vec![format!(
        "max roundtrip error {worst:.2e}; Frank theta=17.81 gives tau {anchor:.4}; logit(0.80) = {logit:.4}"
    )];
    Outcome { id: 5, title: "tau-theta bijection", pass, details, known: None }
}

/// Composite Simpson on the log scale; independent of the adaptive rule used by the library.
fn simpson_mass(m: &ModelSpec) -> f64 {
    let (a, b, n) = (-12.0_f64, 9.0_f64, 40_000usize);
    let h = (b - a) / n as f64;
    let f = |s: f64| m.density_y(s.exp()).unwrap() * s.exp();
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + h * i as f64);
    }
    acc * h / 3.0
}

fn criterion_6() -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    let mut models = vec![(
        "independence".to_string(),
        ModelSpec::new(CopulaSpec::independence(), Scenario::ONE.margin_t(), Scenario::ONE.margin_c()),
    )];
    for family in PARAMETRIC {
        for tau in TAUS {
            models.push((format!("{family} tau={tau}"), model(Scenario::ONE, family, tau)));
        }
    }
    let mut worst_mass: f64 = 0.0;
    for (label, m) in &models {
        for i in 1..=400 {
            let p = m.subdensity_point(0.1 * i as f64).unwrap();
            if (p.f_y - (p.f_y_delta1 + p.f_y_delta0)).abs() > 1e-15 * p.f_y {
                pass = false;
                details.push(format!("{label}: f_Y != f1 + f0 at y={}", p.y));
            }
        }
        let mass = m.total_mass().unwrap();
        let simpson = simpson_mass(m);
        worst_mass = worst_mass.max((mass - 1.0).abs()).max((simpson - 1.0).abs());
        if (mass - 1.0).abs() > 1e-6 || (simpson - 1.0).abs() > 1e-6 {
            pass = false;
            details.push(format!("{label}: mass {mass:.9} (Simpson {simpson:.9})"));
        }
    }
    details.push(format!("largest |mass - 1| {worst_mass:.2e} over {} models", models.len()));
    Outcome { id: 6, title: "subdensity identities and unit mass", pass, details, known: None }
}

fn criterion_7() -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    let n = 1_000_000;
    for (k, family) in PARAMETRIC.into_iter().enumerate() {
        let m = model(Scenario::ONE, family, 0.5);
        let mut r = rng::stream(SEED, domain::SIMULATE, 100 + k as u64);
        let (t, c): (Vec<f64>, Vec<f64>) = (0..n).map(|_| m.sample_latent(&mut r).unwrap()).unzip();
        let tau = empirical_kendall_tau(&t, &c).unwrap();
        let ks_t = kolmogorov_distance(&t, |x| m.margin_t.cdf(x).unwrap());
        let ks_c = kolmogorov_distance(&c, |x| m.margin_c.cdf(x).unwrap());
        let ok = (tau - m.copula.tau()).abs() <= 0.003 && ks_t <= 0.002 && ks_c <= 0.002;
        pass &= ok;
        details.push(format!("{family}: Kendall tau {tau:.4}, KS(T) {ks_t:.5}, KS(C) {ks_c:.5}"));
    }
    Outcome { id: 7, title: "sampler Kendall tau and margins on 1e6 pairs", pass, details, known: None }
}

fn criterion_8() -> Outcome {
    let m = model(Scenario::ONE, CopulaFamily::Gaussian, 0.5);
    let data = sample_observed(&m, 5000, &mut rng::stream(SEED, domain::SIMULATE, 500)).unwrap();
    let opts = FitOptions { seed: SEED, ..FitOptions::default() };
    let ln = MarginFamily::LogNormal;
    let fit = estimation::fit(&data, CopulaFamily::Gaussian, ln, ln, &opts).unwrap();
    let sandwich = fit.sandwich_se().expect("sandwich covariance");
    let boot = parallel::bootstrap(&data, &fit, &opts, 100, SEED).unwrap();
    let mut pass = fit.converged;
    let mut details = Vec::new();
    for ((name, s), b) in fit.layout().names().iter().zip(&sandwich).zip(&boot.se) {
        let rel = (s - b).abs() / b;
        pass &= rel <= 0.30;
        details.push(format!("{name}: sandwich {s:.5}, bootstrap {b:.5}, relative difference {rel:.3}"));
    }
    details.push(format!("bootstrap dropped {} of {}", boot.dropped, boot.requested));
    Outcome { id: 8, title: "sandwich versus bootstrap standard errors at n=5000", pass, details, known: None }
}

fn fit_loglik(bin: &str, data: &std::path::Path, copula: &str, dir: &std::path::Path) -> f64 {
    let out = dir.join(format!("{copula}.json"));
    let status = Command::new(bin)
        .args(["fit", "--copula", copula, "--seed", "1", "--data"])
        .arg(data)
        .arg("--out")
        .arg(&out)
        .status()
        .expect("run depcens");
    assert_eq!(status.code(), Some(0), "fit --copula {copula}");
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    doc["fit"]["loglik"].as_f64().unwrap()
}

fn criterion_9() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_depcens");
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("frank.csv");
    let status = Command::new(bin)
        .args([
            "simulate",
            "--scenario",
            "1",
            "--copula",
            "frank",
            "--tau",
            "0.5",
            "--n",
            "1000",
            "--seed",
            "7",
            "--out",
        ])
        .arg(&data)
        .status()
        .unwrap();
    assert!(status.success());
    let frank = fit_loglik(bin, &data, "frank", dir.path());
    let indep = fit_loglik(bin, &data, "independence", dir.path());
    let details =
        vec![format!("loglik Frank {frank:.3}, independence {indep:.3}, LR statistic {:.2}", 2.0 * (frank - indep))];
    Outcome {
        id: 9,
        title: "likelihood-ratio direction on Frank-simulated data",
        pass: indep < frank,
        details,
        known: None,
    }
}

fn main() -> ExitCode {
    let criteria: [fn() -> Outcome; 9] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
    ];
    let mut unexpected = 0;
    for run in criteria {
        let start = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("{verdict} criterion {}: {} ({:.1}s)", o.id, o.title, start.elapsed().as_secs_f64());
        for d in &o.details {
            println!("    {d}");
        }
        match (o.pass, o.known) {
            (false, Some(why)) => println!("    known deviation: {why}"),
            (false, None) => unexpected += 1,
            _ => {}
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} criteria failed unexpectedly");
        ExitCode::FAILURE
    }
}
