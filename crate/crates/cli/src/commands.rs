//! Subcommand implementations. Each returns the process exit code on success.

use std::path::Path;

use anyhow::{bail, ensure, Context};
use depcens_core::estimation::{self, BootstrapSummary};
use depcens_core::{
    rng, simulation, CopulaFamily, CopulaSpec, FitOptions, FitResult, MarginFamily, MarginParams, ModelSpec, Scenario,
    StudyCell, TransformKind,
};

use crate::cli::{BootstrapArgs, DensityArgs, FitArgs, ModelChoice, ModelFamilies, ProbeArgs, SimulateArgs, StudyArgs};
use crate::io::{self, LoadedData, Meta};
use crate::parallel;
use crate::report::{self, ComparisonRow, DataReport, FitDocument, FitReport};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_NOT_CONVERGED: u8 = 2;

fn parse<T>(s: &str) -> anyhow::Result<T>
where
    T: std::str::FromStr<Err = depcens_core::Error>,
{
    Ok(s.parse::<T>()?)
}

/// Parse `lo:hi:count`.
pub fn parse_grid(spec: &str) -> anyhow::Result<(f64, f64, usize)> {
    let parts: Vec<&str> = spec.split(':').collect();
    ensure!(parts.len() == 3, "grid must be `lo:hi:count`, got `{spec}`");
    let lo: f64 = parts[0].trim().parse().with_context(|| format!("bad grid lower bound `{}`", parts[0]))?;
    let hi: f64 = parts[1].trim().parse().with_context(|| format!("bad grid upper bound `{}`", parts[1]))?;
    let count: usize = parts[2].trim().parse().with_context(|| format!("bad grid count `{}`", parts[2]))?;
    ensure!(lo > 0.0 && hi > 0.0 && lo.is_finite() && hi.is_finite(), "grid bounds must be positive, got {lo}:{hi}");
    ensure!(hi > lo, "grid upper bound {hi} must exceed lower bound {lo}");
    ensure!(count >= 2, "grid needs at least 2 points, got {count}");
    Ok((lo, hi, count))
}

pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let step = (hi - lo) / (count - 1) as f64;
    (0..count).map(|i| if i + 1 == count { hi } else { lo + step * i as f64 }).collect()
}

/// Resolve margins and copula of a fully specified model.
pub fn build_model(choice: &ModelChoice) -> anyhow::Result<ModelSpec> {
    let (mt, mc) = match (choice.scenario, &choice.margin_t, &choice.margin_c) {
        (Some(id), _, _) => {
            let s = Scenario::by_id(id)?;
            (s.margin_t(), s.margin_c())
        }
        (None, Some(t), Some(c)) => (parse::<MarginParams>(t)?, parse::<MarginParams>(c)?),
        _ => bail!("give either --scenario or both --margin-t and --margin-c"),
    };
    let family: CopulaFamily = parse(&choice.copula)?;
    let copula = match (family, choice.tau, choice.theta) {
        (CopulaFamily::Independence, _, _) => CopulaSpec::independence(),
        (f, Some(tau), None) => CopulaSpec::from_tau(f, tau)?,
        (f, None, Some(theta)) => CopulaSpec::from_theta(f, theta)?,
        (f, _, _) => bail!("copula `{f}` needs --tau or --theta"),
    };
    Ok(ModelSpec::new(copula, mt, mc))
}

struct Families {
    copula: CopulaFamily,
    margin_t: MarginFamily,
    margin_c: MarginFamily,
    opts: FitOptions,
}

fn resolve_families(f: &ModelFamilies, seed: u64) -> anyhow::Result<Families> {
    let opts = FitOptions {
        transform: parse::<TransformKind>(&f.transform)?,
        restarts: f.restarts,
        seed,
        fixed_nu_t: f.nu_t,
        fixed_nu_c: f.nu_c,
        ..FitOptions::default()
    };
    Ok(Families { copula: parse(&f.copula)?, margin_t: parse(&f.margin_t)?, margin_c: parse(&f.margin_c)?, opts })
}

fn load(path: &Path) -> anyhow::Result<LoadedData> {
    let loaded = io::read_dataset(path)?;
    if loaded.excluded_nonpositive > 0 {
        eprintln!("excluded {} rows with y <= 0", loaded.excluded_nonpositive);
    }
    ensure!(!loaded.data.is_empty(), "`{}` has no rows with y > 0", path.display());
    Ok(loaded)
}

fn data_report(path: &Path, loaded: &LoadedData) -> DataReport {
    let d = &loaded.data;
    DataReport {
        path: path.display().to_string(),
        n: d.len(),
        n_uncensored: d.n_uncensored(),
        n_censored: d.n_censored(),
        excluded_nonpositive: loaded.excluded_nonpositive,
        empirical_prob_uncensored: d.fraction_uncensored(),
    }
}

fn fit_families(loaded: &LoadedData, fam: &Families) -> anyhow::Result<FitResult> {
    estimation::fit(&loaded.data, fam.copula, fam.margin_t, fam.margin_c, &fam.opts)
        .with_context(|| format!("fitting the {} copula", fam.copula))
}

fn exit_for(fit: &FitResult) -> u8 {
    if fit.converged {
        EXIT_OK
    } else {
        eprintln!("warning: optimizer did not converge (gradient norm {:e})", fit.gradient_norm);
        EXIT_NOT_CONVERGED
    }
}

fn comparison(loaded: &LoadedData, fam: &Families) -> Vec<ComparisonRow> {
    CopulaFamily::ALL
        .iter()
        .map(|&copula| {
            let transform =
                if copula.supports(fam.opts.transform) { fam.opts.transform } else { TransformKind::LogitTau };
            let opts = FitOptions { transform, compute_sandwich: false, ..fam.opts.clone() };
            match estimation::fit(&loaded.data, copula, fam.margin_t, fam.margin_c, &opts) {
                Ok(fit) => ComparisonRow::from_fit(&fit),
                Err(e) => ComparisonRow::failed(copula.tag(), e.to_string()),
            }
        })
        .collect()
}

fn run_bootstrap(
    loaded: &LoadedData,
    fit: &mut FitResult,
    fam: &Families,
    b: usize,
    seed: u64,
) -> anyhow::Result<BootstrapSummary> {
    let summary = parallel::bootstrap(&loaded.data, fit, &fam.opts, b, seed).context("bootstrap")?;
    if summary.dropped > 0 {
        eprintln!("bootstrap: dropped {} of {} non-converged resamples", summary.dropped, summary.requested);
    }
    fit.attach_bootstrap(&summary);
    Ok(summary)
}

pub fn fit(args: &FitArgs) -> anyhow::Result<u8> {
    let loaded = load(&args.data)?;
    let fam = resolve_families(&args.families, args.seed)?;
    let mut fit = fit_families(&loaded, &fam)?;
    let boot = match args.bootstrap {
        Some(b) => Some(run_bootstrap(&loaded, &mut fit, &fam, b, args.seed)?),
        None => None,
    };
    let doc = FitDocument {
        meta: Meta::new("fit", Some(args.seed), args),
        data: data_report(&args.data, &loaded),
        fit: FitReport::new(&fit, boot.as_ref()),
        comparison: args.all_copulas.then(|| comparison(&loaded, &fam)),
    };
    let mut out = io::open_output(args.out.as_deref())?;
    report::write_json(&mut *out, &doc)?;
    Ok(exit_for(&fit))
}

pub fn bootstrap(args: &BootstrapArgs) -> anyhow::Result<u8> {
    let loaded = load(&args.data)?;
    let fam = resolve_families(&args.families, args.seed)?;
    let mut fit = fit_families(&loaded, &fam)?;
    let boot = run_bootstrap(&loaded, &mut fit, &fam, args.replicates, args.seed)?;
    let doc = FitDocument {
        meta: Meta::new("bootstrap", Some(args.seed), args),
        data: data_report(&args.data, &loaded),
        fit: FitReport::new(&fit, Some(&boot)),
        comparison: None,
    };
    let mut out = io::open_output(args.out.as_deref())?;
    report::write_json(&mut *out, &doc)?;
    Ok(exit_for(&fit))
}

pub fn simulate(args: &SimulateArgs) -> anyhow::Result<u8> {
    let model = build_model(&args.model)?;
    let mut r = rng::stream(args.seed, rng::domain::SIMULATE, 0);
    let data = simulation::sample_observed(&model, args.n, &mut r)?;
    let meta = Meta::new("simulate", Some(args.seed), args);
    let mut out = io::open_output(args.out.as_deref())?;
    io::write_dataset(&mut *out, &meta, &data)?;
    Ok(EXIT_OK)
}

pub fn study(args: &StudyArgs) -> anyhow::Result<u8> {
    let scenario = Scenario::by_id(args.scenario)?;
    let opts = FitOptions { transform: parse(&args.transform)?, ..FitOptions::default() };
    let mut cells = Vec::new();
    for name in &args.families {
        let family: CopulaFamily = parse(name)?;
        for &tau in &args.taus {
            for &n in &args.ns {
                cells.push(StudyCell::new(scenario, family, tau, n, args.reps, args.seed)?);
            }
        }
    }
    let results = parallel::run_cells(&cells, &opts);
    let mut summaries = Vec::new();
    let mut failures = Vec::new();
    for (cell, result) in cells.iter().zip(results) {
        let label = format!("{} tau={} n={}", cell.family, cell.tau, cell.n);
        match result {
            Ok(s) => {
                if s.warning {
                    eprintln!("warning: {label}: {} of {} replicates dropped", s.dropped, cell.reps);
                }
                summaries.push(s);
            }
            Err(e) => {
                eprintln!("error: {label}: {e}");
                failures.push(format!("{label}: {e}"));
            }
        }
    }
    let meta = Meta::new("study", Some(args.seed), args);
    let mut out = io::open_output(args.out.as_deref())?;
    report::write_study(&mut *out, &meta, &summaries, &failures)?;
    Ok(if failures.is_empty() { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

pub fn density(args: &DensityArgs) -> anyhow::Result<u8> {
    let model = build_model(&args.model)?;
    let (lo, hi, count) = parse_grid(&args.grid)?;
    let points = simulation::theoretical_density_grid(&model, &linear_grid(lo, hi, count))?;
    let meta = Meta::new("density", None, args);
    let mut out = io::open_output(args.out.as_deref())?;
    report::write_density(&mut *out, &meta, &points)?;
    Ok(EXIT_OK)
}

pub fn probe(args: &ProbeArgs) -> anyhow::Result<u8> {
    let model = build_model(&args.model)?;
    let grid = match &args.grid {
        Some(g) => {
            let (lo, hi, count) = parse_grid(g)?;
            depcens_core::model::log_grid(lo, hi, count)
        }
        None => model.default_probe_grid(args.points),
    };
    let probe = model.probe_identifiability(&grid)?;
    for line in probe.verdict_lines() {
        println!("{line}");
    }
    if let Some(path) = &args.out {
        let meta = Meta::new("probe", None, args);
        let mut out = io::open_output(Some(path))?;
        report::write_probe(&mut *out, &meta, &probe)?;
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0.01:60:600").unwrap(), (0.01, 60.0, 600));
        assert!(parse_grid("0:60:10").is_err());
        assert!(parse_grid("-1:60:10").is_err());
        assert!(parse_grid("5:1:10").is_err());
        assert!(parse_grid("1:2").is_err());
        let g = linear_grid(0.01, 60.0, 600);
        assert_eq!(g.len(), 600);
        assert_eq!((g[0], g[599]), (0.01, 60.0));
    }

    #[test]
    fn model_choice_requires_margins_and_dependence() {
        let mut choice = ModelChoice {
            scenario: None,
            margin_t: Some("lognormal:2.2,1.0".into()),
            margin_c: None,
            copula: "frank".into(),
            tau: Some(0.5),
            theta: None,
        };
        assert!(build_model(&choice).is_err());
        choice.margin_c = Some("lognormal:2.0,0.25".into());
        let m = build_model(&choice).unwrap();
        assert!((m.copula.tau() - 0.5).abs() < 1e-12);
        choice.tau = None;
        assert!(build_model(&choice).is_err());
        choice.copula = "independence".into();
        assert_eq!(build_model(&choice).unwrap().copula.family(), CopulaFamily::Independence);
        choice.scenario = Some(3);
        assert!(build_model(&choice).is_err());
    }
}
