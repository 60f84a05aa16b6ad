//! Subcommand execution. Each subcommand writes its tables through a
//! [`RunDir`] and returns a JSON summary for the manifest.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use kdvb_core::diagnostics::energy_report;
use kdvb_core::inviscid::{epsilon_sweep, fit_rate, truncation_study};
use kdvb_core::operators::probe::{estimate_probe, ProbeSpec};
use kdvb_core::phase::verify_phase_lemmas;
use kdvb_core::spectral::{cosine, make_field, random_sobolev_field, sobolev_norm};
use kdvb_core::{solve, GridSpec, SobolevIndex, SolverConfig, SpectralField};
use num_complex::Complex64;
use serde_json::json;

use crate::artifacts::{Cell, Csv, RunDir, RunManifest};
use crate::config::{ExperimentConfig, Horizon, InitialData, Steps, Subcommand};

/// Column layouts, shared with the `--help` text.
pub const SIMULATE_COLUMNS: &[&str] = &["t", "k", "re", "im"];
pub const SWEEP_COLUMNS: &[&str] = &["epsilon", "distance", "s", "T", "K", "seed"];
pub const REPORT_COLUMNS: &[&str] = &["t", "l2_norm", "dissipation", "hamiltonian", "value", "residual"];
pub const LEMMA_COLUMNS: &[&str] = &["claim", "checked", "violations", "extremum", "holds"];
pub const PROBE_COLUMNS: &[&str] = &["split", "max_ratio", "mean_ratio", "trials"];
pub const TRUNCATION_COLUMNS: &[&str] =
    &["cutoff", "data_tail", "direct", "viscous_leg", "truncated_gap", "inviscid_leg", "triangle_ok"];

/// What a finished run reports back to `main`.
pub struct Outcome {
    /// False when a checked property was violated; artifacts are still complete.
    pub holds: bool,
}

pub fn initial_datum(cfg: &ExperimentConfig) -> Result<SpectralField> {
    let grid = GridSpec::new(cfg.band)?;
    let phi = match &cfg.initial_data {
        InitialData::Zero => SpectralField::zeros(grid, kdvb_core::Gauge::Physical),
        InitialData::Cos { mode, amplitude } => cosine(grid, *mode, *amplitude)?,
        InitialData::SumOfModes { modes } => {
            let map = modes.iter().flat_map(|&(k, c)| [(k, Complex64::new(c, 0.0)), (-k, Complex64::new(c, 0.0))]).collect();
            make_field(&map, grid)?
        }
        InitialData::RandomSobolev { decay, amplitude } => random_sobolev_field(grid, *decay, cfg.seed, *amplitude),
    };
    match cfg.data_norm {
        None => Ok(phi),
        Some(target) => {
            let n = sobolev_norm(&phi, SobolevIndex::new(cfg.s));
            if n == 0.0 {
                if target == 0.0 {
                    return Ok(phi);
                }
                bail!("cannot rescale a zero datum to norm {target}");
            }
            Ok(phi.scale(target / n))
        }
    }
}

/// Builds and validates the solver configuration for one viscosity.
pub fn solver_config(cfg: &ExperimentConfig, phi: &SpectralField, epsilon: f64) -> Result<SolverConfig> {
    let mut sc = SolverConfig::new(cfg.equation, phi.grid(), epsilon, 1.0);
    sc.s = SobolevIndex::new(cfg.s);
    sc.split = cfg.split;
    sc.substeps = cfg.substeps;
    sc.horizon = match cfg.horizon {
        Horizon::Fixed(t) => t,
        Horizon::Gated => {
            let t = sc.gated_horizon(phi);
            if !(t.is_finite() && t > 0.0) {
                bail!("the gated horizon is not usable for this datum (T = {t}); set T explicitly");
            }
            t
        }
    };
    sc.nodes = match cfg.steps {
        Steps::Nodes(n) => n,
        Steps::Spacing(dt) => ((sc.horizon / dt) - 1e-9).ceil().max(1.0) as usize,
    };
    sc.validate()?;
    Ok(sc)
}

pub fn execute(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let started = now();
    let phi = initial_datum(cfg)?;
    // Every viscosity is validated before the first solve.
    let solvers = if matches!(cfg.subcommand, Subcommand::VerifyLemmas | Subcommand::Probe) {
        vec![]
    } else {
        cfg.epsilons.iter().map(|&e| solver_config(cfg, &phi, e)).collect::<Result<Vec<_>>>()?
    };

    let mut dir = RunDir::create(out)?;
    let result = match cfg.subcommand {
        Subcommand::Simulate => simulate(cfg, &phi, &solvers[0], &mut dir),
        Subcommand::Report => report(cfg, &phi, &solvers[0], &mut dir),
        Subcommand::Sweep => sweep(cfg, &phi, &solvers[0], &mut dir),
        Subcommand::Truncation => truncation(cfg, &phi, &solvers[0], &mut dir),
        Subcommand::VerifyLemmas => lemmas(cfg, &mut dir),
        Subcommand::Probe => probe(cfg, &mut dir),
    };
    let (diagnostics, holds) = match result {
        Ok(d) => d,
        Err(e) => {
            dir.fail(&e);
            return Err(e);
        }
    };
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        subcommand: cfg.subcommand.to_string(),
        config: cfg,
        started,
        finished: now(),
        files: vec![],
        diagnostics,
    };
    let path = dir.path().to_path_buf();
    if let Err(e) = dir.finish(manifest) {
        let e = e.context("writing manifest");
        let _ = std::fs::write(path.join(crate::artifacts::FAILED), format!("error: {e:#}\n"));
        return Err(e);
    }
    Ok(Outcome { holds })
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

type Summary = Result<(serde_json::Value, bool)>;

fn simulate(cfg: &ExperimentConfig, phi: &SpectralField, sc: &SolverConfig, dir: &mut RunDir) -> Summary {
    let traj = solve(phi, sc, cfg.method).context("solve failed")?;
    if let Some(bad) = traj.states.iter().position(|u| !u.is_finite()) {
        bail!("non-finite state at node {bad}");
    }
    let mut csv = Csv::new("kdvb.simulate.v1", SIMULATE_COLUMNS);
    for (t, u) in traj.times.iter().zip(&traj.states) {
        for (k, c) in u.positive().iter().enumerate().skip(1) {
            csv.row(&[Cell::F(*t), Cell::U(k as u64), Cell::F(c.re), Cell::F(c.im)]);
        }
    }
    dir.write("trajectory.csv", &csv.into_bytes())?;
    let iterations: Vec<usize> = traj.picard.iter().map(|d| d.iterations).collect();
    Ok((
        json!({
            "method": cfg.method,
            "horizon": sc.horizon,
            "nodes": sc.nodes,
            "split": sc.resolved_split()?,
            "initial_l2": phi.l2_norm(),
            "final_l2": traj.last().l2_norm(),
            "picard_windows": traj.picard.len(),
            "picard_iterations": iterations,
        }),
        true,
    ))
}

fn report(cfg: &ExperimentConfig, phi: &SpectralField, sc: &SolverConfig, dir: &mut RunDir) -> Summary {
    let traj = solve(phi, sc, cfg.method).context("solve failed")?;
    let rep = energy_report(&traj, sc.epsilon)?;
    let mut csv = Csv::new("kdvb.report.v1", REPORT_COLUMNS);
    for j in 0..rep.times.len() {
        let value = 0.5 * rep.l2_norms[j].powi(2) + 0.5 * rep.dissipation_integral[j];
        csv.row(&[
            Cell::F(rep.times[j]),
            Cell::F(rep.l2_norms[j]),
            Cell::F(rep.dissipation_integral[j]),
            Cell::F(rep.h_values[j]),
            Cell::F(value),
            Cell::F(rep.identity_residuals[j]),
        ]);
    }
    dir.write("report.csv", &csv.into_bytes())?;
    let budgets = json!({ "h1_budget": rep.h1_budget, "h2_budget": rep.h2_budget });
    dir.write_json("budgets.json", &budgets)?;
    let max_residual = rep.identity_residuals.iter().cloned().fold(0.0, f64::max);
    Ok((json!({ "max_identity_residual": max_residual, "budgets": budgets }), true))
}

fn sweep(cfg: &ExperimentConfig, phi: &SpectralField, sc: &SolverConfig, dir: &mut RunDir) -> Summary {
    let records = epsilon_sweep(phi, &cfg.epsilons, sc, cfg.method)?;
    let mut csv = Csv::new("kdvb.sweep.v1", SWEEP_COLUMNS);
    for r in &records {
        csv.row(&[
            Cell::F(r.epsilon),
            Cell::F(r.distance),
            Cell::F(r.s),
            Cell::F(r.horizon),
            Cell::U(r.band as u64),
            Cell::U(cfg.seed),
        ]);
    }
    dir.write("sweep.csv", &csv.into_bytes())?;
    let fit = if cfg.fit {
        let fit = fit_rate(&records)?;
        dir.write_json("fit.json", &fit)?;
        Some(fit)
    } else {
        None
    };
    Ok((json!({ "fingerprint": records[0].fingerprint, "fit": fit }), true))
}

fn truncation(cfg: &ExperimentConfig, phi: &SpectralField, sc: &SolverConfig, dir: &mut RunDir) -> Summary {
    let rows = truncation_study(phi, &cfg.cutoffs, sc.epsilon, sc, cfg.method)?;
    let mut csv = Csv::new("kdvb.truncation.v1", TRUNCATION_COLUMNS);
    for r in &rows {
        csv.row(&[
            Cell::U(r.cutoff as u64),
            Cell::F(r.data_tail),
            Cell::F(r.direct),
            Cell::F(r.viscous_leg),
            Cell::F(r.truncated_gap),
            Cell::F(r.inviscid_leg),
            Cell::B(r.triangle_ok),
        ]);
    }
    dir.write("truncation.csv", &csv.into_bytes())?;
    let holds = rows.iter().all(|r| r.triangle_ok);
    Ok((json!({ "triangle_holds": holds }), holds))
}

fn lemmas(cfg: &ExperimentConfig, dir: &mut RunDir) -> Summary {
    let rep = verify_phase_lemmas(cfg.band, &cfg.epsilons, cfg.thresholds);
    let mut csv = Csv::new("kdvb.lemmas.v1", LEMMA_COLUMNS);
    for c in &rep.claims {
        let extremum = c.extremum.map(|x| format!("{x:.16e}")).unwrap_or_default();
        csv.row(&[Cell::S(&c.name), Cell::U(c.checked), Cell::U(c.violations), Cell::S(&extremum), Cell::B(c.holds())]);
    }
    dir.write("lemmas.csv", &csv.into_bytes())?;
    dir.write_json("lemmas.json", &rep)?;
    let failed: Vec<&str> = rep.claims.iter().filter(|c| !c.holds()).map(|c| c.name.as_str()).collect();
    Ok((json!({ "claims": rep.claims.len(), "failed": failed }), failed.is_empty()))
}

fn probe(cfg: &ExperimentConfig, dir: &mut RunDir) -> Summary {
    let settings = cfg.probe.as_ref().ok_or_else(|| anyhow!("probe settings missing"))?;
    let mut spec = ProbeSpec::new(settings.operator, cfg.band, cfg.s);
    spec.epsilon = cfg.epsilons[0];
    spec.t = settings.t;
    spec.splits = settings.splits.clone();
    spec.trials = settings.trials;
    spec.seed = cfg.seed;
    spec.ensemble = settings.ensemble;
    spec.project = settings.project;
    let rep = estimate_probe(&spec)?;
    let mut csv = Csv::new("kdvb.probe.v1", PROBE_COLUMNS);
    for r in &rep.rows {
        csv.row(&[Cell::U(r.split as u64), Cell::F(r.max_ratio), Cell::F(r.mean_ratio), Cell::U(r.trials as u64)]);
    }
    dir.write("probe.csv", &csv.into_bytes())?;
    dir.write_json("probe.json", &rep)?;
    Ok((json!({ "exponent": rep.exponent, "r_squared": rep.r_squared }), true))
}
