//! The three verbs, independent of argument parsing.

use std::path::{Path, PathBuf};

use mahm::synth::{generate_example1, CableGenerator};
use mahm::{
    decompose, harmonic_fuse, tension_from_frequency, CableSpec, DriverConfig64, Error, Partial,
    PhaseFunction64, SignalEnsemble64,
};
use ndarray::Array1;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::io;

/// Built-in datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dataset {
    /// Noisy chirp ensemble with frequency `40(t+1)` Hz.
    Example1,
    /// Harmonics of a taut cable under slowly varying tension.
    Cable,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    File(PathBuf),
    Generated(Dataset),
}

pub fn cable_generator(cfg: &RunConfig) -> CableGenerator {
    let g = &cfg.generator;
    let d = CableGenerator::default();
    CableGenerator {
        n_samples: g.n_samples.unwrap_or(d.n_samples),
        duration: g.duration.unwrap_or(d.duration),
        base_frequency: g.base_frequency.unwrap_or(d.base_frequency),
        modulation: g.modulation.unwrap_or(d.modulation),
        amplitudes: g.amplitudes.clone().unwrap_or(d.amplitudes),
        sensors: g.sensors.clone().unwrap_or(d.sensors),
        noise_scale: g.noise_scale.unwrap_or(d.noise_scale),
        seed: cfg.seed,
        mass_density: cfg.cable.mass_density,
        length: cfg.cable.length,
    }
}

pub fn generate(dataset: Dataset, cfg: &RunConfig) -> Result<SignalEnsemble64> {
    let g = &cfg.generator;
    let n = g.n_samples.unwrap_or(512);
    if n < mahm::signal::MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            found: n,
            required: mahm::signal::MIN_SAMPLES,
        }
        .into());
    }
    match dataset {
        Dataset::Example1 => Ok(generate_example1(
            cfg.seed,
            n,
            g.m_signals.unwrap_or(10),
            g.noise_scale.unwrap_or(5.0),
        )),
        Dataset::Cable => {
            let gen = cable_generator(cfg);
            if gen.sensors.is_empty() {
                return Err(Error::InvalidConfig("`sensors` is empty".into()).into());
            }
            Ok(gen.generate::<f64>().ensemble)
        }
    }
}

pub fn load(source: &Source, cfg: &RunConfig) -> Result<SignalEnsemble64> {
    match source {
        Source::File(path) => io::read_dataset(path, cfg.center),
        Source::Generated(d) => generate(*d, cfg),
    }
}

/// Driver settings with the configured starting phases laid on the grid of `e`.
pub fn driver_for(e: &SignalEnsemble64, cfg: &RunConfig) -> DriverConfig64 {
    let mut d = cfg.driver.clone();
    d.initial_phases.extend(
        cfg.initial_cycles
            .iter()
            .map(|&c| PhaseFunction64::linear(e.times(), c, 0.0)),
    );
    d
}

fn prepare(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn report<'a, D: Serialize>(
    status: &'a str,
    cfg: &RunConfig,
    e: &SignalEnsemble64,
    diagnostics: &'a D,
) -> io::RunReport<'a, D> {
    io::RunReport {
        status,
        mode: cfg.driver.solver.mode,
        n_signals: e.n_signals(),
        n_samples: e.n_samples(),
        time_origin: e.time_origin(),
        time_span: e.time_span(),
        diagnostics,
    }
}

/// Decomposes and writes `components.csv`, `residuals.csv`,
/// `diagnostics.json` and, for robust runs, `outliers.csv` into `dir`.
///
/// A run that stops short still writes what it has before returning the
/// error.
pub fn run_decompose(e: &SignalEnsemble64, cfg: &RunConfig, dir: &Path) -> Result<()> {
    let (result, err) = match decompose(e, &driver_for(e, cfg)) {
        Ok(r) => (r, None),
        Err(Error::NoConvergence {
            update_norm,
            tolerance,
            partial: Partial::Decomposition(d),
        }) => {
            let err = Error::NoConvergence {
                update_norm,
                tolerance,
                partial: Partial::Decomposition(d.clone()),
            };
            (*d, Some(err))
        }
        Err(err) => return Err(err.into()),
    };
    prepare(dir)?;
    io::write_components(&dir.join("components.csv"), &result, e)?;
    io::write_residuals(&dir.join("residuals.csv"), &result, e)?;
    io::write_outliers(&dir.join("outliers.csv"), &result, e)?;
    let status = if err.is_some() { "unconverged" } else { "ok" };
    io::write_json(
        &dir.join("diagnostics.json"),
        &report(status, cfg, e, &result.diagnostics),
    )?;
    err.map_or(Ok(()), |e| Err(e.into()))
}

#[derive(Debug, Serialize)]
struct CableDiagnostics<'a> {
    modes: &'a [usize],
    mass_density: f64,
    length: f64,
    component: &'a mahm::ComponentDiagnostics,
}

/// Fuses the harmonics of the fundamental and writes `tension.csv` and
/// `diagnostics.json` into `dir`. Partial results are written as in
/// [`run_decompose`].
pub fn run_cable(e: &SignalEnsemble64, cfg: &RunConfig, dir: &Path) -> Result<()> {
    let c = &cfg.cable;
    let spec = CableSpec::new(c.mass_density, c.length, c.modes.clone())?;
    let (omega, tension, diag, err) = match harmonic_fuse(e, &spec, &driver_for(e, cfg)) {
        Ok(f) => (f.omega_1, f.tension, f.diagnostics, None),
        Err(Error::NoConvergence {
            update_norm,
            tolerance,
            partial: Partial::Component(comp),
        }) => {
            let omega = comp.phase.frequency() / e.time_span();
            let tension = tension_from_frequency(&omega, 1, &spec)?;
            let err = Error::NoConvergence {
                update_norm,
                tolerance,
                partial: Partial::Component(comp.clone()),
            };
            (omega, tension, comp.diagnostics, Some(err))
        }
        Err(err) => return Err(err.into()),
    };
    prepare(dir)?;
    let t: Array1<f64> = e.physical_times();
    io::write_tension(&dir.join("tension.csv"), &t, &omega, &tension)?;
    let body = CableDiagnostics {
        modes: &c.modes,
        mass_density: c.mass_density,
        length: c.length,
        component: &diag,
    };
    let status = if err.is_some() { "unconverged" } else { "ok" };
    io::write_json(
        &dir.join("diagnostics.json"),
        &report(status, cfg, e, &body),
    )?;
    err.map_or(Ok(()), |e| Err(e.into()))
}
