//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are comma
//! separated. Unknown keys are rejected so that typos do not pass silently.

use std::path::Path;

use mahm::{DriverConfig64, FilterShape, SolverMode};

use crate::error::{CliError, Result};

/// Parameters of the built-in synthetic datasets. `None` keeps the
/// generator's own default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GeneratorSettings {
    pub n_samples: Option<usize>,
    pub m_signals: Option<usize>,
    pub noise_scale: Option<f64>,
    pub base_frequency: Option<f64>,
    pub modulation: Option<f64>,
    pub duration: Option<f64>,
    pub amplitudes: Option<Vec<f64>>,
    pub sensors: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CableSettings {
    pub modes: Vec<usize>,
    pub mass_density: f64,
    pub length: f64,
}

impl Default for CableSettings {
    fn default() -> Self {
        CableSettings {
            modes: vec![1, 2, 3, 4, 5],
            mass_density: 1.0,
            length: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    /// Subtract each row's mean on ingest.
    pub center: bool,
    pub driver: DriverConfig64,
    pub generator: GeneratorSettings,
    pub cable: CableSettings,
    /// Total cycles of linear starting phases, one per leading component.
    /// Components past the list start from the periodogram guess.
    pub initial_cycles: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            center: true,
            driver: DriverConfig64::default(),
            generator: GeneratorSettings::default(),
            cable: CableSettings::default(),
            initial_cycles: Vec::new(),
        }
    }
}

fn parse_shape(s: &str) -> Option<FilterShape> {
    match s {
        "raised_cosine" => Some(FilterShape::RaisedCosine),
        "sharp" => Some(FilterShape::Sharp),
        _ => None,
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| CliError::Config {
                line: i + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|message| CliError::Config {
                    line: i + 1,
                    message,
                })?;
        }
        Ok(cfg)
    }

    /// Applies one setting. The error is a message for the caller to place.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<V: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<V, String> {
            value
                .parse()
                .map_err(|_| format!("`{key}` expects a number, got `{value}`"))
        }
        fn list<V: std::str::FromStr>(
            key: &str,
            value: &str,
        ) -> std::result::Result<Vec<V>, String> {
            value.split(',').map(|s| num(key, s.trim())).collect()
        }
        let d = &mut self.driver;
        let gn = &mut d.solver.gn;
        let alm = &mut d.solver.alm;
        let g = &mut self.generator;
        match key {
            "seed" => self.seed = num(key, value)?,
            "center" => {
                self.center = value
                    .parse()
                    .map_err(|_| format!("`center` expects true or false, got `{value}`"))?
            }
            "mode" => d.solver.mode = value.parse::<SolverMode>()?,
            "max_components" => d.max_components = num(key, value)?,
            "residual_tol" | "tol" => d.residual_tol = num(key, value)?,
            "min_energy_reduction" => d.min_energy_reduction = num(key, value)?,
            "lambda" => gn.lambda = num(key, value)?,
            "envelope_lambda" => gn.envelope_lambda = Some(num(key, value)?),
            "eta_step" => gn.eta_step = Some(num(key, value)?),
            "epsilon_0" => gn.epsilon_0 = Some(num(key, value)?),
            "max_inner_iters" => gn.max_inner_iters = num(key, value)?,
            "gamma_floor" => gn.gamma_floor = num(key, value)?,
            "extension_factor" => gn.extension_factor = num(key, value)?,
            "filter_shape" => {
                gn.filter_shape =
                    parse_shape(value).ok_or_else(|| format!("unknown filter shape `{value}`"))?
            }
            "projection_shape" => {
                gn.projection_shape = Some(
                    parse_shape(value).ok_or_else(|| format!("unknown filter shape `{value}`"))?,
                )
            }
            "alm_gamma" => alm.gamma = num(key, value)?,
            "alm_tol" => alm.tol = num(key, value)?,
            "alm_max_iters" => alm.max_iters = num(key, value)?,
            "outlier_scale" => d.solver.robust.threshold_scale = num(key, value)?,
            "n_samples" => g.n_samples = Some(num(key, value)?),
            "m_signals" => g.m_signals = Some(num(key, value)?),
            "noise_scale" => g.noise_scale = Some(num(key, value)?),
            "base_frequency" => g.base_frequency = Some(num(key, value)?),
            "modulation" => g.modulation = Some(num(key, value)?),
            "duration" => g.duration = Some(num(key, value)?),
            "amplitudes" => g.amplitudes = Some(list(key, value)?),
            "sensors" => g.sensors = Some(list(key, value)?),
            "initial_cycles" => self.initial_cycles = list(key, value)?,
            "modes" => self.cable.modes = list(key, value)?,
            "mass_density" => self.cable.mass_density = num(key, value)?,
            "length" => self.cable.length = num(key, value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_pairs() {
        let cfg = RunConfig::parse(
            "# comment\n\nmode = robust\nseed=7\nlambda = 0.25\nmodes = 1, 2,3\nalm_max_iters = 50\n",
        )
        .unwrap();
        assert_eq!(cfg.driver.solver.mode, SolverMode::Robust);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.driver.solver.gn.lambda, 0.25);
        assert_eq!(cfg.cable.modes, vec![1, 2, 3]);
        assert_eq!(cfg.driver.solver.alm.max_iters, 50);
    }

    #[test]
    fn reports_the_offending_line() {
        match RunConfig::parse("seed = 1\nlamda = 0.2\n") {
            Err(CliError::Config { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("lamda"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            RunConfig::parse("seed 1"),
            Err(CliError::Config { line: 1, .. })
        ));
        assert!(matches!(
            RunConfig::parse("max_components = many"),
            Err(CliError::Config { line: 1, .. })
        ));
    }
}
