//! Cable tension from vibration records under the taut-string model
//! `F = 4mL²(ω_n / 2πn)²`, with the harmonic relation `ω_n = n·ω_1` used to
//! pool evidence from several modes into one fundamental frequency.

use ndarray::Array1;

use crate::driver::{initial_phase_guess, DriverConfig};
use crate::error::{Error, Result};
use crate::gn::refine_harmonics;
use crate::signal::{ComponentDiagnostics, PhaseFunction, SignalEnsemble};
use crate::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct CableSpec<T> {
    /// Mass per unit length `m` (kg/m).
    pub mass_density: T,
    /// Cable length `L` (m).
    pub length: T,
    /// Harmonic numbers pooled by [`harmonic_fuse`].
    pub modes: Vec<usize>,
}

impl<T: Real> CableSpec<T> {
    pub fn new(mass_density: T, length: T, modes: Vec<usize>) -> Result<Self, T> {
        let spec = CableSpec {
            mass_density,
            length,
            modes,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), T> {
        if !(self.mass_density > T::zero() && self.length > T::zero()) {
            return Err(Error::InvalidConfig(
                "mass density and length must be positive".into(),
            ));
        }
        if self.modes.is_empty() || self.modes.contains(&0) {
            return Err(Error::InvalidConfig(
                "modes must be positive integers".into(),
            ));
        }
        let mut sorted = self.modes.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.modes.len() {
            return Err(Error::InvalidConfig("modes must be distinct".into()));
        }
        Ok(())
    }
}

/// `F = 4mL²(ω_n / 2πn)²` pointwise, `ω_n` in rad/s.
pub fn tension_from_frequency<T: Real>(
    omega_n: &Array1<T>,
    n: usize,
    spec: &CableSpec<T>,
) -> Result<Array1<T>, T> {
    if n == 0 {
        return Err(Error::InvalidConfig("mode number must be positive".into()));
    }
    if let Some(index) = omega_n.iter().position(|&w| !(w > T::zero())) {
        return Err(Error::NonPositiveFrequency { index });
    }
    let k = T::lit(4.0) * spec.mass_density * spec.length * spec.length;
    let denom = T::two_pi() * T::from_len(n);
    Ok(omega_n.mapv(|w| {
        let f = w / denom;
        k * f * f
    }))
}

/// Fundamental frequency and tension estimated jointly from several modes.
#[derive(Debug, Clone)]
pub struct FusedTension<T: Real> {
    /// Fundamental phase on the rescaled time grid.
    pub phase: PhaseFunction<T>,
    /// `ω_1(t)` in rad per physical time unit.
    pub omega_1: Array1<T>,
    /// `F(t)` in N.
    pub tension: Array1<T>,
    pub diagnostics: ComponentDiagnostics,
}

/// Refines one fundamental phase `θ` against the modes in `spec`: mode `n`
/// is demodulated at `nθ` with its band divided by `n`, and its frequency
/// correction, divided by `n`, enters the energy-weighted average.
///
/// The starting phase is `cfg.initial_phases[0]` if given, else the
/// periodogram guess (which picks the strongest mode, so it should be the
/// fundamental).
pub fn harmonic_fuse<T: Real>(
    ensemble: &SignalEnsemble<T>,
    spec: &CableSpec<T>,
    cfg: &DriverConfig<T>,
) -> Result<FusedTension<T>, T> {
    spec.validate()?;
    cfg.validate()?;
    let values = ensemble.values();
    if ensemble.has_missing() {
        return Err(Error::InvalidConfig(
            "harmonic fusion needs complete records".into(),
        ));
    }
    let initial = match cfg.initial_phases.first() {
        Some(p) => p.clone(),
        None => initial_phase_guess(values.view(), ensemble.times())?,
    };
    let refined = refine_harmonics(values.view(), &initial, &spec.modes, &cfg.solver)?;
    let omega_1 = refined.phase.frequency() / ensemble.time_span();
    let tension = tension_from_frequency(&omega_1, 1, spec)?;
    Ok(FusedTension {
        phase: refined.phase,
        omega_1,
        tension,
        diagnostics: refined.diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit(modes: Vec<usize>) -> CableSpec<f64> {
        CableSpec::new(1.0, 1.0, modes).unwrap()
    }

    #[test]
    fn identity_case() {
        let f = tension_from_frequency(&Array1::from_elem(4, 2.0 * PI), 1, &unit(vec![1])).unwrap();
        assert!(f.iter().all(|&v| (v - 4.0).abs() < 1e-12));
    }

    #[test]
    fn second_mode_same_tension() {
        let f = tension_from_frequency(&Array1::from_elem(3, 4.0 * PI), 2, &unit(vec![1])).unwrap();
        assert!(f.iter().all(|&v| (v - 4.0).abs() < 1e-12));
    }

    #[test]
    fn quadratic_law() {
        let w = Array1::from_vec(vec![1.0, 2.5, 7.0]);
        let s = unit(vec![1]);
        let f1 = tension_from_frequency(&w, 3, &s).unwrap();
        let f2 = tension_from_frequency(&(&w * 2.0), 3, &s).unwrap();
        for (a, b) in f1.iter().zip(f2.iter()) {
            assert!((4.0 * a - b).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn rejects_nonpositive_frequency() {
        let w = Array1::from_vec(vec![1.0, 0.0]);
        assert!(matches!(
            tension_from_frequency(&w, 1, &unit(vec![1])),
            Err(Error::NonPositiveFrequency { index: 1 })
        ));
    }

    #[test]
    fn spec_validation() {
        assert!(CableSpec::new(1.0, 1.0, vec![1, 1]).is_err());
        assert!(CableSpec::new(1.0, 1.0, vec![0]).is_err());
        assert!(CableSpec::new(-1.0, 1.0, vec![1]).is_err());
        assert!(CableSpec::new(1.0, 1.0, Vec::<usize>::new()).is_err());
    }
}
