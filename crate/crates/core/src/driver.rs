//! Greedy extraction of components one at a time.

use ndarray::{Array1, Array2, ArrayView2};
use rustfft::FftPlanner;

use crate::error::{Error, Partial, Result};
use crate::gn::{refine_component, SolverConfig, SolverMode};
use crate::robust::prefill_missing;
use crate::signal::{DecompositionResult, Diagnostics, PhaseFunction, SignalEnsemble, StopReason};
use crate::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct DriverConfig<T: Real> {
    /// Stop once every residual row satisfies `‖r^j‖ ≤ residual_tol·‖f^j‖`.
    pub residual_tol: T,
    pub max_components: usize,
    /// Reject a component that lowers the largest relative residual norm by
    /// less than this fraction.
    pub min_energy_reduction: T,
    pub solver: SolverConfig<T>,
    /// Starting phases, used in order for the first components.
    pub initial_phases: Vec<PhaseFunction<T>>,
}

impl<T: Real> Default for DriverConfig<T> {
    fn default() -> Self {
        DriverConfig {
            residual_tol: T::lit(1e-2),
            max_components: 8,
            min_energy_reduction: T::lit(1e-3),
            solver: SolverConfig::default(),
            initial_phases: Vec::new(),
        }
    }
}

impl<T: Real> DriverConfig<T> {
    pub fn with_mode(mut self, mode: SolverMode) -> Self {
        self.solver.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<(), T> {
        if !(self.residual_tol > T::zero()) {
            return Err(Error::InvalidConfig(format!(
                "residual_tol must be positive, got {}",
                self.residual_tol
            )));
        }
        if self.max_components == 0 {
            return Err(Error::InvalidConfig(
                "max_components must be at least 1".into(),
            ));
        }
        self.solver.alm.validate()
    }
}

fn row_norms<T: Real>(m: ArrayView2<T>) -> Array1<T> {
    m.outer_iter()
        .map(|r| r.iter().map(|&v| v * v).sum::<T>().sqrt())
        .collect()
}

fn max_relative<T: Real>(norms: &Array1<T>, reference: &Array1<T>) -> T {
    norms
        .iter()
        .zip(reference.iter())
        .filter(|(_, &r)| r > T::zero())
        .map(|(&n, &r)| n / r)
        .fold(T::zero(), T::max)
}

/// `θ(t) = 2π·L*·t` with `L*` the positive frequency bin of largest mean
/// power across the rows.
pub fn initial_phase_guess<T: Real>(
    residuals: ArrayView2<T>,
    times: &Array1<T>,
) -> Result<PhaseFunction<T>, T> {
    let n = residuals.ncols();
    if row_norms(residuals).iter().all(|&v| v == T::zero()) {
        return Err(Error::ZeroResidual);
    }
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut power = vec![T::zero(); n / 2 + 1];
    let mut buf = Vec::with_capacity(n);
    for row in residuals.outer_iter() {
        buf.clear();
        buf.extend(row.iter().map(|&v| num_complex::Complex::new(v, T::zero())));
        fft.process(&mut buf);
        for (p, c) in power.iter_mut().zip(buf.iter()) {
            *p = *p + c.norm_sqr();
        }
    }
    let best = power
        .iter()
        .enumerate()
        .skip(1)
        .fold((1usize, T::neg_infinity()), |(bk, bv), (k, &v)| {
            if v > bv {
                (k, v)
            } else {
                (bk, bv)
            }
        })
        .0;
    Ok(PhaseFunction::linear(times, T::from_len(best), T::zero()))
}

/// Peels components off the ensemble until the residual is small, the
/// component cap binds or a candidate is rejected.
///
/// In robust mode missing samples are first replaced by their row means.
pub fn decompose<T: Real>(
    ensemble: &SignalEnsemble<T>,
    cfg: &DriverConfig<T>,
) -> Result<DecompositionResult<T>, T> {
    cfg.validate()?;
    let filled;
    let source = if ensemble.has_missing() {
        if cfg.solver.mode != SolverMode::Robust {
            return Err(Error::InvalidConfig(
                "missing samples need the robust solver".into(),
            ));
        }
        filled = prefill_missing(ensemble)?;
        &filled
    } else {
        ensemble
    };
    let times = source.times();
    let mut residuals: Array2<T> = source.values().clone();
    let reference = row_norms(residuals.view());

    let mut result = DecompositionResult {
        components: Vec::new(),
        residuals: residuals.clone(),
        diagnostics: Diagnostics::default(),
    };
    if reference.iter().all(|&v| v == T::zero()) {
        result.diagnostics.stop_reason = StopReason::ZeroInput;
        return Ok(result);
    }
    let mut current = max_relative(&row_norms(residuals.view()), &reference);
    result
        .diagnostics
        .residual_trace
        .push(current.to_f64_lossy());
    result.diagnostics.stop_reason = StopReason::ComponentCap;

    for k in 0..cfg.max_components {
        if current <= cfg.residual_tol {
            result.diagnostics.stop_reason = StopReason::ResidualTolerance;
            break;
        }
        let initial = match cfg.initial_phases.get(k) {
            Some(p) => p.clone(),
            None => initial_phase_guess(residuals.view(), times)?,
        };
        let mut component = match refine_component(residuals.view(), &initial, &cfg.solver) {
            Ok(c) => c,
            Err(Error::NoConvergence {
                update_norm,
                tolerance,
                partial,
            }) => {
                // The unconverged mode is still peeled so the caller sees
                // what the solver reached.
                if let Partial::Component(c) = partial {
                    residuals = &residuals - &c.modes();
                    let after = max_relative(&row_norms(residuals.view()), &reference);
                    result.diagnostics.components.push(c.diagnostics.clone());
                    result.diagnostics.residual_trace.push(after.to_f64_lossy());
                    result.components.push(*c);
                }
                result.diagnostics.stop_reason = StopReason::Unconverged;
                result.residuals = residuals;
                return Err(Error::NoConvergence {
                    update_norm,
                    tolerance,
                    partial: Partial::Decomposition(Box::new(result)),
                });
            }
            Err(Error::DegeneratePhase { span }) => {
                result.diagnostics.stop_reason = StopReason::Rejected;
                result.diagnostics.rejected = Some(format!(
                    "component {} lost its oscillation (phase span {span:.3})",
                    k + 1
                ));
                break;
            }
            Err(e) => return Err(e),
        };
        if component.phase.oscillations() < 1 {
            result.diagnostics.stop_reason = StopReason::Rejected;
            result.diagnostics.rejected =
                Some(format!("component {} has less than one oscillation", k + 1));
            break;
        }
        let next = &residuals - &component.modes();
        let after = max_relative(&row_norms(next.view()), &reference);
        let reduction = (current - after) / current;
        if !(reduction >= cfg.min_energy_reduction) {
            result.diagnostics.stop_reason = StopReason::Rejected;
            result.diagnostics.rejected = Some(format!(
                "component {} reduced the residual by {:.3e}",
                k + 1,
                reduction.to_f64_lossy()
            ));
            break;
        }
        component.diagnostics.energy_reduction = reduction.to_f64_lossy();
        result
            .diagnostics
            .components
            .push(component.diagnostics.clone());
        result.diagnostics.residual_trace.push(after.to_f64_lossy());
        result.components.push(component);
        residuals = next;
        current = after;
        if k + 1 == cfg.max_components && current <= cfg.residual_tol {
            result.diagnostics.stop_reason = StopReason::ResidualTolerance;
        }
    }
    result.residuals = residuals;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::IngestOptions;
    use std::f64::consts::PI;

    fn t(n: usize) -> Array1<f64> {
        Array1::linspace(0.0, 1.0, n)
    }

    #[test]
    fn guess_pure_tone() {
        let tt = t(256);
        let r = tt
            .mapv(|x| (2.0 * PI * 17.0 * x).cos())
            .insert_axis(ndarray::Axis(0));
        let p = initial_phase_guess(r.view(), &tt).unwrap();
        assert!((p.end() - 2.0 * PI * 17.0).abs() < 1e-12);
    }

    #[test]
    fn guess_dominant_tone() {
        let tt = t(256);
        let r = tt
            .mapv(|x| (2.0 * PI * 9.0 * x).cos() + 10.0 * (2.0 * PI * 31.0 * x).cos())
            .insert_axis(ndarray::Axis(0));
        let p = initial_phase_guess(r.view(), &tt).unwrap();
        assert!((p.end() - 2.0 * PI * 31.0).abs() < 1e-12);
    }

    #[test]
    fn guess_rejects_zero() {
        let tt = t(32);
        let r = Array2::<f64>::zeros((2, 32));
        assert!(matches!(
            initial_phase_guess(r.view(), &tt),
            Err(Error::ZeroResidual)
        ));
    }

    #[test]
    fn zero_ensemble_is_empty() {
        let tt: Vec<f64> = t(64).to_vec();
        let e =
            SignalEnsemble::ingest(&tt, &[vec![0.0; 64]], None, IngestOptions::default()).unwrap();
        let r = decompose(&e, &DriverConfig::default()).unwrap();
        assert!(r.is_empty());
        assert_eq!(r.diagnostics.stop_reason, StopReason::ZeroInput);
    }
}
