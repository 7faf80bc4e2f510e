//! Extension with an explicit sparse outlier term, and the mean prefill used
//! for lost samples.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::group::{run_alm, AlmConfig, GroupCoefficients, MultiplierUpdate, OutlierBlock};
use crate::signal::SignalEnsemble;
use crate::spectral::ThetaGrid;
use crate::Real;

/// Soft threshold `sign(x)·max(|x| − τ, 0)`.
#[inline]
pub fn scalar_shrink<T: Real>(x: T, threshold: T) -> T {
    let m = x.abs() - threshold;
    if m > T::zero() {
        m.copysign(x)
    } else {
        T::zero()
    }
}

/// Elementwise [`scalar_shrink`].
pub fn scalar_shrink_matrix<T: Real>(x: ArrayView2<T>, threshold: T) -> Array2<T> {
    x.mapv(|v| scalar_shrink(v, threshold))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustConfig<T> {
    /// The outlier shrink uses `threshold_scale/γ`. An infinite scale turns
    /// the outlier block off.
    pub threshold_scale: T,
    pub update: MultiplierUpdate,
}

impl<T: Real> Default for RobustConfig<T> {
    fn default() -> Self {
        RobustConfig {
            threshold_scale: T::one(),
            update: MultiplierUpdate::Consistent,
        }
    }
}

impl<T: Real> RobustConfig<T> {
    pub(crate) fn block(&self) -> Result<OutlierBlock<T>, T> {
        if !(self.threshold_scale >= T::zero()) {
            return Err(Error::InvalidConfig(format!(
                "outlier threshold scale must be nonnegative, got {}",
                self.threshold_scale
            )));
        }
        Ok(OutlierBlock {
            threshold_scale: self.threshold_scale,
            update: self.update,
        })
    }
}

#[derive(Debug, Clone)]
pub struct RobustState<T: Real> {
    pub coeffs: GroupCoefficients<T>,
    /// Outlier estimate on the full grid; zero off `Ω`.
    pub z_bar: Array2<T>,
}

impl<T: Real> RobustState<T> {
    /// Outliers on the observed rows only.
    pub fn z(&self) -> ArrayView2<'_, T> {
        let n = self.coeffs.observed_len();
        self.z_bar.slice(ndarray::s![..n, ..])
    }
}

/// Robust extension: `F̄ ≈ Φ̄X + Z̄` on `Ω` with `X` row-sparse and `Z̄`
/// entrywise sparse.
pub fn extend_robust<T: Real>(
    f_observed: ArrayView2<T>,
    grid: &ThetaGrid<T>,
    cfg: &AlmConfig<T>,
    robust: &RobustConfig<T>,
) -> Result<RobustState<T>, T> {
    let out = run_alm(f_observed, grid, cfg, Some(robust.block()?), None)?;
    let z_bar = out.z_bar.expect("outlier block requested");
    if out.coeffs.converged {
        Ok(RobustState {
            coeffs: out.coeffs,
            z_bar,
        })
    } else {
        Err(Error::MaxItersExceeded {
            iterations: out.coeffs.iterations,
            residual: out.coeffs.residual.to_f64_lossy(),
            coefficients: Box::new(out.coeffs),
            outliers: Some(Box::new(z_bar)),
        })
    }
}

/// Replaces each missing entry by the mean of the observed entries of its
/// row. The mask is kept.
pub fn prefill_missing<T: Real>(ensemble: &SignalEnsemble<T>) -> Result<SignalEnsemble<T>, T> {
    let mut values = ensemble.values().clone();
    for (row, (mut vals, mask)) in values
        .outer_iter_mut()
        .zip(ensemble.mask().outer_iter())
        .enumerate()
    {
        let (sum, count) = vals
            .iter()
            .zip(mask.iter())
            .filter(|(_, &ok)| ok)
            .fold((T::zero(), 0usize), |(s, c), (&v, _)| (s + v, c + 1));
        if count == 0 {
            return Err(Error::AllMissing { row });
        }
        if count == vals.len() {
            continue;
        }
        let mean = sum / T::from_len(count);
        for (v, &ok) in vals.iter_mut().zip(mask.iter()) {
            if !ok {
                *v = mean;
            }
        }
    }
    Ok(ensemble.with_values(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::IngestOptions;

    #[test]
    fn shrink_examples() {
        assert_eq!(scalar_shrink(3.0, 1.0), 2.0);
        assert_eq!(scalar_shrink(-3.0, 1.0), -2.0);
        assert_eq!(scalar_shrink(0.5, 1.0), 0.0);
        assert_eq!(scalar_shrink(-1.0, 1.0), 0.0);
        assert_eq!(scalar_shrink(-0.25, 0.0), -0.25);
        assert_eq!(scalar_shrink(7.0, f64::INFINITY), 0.0);
    }

    fn ensemble_with_gap(row: Vec<f64>, gaps: &[usize]) -> SignalEnsemble<f64> {
        let n = row.len();
        let t: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let mut mask = vec![vec![true; n]];
        for &g in gaps {
            mask[0][g] = false;
        }
        SignalEnsemble::ingest(&t, &[row], Some(&mask), IngestOptions { center: false }).unwrap()
    }

    #[test]
    fn prefill_uses_row_mean() {
        let mut row = vec![0.0; 16];
        row[0] = 1.0;
        row[2] = 3.0;
        let gaps: Vec<usize> = (3..16).chain([1]).collect();
        let e = ensemble_with_gap(row, &gaps);
        let p = prefill_missing(&e).unwrap();
        assert_eq!(p.values()[[0, 1]], 2.0);
        assert_eq!(p.values()[[0, 15]], 2.0);
        assert_eq!(p.mask(), e.mask());
    }

    #[test]
    fn prefill_identity_and_constant() {
        let row: Vec<f64> = (0..16).map(|i| i as f64 * 0.5).collect();
        let e = ensemble_with_gap(row.clone(), &[]);
        assert_eq!(prefill_missing(&e).unwrap().values(), e.values());

        let e = ensemble_with_gap(vec![4.0; 16], &[3, 9]);
        assert!(prefill_missing(&e)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 4.0));
    }

    #[test]
    fn prefill_all_missing() {
        let gaps: Vec<usize> = (0..16).collect();
        let e = ensemble_with_gap(vec![1.0; 16], &gaps);
        assert!(matches!(
            prefill_missing(&e),
            Err(Error::AllMissing { row: 0 })
        ));
    }
}
