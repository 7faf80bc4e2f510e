//! Simultaneous sparse Fourier extension of several signals over a phase
//! grid that is longer than the observed record.
//!
//! The coefficients `X` (one column per signal) minimize the mixed norm
//! `‖X‖_{2,1}` subject to matching the data on the observed grid points `Ω`.
//! The solver is the split augmented-Lagrangian iteration: a row-wise group
//! shrink in coefficient space, a closed-form slack update, and a multiplier
//! step. Rows that are jointly zero across signals are what the mixed norm
//! rewards, which is how the shared phase structure enters.

use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView2, Zip};
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::robust::scalar_shrink;
use crate::spectral::ThetaGrid;
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlmConfig<T> {
    /// Penalty weight; the shrink thresholds are `1/γ`.
    pub gamma: T,
    /// Relative stopping tolerance: iterate until
    /// `‖Q^k − Q^{k−1}‖₂ ≤ tol·γ·‖F̄‖₂`.
    pub tol: T,
    pub max_iters: usize,
}

impl<T: Real> Default for AlmConfig<T> {
    fn default() -> Self {
        AlmConfig {
            gamma: T::one(),
            tol: T::lit(1e-6),
            max_iters: 500,
        }
    }
}

impl<T: Real> AlmConfig<T> {
    pub fn validate(&self) -> Result<(), T> {
        if !(self.gamma > T::zero()) {
            return Err(Error::InvalidConfig(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if !(self.tol >= T::zero()) {
            return Err(Error::InvalidConfig(format!(
                "tol must be nonnegative, got {}",
                self.tol
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be positive".into()));
        }
        Ok(())
    }
}

/// Iterate of the extension solver.
#[derive(Debug, Clone)]
pub struct GroupCoefficients<T: Real> {
    /// `N_b × M` Fourier coefficients.
    pub x: Array2<Complex<T>>,
    /// Slack `Ȳ`; identically zero on `Ω`, it carries the extension off `Ω`.
    pub y_bar: Array2<Complex<T>>,
    /// Multiplier `Q`.
    pub q: Array2<Complex<T>>,
    /// Zero-padded data `F̄`.
    pub f_bar: Array2<T>,
    /// `true` on the observed grid rows `Ω`.
    pub omega_mask: Array1<bool>,
    pub iterations: usize,
    /// `‖(Φ̄X + Z̄ − F̄)|_Ω‖₂ / ‖F̄‖₂` for the final iterate.
    pub residual: T,
    pub converged: bool,
}

impl<T: Real> GroupCoefficients<T> {
    pub fn n_points(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_signals(&self) -> usize {
        self.x.ncols()
    }

    pub fn observed_len(&self) -> usize {
        self.omega_mask.iter().filter(|&&b| b).count()
    }

    /// Real part of `Φ̄X`: the periodically extended signals on the full grid.
    pub fn extended_signals(&self) -> Array2<T> {
        fourier_synthesis_real(self.x.view())
    }
}

/// `Σ_rows ‖row‖₂`.
pub fn group_norm<T: Real>(x: ArrayView2<Complex<T>>) -> T {
    x.outer_iter()
        .map(|row| row.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt())
        .sum()
}

/// Row-wise group soft threshold: each row `v` becomes
/// `v·(‖v‖−τ)/‖v‖` if `‖v‖ > τ`, else zero.
pub fn group_shrink<T: Real>(v: ArrayView2<Complex<T>>, threshold: T) -> Array2<Complex<T>> {
    let mut out = v.to_owned();
    group_shrink_inplace(&mut out, threshold);
    out
}

fn group_shrink_inplace<T: Real>(v: &mut Array2<Complex<T>>, threshold: T) {
    for mut row in v.outer_iter_mut() {
        let norm = row.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt();
        if norm > threshold {
            let s = (norm - threshold) / norm;
            row.mapv_inplace(|c| c * s);
        } else {
            row.fill(Complex::new(T::zero(), T::zero()));
        }
    }
}

/// Unitary column transforms `Φ̄*` (analysis) and `Φ̄` (synthesis) with
/// `Φ̄(j,k) = e^{2πi·jk/N_b}/√N_b`.
struct ColumnFft<T: Real> {
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    scale: T,
    scratch: Vec<Complex<T>>,
}

impl<T: Real> ColumnFft<T> {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        ColumnFft {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            scale: T::one() / T::from_len(n).sqrt(),
            scratch: vec![Complex::new(T::zero(), T::zero()); n],
        }
    }

    fn apply(&mut self, data: &mut Array2<Complex<T>>, inverse: bool) {
        let plan = if inverse {
            &self.inverse
        } else {
            &self.forward
        };
        for mut col in data.columns_mut() {
            for (s, c) in self.scratch.iter_mut().zip(col.iter()) {
                *s = *c;
            }
            plan.process(&mut self.scratch);
            for (c, s) in col.iter_mut().zip(self.scratch.iter()) {
                *c = *s * self.scale;
            }
        }
    }
}

/// `Φ̄*·G`: forward DFT of each column divided by `√N_b`.
pub fn fourier_analysis<T: Real>(g: ArrayView2<Complex<T>>) -> Array2<Complex<T>> {
    let mut out = g.to_owned();
    ColumnFft::new(g.nrows()).apply(&mut out, false);
    out
}

/// `Φ̄*·G` for real data.
pub fn fourier_analysis_real<T: Real>(g: ArrayView2<T>) -> Array2<Complex<T>> {
    let mut out = g.mapv(|v| Complex::new(v, T::zero()));
    ColumnFft::new(g.nrows()).apply(&mut out, false);
    out
}

/// `Φ̄·X`: inverse DFT of each column divided by `√N_b`.
pub fn fourier_synthesis<T: Real>(x: ArrayView2<Complex<T>>) -> Array2<Complex<T>> {
    let mut out = x.to_owned();
    ColumnFft::new(x.nrows()).apply(&mut out, true);
    out
}

/// Real part of `Φ̄·X`; exact when `X` is conjugate-symmetric in each column.
pub fn fourier_synthesis_real<T: Real>(x: ArrayView2<Complex<T>>) -> Array2<T> {
    fourier_synthesis(x).mapv(|c| c.re)
}

/// Which multiplier update the outlier variant uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MultiplierUpdate {
    /// `Q + γ(Ȳ − Φ̄X − Z̄ + F̄)`: the residual of the constraint the other
    /// block updates minimize against.
    #[default]
    Consistent,
    /// `Q + γ(Z̄ − Φ̄X + F̄)`, kept for comparison.
    SlackFree,
}

/// Settings of the optional entrywise-sparse outlier block `Z̄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct OutlierBlock<T> {
    /// Multiplies the `1/γ` threshold of the `Z̄` shrink.
    pub threshold_scale: T,
    pub update: MultiplierUpdate,
}

#[derive(Debug, Clone)]
pub(crate) struct AlmOutput<T: Real> {
    pub coeffs: GroupCoefficients<T>,
    pub z_bar: Option<Array2<T>>,
}

/// Shared iteration for the plain and the outlier-robust extension.
///
/// `f_observed` holds the data on the first `n_obs` grid rows. A `warm` state
/// of matching shape seeds `Ȳ`, `Q` and `Z̄`; otherwise they start at zero.
pub(crate) fn run_alm<T: Real>(
    f_observed: ArrayView2<T>,
    grid: &ThetaGrid<T>,
    cfg: &AlmConfig<T>,
    outliers: Option<OutlierBlock<T>>,
    warm: Option<&AlmOutput<T>>,
) -> Result<AlmOutput<T>, T> {
    cfg.validate()?;
    let nb = grid.n_points;
    let (n_obs, m) = f_observed.dim();
    if n_obs > nb || m == 0 {
        return Err(Error::ShapeMismatch {
            row: 0,
            expected: nb,
            found: n_obs,
        });
    }
    let zero = Complex::new(T::zero(), T::zero());
    let mut f_bar = Array2::zeros((nb, m));
    f_bar
        .slice_mut(ndarray::s![..n_obs, ..])
        .assign(&f_observed);
    let omega_mask: Array1<bool> = (0..nb).map(|j| j < n_obs).collect();
    let f_norm = f_bar.iter().map(|&v| v * v).sum::<T>().sqrt();

    let mut x = Array2::from_elem((nb, m), zero);
    let mut y_bar = Array2::from_elem((nb, m), zero);
    let mut q = Array2::from_elem((nb, m), zero);
    let mut z_bar: Option<Array2<T>> = outliers.map(|_| Array2::zeros((nb, m)));
    if let Some(w) = warm.filter(|w| {
        w.coeffs.x.dim() == (nb, m)
            && w.coeffs.observed_len() == n_obs
            && w.z_bar.is_some() == outliers.is_some()
    }) {
        y_bar.assign(&w.coeffs.y_bar);
        q.assign(&w.coeffs.q);
        if let (Some(z), Some(wz)) = (z_bar.as_mut(), w.z_bar.as_ref()) {
            z.assign(wz);
        }
    }

    if f_norm == T::zero() {
        return Ok(AlmOutput {
            coeffs: GroupCoefficients {
                x,
                y_bar,
                q,
                f_bar,
                omega_mask,
                iterations: 1,
                residual: T::zero(),
                converged: true,
            },
            z_bar,
        });
    }

    let gamma = cfg.gamma;
    let inv_gamma = T::one() / gamma;
    let stop = cfg.tol * gamma * f_norm;
    let mut fft = ColumnFft::new(nb);
    let mut work = Array2::from_elem((nb, m), zero);
    let mut synth = Array2::from_elem((nb, m), zero);
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..cfg.max_iters {
        iterations += 1;
        // X-step: shrink the analysis of Ȳ (− Z̄) + F̄ + Q/γ.
        match &z_bar {
            None => Zip::from(&mut work)
                .and(&y_bar)
                .and(&f_bar)
                .and(&q)
                .for_each(|w, &y, &f, &qq| *w = y + f + qq * inv_gamma),
            Some(z) => Zip::from(&mut work)
                .and(&y_bar)
                .and(z)
                .and(&f_bar)
                .and(&q)
                .for_each(|w, &y, &zz, &f, &qq| *w = y - zz + f + qq * inv_gamma),
        }
        fft.apply(&mut work, false);
        group_shrink_inplace(&mut work, inv_gamma);
        x.assign(&work);
        synth.assign(&x);
        fft.apply(&mut synth, true);

        // Ȳ-step: zero on Ω (the data constraint is exact there), free elsewhere.
        for (j, (mut yrow, srow)) in y_bar.outer_iter_mut().zip(synth.outer_iter()).enumerate() {
            if j < n_obs {
                yrow.fill(zero);
                continue;
            }
            for (k, y) in yrow.iter_mut().enumerate() {
                let mut v = srow[k];
                if let Some(z) = &z_bar {
                    v = v + z[[j, k]];
                }
                *y = v - f_bar[[j, k]] - q[[j, k]] * inv_gamma;
            }
        }

        // Z̄-step: entrywise shrink, supported on Ω.
        if let (Some(z), Some(block)) = (z_bar.as_mut(), outliers) {
            let thr = block.threshold_scale * inv_gamma;
            for j in 0..nb {
                for k in 0..m {
                    z[[j, k]] = if j < n_obs {
                        let arg =
                            y_bar[[j, k]] - synth[[j, k]] + f_bar[[j, k]] + q[[j, k]] * inv_gamma;
                        scalar_shrink(arg.re, thr)
                    } else {
                        T::zero()
                    };
                }
            }
        }

        // Multiplier step.
        let mut dq2 = T::zero();
        for j in 0..nb {
            for k in 0..m {
                let r = match (&z_bar, outliers.map(|b| b.update)) {
                    (None, _) => y_bar[[j, k]] - synth[[j, k]] + f_bar[[j, k]],
                    (Some(z), Some(MultiplierUpdate::SlackFree)) => {
                        -synth[[j, k]] + z[[j, k]] + f_bar[[j, k]]
                    }
                    (Some(z), _) => y_bar[[j, k]] - synth[[j, k]] - z[[j, k]] + f_bar[[j, k]],
                };
                let step = r * gamma;
                dq2 = dq2 + step.norm_sqr();
                q[[j, k]] = q[[j, k]] + step;
            }
        }
        if dq2.sqrt() <= stop {
            converged = true;
            break;
        }
    }

    let mut res2 = T::zero();
    for j in 0..n_obs {
        for k in 0..m {
            let mut v = synth[[j, k]].re - f_bar[[j, k]];
            if let Some(z) = &z_bar {
                v = v + z[[j, k]];
            }
            res2 = res2 + v * v;
        }
    }
    let residual = res2.sqrt() / f_norm;
    Ok(AlmOutput {
        coeffs: GroupCoefficients {
            x,
            y_bar,
            q,
            f_bar,
            omega_mask,
            iterations,
            residual,
            converged,
        },
        z_bar,
    })
}

/// Group-sparse Fourier extension of the columns of `f_observed`, which
/// sample the signals on the first rows of `grid`.
///
/// Fails with [`Error::MaxItersExceeded`] (carrying the last iterate) when
/// the multiplier has not settled within `cfg.max_iters`.
pub fn extend<T: Real>(
    f_observed: ArrayView2<T>,
    grid: &ThetaGrid<T>,
    cfg: &AlmConfig<T>,
) -> Result<GroupCoefficients<T>, T> {
    let out = run_alm(f_observed, grid, cfg, None, None)?;
    if out.coeffs.converged {
        Ok(out.coeffs)
    } else {
        Err(Error::MaxItersExceeded {
            iterations: out.coeffs.iterations,
            residual: out.coeffs.residual.to_f64_lossy(),
            coefficients: Box::new(out.coeffs),
            outliers: None,
        })
    }
}

/// Constraint residual `‖(Φ̄X − F̄)|_Ω‖₂ / ‖F̄‖₂` of a coefficient matrix.
pub fn constraint_residual<T: Real>(state: &GroupCoefficients<T>) -> T {
    let synth = state.extended_signals();
    let mut num = T::zero();
    let mut den = T::zero();
    Zip::from(synth.rows())
        .and(state.f_bar.rows())
        .and(&state.omega_mask)
        .for_each(|s, f, &obs| {
            if obs {
                for (a, b) in s.iter().zip(f.iter()) {
                    num = num + (*a - *b) * (*a - *b);
                    den = den + *b * *b;
                }
            }
        });
    if den == T::zero() {
        T::zero()
    } else {
        (num / den).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn norm_cases() {
        assert_eq!(
            group_norm(Array2::<Complex<f64>>::zeros((3, 2)).view()),
            0.0
        );
        assert!((group_norm(array![[c(3.0, 0.0), c(4.0, 0.0)]].view()) - 5.0).abs() < 1e-15);
        let id = array![[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        assert_eq!(group_norm(id.view()), 2.0);
    }

    #[test]
    fn shrink_cases() {
        let v = array![[c(3.0, 0.0), c(4.0, 0.0)], [c(0.5, 0.5), c(0.0, 1.0)]];
        let s = group_shrink(v.view(), 2.0);
        assert!((s[[0, 0]] - c(1.8, 0.0)).norm() < 1e-15);
        assert!((s[[0, 1]] - c(2.4, 0.0)).norm() < 1e-15);
        assert_eq!(s[[1, 0]], c(0.0, 0.0));
        assert_eq!(s[[1, 1]], c(0.0, 0.0));
        assert_eq!(group_shrink(v.view(), 0.0), v);
    }

    #[test]
    fn single_mode_synthesis() {
        let n = 16;
        let mut x = Array2::zeros((n, 1));
        x[[3, 0]] = c(1.0, 0.0);
        let s = fourier_synthesis(x.view());
        for j in 0..n {
            let ang = 2.0 * std::f64::consts::PI * 3.0 * j as f64 / n as f64;
            let want = c(ang.cos(), ang.sin()) / (n as f64).sqrt();
            assert!((s[[j, 0]] - want).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_data_finishes_immediately() {
        let grid = ThetaGrid::new(0.0, 4, 32).unwrap();
        let f = Array2::zeros((17, 2));
        let out = extend(f.view(), &grid, &AlmConfig::default()).unwrap();
        assert_eq!(out.iterations, 1);
        assert!(out.x.iter().all(|v| v.norm() == 0.0));
    }
}
