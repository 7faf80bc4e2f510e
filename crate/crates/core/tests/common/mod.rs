//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use mahm::{synth, PhaseFunction64};
use ndarray::{Array1, Array2, ArrayView2};
use num_complex::Complex64;

/// Relative l2 error of `got` against `want` over samples with
/// `t ∈ [0.05, 0.95]`.
pub fn interior_rel_err(got: &Array1<f64>, want: &Array1<f64>, t: &Array1<f64>) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..t.len() {
        if (0.05..=0.95).contains(&t[i]) {
            num += (got[i] - want[i]).powi(2);
            den += want[i].powi(2);
        }
    }
    (num / den).sqrt()
}

/// Interior error of a recovered phase against the first example's
/// frequency `40(t+1)` Hz.
pub fn example1_if_err(phase: &PhaseFunction64) -> f64 {
    let t = phase.times();
    let hz = phase.frequency() / (2.0 * PI);
    interior_rel_err(&hz, &t.mapv(synth::example1_frequency_hz), t)
}

/// Explicit unitary Fourier matrix `Φ(j,k) = e^{2πi·jk/N}/√N`.
pub fn fourier_matrix(n: usize) -> Array2<Complex64> {
    let s = 1.0 / (n as f64).sqrt();
    Array2::from_shape_fn((n, n), |(j, k)| {
        Complex64::from_polar(s, 2.0 * PI * ((j * k) % n) as f64 / n as f64)
    })
}

pub fn adjoint(m: &Array2<Complex64>) -> Array2<Complex64> {
    m.t().mapv(|c| c.conj())
}

fn shrink_rows(v: &mut Array2<Complex64>, tau: f64) {
    for mut row in v.outer_iter_mut() {
        let n = row.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let s = if n > tau { (n - tau) / n } else { 0.0 };
        row.mapv_inplace(|c| c * s);
    }
}

fn soft(x: f64, tau: f64) -> f64 {
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}

pub struct DenseAlm {
    pub x: Array2<Complex64>,
    pub z_bar: Array2<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Reference split-ALM with explicit matrices. `outlier_scale = None` runs
/// the plain extension; `Some(s)` adds the outlier block with threshold
/// `s/γ` and the consistent multiplier update.
pub fn dense_alm(
    f_obs: ArrayView2<f64>,
    n_points: usize,
    gamma: f64,
    tol: f64,
    max_iters: usize,
    outlier_scale: Option<f64>,
) -> DenseAlm {
    let (n_obs, m) = f_obs.dim();
    let phi = fourier_matrix(n_points);
    let phi_h = adjoint(&phi);
    let mut f_bar = Array2::<Complex64>::zeros((n_points, m));
    for j in 0..n_obs {
        for k in 0..m {
            f_bar[[j, k]] = Complex64::new(f_obs[[j, k]], 0.0);
        }
    }
    let f_norm = f_bar.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let mut x = Array2::<Complex64>::zeros((n_points, m));
    let mut y = x.clone();
    let mut q = x.clone();
    let mut z = Array2::<f64>::zeros((n_points, m));
    let zc = |z: &Array2<f64>| z.mapv(|v| Complex64::new(v, 0.0));
    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..max_iters {
        iterations += 1;
        let arg = &y - &zc(&z) + &f_bar + &q.mapv(|c| c / gamma);
        x = phi_h.dot(&arg);
        shrink_rows(&mut x, 1.0 / gamma);
        let s = phi.dot(&x);
        let z_c = zc(&z);
        for j in 0..n_points {
            for k in 0..m {
                y[[j, k]] = if j < n_obs {
                    Complex64::new(0.0, 0.0)
                } else {
                    s[[j, k]] + z_c[[j, k]] - f_bar[[j, k]] - q[[j, k]] / gamma
                };
            }
        }
        if let Some(scale) = outlier_scale {
            for j in 0..n_points {
                for k in 0..m {
                    z[[j, k]] = if j < n_obs {
                        let a = y[[j, k]] - s[[j, k]] + f_bar[[j, k]] + q[[j, k]] / gamma;
                        soft(a.re, scale / gamma)
                    } else {
                        0.0
                    };
                }
            }
        }
        let step = (&y - &s - &zc(&z) + &f_bar).mapv(|c| c * gamma);
        q = &q + &step;
        let dq = step.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if dq <= tol * gamma * f_norm {
            converged = true;
            break;
        }
    }
    DenseAlm {
        x,
        z_bar: z,
        iterations,
        converged,
    }
}

pub fn complex_rel_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    let num: f64 = a
        .iter()
        .zip(b.iter())
        .map(|(p, q)| (p - q).norm_sqr())
        .sum();
    let den: f64 = b.iter().map(|c| c.norm_sqr()).sum();
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

/// Minimizes `τ‖x‖₂ + ½‖x − v‖₂²` over `x ∈ ℝ^d` by gradient descent with
/// Armijo backtracking started at `v`, then keeps whichever of that point and
/// the origin has the lower objective.
pub fn numeric_group_prox(v: &[f64], tau: f64) -> Vec<f64> {
    let obj = |x: &[f64]| {
        let n = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        tau * n + 0.5 * x.iter().zip(v).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
    };
    let mut x = v.to_vec();
    for _ in 0..20_000 {
        let n = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n < 1e-300 {
            break;
        }
        let g: Vec<f64> = x
            .iter()
            .zip(v)
            .map(|(a, b)| tau * a / n + (a - b))
            .collect();
        let gg: f64 = g.iter().map(|a| a * a).sum();
        if gg.sqrt() < 1e-15 {
            break;
        }
        let f0 = obj(&x);
        let mut step = 1.0;
        loop {
            let cand: Vec<f64> = x.iter().zip(&g).map(|(a, d)| a - step * d).collect();
            if obj(&cand) <= f0 - 0.25 * step * gg || step < 1e-20 {
                x = cand;
                break;
            }
            step *= 0.5;
        }
    }
    let zero = vec![0.0; v.len()];
    if obj(&zero) <= obj(&x) {
        zero
    } else {
        x
    }
}

/// Minimizes `τ|z| + ½(z − x)²` by golden-section search on a bracket that
/// contains every candidate.
pub fn numeric_scalar_prox(x: f64, tau: f64) -> f64 {
    let obj = |z: f64| tau * z.abs() + 0.5 * (z - x).powi(2);
    let (mut lo, mut hi) = (-x.abs() - 1.0, x.abs() + 1.0);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if obj(a) < obj(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let z = 0.5 * (lo + hi);
    if obj(0.0) <= obj(z) {
        0.0
    } else {
        z
    }
}

/// Deterministic band-limited test columns on the first `n_obs` points of an
/// `n_points` grid: a few shared low modes with per-column amplitudes.
pub fn band_limited(seed: u64, n_points: usize, n_obs: usize, m: usize) -> Array2<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<usize> = (0..3).map(|_| rng.random_range(1..8)).collect();
    let amps: Vec<Vec<(f64, f64)>> = (0..m)
        .map(|_| {
            modes
                .iter()
                .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(0.0..2.0 * PI)))
                .collect()
        })
        .collect();
    Array2::from_shape_fn((n_obs, m), |(j, k)| {
        modes
            .iter()
            .zip(&amps[k])
            .map(|(&w, &(a, p))| a * (2.0 * PI * (w * j) as f64 / n_points as f64 + p).cos())
            .sum()
    })
}
