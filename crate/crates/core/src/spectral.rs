//! Resampling between the time grid and uniform phase grids, FFT
//! demodulation around a carrier, and low-pass projection of frequency
//! updates.
//!
//! Conventions: a spectrum `r̂` is the forward DFT divided by the number of
//! points, so a unit cosine carries `1/2` in each of its two bins; inverse
//! transforms are then unnormalized sums.

use ndarray::{Array1, ArrayView1};
use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signal::PhaseFunction;
use crate::spline::{dedup_knots, CubicSpline};
use crate::Real;

/// Taper used by [`lowpass_filter`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FilterShape {
    /// `1 + cos(πω/λ)` on `|ω| < λ`.
    #[default]
    RaisedCosine,
    /// Indicator of `|ω| < λ`; an exact orthogonal projection.
    Sharp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec<T> {
    pub lambda: T,
    /// Divide the raised cosine by two so the passband peak is one.
    pub normalize: bool,
    pub shape: FilterShape,
}

impl<T: Real> FilterSpec<T> {
    pub fn new(lambda: T) -> Result<Self, T> {
        if !(lambda > T::zero() && lambda <= T::lit(0.5)) {
            return Err(Error::InvalidConfig(format!(
                "filter parameter must lie in (0, 1/2], got {lambda}"
            )));
        }
        Ok(FilterSpec {
            lambda,
            normalize: true,
            shape: FilterShape::RaisedCosine,
        })
    }

    pub fn unnormalized(mut self) -> Self {
        self.normalize = false;
        self
    }

    pub fn with_shape(mut self, shape: FilterShape) -> Self {
        self.shape = shape;
        self
    }

    /// Same taper with the band divided by `n` (used for harmonic `n` so that
    /// the passband, measured in fundamental cycles, does not grow).
    pub(crate) fn narrowed(mut self, n: usize) -> Self {
        self.lambda = self.lambda / T::from_len(n);
        self
    }
}

/// Low-pass filter `χ_λ` evaluated at a normalized frequency.
pub fn lowpass_filter<T: Real>(omega: T, spec: &FilterSpec<T>) -> T {
    let w = omega.abs();
    if !(w < spec.lambda) {
        return T::zero();
    }
    match spec.shape {
        FilterShape::RaisedCosine => {
            let v = T::one() + (T::PI() * w / spec.lambda).cos();
            if spec.normalize {
                v / T::lit(2.0)
            } else {
                v
            }
        }
        FilterShape::Sharp => {
            if spec.normalize {
                T::one()
            } else {
                T::lit(2.0)
            }
        }
    }
}

/// Uniform mesh in the phase coordinate: `start + j·2π·L̄/N_b`, `j < N_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaGrid<T> {
    pub start: T,
    /// `L̄`: number of carrier periods in one period of the grid.
    pub period_factor: usize,
    /// `N_b`; even except on periodic grids.
    pub n_points: usize,
}

impl<T: Real> ThetaGrid<T> {
    pub fn new(start: T, period_factor: usize, n_points: usize) -> Result<Self, T> {
        if period_factor == 0 {
            return Err(Error::InvalidConfig(
                "grid period factor must be positive".into(),
            ));
        }
        if n_points < 4 || !n_points.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "grid size must be even and at least 4, got {n_points}"
            )));
        }
        Ok(ThetaGrid {
            start,
            period_factor,
            n_points,
        })
    }

    /// Grid for signals treated as periodic in phase: `L̄ = round(span/2π)`
    /// and one point per sample, the last sample being identified with the
    /// first. For a linear phase the grid points are the samples.
    pub fn periodic(phase: &PhaseFunction<T>, n_samples: usize) -> Result<Self, T> {
        check_span(phase)?;
        let l = (phase.span() / T::two_pi())
            .round()
            .to_usize()
            .unwrap_or(1)
            .max(1);
        if n_samples < 5 {
            return Err(Error::TooFewSamples {
                found: n_samples,
                required: 5,
            });
        }
        Ok(ThetaGrid {
            start: phase.start(),
            period_factor: l,
            n_points: n_samples - 1,
        })
    }

    /// Extension grid: `L̄ = 2⌊span/2π⌋`, `N_b = factor·N_s`. The observed
    /// data occupy roughly the first half.
    pub fn extended(
        phase: &PhaseFunction<T>,
        n_samples: usize,
        size_factor: usize,
    ) -> Result<Self, T> {
        check_span(phase)?;
        let l = phase.oscillations();
        Self::new(phase.start(), 2 * l, size_factor * n_samples)
    }

    /// Period of the grid in radians, `2π·L̄`.
    pub fn period(&self) -> T {
        T::two_pi() * T::from_len(self.period_factor)
    }

    pub fn spacing(&self) -> T {
        self.period() / T::from_len(self.n_points)
    }

    pub fn point(&self, j: usize) -> T {
        self.start + T::from_len(j) * self.spacing()
    }

    pub fn points(&self) -> Array1<T> {
        (0..self.n_points).map(|j| self.point(j)).collect()
    }

    /// Number of leading grid points with `j·Δθ ≤ span`.
    pub fn observed_len(&self, span: T) -> usize {
        let tol = T::lit(1e-9) * self.spacing();
        let count = ((span + tol) / self.spacing())
            .floor()
            .to_usize()
            .unwrap_or(0)
            + 1;
        count.min(self.n_points)
    }
}

fn check_span<T: Real>(phase: &PhaseFunction<T>) -> Result<(), T> {
    if phase.span() < T::two_pi() {
        return Err(Error::DegeneratePhase {
            span: phase.span().to_f64_lossy(),
        });
    }
    Ok(())
}

fn phase_spline<T: Real>(phase: &PhaseFunction<T>, signal: ArrayView1<T>) -> CubicSpline<T> {
    let th = phase.theta();
    let (x, y) = dedup_knots(th.as_slice().expect("contiguous phase"), &signal.to_vec());
    CubicSpline::not_a_knot(x, y)
}

/// Cubic-spline values of a signal, viewed as a function of phase, at the
/// grid points inside `[θ(0), θ(1)]`.
pub fn resample_to_theta<T: Real>(
    signal: ArrayView1<T>,
    phase: &PhaseFunction<T>,
    grid: &ThetaGrid<T>,
) -> Result<Array1<T>, T> {
    check_span(phase)?;
    let spline = phase_spline(phase, signal);
    let n = grid.observed_len(phase.span());
    Ok((0..n)
        .map(|j| spline.eval(grid.point(j).min(phase.end())))
        .collect())
}

/// Samples on every point of a periodic grid, closing the record with a
/// wrap-around knot `r(θ(0) + period) = r(θ(0))`. Data beyond one grid
/// period are ignored.
pub(crate) fn resample_periodic<T: Real>(
    signal: ArrayView1<T>,
    phase: &PhaseFunction<T>,
    grid: &ThetaGrid<T>,
) -> Array1<T> {
    let th = phase.theta();
    let end = grid.start + grid.period();
    let mut x = Vec::with_capacity(th.len() + 1);
    let mut y = Vec::with_capacity(th.len() + 1);
    for (&t, &v) in th.iter().zip(signal.iter()) {
        if t < end {
            x.push(t);
            y.push(v);
        }
    }
    let tol = T::lit(1e-9) * grid.spacing();
    if x.last().is_none_or(|&last| last < end - tol) {
        x.push(end);
        y.push(signal[0]);
    }
    let (x, y) = dedup_knots(&x, &y);
    let spline = CubicSpline::not_a_knot(x, y);
    (0..grid.n_points)
        .map(|j| spline.eval(grid.point(j)))
        .collect()
}

/// Forward DFT scaled by `1/N`.
pub(crate) fn spectrum<T: Real>(values: &[T]) -> Vec<Complex<T>> {
    let n = values.len();
    let mut buf: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let inv = T::one() / T::from_len(n);
    buf.iter_mut().for_each(|c| *c = *c * inv);
    buf
}

/// Unnormalized inverse DFT.
pub(crate) fn synthesize<T: Real>(mut coeffs: Vec<Complex<T>>) -> Vec<Complex<T>> {
    let n = coeffs.len();
    FftPlanner::new().plan_fft_inverse(n).process(&mut coeffs);
    coeffs
}

/// Signed frequency of FFT bin `k` on `n` points.
#[inline]
pub(crate) fn signed_bin(k: usize, n: usize) -> isize {
    if k <= n / 2 {
        k as isize
    } else {
        k as isize - n as isize
    }
}

#[inline]
fn bin_index(freq: isize, n: usize) -> usize {
    freq.rem_euclid(n as isize) as usize
}

/// Extracts in-phase and quadrature envelopes of `r` around the carrier that
/// completes `shift` cycles per grid period.
///
/// `r_theta` holds one full period on `grid`. The returned envelopes refer to
/// the absolute phase, i.e. `r ≈ a·cos θ + b·sin θ` at the grid points.
pub fn demodulate<T: Real>(
    r_theta: ArrayView1<T>,
    grid: &ThetaGrid<T>,
    shift: usize,
    spec: &FilterSpec<T>,
) -> Result<(Array1<T>, Array1<T>), T> {
    let n = r_theta.len();
    if n != grid.n_points {
        return Err(Error::ShapeMismatch {
            row: 0,
            expected: grid.n_points,
            found: n,
        });
    }
    let l = T::from_len(shift);
    let band = spec.lambda * l;
    let limit = T::from_len(n / 2) - l;
    if band >= limit {
        return Err(Error::BandOverflow {
            band: band.to_f64_lossy(),
            limit: limit.to_f64_lossy(),
        });
    }
    let r_hat = spectrum(&r_theta.to_vec());
    let s = shift as isize;
    let mut a_hat = vec![Complex::new(T::zero(), T::zero()); n];
    let mut b_hat = a_hat.clone();
    let max_w = band.ceil().to_isize().unwrap_or(0);
    let i = Complex::new(T::zero(), T::one());
    for w in -max_w..=max_w {
        let chi = lowpass_filter(T::from_isize(w).unwrap() / l, spec);
        if chi == T::zero() {
            continue;
        }
        let up = r_hat[bin_index(w + s, n)];
        let down = r_hat[bin_index(w - s, n)];
        let k = bin_index(w, n);
        a_hat[k] = (up + down) * chi;
        b_hat[k] = i * (up - down) * chi;
    }
    let a_rel = synthesize(a_hat);
    let b_rel = synthesize(b_hat);
    debug_assert!({
        let scale = r_theta.iter().fold(T::one(), |m, v| m.max(v.abs()));
        a_rel
            .iter()
            .chain(b_rel.iter())
            .all(|c| c.im.abs() <= T::lit(1e-6) * scale)
    });

    // Envelopes above refer to θ − θ(0); rotate onto the absolute phase.
    let (s0, c0) = grid.start.sin_cos();
    let a = a_rel
        .iter()
        .zip(&b_rel)
        .map(|(ar, br)| ar.re * c0 - br.re * s0)
        .collect();
    let b = a_rel
        .iter()
        .zip(&b_rel)
        .map(|(ar, br)| ar.re * s0 + br.re * c0)
        .collect();
    Ok((a, b))
}

/// Cubic-spline values of grid data at `θ(t_i)`, treating the grid as one
/// period (phases past the last point wrap around).
pub fn resample_to_time<T: Real>(
    on_grid: ArrayView1<T>,
    grid: &ThetaGrid<T>,
    phase: &PhaseFunction<T>,
) -> Array1<T> {
    let n = grid.n_points;
    let mut x: Vec<T> = (0..n).map(|j| grid.point(j)).collect();
    let mut y = on_grid.to_vec();
    x.push(grid.start + grid.period());
    y.push(on_grid[0]);
    let spline = CubicSpline::not_a_knot(x, y);
    let period = grid.period();
    phase.theta().mapv(|th| {
        let mut rel = th - grid.start;
        if rel > period || rel < T::zero() {
            rel = rel - (rel / period).floor() * period;
        }
        spline.eval(grid.start + rel)
    })
}

/// Low-pass projection of a function of time onto slowly varying functions
/// of the phase: modes up to `η·L_θ` cycles over the record.
///
/// The input is resampled to a uniform normalized-phase mesh, mirrored (even
/// reflection, endpoints not repeated) to make it periodic, filtered with the
/// normalized raised cosine and mapped back. `η = 0` keeps only the mean.
pub fn project_lowfreq<T: Real>(
    values: ArrayView1<T>,
    phase: &PhaseFunction<T>,
    eta: T,
) -> Array1<T> {
    project_lowfreq_with(values, phase, eta, FilterShape::RaisedCosine)
}

pub fn project_lowfreq_with<T: Real>(
    values: ArrayView1<T>,
    phase: &PhaseFunction<T>,
    eta: T,
    shape: FilterShape,
) -> Array1<T> {
    let n = values.len();
    if n < 2 || phase.span() <= T::zero() {
        let mean = values.iter().copied().sum::<T>() / T::from_len(n.max(1));
        return Array1::from_elem(n, mean);
    }
    let norm = phase.normalized();
    let (x, y) = dedup_knots(norm.as_slice().expect("contiguous"), &values.to_vec());
    if x.len() < 2 {
        let mean = y.iter().copied().sum::<T>() / T::from_len(y.len().max(1));
        return Array1::from_elem(n, mean);
    }
    let to_uniform = CubicSpline::not_a_knot(x, y);
    let step = T::one() / T::from_len(n - 1);
    let uniform: Vec<T> = (0..n)
        .map(|j| to_uniform.eval(T::from_len(j) * step))
        .collect();

    let mut mirrored = uniform.clone();
    mirrored.extend(uniform[1..n - 1].iter().rev());
    let p = mirrored.len();
    let mut hat = spectrum(&mirrored);

    let l = T::from_len(phase.oscillations().max(1));
    let spec = FilterSpec {
        lambda: eta,
        normalize: true,
        shape,
    };
    for (k, c) in hat.iter_mut().enumerate() {
        let f = signed_bin(k, p);
        if f == 0 {
            continue;
        }
        // Bin f of the doubled record is f/2 cycles over the original span.
        let w = if eta > T::zero() {
            lowpass_filter(T::from_isize(f).unwrap() / (T::lit(2.0) * l), &spec)
        } else {
            T::zero()
        };
        *c = *c * w;
    }
    let filtered = synthesize(hat);
    let uniform_grid: Vec<T> = (0..n).map(|j| T::from_len(j) * step).collect();
    let back = CubicSpline::not_a_knot(uniform_grid, filtered[..n].iter().map(|c| c.re).collect());
    norm.mapv(|u| back.eval(u))
}

/// First-derivative weights on an arbitrary stencil (Fornberg's recursion).
fn fd_weights<T: Real>(z: T, x: &[T]) -> Vec<T> {
    let n = x.len();
    let mut c = vec![[T::zero(); 2]; n];
    let mut c1 = T::one();
    let mut c4 = x[0] - z;
    c[0][0] = T::one();
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = T::one();
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 = c2 * c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (T::from_len(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - T::from_len(k) * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

/// Derivative with respect to time by five-point finite differences:
/// centered in the interior, one-sided five-point stencils at the two
/// points next to each boundary. Exact for polynomials of degree four.
pub fn derivative_theta<T: Real>(values: &Array1<T>, times: &Array1<T>) -> Array1<T> {
    let n = values.len();
    assert_eq!(n, times.len());
    if n < 2 {
        return Array1::zeros(n);
    }
    let width = n.min(5);
    let half = width / 2;
    let t = times.as_slice().expect("contiguous times");
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half).min(n - width);
            let w = fd_weights(t[i], &t[lo..lo + width]);
            w.iter()
                .enumerate()
                .fold(T::zero(), |acc, (k, &wk)| acc + wk * values[lo + k])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn uniform(n: usize) -> Array1<f64> {
        (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn filter_values() {
        let raw = FilterSpec::new(0.5).unwrap().unnormalized();
        assert_eq!(lowpass_filter(0.0, &raw), 2.0);
        let s = FilterSpec::new(0.5f64).unwrap();
        assert_eq!(lowpass_filter(0.0, &s), 1.0);
        assert_eq!(lowpass_filter(0.5, &s), 0.0);
        assert!((lowpass_filter(0.25, &s) - 0.5).abs() < 1e-15);
        assert_eq!(lowpass_filter(0.7, &s), 0.0);
    }

    #[test]
    fn filter_spec_bounds() {
        assert!(FilterSpec::new(0.0).is_err());
        assert!(FilterSpec::new(0.51).is_err());
        assert!(FilterSpec::new(0.5).is_ok());
    }

    #[test]
    fn derivative_of_low_polynomials_is_exact() {
        let t = uniform(64);
        let d1 = derivative_theta(&t.clone(), &t);
        assert!(d1.iter().all(|&v| (v - 1.0).abs() < 1e-12));
        let sq = t.mapv(|x| x * x);
        let d2 = derivative_theta(&sq, &t);
        for (d, x) in d2.iter().zip(t.iter()) {
            assert!((d - 2.0 * x).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_nonuniform_grid() {
        let t: Array1<f64> = (0..40).map(|i| (i as f64 / 39.0).powf(1.3)).collect();
        let q = t.mapv(|x| x.powi(4) - x);
        let d = derivative_theta(&q, &t);
        for (dv, x) in d.iter().zip(t.iter()) {
            assert!((dv - (4.0 * x.powi(3) - 1.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn derivative_of_sine() {
        let t = uniform(512);
        let s = t.mapv(|x| (4.0 * PI * x).sin());
        let d = derivative_theta(&s, &t);
        let err = d
            .iter()
            .zip(t.iter())
            .map(|(dv, x)| (dv - 4.0 * PI * (4.0 * PI * x).cos()).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-5, "max error {err}");
    }

    #[test]
    fn grid_spacing_and_points() {
        let g = ThetaGrid::new(1.0, 3, 12).unwrap();
        assert!((g.spacing() - 2.0 * PI * 3.0 / 12.0).abs() < 1e-15);
        assert_eq!(g.points().len(), 12);
        assert!(ThetaGrid::new(0.0, 3, 11).is_err());
    }

    #[test]
    fn resample_linear_phase_is_identity() {
        let n = 128;
        let t = uniform(n + 1);
        // 129 samples on [0,1]; grid of 128 points covers [0, 2πL) exactly.
        let phase = PhaseFunction::linear(&t, 8.0, 0.0);
        let sig = t.mapv(|x| (2.0 * PI * 8.0 * x).cos() + x);
        let grid = ThetaGrid::new(0.0, 8, n).unwrap();
        let r = resample_to_theta(sig.view(), &phase, &grid).unwrap();
        assert_eq!(r.len(), n);
        for j in 0..n {
            assert!((r[j] - sig[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn resample_constant() {
        let t = uniform(100);
        let phase = PhaseFunction::new(t.clone(), t.mapv(|x| 30.0 * x * x + 5.0 * x)).unwrap();
        let grid = ThetaGrid::extended(&phase, 100, 2).unwrap();
        let r = resample_to_theta(Array1::from_elem(100, 1.0).view(), &phase, &grid).unwrap();
        assert!(r.iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn resample_degenerate_phase() {
        let t = uniform(32);
        let phase = PhaseFunction::linear(&t, 0.5, 0.0);
        let grid = ThetaGrid::new(0.0, 1, 32).unwrap();
        let err = resample_to_theta(t.view(), &phase, &grid).unwrap_err();
        assert!(matches!(err, Error::DegeneratePhase { .. }));
    }

    fn chirp_phase(t: &Array1<f64>) -> PhaseFunction<f64> {
        PhaseFunction::new(
            t.clone(),
            t.mapv(|x| 40.0 * PI * (x + 1.0).powi(2) - 40.0 * PI),
        )
        .unwrap()
    }

    /// Max error of resampling `cos θ(t)` onto the uniform phase grid.
    fn chirp_resample_error(n: usize) -> (f64, f64) {
        let t = uniform(n);
        let phase = chirp_phase(&t);
        let sig = phase.theta().mapv(f64::cos);
        let grid = ThetaGrid::new(0.0, 60, 2 * n).unwrap();
        let r = resample_to_theta(sig.view(), &phase, &grid).unwrap();
        let err = r
            .iter()
            .enumerate()
            .map(|(j, v)| (v - grid.point(j).cos()).abs())
            .fold(0.0, f64::max);
        // Cubic spline bound (5/384)·h⁴·max|f''''| with f = cos, h the largest knot gap.
        let h = phase
            .theta()
            .windows(2)
            .into_iter()
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max);
        (err, 5.0 / 384.0 * h.powi(4))
    }

    #[test]
    fn resample_chirp_within_spline_bound() {
        // Not-a-knot end conditions cost a small constant factor over the
        // clamped bound near the ends; the order is what matters.
        let (err, bound) = chirp_resample_error(512);
        assert!(err <= 2.0 * bound, "err {err} bound {bound}");
        let (fine, _) = chirp_resample_error(1024);
        assert!(fine < err / 8.0, "{fine} vs {err}");
        let (err, _) = chirp_resample_error(8192);
        assert!(err <= 1e-6, "err {err}");
    }

    fn demod_case(sig: impl Fn(f64) -> f64, start: f64) -> (Array1<f64>, Array1<f64>) {
        let grid = ThetaGrid::new(start, 16, 256).unwrap();
        let r = grid.points().mapv(sig);
        let spec = FilterSpec::new(0.5).unwrap();
        demodulate(r.view(), &grid, 16, &spec).unwrap()
    }

    #[test]
    fn demodulate_cosine() {
        let (a, b) = demod_case(f64::cos, 0.7);
        assert!(a.iter().all(|v| (v - 1.0).abs() < 1e-10));
        assert!(b.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn demodulate_sine() {
        let (a, b) = demod_case(f64::sin, 0.0);
        assert!(a.iter().all(|v| v.abs() < 1e-10));
        assert!(b.iter().all(|v| (v - 1.0).abs() < 1e-10));
    }

    #[test]
    fn demodulate_zero() {
        let (a, b) = demod_case(|_| 0.0, 0.0);
        assert!(a.iter().chain(b.iter()).all(|&v| v == 0.0));
    }

    #[test]
    fn demodulate_unnormalized_doubles() {
        let grid = ThetaGrid::new(0.0, 16, 256).unwrap();
        let r = grid.points().mapv(f64::cos);
        let spec = FilterSpec::new(0.5).unwrap().unnormalized();
        let (a, _) = demodulate(r.view(), &grid, 16, &spec).unwrap();
        assert!(a.iter().all(|v| (v - 2.0).abs() < 1e-10));
    }

    #[test]
    fn demodulate_band_overflow() {
        let grid = ThetaGrid::new(0.0, 60, 128).unwrap();
        let r = Array1::zeros(128);
        let err = demodulate(r.view(), &grid, 60, &FilterSpec::new(0.5).unwrap()).unwrap_err();
        assert!(matches!(err, Error::BandOverflow { .. }));
    }

    #[test]
    fn resample_to_time_identity_and_constant() {
        let n = 128;
        let t = uniform(n + 1);
        let phase = PhaseFunction::linear(&t, 4.0, 0.0);
        let grid = ThetaGrid::new(0.0f64, 4, n).unwrap();
        let vals = grid.points().mapv(|th| (th / 8.0).sin());
        let back = resample_to_time(vals.view(), &grid, &phase);
        for j in 0..n {
            assert!((back[j] - vals[j]).abs() < 1e-12);
        }
        let c = resample_to_time(Array1::from_elem(n, 2.5).view(), &grid, &phase);
        assert!(c.iter().all(|&v| (v - 2.5).abs() < 1e-12));
    }

    #[test]
    fn envelope_round_trip_through_phase() {
        let n = 512;
        let t = uniform(n);
        let phase = chirp_phase(&t);
        let env = t.mapv(|x| 1.0 + 0.3 * (PI * x).sin().powi(2));
        let grid = ThetaGrid::extended(&phase, n, 2).unwrap();
        let on_grid = resample_to_theta(env.view(), &phase, &grid).unwrap();
        // Hold the last value over the padding so the spline sees no jump.
        let mut full = Array1::from_elem(grid.n_points, on_grid[on_grid.len() - 1]);
        full.slice_mut(ndarray::s![..on_grid.len()])
            .assign(&on_grid);
        let back = resample_to_time(full.view(), &grid, &phase);
        let last = grid.point(on_grid.len() - 1);
        let err = back
            .iter()
            .zip(env.iter())
            .zip(phase.theta().iter())
            .filter(|(_, &th)| th <= last)
            .map(|((a, b), _)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-6, "{err}");
    }

    #[test]
    fn projection_keeps_constants() {
        let t = uniform(200);
        let phase = chirp_phase(&t);
        for eta in [0.0, 0.1, 0.5] {
            let p = project_lowfreq(Array1::from_elem(200, 3.25).view(), &phase, eta);
            assert!(p.iter().all(|&v| (v - 3.25).abs() < 1e-12));
        }
    }

    #[test]
    fn projection_eta_zero_is_mean() {
        let n = 101;
        let t = uniform(n);
        let phase = PhaseFunction::linear(&t, 10.0, 0.0);
        let v = t.mapv(|x| (7.0 * x).sin() + x * x);
        let p = project_lowfreq(v.view(), &phase, 0.0);
        // Trapezoid mean in normalized phase (uniform here).
        let trap = (v.sum() - 0.5 * (v[0] + v[n - 1])) / (n - 1) as f64;
        assert!(p.iter().all(|&x| (x - trap).abs() < 1e-12));
    }

    #[test]
    fn projection_stopband_attenuates() {
        let n = 513;
        let t = uniform(n);
        let phase = PhaseFunction::linear(&t, 40.0, 0.0);
        // m = 12 cycles per span, η·L = 0.25·40 = 10 < 12.
        let v = phase.normalized().mapv(|u| (2.0 * PI * 12.0 * u).cos());
        let p = project_lowfreq(v.view(), &phase, 0.25);
        let peak = p.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(peak <= 1e-3, "{peak}");
    }

    #[test]
    fn sharp_projection_is_idempotent() {
        let n = 257;
        let t = uniform(n);
        let phase = PhaseFunction::linear(&t, 60.0, 0.3);
        let v = t.mapv(|x| (5.0 * x).sin() + (31.0 * x).cos() + x);
        let once = project_lowfreq_with(v.view(), &phase, 0.2, FilterShape::Sharp);
        let twice = project_lowfreq_with(once.view(), &phase, 0.2, FilterShape::Sharp);
        let scale = once.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let diff = once
            .iter()
            .zip(twice.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff <= 1e-6 * scale, "{diff}");
    }
}
