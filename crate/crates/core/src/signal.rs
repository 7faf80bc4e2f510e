//! Ensembles of sampled signals, phase functions and extracted modes.

use ndarray::{Array1, Array2, Axis};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::derivative_theta;
use crate::Real;

/// Smallest number of samples an ensemble may carry.
pub const MIN_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy)]
pub struct IngestOptions {
    /// Subtract the mean of the observed samples from every row.
    pub center: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions { center: true }
    }
}

/// `M` signals sampled on one shared time grid, rescaled to `[0, 1]`.
///
/// Missing samples are `NaN` in `values` and `false` in `mask`.
#[derive(Debug, Clone)]
pub struct SignalEnsemble<T: Real> {
    times: Array1<T>,
    values: Array2<T>,
    mask: Array2<bool>,
    time_origin: T,
    time_span: T,
    offsets: Array1<T>,
}

/// Affine map of strictly increasing instants onto `[0, 1]`.
///
/// Returns the rescaled instants together with the original origin and span.
pub fn rescale_times<T: Real>(times: &[T]) -> Result<(Array1<T>, T, T), T> {
    if times.len() < 2 {
        return Err(Error::TooFewSamples {
            found: times.len(),
            required: 2,
        });
    }
    if let Some(index) = times.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::NonMonotoneTime { index: index + 1 });
    }
    let origin = times[0];
    let span = times[times.len() - 1] - origin;
    let mut out: Array1<T> = times.iter().map(|&t| (t - origin) / span).collect();
    // Pin the endpoints so downstream code can rely on exact 0 and 1.
    out[0] = T::zero();
    let last = out.len() - 1;
    out[last] = T::one();
    Ok((out, origin, span))
}

impl<T: Real> SignalEnsemble<T> {
    /// Builds an ensemble from row vectors, one per signal.
    ///
    /// Entries that are `NaN`, or marked `false` in `mask`, are missing.
    pub fn ingest(
        times: &[T],
        rows: &[Vec<T>],
        mask: Option<&[Vec<bool>]>,
        options: IngestOptions,
    ) -> Result<Self, T> {
        let n = times.len();
        if rows.is_empty() {
            return Err(Error::ShapeMismatch {
                row: 0,
                expected: n,
                found: 0,
            });
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::ShapeMismatch {
                    row,
                    expected: n,
                    found: r.len(),
                });
            }
        }
        if let Some(mask) = mask {
            if mask.len() != rows.len() {
                return Err(Error::ShapeMismatch {
                    row: mask.len().min(rows.len()),
                    expected: rows.len(),
                    found: mask.len(),
                });
            }
            for (row, m) in mask.iter().enumerate() {
                if m.len() != n {
                    return Err(Error::ShapeMismatch {
                        row,
                        expected: n,
                        found: m.len(),
                    });
                }
            }
        }
        if n < MIN_SAMPLES {
            return Err(Error::TooFewSamples {
                found: n,
                required: MIN_SAMPLES,
            });
        }
        let (times, time_origin, time_span) = rescale_times(times)?;

        let m = rows.len();
        let mut values = Array2::zeros((m, n));
        let mut valid = Array2::from_elem((m, n), true);
        for j in 0..m {
            for i in 0..n {
                let v = rows[j][i];
                let ok = v.is_finite() && mask.is_none_or(|mk| mk[j][i]);
                valid[[j, i]] = ok;
                values[[j, i]] = if ok { v } else { T::nan() };
            }
        }
        let mut offsets = Array1::zeros(m);
        if options.center {
            for j in 0..m {
                let (sum, count) = values
                    .row(j)
                    .iter()
                    .zip(valid.row(j))
                    .filter(|(_, &ok)| ok)
                    .fold((T::zero(), 0usize), |(s, c), (&v, _)| (s + v, c + 1));
                if count > 0 {
                    let mean = sum / T::from_len(count);
                    offsets[j] = mean;
                    values.row_mut(j).mapv_inplace(|v| v - mean);
                }
            }
        }
        Ok(SignalEnsemble {
            times,
            values,
            mask: valid,
            time_origin,
            time_span,
            offsets,
        })
    }

    /// Builds an ensemble from a matrix whose rows are signals.
    pub fn from_array(times: &[T], values: &Array2<T>, options: IngestOptions) -> Result<Self, T> {
        let rows: Vec<Vec<T>> = values.outer_iter().map(|r| r.to_vec()).collect();
        Self::ingest(times, &rows, None, options)
    }

    pub(crate) fn with_values(&self, values: Array2<T>) -> Self {
        SignalEnsemble {
            values,
            ..self.clone()
        }
    }

    pub fn times(&self) -> &Array1<T> {
        &self.times
    }

    pub fn values(&self) -> &Array2<T> {
        &self.values
    }

    pub fn mask(&self) -> &Array2<bool> {
        &self.mask
    }

    /// Per-row means removed on ingest (zero when centering was off).
    pub fn offsets(&self) -> &Array1<T> {
        &self.offsets
    }

    /// Physical instant corresponding to rescaled time zero.
    pub fn time_origin(&self) -> T {
        self.time_origin
    }

    /// Physical duration of the record.
    pub fn time_span(&self) -> T {
        self.time_span
    }

    /// Sample instants in the original units.
    pub fn physical_times(&self) -> Array1<T> {
        self.times.mapv(|t| self.time_origin + t * self.time_span)
    }

    pub fn n_signals(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.values.ncols()
    }

    pub fn has_missing(&self) -> bool {
        self.mask.iter().any(|&ok| !ok)
    }
}

/// A sampled, nondecreasing phase `θ(t)` on the rescaled time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseFunction<T: Real> {
    times: Array1<T>,
    theta: Array1<T>,
}

impl<T: Real> PhaseFunction<T> {
    pub fn new(times: Array1<T>, theta: Array1<T>) -> Result<Self, T> {
        if times.len() != theta.len() {
            return Err(Error::ShapeMismatch {
                row: 0,
                expected: times.len(),
                found: theta.len(),
            });
        }
        if let Some(index) = theta.windows(2).into_iter().position(|w| w[1] < w[0]) {
            return Err(Error::NonMonotonePhase { index });
        }
        Ok(PhaseFunction { times, theta })
    }

    /// `θ(t) = 2π·cycles·t + offset`.
    pub fn linear(times: &Array1<T>, cycles: T, offset: T) -> Self {
        let theta = times.mapv(|t| T::two_pi() * cycles * t + offset);
        PhaseFunction {
            times: times.clone(),
            theta,
        }
    }

    pub(crate) fn from_parts_unchecked(times: Array1<T>, theta: Array1<T>) -> Self {
        PhaseFunction { times, theta }
    }

    pub fn times(&self) -> &Array1<T> {
        &self.times
    }

    pub fn theta(&self) -> &Array1<T> {
        &self.theta
    }

    pub fn start(&self) -> T {
        self.theta[0]
    }

    pub fn end(&self) -> T {
        self.theta[self.theta.len() - 1]
    }

    /// `θ(1) − θ(0)`.
    pub fn span(&self) -> T {
        self.end() - self.start()
    }

    /// Number of complete oscillations, `⌊(θ(1) − θ(0)) / 2π⌋`.
    pub fn oscillations(&self) -> usize {
        let l = (self.span() / T::two_pi()).floor();
        if l > T::zero() {
            l.to_usize().unwrap_or(0)
        } else {
            0
        }
    }

    /// `(θ − θ(0)) / (θ(1) − θ(0))`; all zeros for a flat phase.
    pub fn normalized(&self) -> Array1<T> {
        let span = self.span();
        let start = self.start();
        if span > T::zero() {
            self.theta.mapv(|v| (v - start) / span)
        } else {
            Array1::zeros(self.theta.len())
        }
    }

    /// Instantaneous frequency `θ'(t)` in radians per unit rescaled time.
    pub fn frequency(&self) -> Array1<T> {
        derivative_theta(&self.theta, &self.times)
    }

    /// Smallest forward difference of the samples; negative means a violation.
    pub fn min_increment(&self) -> T {
        self.theta
            .windows(2)
            .into_iter()
            .map(|w| w[1] - w[0])
            .fold(T::infinity(), T::min)
    }

    /// The phase `n·θ` of the `n`-th harmonic.
    pub fn harmonic(&self, n: usize) -> Self {
        let k = T::from_len(n);
        PhaseFunction {
            times: self.times.clone(),
            theta: self.theta.mapv(|v| v * k),
        }
    }
}

/// One extracted mode: a shared phase plus per-signal envelopes.
#[derive(Debug, Clone)]
pub struct ImfComponent<T: Real> {
    pub phase: PhaseFunction<T>,
    /// In-phase envelopes `a^j`, one row per signal.
    pub envelopes_a: Array2<T>,
    /// Quadrature envelopes `b^j`.
    pub envelopes_b: Array2<T>,
    /// `a² + b²`.
    pub amplitude: Array2<T>,
    /// Outlier estimate per sample (robust solver only).
    pub outliers: Option<Array2<T>>,
    pub diagnostics: ComponentDiagnostics,
}

impl<T: Real> ImfComponent<T> {
    pub fn new(
        phase: PhaseFunction<T>,
        envelopes_a: Array2<T>,
        envelopes_b: Array2<T>,
        diagnostics: ComponentDiagnostics,
    ) -> Self {
        let amplitude = &envelopes_a * &envelopes_a + &envelopes_b * &envelopes_b;
        ImfComponent {
            phase,
            envelopes_a,
            envelopes_b,
            amplitude,
            outliers: None,
            diagnostics,
        }
    }

    /// `a^j(t)·cos θ(t)` for every signal.
    pub fn modes(&self) -> Array2<T> {
        let carrier = self.phase.theta().mapv(T::cos);
        &self.envelopes_a * &carrier.insert_axis(Axis(0))
    }

    pub fn n_signals(&self) -> usize {
        self.envelopes_a.nrows()
    }
}

/// Iteration record for one η level of the continuation.
#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct EtaLevel {
    pub eta: f64,
    pub iterations: usize,
    pub final_update_norm: f64,
    pub min_beta: f64,
    pub zero_steps: usize,
}

#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct ComponentDiagnostics {
    pub eta_trace: Vec<EtaLevel>,
    pub total_iterations: usize,
    pub final_update_norm: f64,
    pub converged: bool,
    /// ALM runs (nonperiodic and robust paths) that stopped at their cap.
    pub alm_capped: usize,
    /// Relative drop of the largest residual norm achieved by this component.
    pub energy_reduction: f64,
}

#[derive(Debug, Clone, Copy, Default, Serialize, PartialEq, Eq)]
pub enum StopReason {
    /// Every residual row fell below the tolerance.
    #[default]
    ResidualTolerance,
    /// The configured component cap bound.
    ComponentCap,
    /// The last candidate was rejected (trend or negligible energy).
    Rejected,
    /// The input had no energy at all.
    ZeroInput,
    /// The last component did not converge; it is kept as the solver left it.
    Unconverged,
}

#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct Diagnostics {
    pub components: Vec<ComponentDiagnostics>,
    pub stop_reason: StopReason,
    /// Largest relative residual norm after every accepted component,
    /// starting with the input (1.0 for nonzero input).
    pub residual_trace: Vec<f64>,
    pub rejected: Option<String>,
}

/// Ordered modes, final residuals and iteration diagnostics.
#[derive(Debug, Clone)]
pub struct DecompositionResult<T: Real> {
    pub components: Vec<ImfComponent<T>>,
    pub residuals: Array2<T>,
    pub diagnostics: Diagnostics,
}

impl<T: Real> DecompositionResult<T> {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// `Σ_k a_k^j cos θ_k` for every signal `j`.
pub fn reconstruct<T: Real>(
    result: &DecompositionResult<T>,
    ensemble: &SignalEnsemble<T>,
) -> Array2<T> {
    let mut out = Array2::<T>::zeros((ensemble.n_signals(), ensemble.n_samples()));
    for c in &result.components {
        out = out + c.modes();
    }
    out
}
