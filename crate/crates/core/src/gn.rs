//! Gauss-Newton refinement of one shared phase across an ensemble.
//!
//! Each step demodulates every residual row around the current phase,
//! turns the rotation of the envelopes into a frequency correction, averages
//! the corrections with the envelope energies as weights, low-pass projects
//! the average and integrates it into a phase correction. The projection
//! band `η` is raised in steps up to `λ`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use num_complex::Complex;

use crate::error::{Error, Partial, Result};
use crate::group::{run_alm, AlmConfig, AlmOutput};
use crate::robust::RobustConfig;
use crate::signal::{ComponentDiagnostics, EtaLevel, ImfComponent, PhaseFunction};
use crate::spectral::{
    demodulate, derivative_theta, project_lowfreq_with, resample_periodic, resample_to_theta,
    resample_to_time, FilterShape, FilterSpec, ThetaGrid,
};
use crate::Real;

/// How envelopes are extracted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMode {
    /// Treat each row as periodic in the phase and demodulate directly.
    #[default]
    Periodic,
    /// Extend the rows jointly by group-sparse Fourier extension first.
    Nonperiodic,
    /// As `Nonperiodic`, with a sparse outlier term in the extension.
    Robust,
}

impl std::str::FromStr for SolverMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "periodic" => Ok(SolverMode::Periodic),
            "nonperiodic" => Ok(SolverMode::Nonperiodic),
            "robust" => Ok(SolverMode::Robust),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnConfig<T> {
    /// Stop the inner loop once `‖θ^{n+1} − θ^n‖₂` drops to this value.
    /// `None` means `1e-6·√N_s`.
    pub epsilon_0: Option<T>,
    /// Continuation step `Δη`; `None` means `λ/8`.
    pub eta_step: Option<T>,
    /// Final projection band.
    pub lambda: T,
    /// Band of the envelopes; `None` uses `lambda`.
    pub envelope_lambda: Option<T>,
    pub max_inner_iters: usize,
    /// `ε_Γ` relative to the largest envelope energy.
    pub gamma_floor: T,
    /// `N_b = extension_factor·N_s` on the extension grid.
    pub extension_factor: usize,
    /// Taper of the envelope band.
    pub filter_shape: FilterShape,
    /// Taper of the low-pass projection of the frequency correction. `None`
    /// picks [`FilterShape::Sharp`], or [`FilterShape::RaisedCosine`] in
    /// robust mode, where the ringing of a sharp cutoff gets absorbed by the
    /// outlier block instead of being corrected.
    pub projection_shape: Option<FilterShape>,
}

impl<T: Real> Default for GnConfig<T> {
    fn default() -> Self {
        GnConfig {
            epsilon_0: None,
            eta_step: None,
            lambda: T::lit(0.5),
            envelope_lambda: None,
            max_inner_iters: 100,
            gamma_floor: T::lit(1e-8),
            extension_factor: 2,
            filter_shape: FilterShape::RaisedCosine,
            projection_shape: None,
        }
    }
}

/// Defaults filled in for a given record length.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Resolved<T> {
    pub epsilon_0: T,
    pub eta_step: T,
    pub lambda: T,
    pub envelope: FilterSpec<T>,
}

impl<T: Real> GnConfig<T> {
    pub(crate) fn resolve(&self, n_samples: usize) -> Result<Resolved<T>, T> {
        let lambda = self.lambda;
        let eta_step = self.eta_step.unwrap_or(lambda / T::lit(8.0));
        let epsilon_0 = self
            .epsilon_0
            .unwrap_or(T::lit(1e-6) * T::from_len(n_samples).sqrt());
        if !(epsilon_0 > T::zero()) {
            return Err(Error::InvalidConfig(format!(
                "epsilon_0 must be positive, got {epsilon_0}"
            )));
        }
        if !(eta_step > T::zero() && eta_step <= lambda && lambda <= T::lit(0.5)) {
            return Err(Error::InvalidConfig(format!(
                "need 0 < eta_step <= lambda <= 1/2, got eta_step={eta_step}, lambda={lambda}"
            )));
        }
        if self.max_inner_iters == 0 {
            return Err(Error::InvalidConfig(
                "max_inner_iters must be positive".into(),
            ));
        }
        if self.extension_factor < 2 {
            return Err(Error::InvalidConfig(
                "extension_factor must be at least 2".into(),
            ));
        }
        if !(self.gamma_floor >= T::zero()) {
            return Err(Error::InvalidConfig(
                "gamma_floor must be nonnegative".into(),
            ));
        }
        let envelope =
            FilterSpec::new(self.envelope_lambda.unwrap_or(lambda))?.with_shape(self.filter_shape);
        Ok(Resolved {
            epsilon_0,
            eta_step,
            lambda,
            envelope,
        })
    }
}

/// Everything the refinement of a single component depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    pub mode: SolverMode,
    pub gn: GnConfig<T>,
    pub alm: AlmConfig<T>,
    pub robust: RobustConfig<T>,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        SolverConfig {
            mode: SolverMode::default(),
            gn: GnConfig::default(),
            alm: AlmConfig::default(),
            robust: RobustConfig::default(),
        }
    }
}

/// Envelopes of every row around one carrier.
#[derive(Debug, Clone)]
pub struct Envelopes<T> {
    pub a: Array2<T>,
    pub b: Array2<T>,
    /// Data minus the outlier-free fit, per sample (robust mode only).
    pub outliers: Option<Array2<T>>,
    /// The extension stopped at its iteration cap.
    pub alm_capped: bool,
}

/// Joint envelope extraction for all rows of `residuals` around `phase`,
/// with the envelope band `spec`.
pub fn envelopes<T: Real>(
    residuals: ArrayView2<T>,
    phase: &PhaseFunction<T>,
    spec: &FilterSpec<T>,
    cfg: &SolverConfig<T>,
) -> Result<Envelopes<T>, T> {
    envelopes_warm(residuals, phase, spec, cfg, &mut None)
}

/// [`envelopes`] with the extension seeded from, and its final state stored
/// in, `warm`. Successive Gauss-Newton iterates move the phase only a little,
/// so the previous multipliers are a close starting point.
fn envelopes_warm<T: Real>(
    residuals: ArrayView2<T>,
    phase: &PhaseFunction<T>,
    spec: &FilterSpec<T>,
    cfg: &SolverConfig<T>,
    warm: &mut Option<AlmOutput<T>>,
) -> Result<Envelopes<T>, T> {
    let (m, n) = residuals.dim();
    if phase.theta().len() != n {
        return Err(Error::ShapeMismatch {
            row: 0,
            expected: n,
            found: phase.theta().len(),
        });
    }
    let mut a = Array2::zeros((m, n));
    let mut b = Array2::zeros((m, n));
    match cfg.mode {
        SolverMode::Periodic => {
            let grid = ThetaGrid::periodic(phase, n)?;
            for j in 0..m {
                let r = resample_periodic(residuals.row(j), phase, &grid);
                let (at, bt) = demodulate(r.view(), &grid, grid.period_factor, spec)?;
                a.row_mut(j)
                    .assign(&resample_to_time(at.view(), &grid, phase));
                b.row_mut(j)
                    .assign(&resample_to_time(bt.view(), &grid, phase));
            }
            Ok(Envelopes {
                a,
                b,
                outliers: None,
                alm_capped: false,
            })
        }
        SolverMode::Nonperiodic | SolverMode::Robust => {
            let grid = ThetaGrid::extended(phase, n, cfg.gn.extension_factor)?;
            let rows: Vec<Array1<T>> = (0..m)
                .map(|j| resample_to_theta(residuals.row(j), phase, &grid))
                .collect::<Result<_, T>>()?;
            let n_obs = rows[0].len();
            let mut f_obs = Array2::zeros((n_obs, m));
            for (j, r) in rows.iter().enumerate() {
                f_obs.column_mut(j).assign(r);
            }
            let block = if cfg.mode == SolverMode::Robust {
                Some(cfg.robust.block()?)
            } else {
                None
            };
            // Outlier estimates made under an earlier phase are stale, so the
            // robust path always starts cold.
            let seed = if block.is_none() { warm.as_ref() } else { None };
            let out = run_alm(f_obs.view(), &grid, &cfg.alm, block, seed)?;
            let capped = !out.coeffs.converged;
            let extended = out.coeffs.extended_signals();
            *warm = Some(out);
            let mut outliers = (cfg.mode == SolverMode::Robust).then(|| Array2::zeros((m, n)));
            for j in 0..m {
                let col = extended.column(j);
                let (at, bt) = demodulate(col, &grid, grid.period_factor, spec)?;
                a.row_mut(j)
                    .assign(&resample_to_time(at.view(), &grid, phase));
                b.row_mut(j)
                    .assign(&resample_to_time(bt.view(), &grid, phase));
                if let Some(out) = outliers.as_mut() {
                    let fit = resample_to_time(col, &grid, phase);
                    out.row_mut(j).assign(&(&residuals.row(j) - &fit));
                }
            }
            Ok(Envelopes {
                a,
                b,
                outliers,
                alm_capped: capped,
            })
        }
    }
}

/// Least-squares envelopes `(a, b)` of a single row, `r ≈ a·cos θ + b·sin θ`.
pub fn envelope_step<T: Real>(
    residual_row: ArrayView1<T>,
    phase: &PhaseFunction<T>,
    cfg: &SolverConfig<T>,
) -> Result<(Array1<T>, Array1<T>), T> {
    let n = residual_row.len();
    let spec = cfg.gn.resolve(n)?.envelope;
    let env = envelopes(residual_row.insert_axis(Axis(0)), phase, &spec, cfg)?;
    Ok((env.a.row(0).to_owned(), env.b.row(0).to_owned()))
}

#[derive(Debug, Clone)]
pub struct FrequencyUpdate<T> {
    /// `Δω_j` per signal.
    pub delta_omega_per_signal: Array2<T>,
    /// `Γ`-weighted average across signals.
    pub delta_omega: Array1<T>,
    /// `Γ_j = a_j² + b_j²`.
    pub weights: Array2<T>,
}

/// Per-signal corrections `Δω_j = (a b' − b a') / (a² + b² + ε_Γ)` and their
/// energy-weighted mean. Points whose total weight does not exceed `ε_Γ` get
/// no correction.
pub fn frequency_update<T: Real>(
    a: ArrayView2<T>,
    b: ArrayView2<T>,
    times: &Array1<T>,
    gamma_floor: T,
) -> FrequencyUpdate<T> {
    let mut pooled = pool_updates(&[(1, a, b)], times, gamma_floor);
    pooled.pop().expect("one harmonic")
}

/// Frequency evidence from several harmonics of one fundamental. Row block
/// `n` is divided by its harmonic number before pooling, so the pooled
/// average refers to the fundamental. The per-harmonic updates are returned
/// first, the pooled one last (its per-signal matrix stacks all blocks).
fn pool_updates<T: Real>(
    blocks: &[(usize, ArrayView2<T>, ArrayView2<T>)],
    times: &Array1<T>,
    gamma_floor: T,
) -> Vec<FrequencyUpdate<T>> {
    let n = times.len();
    let max_gamma = blocks
        .iter()
        .flat_map(|(_, a, b)| a.iter().zip(b.iter()).map(|(&x, &y)| x * x + y * y))
        .fold(T::zero(), T::max);
    let eps = gamma_floor * max_gamma;

    let mut singles = Vec::with_capacity(blocks.len());
    for (harm, a, b) in blocks {
        let scale = T::from_len(*harm);
        let (m, _) = a.dim();
        let mut dw = Array2::zeros((m, n));
        let mut w = Array2::zeros((m, n));
        for j in 0..m {
            let aj = a.row(j).to_owned();
            let bj = b.row(j).to_owned();
            let da = derivative_theta(&aj, times);
            let db = derivative_theta(&bj, times);
            for i in 0..n {
                let g = aj[i] * aj[i] + bj[i] * bj[i];
                dw[[j, i]] = (aj[i] * db[i] - bj[i] * da[i]) / (g + eps) / scale;
                w[[j, i]] = g;
            }
        }
        singles.push((dw, w));
    }
    let pairs: Vec<_> = singles.iter().map(|(dw, w)| (dw, w)).collect();
    let pooled_delta = weighted_mean(&pairs, eps);
    if singles.len() == 1 {
        let (dw, w) = singles.pop().expect("one block");
        return vec![FrequencyUpdate {
            delta_omega_per_signal: dw,
            delta_omega: pooled_delta,
            weights: w,
        }];
    }
    let mut out: Vec<_> = singles
        .iter()
        .map(|(dw, w)| FrequencyUpdate {
            delta_omega_per_signal: dw.clone(),
            delta_omega: weighted_mean(&[(dw, w)], eps),
            weights: w.clone(),
        })
        .collect();
    let views_dw: Vec<_> = singles.iter().map(|(x, _)| x.view()).collect();
    let views_w: Vec<_> = singles.iter().map(|(_, x)| x.view()).collect();
    out.push(FrequencyUpdate {
        delta_omega_per_signal: ndarray::concatenate(Axis(0), &views_dw).expect("equal widths"),
        delta_omega: pooled_delta,
        weights: ndarray::concatenate(Axis(0), &views_w).expect("equal widths"),
    });
    out
}

/// `Σ w·d / Σ w` per sample over every row of every block, zero where the
/// total weight does not exceed `eps`. The sum runs on deviations from the
/// first row so that identical rows give that row back exactly.
fn weighted_mean<T: Real>(blocks: &[(&Array2<T>, &Array2<T>)], eps: T) -> Array1<T> {
    let n = blocks[0].0.ncols();
    let reference = blocks[0].0.row(0);
    let mut num = Array1::<T>::zeros(n);
    let mut den = Array1::<T>::zeros(n);
    for &(dw, w) in blocks {
        for (drow, wrow) in dw.outer_iter().zip(w.outer_iter()) {
            for i in 0..n {
                num[i] = num[i] + (drow[i] - reference[i]) * wrow[i];
                den[i] = den[i] + wrow[i];
            }
        }
    }
    (0..n)
        .map(|i| {
            if den[i] > eps {
                reference[i] + num[i] / den[i]
            } else {
                T::zero()
            }
        })
        .collect()
}

/// Result of one phase correction.
#[derive(Debug, Clone)]
pub struct PhaseStep<T: Real> {
    pub phase: PhaseFunction<T>,
    pub beta: T,
    /// `‖θ^{n+1} − θ^n‖₂`.
    pub update_norm: T,
}

/// Cumulative trapezoid integral starting at zero.
pub fn integrate_trapezoid<T: Real>(values: &Array1<T>, times: &Array1<T>) -> Array1<T> {
    let mut out = Array1::zeros(values.len());
    for i in 1..values.len() {
        let h = times[i] - times[i - 1];
        out[i] = out[i - 1] + h * (values[i] + values[i - 1]) / T::lit(2.0);
    }
    out
}

/// Largest `α ∈ [0, 1]` keeping `θ − α·Δθ` nondecreasing on every interval.
pub fn max_monotone_step<T: Real>(theta: &Array1<T>, delta: &Array1<T>) -> T {
    let mut beta = T::one();
    for i in 1..theta.len() {
        let d = theta[i] - theta[i - 1];
        let e = delta[i] - delta[i - 1];
        if e > T::zero() {
            beta = beta.min((d / e).max(T::zero()));
        }
    }
    beta
}

/// Projects `Δω` onto the band `η`, integrates it and takes the largest
/// monotonicity-preserving step.
pub fn phase_update<T: Real>(
    phase: &PhaseFunction<T>,
    delta_omega: &Array1<T>,
    eta: T,
    shape: FilterShape,
) -> PhaseStep<T> {
    phase_step(phase, delta_omega, T::zero(), eta, shape, false)
}

fn phase_step<T: Real>(
    phase: &PhaseFunction<T>,
    delta_omega: &Array1<T>,
    offset: T,
    eta: T,
    shape: FilterShape,
    whole_cycles: bool,
) -> PhaseStep<T> {
    let times = phase.times();
    let projected = project_lowfreq_with(delta_omega.view(), phase, eta, shape);
    let mut delta = integrate_trapezoid(&projected, times).mapv(|v| v + offset);
    let theta = phase.theta();
    let last = theta.len() - 1;
    if whole_cycles {
        // Move the span change to the nearest value that keeps a whole
        // number of cycles.
        let change = delta[last] - delta[0];
        let target = snap_span(phase.span() - change);
        let fix = phase.span() - target - change;
        delta = delta + &times.mapv(|t| fix * t);
    }
    let beta = max_monotone_step(theta, &delta);
    let mut new_theta = theta - &(&delta * beta);
    if whole_cycles && beta < T::one() {
        let span = new_theta[last] - new_theta[0];
        let fix = snap_span(span) - span;
        let candidate = &new_theta + &times.mapv(|t| fix * t);
        if candidate.windows(2).into_iter().all(|w| w[1] >= w[0]) {
            new_theta = candidate;
        }
    }
    // On the interval that limits β the increment is zero only up to
    // rounding; never let it go negative.
    for i in 1..new_theta.len() {
        if new_theta[i] < new_theta[i - 1] {
            new_theta[i] = new_theta[i - 1];
        }
    }
    let update_norm = (&new_theta - theta)
        .iter()
        .map(|&d| d * d)
        .sum::<T>()
        .sqrt();
    PhaseStep {
        phase: PhaseFunction::from_parts_unchecked(times.clone(), new_theta),
        beta,
        update_norm,
    }
}

/// Nearest positive multiple of `2π`.
fn snap_span<T: Real>(span: T) -> T {
    let cycles = (span / T::two_pi()).round().max(T::one());
    cycles * T::two_pi()
}

/// Constant phase misalignment left after integrating the frequency
/// correction: `½·arg Σ (a + ib)²·e^{−2i∫Δω}`. Squaring makes the estimate
/// blind to the sign of each envelope.
fn offset_estimate<T: Real>(a: &Array2<T>, b: &Array2<T>, integrated: &Array1<T>) -> T {
    let rot: Vec<Complex<T>> = integrated
        .iter()
        .map(|&v| Complex::from_polar(T::one(), -T::lit(2.0) * v))
        .collect();
    let row_sums: Vec<Complex<T>> = a
        .outer_iter()
        .zip(b.outer_iter())
        .map(|(arow, brow)| {
            let mut s = Complex::new(T::zero(), T::zero());
            for i in 0..rot.len() {
                let z = Complex::new(arow[i], brow[i]);
                s = s + z * z * rot[i];
            }
            s
        })
        .collect();
    // Only the argument matters: sum deviations from the first row and
    // divide by the row count, so identical rows reproduce that row's sum.
    let first = row_sums[0];
    let mut dev = Complex::new(T::zero(), T::zero());
    for s in &row_sums[1..] {
        dev = dev + (*s - first);
    }
    let acc = first + dev / T::from_len(row_sums.len());
    if acc.norm() == T::zero() {
        T::zero()
    } else {
        acc.arg() / T::lit(2.0)
    }
}

/// Outcome of refining a fundamental phase against one or more harmonics.
#[derive(Debug, Clone)]
pub(crate) struct Refined<T: Real> {
    pub phase: PhaseFunction<T>,
    /// Final envelopes per harmonic, in the order requested.
    pub envelopes: Vec<Envelopes<T>>,
    pub diagnostics: ComponentDiagnostics,
}

impl<T: Real> Refined<T> {
    pub(crate) fn into_component(mut self) -> ImfComponent<T> {
        let env = self.envelopes.swap_remove(0);
        let mut c = ImfComponent::new(self.phase, env.a, env.b, self.diagnostics);
        c.outliers = env.outliers;
        c
    }
}

fn envelopes_for_harmonics<T: Real>(
    residuals: ArrayView2<T>,
    phase: &PhaseFunction<T>,
    harmonics: &[usize],
    spec: &FilterSpec<T>,
    cfg: &SolverConfig<T>,
    warm: &mut [Option<AlmOutput<T>>],
) -> Result<Vec<Envelopes<T>>, T> {
    harmonics
        .iter()
        .zip(warm.iter_mut())
        .map(|(&h, w)| {
            if h == 1 {
                envelopes_warm(residuals, phase, spec, cfg, w)
            } else {
                envelopes_warm(residuals, &phase.harmonic(h), &spec.narrowed(h), cfg, w)
            }
        })
        .collect()
}

fn evidence<T: Real>(
    env: &[Envelopes<T>],
    harmonics: &[usize],
    times: &Array1<T>,
    floor: T,
) -> Vec<FrequencyUpdate<T>> {
    let blocks: Vec<_> = harmonics
        .iter()
        .zip(env)
        .map(|(&h, e)| (h, e.a.view(), e.b.view()))
        .collect();
    pool_updates(&blocks, times, floor)
}

pub(crate) fn refine_harmonics<T: Real>(
    residuals: ArrayView2<T>,
    initial_phase: &PhaseFunction<T>,
    harmonics: &[usize],
    cfg: &SolverConfig<T>,
) -> Result<Refined<T>, T> {
    let n = residuals.ncols();
    let res = cfg.gn.resolve(n)?;
    if harmonics.is_empty() || harmonics.contains(&0) {
        return Err(Error::InvalidConfig(
            "harmonic numbers must be positive".into(),
        ));
    }
    if initial_phase.theta().len() != n {
        return Err(Error::ShapeMismatch {
            row: 0,
            expected: n,
            found: initial_phase.theta().len(),
        });
    }
    if initial_phase.oscillations() < 1 {
        return Err(Error::DegeneratePhase {
            span: initial_phase.span().to_f64_lossy(),
        });
    }
    if let Some(index) = initial_phase
        .theta()
        .windows(2)
        .into_iter()
        .position(|w| w[1] < w[0])
    {
        return Err(Error::NonMonotonePhase { index });
    }
    let times = initial_phase.times().clone();
    let align = harmonics[0] == 1;
    let shape = cfg
        .gn
        .projection_shape
        .unwrap_or(if cfg.mode == SolverMode::Robust {
            FilterShape::RaisedCosine
        } else {
            FilterShape::Sharp
        });

    let mut phase = initial_phase.clone();
    let mut warm: Vec<Option<AlmOutput<T>>> = vec![None; harmonics.len()];
    let mut diag = ComponentDiagnostics::default();
    let mut eta = T::zero();
    let mut last_norm = T::infinity();
    loop {
        let mut level = EtaLevel {
            eta: eta.to_f64_lossy(),
            min_beta: 1.0,
            ..EtaLevel::default()
        };
        for _ in 0..cfg.gn.max_inner_iters {
            let env = envelopes_for_harmonics(
                residuals,
                &phase,
                harmonics,
                &res.envelope,
                cfg,
                &mut warm,
            )?;
            diag.alm_capped += env.iter().filter(|e| e.alm_capped).count();
            let pooled = evidence(&env, harmonics, &times, cfg.gn.gamma_floor)
                .pop()
                .expect("pooled update");
            let offset = if align {
                let projected = project_lowfreq_with(pooled.delta_omega.view(), &phase, eta, shape);
                let integrated = integrate_trapezoid(&projected, &times);
                offset_estimate(&env[0].a, &env[0].b, &integrated)
            } else {
                T::zero()
            };
            let step = phase_step(
                &phase,
                &pooled.delta_omega,
                offset,
                eta,
                shape,
                cfg.mode == SolverMode::Periodic,
            );
            level.iterations += 1;
            level.min_beta = level.min_beta.min(step.beta.to_f64_lossy());
            if step.beta == T::zero() {
                level.zero_steps += 1;
            }
            phase = step.phase;
            last_norm = step.update_norm;
            level.final_update_norm = last_norm.to_f64_lossy();
            if last_norm <= res.epsilon_0 || step.beta == T::zero() {
                break;
            }
        }
        diag.total_iterations += level.iterations;
        diag.eta_trace.push(level);
        if eta >= res.lambda {
            break;
        }
        eta = (eta + res.eta_step).min(res.lambda);
    }
    diag.final_update_norm = last_norm.to_f64_lossy();
    diag.converged = last_norm <= res.epsilon_0;

    let mut env =
        envelopes_for_harmonics(residuals, &phase, harmonics, &res.envelope, cfg, &mut warm)?;
    diag.alm_capped += env.iter().filter(|e| e.alm_capped).count();
    // The offset alignment leaves a sign ambiguity; pick the one with a
    // positive mean in-phase envelope.
    if harmonics == [1] && env[0].a.sum() < T::zero() {
        let pi = T::two_pi() / T::lit(2.0);
        phase = PhaseFunction::from_parts_unchecked(times, phase.theta().mapv(|v| v + pi));
        env[0].a.mapv_inplace(|v| -v);
        env[0].b.mapv_inplace(|v| -v);
    }
    let refined = Refined {
        phase,
        envelopes: env,
        diagnostics: diag,
    };
    let hit_cap = refined
        .diagnostics
        .eta_trace
        .last()
        .is_some_and(|l| l.iterations >= cfg.gn.max_inner_iters);
    if hit_cap && last_norm > T::lit(100.0) * res.epsilon_0 {
        return Err(Error::NoConvergence {
            update_norm: last_norm.to_f64_lossy(),
            tolerance: res.epsilon_0.to_f64_lossy(),
            partial: Partial::Component(Box::new(refined.into_component())),
        });
    }
    Ok(refined)
}

/// Refines `initial_phase` against the residual rows and returns the mode
/// with its envelopes evaluated at the final phase.
pub fn refine_component<T: Real>(
    residuals: ArrayView2<T>,
    initial_phase: &PhaseFunction<T>,
    cfg: &SolverConfig<T>,
) -> Result<ImfComponent<T>, T> {
    refine_harmonics(residuals, initial_phase, &[1], cfg).map(Refined::into_component)
}
