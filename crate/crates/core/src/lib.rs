//! Decomposition of signal ensembles that share instantaneous frequencies.
//!
//! Every signal `f^j` in an ensemble is modelled as
//! `f^j(t) = Σ_k a_k^j(t)·cos θ_k(t) + r^j(t)`: the phases `θ_k` are common
//! to all signals, the envelopes `a_k^j` are per signal and vary slowly
//! relative to their carrier. Components are extracted greedily
//! ([`decompose`]); each one is refined by a Gauss-Newton iteration on the
//! phase ([`refine_component`]) whose envelopes come either from direct FFT
//! demodulation (periodic records) or from a jointly sparse Fourier
//! extension ([`extend`], [`extend_robust`]).
//!
//! The numerics are generic over [`Real`] (`f32` or `f64`); the `*64` and
//! `*32` aliases name the common instantiations.
//!
//! ```
//! use mahm::{decompose, synth, DriverConfig64};
//!
//! let ensemble = synth::generate_example1::<f64>(7, 512, 1, 0.0);
//! let result = decompose(&ensemble, &DriverConfig64::default()).unwrap();
//! assert_eq!(result.len(), 1);
//! ```

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cable;
pub mod driver;
pub mod error;
pub mod gn;
pub mod group;
mod real;
pub mod robust;
pub mod signal;
pub mod spectral;
mod spline;
pub mod synth;

pub use cable::{harmonic_fuse, tension_from_frequency, CableSpec, FusedTension};
pub use driver::{decompose, initial_phase_guess, DriverConfig};
pub use error::{Error, Partial, Result};
pub use gn::{
    envelope_step, envelopes, frequency_update, phase_update, refine_component, Envelopes,
    FrequencyUpdate, GnConfig, PhaseStep, SolverConfig, SolverMode,
};
pub use group::{
    constraint_residual, extend, fourier_analysis, fourier_analysis_real, fourier_synthesis,
    fourier_synthesis_real, group_norm, group_shrink, AlmConfig, GroupCoefficients,
    MultiplierUpdate,
};
pub use real::Real;
pub use robust::{
    extend_robust, prefill_missing, scalar_shrink, scalar_shrink_matrix, RobustConfig, RobustState,
};
pub use signal::{
    reconstruct, rescale_times, ComponentDiagnostics, DecompositionResult, Diagnostics, EtaLevel,
    ImfComponent, IngestOptions, PhaseFunction, SignalEnsemble, StopReason, MIN_SAMPLES,
};
pub use spectral::{
    demodulate, derivative_theta, lowpass_filter, project_lowfreq, project_lowfreq_with,
    resample_to_theta, resample_to_time, FilterShape, FilterSpec, ThetaGrid,
};

pub type SignalEnsemble64 = SignalEnsemble<f64>;
pub type PhaseFunction64 = PhaseFunction<f64>;
pub type ImfComponent64 = ImfComponent<f64>;
pub type DecompositionResult64 = DecompositionResult<f64>;
pub type GroupCoefficients64 = GroupCoefficients<f64>;
pub type AlmConfig64 = AlmConfig<f64>;
pub type DriverConfig64 = DriverConfig<f64>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type CableSpec64 = CableSpec<f64>;
pub type Error64 = Error<f64>;

pub type SignalEnsemble32 = SignalEnsemble<f32>;
pub type PhaseFunction32 = PhaseFunction<f32>;
pub type ImfComponent32 = ImfComponent<f32>;
pub type DecompositionResult32 = DecompositionResult<f32>;
pub type GroupCoefficients32 = GroupCoefficients<f32>;
pub type AlmConfig32 = AlmConfig<f32>;
pub type DriverConfig32 = DriverConfig<f32>;
pub type SolverConfig32 = SolverConfig<f32>;
pub type CableSpec32 = CableSpec<f32>;
pub type Error32 = Error<f32>;
