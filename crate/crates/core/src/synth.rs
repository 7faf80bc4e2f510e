//! Synthetic test signals with known phases and envelopes.
//!
//! Noise is drawn from `rand_chacha::ChaCha8Rng` seeded with
//! `seed_from_u64`, transformed to standard normals by
//! `rand_distr::StandardNormal` (ziggurat), in row-major order.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::signal::{IngestOptions, PhaseFunction, SignalEnsemble};
use crate::Real;

/// Uniform instants `i/(n−1)`.
pub fn unit_times(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

fn noise_matrix(seed: u64, m: usize, n: usize) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((m, n), |_| StandardNormal.sample(&mut rng))
}

fn to_real<T: Real>(x: &Array2<f64>) -> Vec<Vec<T>> {
    x.outer_iter()
        .map(|r| r.iter().map(|&v| T::lit(v)).collect())
        .collect()
}

fn build<T: Real>(times: &[f64], values: &Array2<f64>) -> SignalEnsemble<T> {
    let t: Vec<T> = times.iter().map(|&v| T::lit(v)).collect();
    SignalEnsemble::ingest(&t, &to_real(values), None, IngestOptions { center: false })
        .expect("generator output is a valid ensemble")
}

fn phase_from<T: Real>(times: &[f64], theta: impl Fn(f64) -> f64) -> PhaseFunction<T> {
    let t: Array1<T> = times.iter().map(|&v| T::lit(v)).collect();
    let th: Array1<T> = times.iter().map(|&v| T::lit(theta(v))).collect();
    PhaseFunction::new(t, th).expect("generator phases are increasing")
}

/// Phase `40π(t+1)²` of the chirp in the first example.
pub fn example1_theta(t: f64) -> f64 {
    40.0 * PI * (t + 1.0) * (t + 1.0)
}

/// Its instantaneous frequency in cycles per unit time, `40(t+1)`.
pub fn example1_frequency_hz(t: f64) -> f64 {
    40.0 * (t + 1.0)
}

/// `f^j(t) = cos(40π(t+1)²) + noise_scale·X^j(t)` with `X^j` i.i.d.
/// standard normal, on `n_samples` uniform instants of `[0, 1]`.
pub fn generate_example1<T: Real>(
    seed: u64,
    n_samples: usize,
    m_signals: usize,
    noise_scale: f64,
) -> SignalEnsemble<T> {
    let times = unit_times(n_samples);
    let noise = noise_matrix(seed, m_signals, n_samples);
    let values = Array2::from_shape_fn((m_signals, n_samples), |(j, i)| {
        example1_theta(times[i]).cos() + noise_scale * noise[[j, i]]
    });
    build(&times, &values)
}

/// Ground truth of a generated multi-component ensemble.
#[derive(Debug, Clone)]
pub struct TwoChirps<T: Real> {
    pub ensemble: SignalEnsemble<T>,
    pub phases: [PhaseFunction<T>; 2],
    /// `M × N_s` envelopes of each component.
    pub envelopes: [Array2<T>; 2],
}

/// Slow chirp `θ₁ = 2π(10t + 5t²)` and fast chirp `θ₂ = 2π(60t + 15t²)`
/// (frequency ratio at least 4.5) on three signals with distinct smooth
/// envelopes. Both phases complete whole numbers of cycles.
pub fn generate_two_chirps<T: Real>(n_samples: usize) -> TwoChirps<T> {
    let m = 3;
    let times = unit_times(n_samples);
    let th1 = |t: f64| 2.0 * PI * (10.0 * t + 5.0 * t * t);
    let th2 = |t: f64| 2.0 * PI * (60.0 * t + 15.0 * t * t);
    let env1 = |j: usize, t: f64| 1.0 + 0.3 * (2.0 * PI * t + j as f64).cos();
    let env2 =
        |j: usize, t: f64| 0.6 + 0.1 * j as f64 + 0.2 * (2.0 * PI * t).sin() * (j as f64 - 1.0);
    let e1 = Array2::from_shape_fn((m, n_samples), |(j, i)| env1(j, times[i]));
    let e2 = Array2::from_shape_fn((m, n_samples), |(j, i)| env2(j, times[i]));
    let values = Array2::from_shape_fn((m, n_samples), |(j, i)| {
        let t = times[i];
        e1[[j, i]] * th1(t).cos() + e2[[j, i]] * th2(t).cos()
    });
    TwoChirps {
        ensemble: build(&times, &values),
        phases: [phase_from(&times, th1), phase_from(&times, th2)],
        envelopes: [e1.mapv(T::lit), e2.mapv(T::lit)],
    }
}

/// Parameters of the synthetic taut-cable record.
#[derive(Debug, Clone, PartialEq)]
pub struct CableGenerator {
    pub n_samples: usize,
    /// Record length in seconds.
    pub duration: f64,
    /// Mean fundamental frequency in Hz.
    pub base_frequency: f64,
    /// Relative depth of the sinusoidal frequency variation.
    pub modulation: f64,
    /// Amplitude of harmonic `n` is `amplitudes[n−1]`.
    pub amplitudes: Vec<f64>,
    /// Sensor positions as fractions of the cable length; mode `n` is seen
    /// with weight `sin(nπx)`.
    pub sensors: Vec<f64>,
    pub noise_scale: f64,
    pub seed: u64,
    pub mass_density: f64,
    pub length: f64,
}

impl Default for CableGenerator {
    fn default() -> Self {
        CableGenerator {
            n_samples: 1024,
            duration: 1.0,
            base_frequency: 16.0,
            modulation: 0.05,
            amplitudes: vec![1.0, 0.8, 0.6, 0.4, 0.3],
            sensors: vec![0.29],
            noise_scale: 0.0,
            seed: 0,
            mass_density: 1.0,
            length: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CableSignal<T: Real> {
    pub ensemble: SignalEnsemble<T>,
    /// Fundamental phase on the rescaled time grid.
    pub phase: PhaseFunction<T>,
    /// Fundamental angular frequency in rad/s.
    pub omega_1: Array1<T>,
    /// Tension in N.
    pub tension: Array1<T>,
}

impl CableGenerator {
    /// Fundamental frequency in Hz at rescaled time `s ∈ [0, 1]`.
    pub fn frequency_hz(&self, s: f64) -> f64 {
        self.base_frequency * (1.0 + self.modulation * (2.0 * PI * s).sin())
    }

    /// Fundamental phase at rescaled time `s`.
    pub fn theta(&self, s: f64) -> f64 {
        let cycles = self.base_frequency
            * self.duration
            * (s + self.modulation * (1.0 - (2.0 * PI * s).cos()) / (2.0 * PI));
        2.0 * PI * cycles
    }

    pub fn generate<T: Real>(&self) -> CableSignal<T> {
        let s = unit_times(self.n_samples);
        let times: Vec<f64> = s.iter().map(|&v| v * self.duration).collect();
        let m = self.sensors.len();
        let noise = noise_matrix(self.seed, m, self.n_samples);
        let values = Array2::from_shape_fn((m, self.n_samples), |(j, i)| {
            let th = self.theta(s[i]);
            let x = self.sensors[j];
            let clean: f64 = self
                .amplitudes
                .iter()
                .enumerate()
                .map(|(k, &c)| {
                    let n = (k + 1) as f64;
                    c * (n * PI * x).sin() * (n * th).cos()
                })
                .sum();
            clean + self.noise_scale * noise[[j, i]]
        });
        let omega: Array1<f64> = s.iter().map(|&v| 2.0 * PI * self.frequency_hz(v)).collect();
        let k = 4.0 * self.mass_density * self.length * self.length;
        let tension = omega.mapv(|w| k * (w / (2.0 * PI)).powi(2));
        CableSignal {
            ensemble: build(&times, &values),
            phase: phase_from(&s, |v| self.theta(v)),
            omega_1: omega.mapv(T::lit),
            tension: tension.mapv(T::lit),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_rows_match_chirp() {
        let e = generate_example1::<f64>(3, 512, 4, 0.0);
        for row in e.values().outer_iter() {
            for (v, t) in row.iter().zip(e.times().iter()) {
                assert_eq!(*v, example1_theta(*t).cos());
            }
        }
    }

    #[test]
    fn same_seed_same_data() {
        let a = generate_example1::<f64>(11, 512, 10, 5.0);
        let b = generate_example1::<f64>(11, 512, 10, 5.0);
        assert_eq!(a.values(), b.values());
        let c = generate_example1::<f64>(12, 512, 10, 5.0);
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn cable_phase_matches_frequency() {
        let g = CableGenerator::default();
        let c = g.generate::<f64>();
        // Whole cycles, so the fundamental closes on itself.
        assert!((c.phase.span() / (2.0 * PI) - 16.0).abs() < 1e-9);
        let f = c.phase.frequency();
        for i in 2..f.len() - 2 {
            let want = 2.0 * PI * g.frequency_hz(c.ensemble.times()[i]);
            assert!((f[i] - want).abs() < 1e-3 * want);
        }
    }
}
