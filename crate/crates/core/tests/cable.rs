mod common;

use common::*;
use mahm::*;
use ndarray::Array1;

fn spec(modes: Vec<usize>) -> CableSpec64 {
    CableSpec::new(1.0, 1.0, modes).unwrap()
}

fn fused(sig: &synth::CableSignal<f64>, modes: Vec<usize>) -> FusedTension<f64> {
    harmonic_fuse(&sig.ensemble, &spec(modes), &DriverConfig64::default()).unwrap()
}

fn rel(got: &Array1<f64>, want: &Array1<f64>, t: &Array1<f64>) -> f64 {
    interior_rel_err(got, want, t)
}

#[test]
fn fundamental_alone_is_plain_refinement() {
    let sig = synth::CableGenerator {
        amplitudes: vec![1.0],
        ..Default::default()
    }
    .generate::<f64>();
    let e = &sig.ensemble;
    let start = initial_phase_guess(e.values().view(), e.times()).unwrap();
    let plain = refine_component(e.values().view(), &start, &SolverConfig64::default()).unwrap();
    let f = fused(&sig, vec![1]);
    assert_eq!(f.phase.theta(), plain.phase.theta());
    let w = plain.phase.frequency() / e.time_span();
    assert_eq!(f.omega_1, w);
}

#[test]
fn silent_second_mode_changes_nothing() {
    let sig = synth::CableGenerator {
        amplitudes: vec![1.0, 0.0],
        ..Default::default()
    }
    .generate::<f64>();
    let t = sig.ensemble.times().clone();
    let one = fused(&sig, vec![1]);
    let both = fused(&sig, vec![1, 2]);
    // Demodulating at 2θ still leaks a little of the fundamental into the
    // silent channel, so its weight is tiny rather than zero.
    let d = rel(&both.omega_1, &one.omega_1, &t);
    assert!(d <= 1e-5, "{d}");
}

#[test]
fn every_mode_sees_the_same_tension() {
    let sig = synth::CableGenerator::default().generate::<f64>();
    let t = sig.ensemble.times().clone();
    let first = fused(&sig, vec![1]).tension;
    assert!(rel(&first, &sig.tension, &t) <= 1e-2);
    for n in 2..=5 {
        let f = fused(&sig, vec![n]).tension;
        let d = rel(&f, &first, &t);
        assert!(d <= 1e-2, "mode {n}: {d}");
    }
}

#[test]
fn fusion_of_clean_harmonics_tracks_tension() {
    let sig = synth::CableGenerator::default().generate::<f64>();
    let t = sig.ensemble.times().clone();
    let f = fused(&sig, vec![1, 2, 3, 4, 5]);
    let err = rel(&f.tension, &sig.tension, &t);
    assert!(err <= 1e-2, "{err}");
    // The fundamental recovered from the fused phase is ω₁ itself.
    let w = rel(&f.omega_1, &sig.omega_1, &t);
    assert!(w <= 1e-2, "{w}");
}

#[test]
fn fusion_rejects_bad_specs() {
    assert!(CableSpec::new(1.0, 1.0, vec![]).is_err());
    assert!(CableSpec::new(1.0, 1.0, vec![0, 1]).is_err());
    assert!(CableSpec::new(-1.0, 1.0, vec![1]).is_err());
}

#[test]
fn noisy_example_has_expected_variance() {
    // Unit-amplitude carrier (power ½) plus unit-variance noise scaled by 5.
    let e = synth::generate_example1::<f64>(0, 512, 10, 5.0);
    for row in e.values().outer_iter() {
        let var = row.var(1.0);
        assert!((var - 25.5).abs() <= 0.2 * 25.5, "{var}");
    }
}
