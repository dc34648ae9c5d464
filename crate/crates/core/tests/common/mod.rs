#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rzf_core::array_model::{
    calibrate_powers, correlated_cov_per_source, normalize_columns, Scenario, SourceModel,
};
use rzf_core::linalg::{c64, CMatrix};
use rzf_core::theory::SingleInterferenceGeometry;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Unit-norm complex Gaussian columns.
pub fn random_channels(rng: &mut ChaCha8Rng, n: usize, cols: usize) -> CMatrix {
    let m = CMatrix::from_fn(n, cols, |_, _| c64(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    normalize_columns(&m).unwrap().0
}

/// A scenario together with the source models that realize its covariance.
pub struct Drawn {
    pub scenario: Scenario,
    pub models: Vec<SourceModel>,
}

/// Random channels, per-interferer correlation magnitudes in [0.1, 0.95] and
/// phases, calibrated to SNR/SIR in [-10, 10] dB.
pub fn random_scenario(seed: u64, n: usize, j: usize) -> Drawn {
    let mut r = rng(seed);
    let channels = random_channels(&mut r, n, j + 1);
    let rhos: Vec<f64> = (0..j).map(|_| r.random_range(0.1..0.95)).collect();
    let phases: Vec<f64> = (0..j).map(|_| r.random_range(-PI..PI)).collect();
    let leaks: Vec<f64> = rhos.iter().map(|p| 1.0 / (p * p) - 1.0).collect();
    let cov = correlated_cov_per_source(&vec![1.0; j], &phases, &leaks, 1.0).unwrap();
    let template = Scenario::new(channels, cov, 1.0).unwrap();
    let snr = r.random_range(-10.0..10.0);
    let sir = r.random_range(-10.0..10.0);
    let scenario = calibrate_powers(&template, snr, sir).unwrap();
    let models = std::iter::once(SourceModel::white())
        .chain(phases.iter().zip(&leaks).map(|(&p, &l)| SourceModel::interferer(p, l)))
        .collect();
    Drawn { scenario, models }
}

/// Random size with `N ≤ max_n`, `1 ≤ J ≤ min(max_j, N-1)`.
pub fn random_sized(seed: u64, max_n: usize, max_j: usize) -> Drawn {
    let mut r = rng(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let n = r.random_range(2..=max_n);
    let j = r.random_range(1..=max_j.min(n - 1));
    random_scenario(seed, n, j)
}

/// Random single-interferer geometry; `complex = false` keeps `φ_z, φ_c ∈ {0, π}`.
pub fn random_geometry(r: &mut ChaCha8Rng, complex: bool) -> SingleInterferenceGeometry {
    let tau = r.random_range(0.02..FRAC_PI_2 - 0.05);
    let s0 = 10f64.powf(r.random_range(-1.0..1.0));
    let s1 = 10f64.powf(r.random_range(-1.0..1.0));
    let sn = 10f64.powf(r.random_range(-1.0..1.0));
    let c_abs = r.random_range(0.0..1.0) * (s0 * s1).sqrt();
    let (phi_z, phi_c) = if complex {
        (r.random_range(0.0..TAU), r.random_range(0.0..TAU))
    } else {
        (if r.random_bool(0.5) { 0.0 } else { PI }, if r.random_bool(0.5) { 0.0 } else { PI })
    };
    SingleInterferenceGeometry::new(tau, phi_z, c_abs, phi_c, s0, s1, sn).unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
