mod common;

use common::{random_channels, random_scenario, rng};
use proptest::prelude::*;
use rzf_core::array_model::{
    ar_spectral_radius, calibrate_powers, correlated_template, generate_block, normalize_columns, stabilize_ar,
    toy_channels, SignalStream, SourceModel,
};
use rzf_core::covariance::{analytic_covariance, sample_covariance, sample_covariance_sharded};
use rzf_core::linalg::{c64, hermitian_eigenvalues, max_abs_diff, CMatrix, C64};

fn unit_columns(m: &CMatrix) -> bool {
    m.column_iter().all(|c| (c.norm() - 1.0).abs() < 1e-12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn constructors_give_unit_norm_channels(n in 2usize..24, j in 1usize..8, d in 0.1f64..1.0, seed in any::<u64>()) {
        prop_assume!(j < n);
        prop_assert!(unit_columns(&toy_channels(n, j, d).unwrap()));
        let raw = random_channels(&mut rng(seed), n, j + 1) * c64(3.7, -0.4);
        prop_assert!(unit_columns(&normalize_columns(&raw).unwrap().0));
        prop_assert!(unit_columns(random_scenario(seed, n, j).scenario.channels()));
    }

    #[test]
    fn analytic_covariance_structure(seed in any::<u64>(), n in 3usize..16, j in 1usize..7) {
        prop_assume!(j + 1 < n);
        let s = random_scenario(seed, n, j).scenario;
        let r = analytic_covariance(&s).matrix;
        let shifted = &r - CMatrix::identity(n, n) * c64(s.noise_power(), 0.0);
        let ev = hermitian_eigenvalues(&shifted);
        let scale = ev.last().copied().unwrap_or(1.0).abs().max(1.0);
        prop_assert!(ev.iter().all(|&e| e > -1e-10 * scale));
        prop_assert!(ev.iter().filter(|&&e| e > 1e-10 * scale).count() <= j + 1);
    }

    #[test]
    fn sample_covariance_permutation_invariant(seed in any::<u64>(), shard in 1usize..64) {
        let d = random_scenario(seed, 6, 2);
        let b = generate_block(&d.scenario, &d.models, 257, seed).unwrap();
        let a = sample_covariance(&b.snapshots).unwrap().matrix;
        let k = b.block_length();
        let perm = CMatrix::from_fn(6, k, |i, t| b.snapshots[(i, (t * 101 + 7) % k)]);
        let p = sample_covariance(&perm).unwrap().matrix;
        let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(max_abs_diff(&a, &p) < 1e-12 * scale);
        prop_assert!(max_abs_diff(&a, &sample_covariance_sharded(&b.snapshots, shard).unwrap().matrix) < 1e-12 * scale);
    }

    #[test]
    fn ar_stabilization_and_block_power(order in 1usize..9, coef in 0.05f64..0.6, seed in any::<u64>()) {
        let raw = vec![coef; order];
        let st = stabilize_ar(&raw);
        prop_assert!(ar_spectral_radius(&st) < 1.0);
        let h = toy_channels(4, 1, 0.5).unwrap();
        let s = calibrate_powers(&correlated_template(h, 0.5, &[0.0]).unwrap(), 5.0, 0.0).unwrap();
        let mut ar = SourceModel::ar6();
        ar.kind = rzf_core::array_model::SourceKind::Ar { coefficients: raw, innovation_power: 1.0 };
        let models = [ar, SourceModel::interferer(0.0, 3.0)];
        let b = generate_block(&s, &models, 2000, seed).unwrap();
        let p = b.sources.row(0).iter().map(|z| z.norm_sqr()).sum::<f64>() / 2000.0;
        prop_assert!((p - s.desired_power()).abs() < 1e-6 * s.desired_power());
    }
}

/// Streams `k` snapshots in chunks and calls `f` on each block.
fn stream(d: &common::Drawn, k: usize, seed: u64, mut f: impl FnMut(&rzf_core::array_model::SignalBlock)) {
    let mut st = SignalStream::new(&d.scenario, &d.models, seed).unwrap();
    let mut done = 0;
    while done < k {
        let b = st.next_block(50_000.min(k - done));
        f(&b);
        done += b.block_length();
    }
}

#[test]
fn correlation_coefficients_match_construction() {
    let d = random_scenario(21, 4, 3);
    let k = 1_000_000;
    let j = d.scenario.n_interferers();
    let mut sum = vec![C64::default(); j];
    let mut sum_sq = vec![0.0; j];
    stream(&d, k, 3, |b| {
        for t in 0..b.block_length() {
            let s0 = b.sources[(0, t)];
            for i in 0..j {
                let x = s0.conj() * b.sources[(i + 1, t)];
                sum[i] += x;
                sum_sq[i] += x.norm_sqr();
            }
        }
    });
    for i in 0..j {
        let sigma0 = d.scenario.desired_power().sqrt();
        let sigma_j = d.scenario.source_power(i + 1).sqrt();
        let mean = sum[i] / k as f64;
        let var = sum_sq[i] / k as f64 - mean.norm_sqr();
        let se = (var / k as f64).sqrt() / (sigma0 * sigma_j);
        let m = &d.models[i + 1];
        // σ₀ = 1 in the template, so ρ_j = e^{iφ_j}/√(1+σ_v²) survives calibration
        let expect = C64::from_polar(1.0 / (1.0 + m.leak_power).sqrt(), m.relative_phase);
        let got = mean / (sigma0 * sigma_j);
        assert!((got - expect).norm() < 3.0 * se, "source {}: {got} vs {expect}, se {se}", i + 1);
    }
}

#[test]
fn empirical_source_covariance_and_field_powers() {
    let d = random_scenario(34, 8, 4);
    let k = 1_000_000;
    let m = d.scenario.n_interferers() + 1;
    let mut c = CMatrix::zeros(m, m);
    let (mut desired, mut interf, mut noise) = (0.0, 0.0, 0.0);
    let h0 = d.scenario.desired_channel();
    let hi = d.scenario.interference_channels();
    stream(&d, k, 8, |b| {
        c += &b.sources * b.sources.adjoint();
        for t in 0..b.block_length() {
            desired += (&h0 * b.sources[(0, t)]).norm_squared();
            interf += (&hi * b.sources.view((1, t), (m - 1, 1))).norm_squared();
            noise += b.noise.column(t).norm_squared();
        }
    });
    // sources are stored as rows, so this estimates E[s sᴴ] with entry (l, j) = E[s_l s_j*]
    let c = c / c64(k as f64, 0.0);
    let scale = d.scenario.source_cov().iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(max_abs_diff(&c, d.scenario.source_cov()) < 0.01 * scale, "{c} vs {}", d.scenario.source_cov());
    let snr = 10.0 * (desired / noise).log10();
    let sir = 10.0 * (desired / interf).log10();
    assert!((snr - d.scenario.snr_db()).abs() < 0.1, "snr {snr} vs {}", d.scenario.snr_db());
    assert!((sir - d.scenario.sir_db()).abs() < 0.1, "sir {sir} vs {}", d.scenario.sir_db());
}

#[test]
fn generation_is_seed_deterministic() {
    let d = random_scenario(2, 5, 2);
    let a = generate_block(&d.scenario, &d.models, 300, 77).unwrap();
    let b = generate_block(&d.scenario, &d.models, 300, 77).unwrap();
    let c = generate_block(&d.scenario, &d.models, 300, 78).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}
