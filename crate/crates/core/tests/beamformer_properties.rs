mod common;

use common::{random_sized, rel_err};
use proptest::prelude::*;
use rzf_core::array_model::SignalStream;
use rzf_core::beamformers::{
    a_mmse_with_error, epsilon_mvdr, mmse_dr, mvdr, rzf_from_epsilon, rzf_from_lambda, zf, StatisticsError,
};
use rzf_core::covariance::analytic_covariance;
use rzf_core::linalg::{c64, inner, out_of_span_residual, CMatrix, CVector, C64};
use rzf_core::theory::mse_closed_form;

fn lambda_grid() -> Vec<f64> {
    (0..25).map(|i| 10f64.powf(-6.0 + 0.5 * i as f64)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn output_power_grows_as_budget_shrinks(seed in any::<u64>()) {
        let d = random_sized(seed, 16, 7);
        let s = &d.scenario;
        let r = analytic_covariance(s).matrix;
        let (h0, hi) = (s.desired_channel(), s.interference_channels());
        let e_mvdr = epsilon_mvdr(&r, &h0, &hi).unwrap();
        prop_assume!(e_mvdr > 1e-12);
        let mut prev = f64::INFINITY;
        // ε increasing from near 0 to ε_MVDR, so wᴴRw must not increase
        for i in 1..=20 {
            let eps = e_mvdr * i as f64 / 20.0;
            let (w, rep) = rzf_from_epsilon(&r, &h0, &hi, eps).unwrap();
            prop_assert!((rep.epsilon_achieved - eps).abs() <= 1e-8 * eps.max(1.0));
            let p = w.output_power(&r);
            prop_assert!(p <= prev * (1.0 + 1e-9));
            prev = p;
        }
    }

    #[test]
    fn rzf_never_beats_mmse_dr(seed in any::<u64>()) {
        let d = random_sized(seed, 16, 7);
        let s = &d.scenario;
        let r = analytic_covariance(s).matrix;
        let bound = mse_closed_form(&mmse_dr(s).unwrap().weights, s);
        for lam in std::iter::once(0.0).chain(lambda_grid()) {
            let w = rzf_from_lambda(&r, &s.desired_channel(), &s.interference_channels(), lam).unwrap();
            prop_assert!(mse_closed_form(&w.weights, s) >= bound * (1.0 - 1e-10));
        }
        if let Ok(w) = zf(&r, s.channels()) {
            prop_assert!(mse_closed_form(&w.weights, s) >= bound * (1.0 - 1e-10));
        }
        prop_assert!(mse_closed_form(&mvdr(&r, &s.desired_channel()).unwrap().weights, s) >= bound * (1.0 - 1e-10));
    }

    #[test]
    fn rzf_lies_in_channel_span(seed in any::<u64>()) {
        let d = common::random_scenario(seed, 16, 7);
        let s = &d.scenario;
        let r = analytic_covariance(s).matrix;
        for lam in lambda_grid() {
            let w = rzf_from_lambda(&r, &s.desired_channel(), &s.interference_channels(), lam).unwrap();
            prop_assert!(out_of_span_residual(s.channels(), &w.weights) < 1e-10 * w.weights.norm().max(1.0));
        }
    }

    #[test]
    fn distortionless_labels_keep_unit_gain(seed in any::<u64>()) {
        let d = random_sized(seed, 16, 7);
        let s = &d.scenario;
        let r = analytic_covariance(s).matrix;
        let h0 = s.desired_channel();
        let one = c64(1.0, 0.0);
        prop_assert!((inner(&mvdr(&r, &h0).unwrap().weights, &h0) - one).norm() < 1e-10);
        prop_assert!((inner(&mmse_dr(s).unwrap().weights, &h0) - one).norm() < 1e-10);
        let (w, _) = rzf_from_epsilon(&r, &h0, &s.interference_channels(), 0.3 * epsilon_mvdr(&r, &h0, &s.interference_channels()).unwrap()).unwrap();
        prop_assert!((inner(&w.weights, &h0) - one).norm() < 1e-10);
    }

    #[test]
    fn exact_statistics_a_mmse_is_the_mmse_solution(seed in any::<u64>()) {
        let d = random_sized(seed, 12, 5);
        let s = &d.scenario;
        let r = analytic_covariance(s).matrix;
        let a = a_mmse_with_error(&r, s, StatisticsError::EXACT).unwrap();
        let m = mse_closed_form(&a.weights, s);
        // the unconstrained optimum is at least as good as every constrained one
        prop_assert!(m <= mse_closed_form(&mmse_dr(s).unwrap().weights, s) * (1.0 + 1e-10));
        let perturbed = a_mmse_with_error(&r, s, StatisticsError { beta: 0.8, eps_rho: 0.1, eps_phi: 0.26 }).unwrap();
        prop_assert!(mse_closed_form(&perturbed.weights, s) >= m * (1.0 - 1e-10));
    }
}

#[test]
fn mmse_dr_is_the_distortionless_lower_bound() {
    for seed in 0..1000u64 {
        let d = random_sized(seed, 16, 7);
        let s = &d.scenario;
        let r = analytic_covariance(s).matrix;
        let h0 = s.desired_channel();
        let hi = s.interference_channels();
        let bound = mse_closed_form(&mmse_dr(s).unwrap().weights, s);
        let e = epsilon_mvdr(&r, &h0, &hi).unwrap();
        let mut others = vec![mvdr(&r, &h0).unwrap().weights, rzf_from_epsilon(&r, &h0, &hi, 0.5 * e).unwrap().0.weights];
        if let Ok(w) = zf(&r, s.channels()) {
            others.push(w.weights);
        }
        for w in others {
            assert!(mse_closed_form(&w, s) >= bound * (1.0 - 1e-10), "seed {seed}");
        }
    }
}

#[test]
fn zf_norm_explodes_near_collinearity() {
    let norm_at = |inner_product: f64| {
        let (sn, cs) = (inner_product, (1.0 - inner_product * inner_product).sqrt());
        let h = CMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(cs, 0.0), c64(1.0, 0.0), c64(sn, 0.0)]);
        let s = rzf_core::array_model::Scenario::new(h, CMatrix::identity(2, 2), 1.0).unwrap();
        let r = analytic_covariance(&s).matrix;
        zf(&r, s.channels()).unwrap().weights.norm()
    };
    assert!(norm_at(0.999) >= 10.0 * norm_at(0.5));
}

#[test]
fn output_mean_is_zero_for_distortionless_beamformers() {
    let d = common::random_scenario(17, 8, 3);
    let s = &d.scenario;
    let r = analytic_covariance(s).matrix;
    let h0 = s.desired_channel();
    let hi = s.interference_channels();
    let e = epsilon_mvdr(&r, &h0, &hi).unwrap();
    let ws: Vec<CVector> = vec![
        mvdr(&r, &h0).unwrap().weights,
        zf(&r, s.channels()).unwrap().weights,
        rzf_from_epsilon(&r, &h0, &hi, 0.2 * e).unwrap().0.weights,
    ];
    let k = 200_000;
    let mut st = SignalStream::new(s, &d.models, 4).unwrap();
    let b = st.next_block(k);
    for w in &ws {
        let out: Vec<C64> = b.snapshots.column_iter().map(|y| w.dotc(&y)).collect();
        let mean = out.iter().sum::<C64>() / k as f64;
        let var = out.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / (k - 1) as f64;
        let se = (var / k as f64).sqrt();
        assert!(mean.norm() < 4.0 * se, "mean {mean} se {se}");
        // the empirical MSE agrees with the closed form to Monte Carlo accuracy
        let emp = out.iter().zip(b.sources.row(0).iter()).map(|(o, s0)| (o - s0).norm_sqr()).sum::<f64>() / k as f64;
        assert!(rel_err(emp, mse_closed_form(w, s)) < 0.02);
    }
}
