mod common;

use common::random_sized;
use proptest::prelude::*;
use rzf_core::adaptive::{run_online, trailing_average, CnlmsState, DdaaState, OnlineAlgorithm};
use rzf_core::array_model::{
    calibrate_powers, correlated_template, leak_power_for_rho, toy_channels, Scenario, SignalStream, SourceModel,
};
use rzf_core::beamformers::{epsilon_mvdr, mvdr, rzf_from_epsilon};
use rzf_core::covariance::{analytic_covariance, gram_of};
use rzf_core::linalg::{c64, inner, CVector};
use rzf_core::theory::mse_closed_form;

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn every_iterate_stays_feasible(seed in any::<u64>(), alpha in 0.0f64..=1.0, step in 0.01f64..1.99, eps_frac in 0.0f64..1.5) {
        let d = random_sized(seed, 12, 5);
        let s = &d.scenario;
        let (h0, hi) = (s.desired_channel(), s.interference_channels());
        let r = analytic_covariance(s).matrix;
        let eps = eps_frac * epsilon_mvdr(&r, &h0, &hi).unwrap();
        let mut ddaa = DdaaState::from_batch_epsilon(&h0, &hi, eps, step, alpha).unwrap();
        let mut mv = CnlmsState::mvdr(&h0, step).unwrap();
        let mut zf = CnlmsState::zf(s.channels(), step).unwrap();
        let block = SignalStream::new(s, &d.models, seed).unwrap().next_block(400);
        let one = c64(1.0, 0.0);
        for y in block.snapshots.column_iter() {
            let y: CVector = y.into_owned();
            let info = ddaa.step(&y);
            prop_assert!(info.eta > 0.0 && info.eta.is_finite());
            mv.step(&y);
            zf.step(&y);
            prop_assert!((inner(ddaa.weights(), &h0) - one).norm() < 1e-9);
            prop_assert!((inner(mv.weights(), &h0) - one).norm() < 1e-9);
            prop_assert!(zf.constraint_residual() < 1e-9);
            let nulls: CVector = hi.adjoint() * zf.weights();
            prop_assert!(nulls.iter().all(|z| z.norm() < 1e-9));
        }
    }

    /// With the sensor-domain direction switched off, the update is a relaxed
    /// Polyak step on `w ↦ dist(H̃_Iᴴw, B_ε)`, so it moves strictly closer to every
    /// feasible point with `H̃_Iᴴz ∈ B_ε` (the ZF weights are one). Leakage itself
    /// may rise on a single step when `η` is large.
    #[test]
    fn dual_step_alone_approaches_the_ball(seed in any::<u64>(), alpha in 0.0f64..0.99, step in 0.01f64..1.99, scale in -3.0f64..3.0) {
        let d = random_sized(seed, 12, 5);
        let s = &d.scenario;
        let h0 = s.desired_channel();
        let r = analytic_covariance(s).matrix;
        let z = rzf_core::beamformers::zf(&r, s.channels()).unwrap().weights;
        let mut st = DdaaState::new(&h0, &s.interference_channels(), 1e-6, step, alpha).unwrap();
        // a snapshot along h₀ has yᴴQy = 0, so the sensor-domain direction vanishes
        let y = &h0 * c64(scale, 0.7);
        for _ in 0..50 {
            let before_dist = (st.weights() - &z).norm();
            let leak = st.leakage();
            let info = st.step(&y);
            prop_assert_eq!(info.g1_norm, 0.0);
            let after = (st.weights() - &z).norm();
            prop_assert!(after <= before_dist * (1.0 + 1e-12));
            if leak > st.epsilon() * (1.0 + 1e-6) {
                prop_assert!(after < before_dist);
            } else if leak <= st.epsilon() {
                prop_assert_eq!(info.eta, 1.0);
            }
        }
    }

    #[test]
    fn normalized_ball_matches_batch_budget(seed in any::<u64>(), frac in 0.05f64..0.95) {
        let d = random_sized(seed, 16, 7);
        let s = &d.scenario;
        let (h0, hi) = (s.desired_channel(), s.interference_channels());
        let r = analytic_covariance(s).matrix;
        let eps = frac * epsilon_mvdr(&r, &h0, &hi).unwrap();
        let (w, _) = rzf_from_epsilon(&r, &h0, &hi, eps).unwrap();
        let mut st = DdaaState::from_batch_epsilon(&h0, &hi, eps, 0.1, 0.5).unwrap();
        let smax = gram_of(&hi).sigma_max;
        prop_assert!((st.epsilon() * smax * smax - eps).abs() <= 1e-12 * eps.max(1e-300));
        st.set_weights(w.weights.clone());
        // the batch solution sits on the boundary of the normalized ball
        prop_assert!((st.leakage() - st.epsilon()).abs() <= 1e-7 * st.epsilon());
        prop_assert!(st.dual_direction().norm() <= 1e-7 * st.epsilon().sqrt());
        st.set_weights(mvdr(&r, &h0).unwrap().weights);
        prop_assert!(st.dual_direction().norm() > 0.0);
    }
}

fn toy_online() -> (Scenario, Vec<SourceModel>) {
    let ch = toy_channels(16, 7, 0.5).unwrap();
    let s = calibrate_powers(&correlated_template(ch, 0.5, &[0.0; 7]).unwrap(), 0.0, 0.0).unwrap();
    let leak = leak_power_for_rho(0.5).unwrap();
    let models = std::iter::once(SourceModel::white()).chain((0..7).map(|_| SourceModel::interferer(0.0, leak))).collect();
    (s, models)
}

#[test]
fn cnlms_mvdr_settles_near_analytic_mvdr() {
    let (s, models) = toy_online();
    let r = analytic_covariance(&s).matrix;
    let target = db(mse_closed_form(&mvdr(&r, &s.desired_channel()).unwrap().weights, &s));
    let run = run_online(OnlineAlgorithm::CnlmsMvdr { step: 0.1 }, &s, &models, 10_000, 300, 21).unwrap();
    let steady = db(run.curve[5_000..].iter().sum::<f64>() / 5_000.0);
    assert!((steady - target).abs() < 1.0, "CNLMS-MVDR {steady:.3} dB vs analytic {target:.3} dB");
    assert!(run.max_distortion_error < 1e-9);
}

#[test]
fn ddaa_settles_faster_than_cnlms_mvdr() {
    let (s, models) = toy_online();
    let (h0, hi) = (s.desired_channel(), s.interference_channels());
    let r = analytic_covariance(&s).matrix;
    let eps = 0.1 * epsilon_mvdr(&r, &h0, &hi).unwrap();
    let smax = gram_of(&hi).sigma_max;
    let first_within = |alg| {
        let run = run_online(alg, &s, &models, 10_000, 100, 5).unwrap();
        let steady = db(run.curve[5_000..].iter().sum::<f64>() / 5_000.0);
        trailing_average(&run.curve, 30).iter().position(|&v| (db(v) - steady).abs() <= 3.0).unwrap()
    };
    let ddaa = first_within(OnlineAlgorithm::Ddaa { epsilon: eps / (smax * smax), step: 0.1, alpha: 0.5 });
    let cnlms = first_within(OnlineAlgorithm::CnlmsMvdr { step: 0.1 });
    assert!(ddaa < cnlms, "DDAA {ddaa} vs CNLMS-MVDR {cnlms}");
}
