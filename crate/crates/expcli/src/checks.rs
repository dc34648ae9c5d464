//! Quick self-checks run by `rzf check`: each compares a library result with
//! an independent computation.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rzf_core::array_model::{calibrate_powers, correlated_template, generate_block, leak_power_for_rho, toy_channels, SourceModel};
use rzf_core::beamformers::{epsilon_mvdr, mvdr, rzf_from_epsilon, rzf_from_lambda, zf};
use rzf_core::covariance::analytic_covariance;
use rzf_core::linalg::{hermitian_solve, CVector};
use rzf_core::theory::{achieved_mse, mse_closed_form, regime, superiority_witness, SingleInterferenceGeometry};

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome { name, passed, detail }
}

fn random_geometry(rng: &mut ChaCha8Rng) -> rzf_core::Result<SingleInterferenceGeometry> {
    let tau = rng.random_range(0.02..FRAC_PI_2 - 0.05);
    let s0 = 10f64.powf(rng.random_range(-1.0..1.0));
    let s1 = 10f64.powf(rng.random_range(-1.0..1.0));
    let sn = 10f64.powf(rng.random_range(-1.0..1.0));
    let c = rng.random_range(0.0..1.0) * (s0 * s1).sqrt();
    SingleInterferenceGeometry::new(tau, rng.random_range(0.0..TAU), c, rng.random_range(0.0..TAU), s0, s1, sn)
}

fn gamma_reference() -> CheckOutcome {
    let cases = [(0.99, -2.0619), (-0.2, 0.7692), (0.1, 1.1765)];
    let mut worst: f64 = 0.0;
    for (c1, want) in cases {
        let g = SingleInterferenceGeometry::from_real(FRAC_PI_6, c1, 1.0, 1.0, 1.0)
            .ok()
            .and_then(|g| regime(&g).gamma)
            .unwrap_or(f64::NAN);
        worst = worst.max((g - want).abs());
    }
    outcome("gamma reference values", worst < 5e-5, format!("max |error| {worst:.2e}"))
}

fn closed_form_vs_weights(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let Ok(g) = random_geometry(rng) else { return outcome("closed-form MSE", false, "geometry".into()) };
        let Ok(s) = g.to_scenario() else { return outcome("closed-form MSE", false, "scenario".into()) };
        let r = analytic_covariance(&s).matrix;
        for k in 0..20 {
            let lambda = 10f64.powf(-4.0 + 8.0 * k as f64 / 19.0);
            let Ok(bf) = rzf_from_lambda(&r, &s.desired_channel(), &s.interference_channels(), lambda) else {
                return outcome("closed-form MSE", false, "solve failed".into());
            };
            let a = g.mse_of_lambda(lambda);
            let b = mse_closed_form(&bf.weights, &s);
            worst = worst.max((a - b).abs() / b);
        }
    }
    outcome("closed-form MSE", worst < 1e-9, format!("max relative error {worst:.2e}"))
}

fn toy_scenario(rho: f64) -> rzf_core::Result<(rzf_core::array_model::Scenario, Vec<SourceModel>)> {
    let template = correlated_template(toy_channels(16, 7, 0.5)?, rho, &[0.0; 7])?;
    let s = calibrate_powers(&template, 0.0, 0.0)?;
    let leak = leak_power_for_rho(rho)?;
    let models = std::iter::once(SourceModel::white()).chain((0..7).map(|_| SourceModel::interferer(0.0, leak))).collect();
    Ok((s, models))
}

fn epsilon_duality() -> CheckOutcome {
    let name = "epsilon-lambda duality";
    let run = || -> rzf_core::Result<(f64, bool, f64)> {
        let (s, _) = toy_scenario(0.6)?;
        let r = analytic_covariance(&s).matrix;
        let (h0, hi) = (s.desired_channel(), s.interference_channels());
        let e_mvdr = epsilon_mvdr(&r, &h0, &hi)?;
        let mut worst: f64 = 0.0;
        let mut monotone = true;
        let mut prev = f64::INFINITY;
        for k in 1..=20 {
            let eps = e_mvdr * k as f64 / 21.0;
            let (_, rep) = rzf_from_epsilon(&r, &h0, &hi, eps)?;
            worst = worst.max((rep.epsilon_achieved - eps).abs());
            monotone &= rep.lambda < prev;
            prev = rep.lambda;
        }
        let end_mvdr = (rzf_from_epsilon(&r, &h0, &hi, e_mvdr)?.0.weights - mvdr(&r, &h0)?.weights).norm();
        let end_zf = (rzf_from_epsilon(&r, &h0, &hi, 0.0)?.0.weights - zf(&r, s.channels())?.weights).norm();
        Ok((worst, monotone, end_mvdr.max(end_zf)))
    };
    match run() {
        Ok((leak, mono, ends)) => outcome(
            name,
            leak < 1e-8 && mono && ends < 1e-10,
            format!("leakage error {leak:.2e}, lambda decreasing {mono}, endpoint error {ends:.2e}"),
        ),
        Err(e) => outcome(name, false, e.to_string()),
    }
}

fn span_residual() -> CheckOutcome {
    let name = "RZF weights in channel span";
    let run = || -> rzf_core::Result<f64> {
        let (s, _) = toy_scenario(0.6)?;
        let r = analytic_covariance(&s).matrix;
        let h = s.channels();
        let gram = h.adjoint() * h;
        let mut worst: f64 = 0.0;
        for k in 0..10 {
            let lambda = 10f64.powf(-6.0 + 12.0 * k as f64 / 9.0);
            let w = rzf_from_lambda(&r, &s.desired_channel(), &s.interference_channels(), lambda)?.weights;
            let coeffs = hermitian_solve(&gram, &(h.adjoint() * &w))?;
            let resid: CVector = &w - h * coeffs;
            worst = worst.max(resid.norm());
        }
        Ok(worst)
    };
    match run() {
        Ok(v) => outcome(name, v < 1e-10, format!("max residual {v:.2e}")),
        Err(e) => outcome(name, false, e.to_string()),
    }
}

fn superiority(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let mut mismatches = 0;
    let mut counted = 0;
    for _ in 0..2000 {
        let Ok(g) = random_geometry(rng) else { continue };
        let rep = regime(&g);
        if rep.gamma.is_some_and(|x| x.abs() < 1e-5 || (x - 1.0).abs() < 1e-5) {
            continue;
        }
        let a = achieved_mse(&g);
        let beats = a.rzf < a.mvdr.min(a.zf) * (1.0 - 1e-12);
        counted += 1;
        if beats != superiority_witness(&g) {
            mismatches += 1;
        }
    }
    outcome("superiority predicate", mismatches == 0, format!("{mismatches} mismatches over {counted} geometries"))
}

fn monte_carlo() -> CheckOutcome {
    let name = "Monte Carlo MSE";
    let run = || -> rzf_core::Result<f64> {
        let (s, models) = toy_scenario(0.6)?;
        let r = analytic_covariance(&s).matrix;
        let w = mvdr(&r, &s.desired_channel())?.weights;
        let k = 200_000;
        let block = generate_block(&s, &models, k, 7)?;
        let out = block.snapshots.adjoint() * &w;
        let emp = (0..k).map(|t| (out[t].conj() - block.sources[(0, t)]).norm_sqr()).sum::<f64>() / k as f64;
        let exact = mse_closed_form(&w, &s);
        Ok((emp - exact).abs() / exact)
    };
    match run() {
        Ok(v) => outcome(name, v < 0.02, format!("relative gap {v:.2e} at 2e5 samples")),
        Err(e) => outcome(name, false, e.to_string()),
    }
}

pub fn run_all(seed: u64) -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![
        gamma_reference(),
        closed_form_vs_weights(&mut rng),
        epsilon_duality(),
        span_residual(),
        superiority(&mut rng),
        monte_carlo(),
    ]
}
