//! Closed-form MSE analysis.
//!
//! [`mse_closed_form`] evaluates `E|wᴴy(k) − s₀(k)|²` for any `w` from the
//! scenario statistics. The rest of the module covers the single-interferer
//! case, where everything reduces to the geometry `⟨h₀,h₁⟩ = sinτ·e^{iφ_z}`, the
//! correlation `c₁ = |c₁|e^{iφ_c}` and the three powers.
//!
//! With `g(λ) = cos²τ·λ + σ₁²cos²τ + σ_n²`,
//! `δ₁ = σ_n²tanτ − |c₁|cosτ·cos(φ_c+φ_z)` and
//! `δ₂ = σ_n²tanτ − |c₁|cosτ·e^{i(φ_c+φ_z)}`, the RZF MSE as a function of its
//! multiplier is
//!
//! ```text
//! MSE(λ) = |δ₂|²(σ₁²cos²τ + σ_n²)/g(λ)² − 2σ_n²δ₁tanτ/g(λ) + σ_n²(tan²τ + 1)
//! ```
//!
//! a quadratic in `1/g(λ)`. Its minimizer is classified by
//! `γ = δ₁σ_n²tanτ/|δ₂|²`: ZF is optimal for `γ ≤ 0`, MVDR for `γ ≥ 1`, and an
//! interior `λ` otherwise.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::array_model::Scenario;
use crate::error::{Error, Result};
use crate::linalg::{c64, inner, norm_sq, CMatrix, CVector, C64};

/// `E|wᴴy − s₀|²` for arbitrary `w` (not only distortionless ones).
pub fn mse_closed_form(w: &CVector, scenario: &Scenario) -> f64 {
    let h0 = scenario.desired_channel();
    let s0 = scenario.desired_power();
    let g0 = inner(w, &h0); // wᴴh₀
    let mut mse = s0 * (1.0 + g0.norm_sqr() - 2.0 * g0.re) + scenario.noise_power() * norm_sq(w);
    let j = scenario.n_interferers();
    if j > 0 {
        let hi = scenario.interference_channels();
        let resp: CVector = hi.adjoint() * w; // h_jᴴw
        for jj in 0..j {
            let cj = scenario.correlation(jj + 1);
            // c_j(h₀ᴴw − 1)wᴴh_j + c_j*(wᴴh₀ − 1)h_jᴴw = 2 Re[c_j*(wᴴh₀ − 1)h_jᴴw]
            mse += 2.0 * (cj.conj() * (g0 - c64(1.0, 0.0)) * resp[jj]).re;
        }
        // Σ c_{l,j} (h_lᴴw)(wᴴh_j)
        let cross = scenario.interference_cov();
        let mut quad = C64::default();
        for l in 0..j {
            for m in 0..j {
                quad += cross[(m, l)] * resp[l] * resp[m].conj();
            }
        }
        mse += quad.re;
    }
    mse.max(0.0)
}

/// Noise and interference power left in the output, `σ_n²‖w‖²` and
/// `Σ_{l,j} c_{l,j} h_lᴴw wᴴh_j`. For `wᴴh₀ = 1` they sum to the MSE.
pub fn leakage_powers(w: &CVector, scenario: &Scenario) -> (f64, f64) {
    let noise = scenario.noise_power() * norm_sq(w);
    if scenario.n_interferers() == 0 {
        return (noise, 0.0);
    }
    let hi = scenario.interference_channels();
    let resp: CVector = hi.adjoint() * w;
    let interf = inner(&resp, &(scenario.interference_cov() * &resp)).re;
    (noise, interf.max(0.0))
}

/// `sinτ = |⟨h₀,h₁⟩|`, `φ_z = arg⟨h₀,h₁⟩ ∈ [0, 2π)`.
pub fn reduce_to_2d(h0: &CVector, h1: &CVector) -> Result<(f64, f64)> {
    if h0.len() != h1.len() {
        return Err(Error::Dimension("channel lengths differ".into()));
    }
    for h in [h0, h1] {
        if (h.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument("channels must have unit norm".into()));
        }
    }
    let z = inner(h0, h1);
    let s = z.norm();
    if s >= 1.0 - 1e-12 {
        return Err(Error::CollinearChannels(s));
    }
    let phi = if s == 0.0 { 0.0 } else { z.arg().rem_euclid(TAU) };
    Ok((s.asin(), phi))
}

/// Single-interferer parameters driving every closed form in this module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleInterferenceGeometry {
    pub tau: f64,
    pub phi_z: f64,
    pub c1_abs: f64,
    pub phi_c: f64,
    pub sigma0_sq: f64,
    pub sigma1_sq: f64,
    pub sigma_n_sq: f64,
}

impl SingleInterferenceGeometry {
    pub fn new(
        tau: f64,
        phi_z: f64,
        c1_abs: f64,
        phi_c: f64,
        sigma0_sq: f64,
        sigma1_sq: f64,
        sigma_n_sq: f64,
    ) -> Result<Self> {
        if !(0.0..FRAC_PI_2).contains(&tau) {
            return Err(Error::InvalidArgument(format!("tau {tau} outside [0, pi/2)")));
        }
        if tau.sin() >= 1.0 - 1e-12 {
            return Err(Error::CollinearChannels(tau.sin()));
        }
        for (name, v) in [("sigma0_sq", sigma0_sq), ("sigma1_sq", sigma1_sq), ("sigma_n_sq", sigma_n_sq)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} = {v} must be > 0")));
            }
        }
        let bound = (sigma0_sq * sigma1_sq).sqrt();
        if !(c1_abs >= 0.0) || c1_abs > bound * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!("|c1| = {c1_abs} outside [0, sigma0*sigma1 = {bound}]")));
        }
        if !(phi_z.is_finite() && phi_c.is_finite()) {
            return Err(Error::InvalidArgument("phases must be finite".into()));
        }
        Ok(Self {
            tau,
            phi_z: phi_z.rem_euclid(TAU),
            c1_abs,
            phi_c: phi_c.rem_euclid(TAU),
            sigma0_sq,
            sigma1_sq,
            sigma_n_sq,
        })
    }

    /// Real-valued parameterization: `⟨h₀,h₁⟩ = sin τ` with `τ ∈ (−π/2, π/2)` and
    /// signed real `c₁`. Signs map to phases `π`.
    pub fn from_real(tau: f64, c1: f64, sigma0_sq: f64, sigma1_sq: f64, sigma_n_sq: f64) -> Result<Self> {
        if !(tau > -FRAC_PI_2 && tau < FRAC_PI_2) {
            return Err(Error::InvalidArgument(format!("tau {tau} outside (-pi/2, pi/2)")));
        }
        let phi_z = if tau < 0.0 { PI } else { 0.0 };
        let phi_c = if c1 < 0.0 { PI } else { 0.0 };
        Self::new(tau.abs(), phi_z, c1.abs(), phi_c, sigma0_sq, sigma1_sq, sigma_n_sq)
    }

    /// Geometry of `(h₀, h_j)` with source `j`'s power and correlation, ignoring
    /// every other interferer.
    pub fn from_scenario_pair(scenario: &Scenario, j: usize) -> Result<Self> {
        if j == 0 || j > scenario.n_interferers() {
            return Err(Error::InvalidArgument(format!("interferer index {j} out of range")));
        }
        let h0 = scenario.desired_channel();
        let hj: CVector = scenario.channels().column(j).into_owned();
        let (tau, phi_z) = reduce_to_2d(&h0, &hj)?;
        let c = scenario.correlation(j);
        Self::new(
            tau,
            phi_z,
            c.norm(),
            if c.norm() == 0.0 { 0.0 } else { c.arg() },
            scenario.desired_power(),
            scenario.source_power(j),
            scenario.noise_power(),
        )
    }

    pub fn from_scenario(scenario: &Scenario) -> Result<Self> {
        if scenario.n_interferers() != 1 {
            return Err(Error::InvalidArgument(format!(
                "single-interference geometry needs J = 1, got {}",
                scenario.n_interferers()
            )));
        }
        Self::from_scenario_pair(scenario, 1)
    }

    /// `c₁ = E[s₀* s₁]`.
    pub fn c1(&self) -> C64 {
        C64::from_polar(self.c1_abs, self.phi_c)
    }

    /// `⟨h₀,h₁⟩ = sinτ·e^{iφ_z}`.
    pub fn z(&self) -> C64 {
        C64::from_polar(self.tau.sin(), self.phi_z)
    }

    /// Two-sensor scenario `h₀ = [0,1]ᵀ`, `h₁ = [cosτ, sinτ·e^{iφ_z}]ᵀ`.
    pub fn to_scenario(&self) -> Result<Scenario> {
        let h = CMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(self.tau.cos(), 0.0), c64(1.0, 0.0), self.z()]);
        let c1 = self.c1();
        let cov = CMatrix::from_row_slice(2, 2, &[c64(self.sigma0_sq, 0.0), c1.conj(), c1, c64(self.sigma1_sq, 0.0)]);
        Scenario::new(h, cov, self.sigma_n_sq)
    }

    fn cos2(&self) -> f64 {
        self.tau.cos().powi(2)
    }

    /// `σ₁²cos²τ + σ_n²`, i.e. `g(0)`.
    pub fn base_gain(&self) -> f64 {
        self.sigma1_sq * self.cos2() + self.sigma_n_sq
    }

    pub fn g(&self, lambda: f64) -> f64 {
        self.cos2() * lambda + self.base_gain()
    }

    pub fn delta1(&self) -> f64 {
        self.sigma_n_sq * self.tau.tan() - self.c1_abs * self.tau.cos() * (self.phi_c + self.phi_z).cos()
    }

    pub fn delta2(&self) -> C64 {
        c64(self.sigma_n_sq * self.tau.tan(), 0.0) - C64::from_polar(self.c1_abs * self.tau.cos(), self.phi_c + self.phi_z)
    }

    /// RZF MSE as a function of the multiplier.
    pub fn mse_of_lambda(&self, lambda: f64) -> f64 {
        let x = 1.0 / self.g(lambda);
        let t = self.tau.tan();
        self.delta2().norm_sqr() * self.base_gain() * x * x - 2.0 * self.sigma_n_sq * self.delta1() * t * x
            + self.mse_zf()
    }

    /// `σ_n²(tan²τ + 1)`, the `λ → ∞` limit.
    pub fn mse_zf(&self) -> f64 {
        self.sigma_n_sq * (self.tau.tan().powi(2) + 1.0)
    }

    pub fn mse_mvdr(&self) -> f64 {
        (self.sigma_n_sq * (self.sigma1_sq + self.sigma_n_sq) + self.c1_abs.powi(2) * self.cos2()) / self.base_gain()
    }

    pub fn mse_mmse_dr(&self) -> f64 {
        self.sigma_n_sq * (self.sigma1_sq + self.sigma_n_sq) / self.base_gain()
    }

    /// Scale used for relative comparisons.
    fn delta_scale(&self) -> f64 {
        self.sigma_n_sq * self.tau.tan() + self.c1_abs * self.tau.cos()
    }
}

pub fn mse_of_lambda(geom: &SingleInterferenceGeometry, lambda: f64) -> f64 {
    geom.mse_of_lambda(lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `δ₂ = 0`: MSE independent of `λ`.
    Constant,
    /// `γ ≤ 0`: MSE decreasing in `λ`, ZF optimal.
    ZfOptimal,
    /// `γ ∈ (0,1)`: interior optimum.
    Interior,
    /// `γ ≥ 1`: MSE increasing in `λ`, MVDR optimal.
    MvdrOptimal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaOpt {
    Finite(f64),
    Infinite,
}

impl LambdaOpt {
    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(v),
            Self::Infinite => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub delta1: f64,
    pub delta2_abs_sq: f64,
    /// Undefined (`None`) in the constant regime.
    pub gamma: Option<f64>,
    pub regime: Regime,
    pub lambda_opt: LambdaOpt,
}

pub fn regime(geom: &SingleInterferenceGeometry) -> RegimeReport {
    let delta1 = geom.delta1();
    let delta2_abs_sq = geom.delta2().norm_sqr();
    if delta2_abs_sq.sqrt() <= 1e-14 * geom.delta_scale() || delta2_abs_sq == 0.0 {
        return RegimeReport { delta1, delta2_abs_sq, gamma: None, regime: Regime::Constant, lambda_opt: LambdaOpt::Finite(0.0) };
    }
    let gamma = delta1 * geom.sigma_n_sq * geom.tau.tan() / delta2_abs_sq;
    let (regime, lambda_opt) = if gamma <= 0.0 {
        (Regime::ZfOptimal, LambdaOpt::Infinite)
    } else if gamma >= 1.0 {
        (Regime::MvdrOptimal, LambdaOpt::Finite(0.0))
    } else {
        let lam = geom.base_gain() / geom.cos2() * (1.0 - gamma) / gamma;
        (Regime::Interior, LambdaOpt::Finite(lam))
    };
    RegimeReport { delta1, delta2_abs_sq, gamma: Some(gamma), regime, lambda_opt }
}

/// Real-case optimal multiplier `−c₁(σ₁²cos²τ + σ_n²)/(σ_n² sinτ)` for signed real
/// `c₁` and signed `τ`. Meaningful only in the interior regime.
pub fn lambda_opt_real(tau: f64, c1: f64, sigma1_sq: f64, sigma_n_sq: f64) -> f64 {
    -c1 * (sigma1_sq * tau.cos().powi(2) + sigma_n_sq) / (sigma_n_sq * tau.sin())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AchievedMse {
    pub rzf: f64,
    pub mvdr: f64,
    pub zf: f64,
    pub mmse_dr: f64,
}

/// MSE of each beamformer, RZF at its optimal multiplier.
pub fn achieved_mse(geom: &SingleInterferenceGeometry) -> AchievedMse {
    let mvdr = geom.mse_mvdr();
    let zf = geom.mse_zf();
    let mmse_dr = geom.mse_mmse_dr();
    let rep = regime(geom);
    let rzf = match rep.regime {
        Regime::Constant | Regime::ZfOptimal => zf,
        Regime::MvdrOptimal => mvdr,
        Regime::Interior => {
            let ratio = rep.delta1 * rep.delta1 / rep.delta2_abs_sq;
            mmse_dr + (1.0 - ratio) * geom.sigma_n_sq.powi(2) * geom.tau.tan().powi(2) / geom.base_gain()
        }
    };
    AchievedMse { rzf, mvdr, zf, mmse_dr }
}

/// True iff optimally tuned RZF strictly beats both MVDR and ZF, which holds
/// exactly when `0 < σ_n²δ₁tanτ < |δ₂|²` (equivalently `γ ∈ (0,1)`).
pub fn superiority_witness(geom: &SingleInterferenceGeometry) -> bool {
    let lhs = geom.sigma_n_sq * geom.delta1() * geom.tau.tan();
    let rhs = geom.delta2().norm_sqr();
    // both sides coincide analytically at c₁ = 0; keep rounding from deciding
    let tol = 1e-12 * rhs;
    lhs > tol && lhs < rhs - tol
}

/// `γ` regime of every interferer taken pairwise with the desired source.
pub fn per_source_regimes(scenario: &Scenario) -> Vec<Result<RegimeReport>> {
    (1..=scenario.n_interferers())
        .map(|j| SingleInterferenceGeometry::from_scenario_pair(scenario, j).map(|g| regime(&g)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamformers::{mvdr, rzf_from_lambda, zf};
    use crate::covariance::analytic_covariance;

    fn fig1(c1: f64) -> SingleInterferenceGeometry {
        SingleInterferenceGeometry::from_real(PI / 6.0, c1, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn fig1_gamma_values() {
        let r = regime(&fig1(0.99));
        assert!((r.gamma.unwrap() + 2.0619).abs() < 5e-5);
        assert_eq!(r.regime, Regime::ZfOptimal);
        assert_eq!(r.lambda_opt, LambdaOpt::Infinite);

        let r = regime(&fig1(-0.2));
        assert!((r.gamma.unwrap() - 0.7692).abs() < 5e-5);
        assert_eq!(r.regime, Regime::Interior);
        let lam = r.lambda_opt.finite().unwrap();
        assert!((lam - 0.7).abs() < 1e-12);
        assert!((lam - lambda_opt_real(PI / 6.0, -0.2, 1.0, 1.0)).abs() < 1e-12);

        let r = regime(&fig1(0.1));
        assert!((r.gamma.unwrap() - 1.1765).abs() < 5e-5);
        assert_eq!(r.regime, Regime::MvdrOptimal);
        assert_eq!(r.lambda_opt, LambdaOpt::Finite(0.0));
    }

    #[test]
    fn mse_endpoints_fig1a() {
        let g = fig1(0.99);
        assert!((g.mse_of_lambda(0.0) - 1.5629).abs() < 5e-5);
        assert!((g.mse_of_lambda(0.0) - g.mse_mvdr()).abs() < 1e-12);
        assert!((g.mse_zf() - 4.0 / 3.0).abs() < 1e-12);
        assert!((g.mse_of_lambda(1e12) - 4.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn constant_regime_when_delta2_vanishes() {
        // δ₂ = 0: σ_n² tanτ = |c₁| cosτ with φ_c + φ_z = 0
        let tau: f64 = 0.5;
        let c1 = tau.tan() * 0.8 / tau.cos();
        let g = SingleInterferenceGeometry::new(tau, 0.3, c1, TAU - 0.3, 1.0, 1.0, 0.8).unwrap();
        let r = regime(&g);
        assert_eq!(r.regime, Regime::Constant);
        assert!(r.gamma.is_none());
        for lam in [0.0, 0.1, 10.0, 1e6] {
            assert!((g.mse_of_lambda(lam) - g.mse_zf()).abs() < 1e-12);
        }
        let a = achieved_mse(&g);
        assert!((a.rzf - a.zf).abs() < 1e-12 && (a.mvdr - a.zf).abs() < 1e-12);
    }

    #[test]
    fn interior_real_case_hits_mmse_dr() {
        // φ_c + φ_z = π ⇒ δ₁ = δ₂
        let g = SingleInterferenceGeometry::from_real(PI / 6.0, -0.2, 1.0, 1.0, 1.0).unwrap();
        let a = achieved_mse(&g);
        assert!((a.rzf - 2.0 / 1.75).abs() < 1e-12);
        assert!((a.rzf - a.mmse_dr).abs() < 1e-12);
    }

    #[test]
    fn uncorrelated_rzf_equals_mvdr_and_orthogonal_equals_zf() {
        let g = SingleInterferenceGeometry::new(0.7, 1.0, 0.0, 0.0, 1.0, 2.0, 0.5).unwrap();
        let a = achieved_mse(&g);
        assert!((a.rzf - a.mvdr).abs() < 1e-12);

        let g = SingleInterferenceGeometry::new(0.0, 0.0, 0.6, 2.0, 1.0, 1.0, 0.7).unwrap();
        let a = achieved_mse(&g);
        assert!((a.rzf - a.zf).abs() < 1e-15);
        assert!((a.zf - 0.7).abs() < 1e-15);
    }

    #[test]
    fn superiority_examples() {
        assert!(!superiority_witness(&SingleInterferenceGeometry::new(0.7, 1.0, 0.0, 0.0, 1.0, 2.0, 3.0).unwrap()));
        assert!(!superiority_witness(&SingleInterferenceGeometry::new(0.7, 1.0, 0.0, 0.0, 1.0, 2.0, 0.3).unwrap()));
        assert!(superiority_witness(&fig1(-0.2)));
        assert!(!superiority_witness(&fig1(0.99)));
        assert!(!superiority_witness(&fig1(0.1)));
    }

    #[test]
    fn reduce_examples() {
        let h0 = CVector::from_vec(vec![c64(1.0, 0.0), c64(0.0, 0.0)]);
        let h1 = CVector::from_vec(vec![c64(0.0, 0.0), c64(1.0, 0.0)]);
        assert_eq!(reduce_to_2d(&h0, &h1).unwrap(), (0.0, 0.0));
        let h1 = CVector::from_vec(vec![c64(0.5, 0.0), c64(0.75f64.sqrt(), 0.0)]);
        let (t, p) = reduce_to_2d(&h0, &h1).unwrap();
        assert!((t - PI / 6.0).abs() < 1e-15 && p == 0.0);
        assert!(matches!(reduce_to_2d(&h0, &h0), Err(Error::CollinearChannels(_))));
    }

    #[test]
    fn geometry_validation() {
        assert!(SingleInterferenceGeometry::new(FRAC_PI_2, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(SingleInterferenceGeometry::new(0.3, 0.0, 1.5, 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(SingleInterferenceGeometry::new(0.3, 0.0, 0.5, 0.0, 1.0, 1.0, 0.0).is_err());
        assert!(SingleInterferenceGeometry::from_real(-0.4, -0.3, 1.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn closed_form_matches_constructed_weights_2d() {
        let g = SingleInterferenceGeometry::new(0.6, 2.0, 0.4, 0.9, 1.3, 0.8, 0.5).unwrap();
        let s = g.to_scenario().unwrap();
        let r = analytic_covariance(&s).matrix;
        let (h0, hi) = (s.desired_channel(), s.interference_channels());
        for lam in [0.0, 0.05, 1.0, 40.0] {
            let w = rzf_from_lambda(&r, &h0, &hi, lam).unwrap();
            let a = mse_closed_form(&w.weights, &s);
            let b = g.mse_of_lambda(lam);
            assert!((a - b).abs() < 1e-10 * b, "lam={lam}: {a} vs {b}");
        }
        let w = zf(&r, s.channels()).unwrap();
        assert!((mse_closed_form(&w.weights, &s) - g.mse_zf()).abs() < 1e-10);
        let w = mvdr(&r, &h0).unwrap();
        assert!((mse_closed_form(&w.weights, &s) - g.mse_mvdr()).abs() < 1e-10);
    }

    #[test]
    fn matched_filter_noise_only_mse() {
        let g = SingleInterferenceGeometry::new(0.2, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0).unwrap();
        let s = g.to_scenario().unwrap();
        let w = s.desired_channel();
        // σ₁|h₁ᴴh₀|² leaks in for the matched filter: 1 + sin²τ
        assert!((mse_closed_form(&w, &s) - (1.0 + 0.2f64.sin().powi(2))).abs() < 1e-14);
    }

    #[test]
    fn leakage_split_sums_to_mse_on_constraint() {
        let g = SingleInterferenceGeometry::new(0.9, 4.0, 0.3, 5.0, 1.0, 1.5, 0.4).unwrap();
        let s = g.to_scenario().unwrap();
        let w = CVector::from_vec(vec![c64(-0.3, 0.2), c64(1.0, 0.0)]);
        let (n, i) = leakage_powers(&w, &s);
        assert!((n + i - mse_closed_form(&w, &s)).abs() < 1e-12);
    }
}
