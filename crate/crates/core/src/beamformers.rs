//! Distortionless beamformer family (MVDR, ZF, RZF, MMSE-DR) and the
//! unconstrained approximate-MMSE beamformer.
//!
//! RZF minimizes `wᴴRw` subject to `wᴴh₀ = 1` and `‖H_Iᴴw‖² ≤ ε`. For `ε > 0`
//! the solution is `R_ε⁻¹h₀ / (h₀ᴴR_ε⁻¹h₀)` with `R_ε = R + λ H_I H_Iᴴ`, where the
//! multiplier `λ ≥ 0` decreases strictly as `ε` grows and vanishes at
//! `ε_MVDR = ‖H_Iᴴ w_MVDR‖²`. `ε = 0` is the zero-forcing beamformer.

use std::fmt;

use crate::array_model::Scenario;
use crate::error::{Error, Result};
use crate::linalg::{
    c64, cholesky, hermitian_eigenvalues, hermitian_solve, inner, norm_sq, CMatrix, CVector, C64,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BeamformerLabel {
    Mvdr,
    Zf,
    Rzf,
    MmseDr,
    AMmse,
}

impl BeamformerLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Mvdr => "MVDR",
            Self::Zf => "ZF",
            Self::Rzf => "RZF",
            Self::MmseDr => "MMSE_DR",
            Self::AMmse => "A_MMSE",
        }
    }

    /// Every label except A-MMSE satisfies `wᴴh₀ = 1`.
    pub fn is_distortionless(self) -> bool {
        !matches!(self, Self::AMmse)
    }
}

impl fmt::Display for BeamformerLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Scalars that produced a beamformer, where applicable.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BeamformerParams {
    pub lambda: Option<f64>,
    pub epsilon: Option<f64>,
    pub beta: Option<f64>,
    pub eps_rho: Option<f64>,
    pub eps_phi: Option<f64>,
}

/// Weight vector with its design label. Output is `wᴴy(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer {
    pub weights: CVector,
    pub label: BeamformerLabel,
    pub params: BeamformerParams,
}

impl Beamformer {
    /// `wᴴh`.
    pub fn response(&self, h: &CVector) -> C64 {
        inner(&self.weights, h)
    }

    /// `‖H_Iᴴw‖²`.
    pub fn leakage(&self, hi: &CMatrix) -> f64 {
        norm_sq(&(hi.adjoint() * &self.weights))
    }

    pub fn output_power(&self, r: &CMatrix) -> f64 {
        inner(&self.weights, &(r * &self.weights)).re
    }
}

fn check_square(r: &CMatrix, n: usize) -> Result<()> {
    if r.nrows() != n || r.ncols() != n {
        return Err(Error::Dimension(format!("R is {}x{}, channels have {n} rows", r.nrows(), r.ncols())));
    }
    Ok(())
}

/// `R⁻¹h / (hᴴR⁻¹h)`.
fn distortionless_solve(r: &CMatrix, h0: &CVector) -> Result<CVector> {
    let x = hermitian_solve(r, h0)?;
    let denom = inner(h0, &x);
    if !(denom.re > 0.0) || !denom.re.is_finite() {
        return Err(Error::NotPositiveDefinite);
    }
    // hᴴR⁻¹h is real for Hermitian R; divide by the real part only
    Ok(x / c64(denom.re, 0.0))
}

pub fn mvdr(r: &CMatrix, h0: &CVector) -> Result<Beamformer> {
    check_square(r, h0.len())?;
    Ok(Beamformer {
        weights: distortionless_solve(r, h0)?,
        label: BeamformerLabel::Mvdr,
        params: BeamformerParams { lambda: Some(0.0), ..Default::default() },
    })
}

/// Condition number bound above which `HᴴR⁻¹H` is treated as singular.
pub const ZF_CONDITION_LIMIT: f64 = 1e13;

/// `w = R⁻¹H(HᴴR⁻¹H)⁻¹e₀` with `H = [h₀ H_I]`.
pub fn zf(r: &CMatrix, h: &CMatrix) -> Result<Beamformer> {
    check_square(r, h.nrows())?;
    if h.ncols() == 0 {
        return Err(Error::Dimension("ZF needs at least the desired channel".into()));
    }
    let chol = cholesky(r)?;
    let rinv_h = chol.solve(h);
    let gram = crate::linalg::hermitian_part(&(h.adjoint() * &rinv_h));
    let ev = hermitian_eigenvalues(&gram);
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition < ZF_CONDITION_LIMIT) {
        return Err(Error::SingularConstraints { condition });
    }
    let mut e0 = CVector::zeros(h.ncols());
    e0[0] = c64(1.0, 0.0);
    let coeffs = cholesky(&gram).map_err(|_| Error::SingularConstraints { condition })?.solve(&e0);
    Ok(Beamformer {
        weights: rinv_h * coeffs,
        label: BeamformerLabel::Zf,
        params: BeamformerParams { epsilon: Some(0.0), ..Default::default() },
    })
}

/// `R_λ = R + λ H_I H_Iᴴ`.
pub fn regularized_covariance(r: &CMatrix, hi: &CMatrix, lambda: f64) -> CMatrix {
    if lambda == 0.0 || hi.ncols() == 0 {
        return r.clone();
    }
    r + (hi * hi.adjoint()) * c64(lambda, 0.0)
}

pub fn rzf_from_lambda(r: &CMatrix, h0: &CVector, hi: &CMatrix, lambda: f64) -> Result<Beamformer> {
    check_square(r, h0.len())?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda {lambda} must be finite and >= 0")));
    }
    let w = if lambda == 0.0 || hi.ncols() == 0 {
        distortionless_solve(r, h0)?
    } else {
        // Woodbury: R_λ⁻¹ = R⁻¹ − R⁻¹H_I(λ⁻¹I + H_IᴴR⁻¹H_I)⁻¹H_IᴴR⁻¹, which avoids
        // factoring the badly conditioned R_λ at large λ
        let chol = cholesky(r)?;
        let x0 = chol.solve(h0);
        let x = chol.solve(hi);
        let mut inner_m = crate::linalg::hermitian_part(&(hi.adjoint() * &x));
        for i in 0..inner_m.nrows() {
            inner_m[(i, i)] += c64(1.0 / lambda, 0.0);
        }
        let coeffs = cholesky(&inner_m)?.solve(&(hi.adjoint() * &x0));
        let v = x0 - x * coeffs;
        let denom = inner(h0, &v).re;
        if !(denom > 0.0 && denom.is_finite()) {
            return Err(Error::NotPositiveDefinite);
        }
        v / c64(denom, 0.0)
    };
    let epsilon = norm_sq(&(hi.adjoint() * &w));
    Ok(Beamformer {
        weights: w,
        label: BeamformerLabel::Rzf,
        params: BeamformerParams { lambda: Some(lambda), epsilon: Some(epsilon), ..Default::default() },
    })
}

/// `ε_MVDR = ‖H_Iᴴ w_MVDR‖²`.
pub fn epsilon_mvdr(r: &CMatrix, h0: &CVector, hi: &CMatrix) -> Result<f64> {
    Ok(mvdr(r, h0)?.leakage(hi))
}

/// Outcome of recovering `λ_ε` from `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RzfSolveReport {
    pub lambda: f64,
    pub epsilon_achieved: f64,
    pub epsilon_mvdr: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
}

const MAX_DOUBLINGS: usize = 100;
const MAX_BISECTIONS: usize = 400;

/// Solves RZF for a leakage budget `ε` by bracketing and bisecting on `λ`.
pub fn rzf_from_epsilon(
    r: &CMatrix,
    h0: &CVector,
    hi: &CMatrix,
    epsilon: f64,
) -> Result<(Beamformer, RzfSolveReport)> {
    if !(epsilon >= 0.0) || epsilon.is_nan() {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} must be >= 0")));
    }
    let w_mvdr = mvdr(r, h0)?;
    let eps_mvdr = w_mvdr.leakage(hi);

    if epsilon >= eps_mvdr {
        let report = RzfSolveReport {
            lambda: 0.0,
            epsilon_achieved: eps_mvdr,
            epsilon_mvdr: eps_mvdr,
            iterations: 0,
            bracket: (0.0, 0.0),
        };
        let bf = Beamformer {
            weights: w_mvdr.weights,
            label: BeamformerLabel::Rzf,
            params: BeamformerParams { lambda: Some(0.0), epsilon: Some(epsilon), ..Default::default() },
        };
        return Ok((bf, report));
    }

    if epsilon == 0.0 {
        let h = CMatrix::from_columns(&std::iter::once(h0.clone()).chain(hi.column_iter().map(|c| c.into_owned())).collect::<Vec<_>>());
        let w = zf(r, &h)?;
        let report = RzfSolveReport {
            lambda: f64::INFINITY,
            epsilon_achieved: w.leakage(hi),
            epsilon_mvdr: eps_mvdr,
            iterations: 0,
            bracket: (f64::INFINITY, f64::INFINITY),
        };
        let bf = Beamformer {
            weights: w.weights,
            label: BeamformerLabel::Rzf,
            params: BeamformerParams { lambda: None, epsilon: Some(0.0), ..Default::default() },
        };
        return Ok((bf, report));
    }

    let tol = 1e-10 * epsilon;
    let leak = |lambda: f64| -> Result<(Beamformer, f64)> {
        let bf = rzf_from_lambda(r, h0, hi, lambda)?;
        let l = bf.leakage(hi);
        Ok((bf, l))
    };

    let mut iterations = 0;
    let mut lo = 0.0;
    let mut hi_lambda = 1.0;
    let (mut best, mut best_leak) = leak(hi_lambda)?;
    let mut doublings = 0;
    while best_leak > epsilon {
        lo = hi_lambda;
        hi_lambda *= 2.0;
        doublings += 1;
        iterations += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(Error::BisectionFailed { lo, hi: hi_lambda });
        }
        (best, best_leak) = leak(hi_lambda)?;
    }

    // invariant: leak(lo) > ε >= leak(hi)
    let mut best_err = (best_leak - epsilon).abs();
    let mut best_lambda = hi_lambda;
    for _ in 0..MAX_BISECTIONS {
        if best_err <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi_lambda);
        if mid <= lo || mid >= hi_lambda {
            break;
        }
        iterations += 1;
        let (bf, l) = leak(mid)?;
        let err = (l - epsilon).abs();
        if err < best_err {
            best_err = err;
            best = bf;
            best_lambda = mid;
        }
        if l > epsilon {
            lo = mid;
        } else {
            hi_lambda = mid;
        }
    }
    if best_err > 1e-8 * epsilon.max(1.0) {
        return Err(Error::BisectionFailed { lo, hi: hi_lambda });
    }

    let report = RzfSolveReport {
        lambda: best_lambda,
        epsilon_achieved: best.leakage(hi),
        epsilon_mvdr: eps_mvdr,
        iterations,
        bracket: (lo, hi_lambda),
    };
    best.params.epsilon = Some(epsilon);
    Ok((best, report))
}

/// `R̃ = σ_n² I + H_I C_I H_Iᴴ`, the covariance whose MVDR solution minimizes MSE on `wᴴh₀ = 1`.
pub fn mmse_dr_covariance(scenario: &Scenario) -> CMatrix {
    let n = scenario.n_sensors();
    let mut rt = CMatrix::identity(n, n) * c64(scenario.noise_power(), 0.0);
    if scenario.n_interferers() > 0 {
        let hi = scenario.interference_channels();
        rt += &hi * scenario.interference_cov() * hi.adjoint();
    }
    crate::linalg::hermitian_part(&rt)
}

pub fn mmse_dr(scenario: &Scenario) -> Result<Beamformer> {
    if !(scenario.noise_power() > 0.0) {
        return Err(Error::InvalidArgument("MMSE-DR requires noise power > 0".into()));
    }
    let w = distortionless_solve(&mmse_dr_covariance(scenario), &scenario.desired_channel())?;
    Ok(Beamformer { weights: w, label: BeamformerLabel::MmseDr, params: BeamformerParams::default() })
}

/// Unconstrained minimizer `R⁻¹(σ̂₀²h₀ + Σ ĉ_j h_j)` of the approximate MSE.
pub fn a_mmse(r: &CMatrix, h0: &CVector, hi: &CMatrix, sigma0_sq_hat: f64, c_hat: &[C64]) -> Result<Beamformer> {
    check_square(r, h0.len())?;
    if c_hat.len() != hi.ncols() {
        return Err(Error::Dimension(format!("{} correlation estimates for {} interferers", c_hat.len(), hi.ncols())));
    }
    let mut rhs = h0 * c64(sigma0_sq_hat, 0.0);
    for (j, c) in c_hat.iter().enumerate() {
        rhs += hi.column(j) * *c;
    }
    Ok(Beamformer { weights: hermitian_solve(r, &rhs)?, label: BeamformerLabel::AMmse, params: BeamformerParams::default() })
}

/// Multiplicative power error and additive magnitude/phase correlation errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatisticsError {
    pub beta: f64,
    pub eps_rho: f64,
    pub eps_phi: f64,
}

impl StatisticsError {
    pub const EXACT: Self = Self { beta: 1.0, eps_rho: 0.0, eps_phi: 0.0 };
}

/// `σ̂₀² = βσ₀²`, `|ĉ_j| = |c_j| + ε_ρσ₀σ_j`, `arg ĉ_j = arg c_j + ε_φ`.
pub fn perturbed_statistics(scenario: &Scenario, err: StatisticsError) -> (f64, Vec<C64>) {
    let s0 = scenario.desired_power();
    let c_hat = (1..=scenario.n_interferers())
        .map(|j| {
            let c = scenario.correlation(j);
            let mag = c.norm() + err.eps_rho * (s0 * scenario.source_power(j)).sqrt();
            C64::from_polar(mag, c.arg() + err.eps_phi)
        })
        .collect();
    (err.beta * s0, c_hat)
}

/// A-MMSE built from the perturbed statistics of `scenario`.
pub fn a_mmse_with_error(r: &CMatrix, scenario: &Scenario, err: StatisticsError) -> Result<Beamformer> {
    let (s0_hat, c_hat) = perturbed_statistics(scenario, err);
    let mut bf = a_mmse(r, &scenario.desired_channel(), &scenario.interference_channels(), s0_hat, &c_hat)?;
    bf.params = BeamformerParams { beta: Some(err.beta), eps_rho: Some(err.eps_rho), eps_phi: Some(err.eps_phi), ..Default::default() };
    Ok(bf)
}
