//! Online beamformers driven one snapshot at a time.
//!
//! [`DdaaState`] is the dual-domain adaptive algorithm for RZF: each step mixes
//! a projection onto `C ∩ {w : wᴴy(k) = 0}` in the sensor domain with a
//! projection of `H̃_Iᴴw` onto the ball `‖s‖² ≤ ε` in the interference domain,
//! where `H̃_I = H_I/σ_max(H_I)`. Both directions are tangent to
//! `C = {w : wᴴh₀ = 1}`, so every iterate stays distortionless.
//!
//! [`CnlmsState`] is a constrained NLMS baseline for MVDR (`wᴴh₀ = 1`) and ZF
//! (`wᴴh₀ = 1`, `wᴴh_j = 0`).

use rayon::prelude::*;

use crate::array_model::{trial_seed, Scenario, SignalStream, SourceModel};
use crate::covariance::gram_of;
use crate::error::{Error, Result};
use crate::linalg::{c64, hermitian_solve_matrix, identity, inner, norm_sq, CMatrix, CVector, C64};

/// `Q = I − h₀h₀ᴴ/(h₀ᴴh₀)`.
pub fn tangent_projector(h0: &CVector) -> CMatrix {
    identity(h0.len()) - h0 * h0.adjoint() / c64(norm_sq(h0), 0.0)
}

/// Diagnostics of one DDAA update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdaaStep {
    pub eta: f64,
    pub g1_norm: f64,
    pub g2_norm: f64,
}

#[derive(Debug, Clone)]
pub struct DdaaState {
    w: CVector,
    h0: CVector,
    normalized_channels: CMatrix,
    projector: CMatrix,
    epsilon: f64,
    step: f64,
    alpha: f64,
}

impl DdaaState {
    /// `epsilon` bounds `‖H̃_Iᴴw‖²` for the normalized channels.
    pub fn new(h0: &CVector, hi: &CMatrix, epsilon: f64, step: f64, alpha: f64) -> Result<Self> {
        if hi.nrows() != h0.len() {
            return Err(Error::Dimension("interference channels and h0 differ in length".into()));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!("epsilon {epsilon} must be finite and >= 0")));
        }
        if !(step > 0.0 && step < 2.0) {
            return Err(Error::InvalidArgument(format!("step {step} outside (0, 2)")));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidArgument(format!("alpha {alpha} outside [0, 1]")));
        }
        let h0_sq = norm_sq(h0);
        if h0_sq == 0.0 {
            return Err(Error::InvalidArgument("h0 must be nonzero".into()));
        }
        let normalized_channels = if hi.ncols() == 0 { hi.clone() } else { gram_of(hi).normalized };
        Ok(Self {
            w: h0 / c64(h0_sq, 0.0),
            h0: h0.clone(),
            normalized_channels,
            projector: tangent_projector(h0),
            epsilon,
            step,
            alpha,
        })
    }

    /// Takes the budget of the batch constraint `‖H_Iᴴw‖² ≤ ε` and rescales it
    /// to the normalized channels, `ε/σ_max(H_I)²`.
    pub fn from_batch_epsilon(h0: &CVector, hi: &CMatrix, batch_epsilon: f64, step: f64, alpha: f64) -> Result<Self> {
        let smax = if hi.ncols() == 0 { 1.0 } else { gram_of(hi).sigma_max };
        Self::new(h0, hi, batch_epsilon / (smax * smax), step, alpha)
    }

    pub fn weights(&self) -> &CVector {
        &self.w
    }

    pub fn set_weights(&mut self, w: CVector) {
        self.w = w;
    }

    pub fn projector(&self) -> &CMatrix {
        &self.projector
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `‖H̃_Iᴴw‖²`.
    pub fn leakage(&self) -> f64 {
        norm_sq(&(self.normalized_channels.adjoint() * &self.w))
    }

    fn qy(&self, y: &CVector) -> CVector {
        y - &self.h0 * (inner(&self.h0, y) / c64(norm_sq(&self.h0), 0.0))
    }

    /// `P_{C∩H_k}(w) − w = −(yᴴw / yᴴQy)·Qy`; zero when `yᴴQy` vanishes.
    pub fn sensor_direction(&self, y: &CVector) -> CVector {
        let qy = self.qy(y);
        let yqy = norm_sq(&qy);
        // ‖Qy‖ at rounding level means y is collinear with h₀
        if yqy <= 1e-24 * norm_sq(y) || yqy == 0.0 {
            return CVector::zeros(y.len());
        }
        let coef = -inner(y, &self.w) / c64(yqy, 0.0);
        qy * coef
    }

    /// `P_{B_ε}(H̃_Iᴴw) − H̃_Iᴴw`.
    pub fn dual_direction(&self) -> CVector {
        let v: CVector = self.normalized_channels.adjoint() * &self.w;
        let nsq = norm_sq(&v);
        if nsq > self.epsilon {
            let scale = self.epsilon.sqrt() / nsq.sqrt() - 1.0;
            v * c64(scale, 0.0)
        } else {
            CVector::zeros(v.len())
        }
    }

    pub fn step(&mut self, y: &CVector) -> DdaaStep {
        let g1 = self.sensor_direction(y);
        let g2 = self.dual_direction();
        let back = &self.normalized_channels * &g2;
        let back = &back - &self.h0 * (inner(&self.h0, &back) / c64(norm_sq(&self.h0), 0.0));
        let g = &g1 * c64(self.alpha, 0.0) + back * c64(1.0 - self.alpha, 0.0);
        let (g1_sq, g2_sq, g_sq) = (norm_sq(&g1), norm_sq(&g2), norm_sq(&g));
        let eta = if g_sq > 0.0 { (self.alpha * g1_sq + (1.0 - self.alpha) * g2_sq) / g_sq } else { 1.0 };
        if g_sq > 0.0 {
            self.w += g * c64(self.step * eta, 0.0);
        }
        DdaaStep { eta, g1_norm: g1_sq.sqrt(), g2_norm: g2_sq.sqrt() }
    }
}

/// Projected normalized stochastic gradient on `|wᴴy|²` over the affine set
/// `{w : wᴴa_m = b_m}`.
#[derive(Debug, Clone)]
pub struct CnlmsState {
    w: CVector,
    constraints: CMatrix,
    values: CVector,
    projector: CMatrix,
    offset: CVector,
    step: f64,
    regularizer: f64,
}

impl CnlmsState {
    pub fn new(constraints: CMatrix, values: CVector, step: f64, regularizer: f64) -> Result<Self> {
        if values.len() != constraints.ncols() {
            return Err(Error::Dimension("one target value per constraint column".into()));
        }
        if !(step > 0.0 && step.is_finite()) || !(regularizer >= 0.0) {
            return Err(Error::InvalidArgument("step must be > 0 and regularizer >= 0".into()));
        }
        let n = constraints.nrows();
        let gram = constraints.adjoint() * &constraints;
        // A(AᴴA)⁻¹, N×M
        let pinv_t = &constraints * hermitian_solve_matrix(&gram, &identity(constraints.ncols()))
            .map_err(|_| Error::SingularConstraints { condition: f64::INFINITY })?;
        let projector = identity(n) - &pinv_t * constraints.adjoint();
        // wᴴa_m = b_m ⇔ Aᴴw = b̄
        let offset = &pinv_t * values.map(|z| z.conj());
        Ok(Self { w: offset.clone(), constraints, values, projector, offset, step, regularizer })
    }

    pub fn mvdr(h0: &CVector, step: f64) -> Result<Self> {
        Self::new(CMatrix::from_columns(&[h0.clone()]), CVector::from_element(1, c64(1.0, 0.0)), step, 1e-12)
    }

    /// `channels = [h₀ H_I]`.
    pub fn zf(channels: &CMatrix, step: f64) -> Result<Self> {
        let mut b = CVector::zeros(channels.ncols());
        b[0] = c64(1.0, 0.0);
        Self::new(channels.clone(), b, step, 1e-12)
    }

    pub fn weights(&self) -> &CVector {
        &self.w
    }

    /// Largest `|wᴴa_m − b_m|`.
    pub fn constraint_residual(&self) -> f64 {
        let r: CVector = self.constraints.adjoint() * &self.w;
        r.iter().zip(self.values.iter()).map(|(a, b)| (a.conj() - b).norm()).fold(0.0, f64::max)
    }

    /// Returns false when the snapshot is degenerate and the step is skipped.
    pub fn step(&mut self, y: &CVector) -> bool {
        let power = norm_sq(y);
        if power <= f64::MIN_POSITIVE {
            return false;
        }
        let e = inner(&self.w, y);
        let moved = &self.w - y * (e.conj() * (self.step / (power + self.regularizer)));
        self.w = &self.projector * moved + &self.offset;
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OnlineAlgorithm {
    /// `epsilon` is the normalized-channel budget fed to [`DdaaState::new`].
    Ddaa { epsilon: f64, step: f64, alpha: f64 },
    CnlmsMvdr { step: f64 },
    CnlmsZf { step: f64 },
}

impl OnlineAlgorithm {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Ddaa { .. } => "DDAA",
            Self::CnlmsMvdr { .. } => "CNLMS_MVDR",
            Self::CnlmsZf { .. } => "CNLMS_ZF",
        }
    }
}

enum Machine {
    Ddaa(DdaaState),
    Cnlms(CnlmsState),
}

impl Machine {
    fn build(alg: OnlineAlgorithm, scenario: &Scenario) -> Result<Self> {
        let h0 = scenario.desired_channel();
        Ok(match alg {
            OnlineAlgorithm::Ddaa { epsilon, step, alpha } => {
                Self::Ddaa(DdaaState::new(&h0, &scenario.interference_channels(), epsilon, step, alpha)?)
            }
            OnlineAlgorithm::CnlmsMvdr { step } => Self::Cnlms(CnlmsState::mvdr(&h0, step)?),
            OnlineAlgorithm::CnlmsZf { step } => Self::Cnlms(CnlmsState::zf(scenario.channels(), step)?),
        })
    }

    fn weights(&self) -> &CVector {
        match self {
            Self::Ddaa(s) => s.weights(),
            Self::Cnlms(s) => s.weights(),
        }
    }

    fn step(&mut self, y: &CVector) {
        match self {
            Self::Ddaa(s) => {
                s.step(y);
            }
            Self::Cnlms(s) => {
                s.step(y);
            }
        }
    }
}

/// Trial-averaged learning curve.
#[derive(Debug, Clone, PartialEq)]
pub struct OnlineRun {
    /// `|w_kᴴy(k) − s₀(k)|²` averaged over trials, using the weights before update `k`.
    pub curve: Vec<f64>,
    pub final_weights: Vec<CVector>,
    /// Largest `|w_kᴴh₀ − 1|` over all iterates and trials.
    pub max_distortion_error: f64,
    /// Largest `|w_kᴴh_j|`, `j ≥ 1`, over all iterates and trials.
    pub max_nulling_residual: f64,
}

struct TrialOutcome {
    sq_err: Vec<f64>,
    weights: CVector,
    distortion: f64,
    nulling: f64,
}

const CHUNK: usize = 1024;

fn run_trial(alg: OnlineAlgorithm, scenario: &Scenario, models: &[SourceModel], n_iterations: usize, seed: u64) -> Result<TrialOutcome> {
    let mut machine = Machine::build(alg, scenario)?;
    let mut stream = SignalStream::new(scenario, models, seed)?;
    let h0 = scenario.desired_channel();
    let hi = scenario.interference_channels();
    let mut sq_err = Vec::with_capacity(n_iterations);
    let one = c64(1.0, 0.0);
    let track = |w: &CVector, d: &mut f64, z: &mut f64| {
        *d = d.max((inner(w, &h0) - one).norm());
        if hi.ncols() > 0 {
            let r: CVector = hi.adjoint() * w;
            *z = r.iter().map(|c| c.norm()).fold(*z, f64::max);
        }
    };
    let (mut distortion, mut nulling) = (0.0, 0.0);
    track(machine.weights(), &mut distortion, &mut nulling);
    let mut done = 0;
    while done < n_iterations {
        let k = CHUNK.min(n_iterations - done);
        let block = stream.next_block(k);
        for t in 0..k {
            let y: CVector = block.snapshots.column(t).into_owned();
            let out: C64 = inner(machine.weights(), &y);
            sq_err.push((out - block.sources[(0, t)]).norm_sqr());
            machine.step(&y);
            track(machine.weights(), &mut distortion, &mut nulling);
        }
        done += k;
    }
    Ok(TrialOutcome { sq_err, weights: machine.weights().clone(), distortion, nulling })
}

/// Runs `n_trials` independent trials (seeds split from `seed`) in parallel and
/// averages their squared-error curves in trial order.
pub fn run_online(
    alg: OnlineAlgorithm,
    scenario: &Scenario,
    models: &[SourceModel],
    n_iterations: usize,
    n_trials: usize,
    seed: u64,
) -> Result<OnlineRun> {
    if n_trials == 0 {
        return Err(Error::InvalidArgument("n_trials must be >= 1".into()));
    }
    let outcomes = (0..n_trials)
        .into_par_iter()
        .map(|t| run_trial(alg, scenario, models, n_iterations, trial_seed(seed, t as u64)))
        .collect::<Result<Vec<_>>>()?;
    let mut curve = vec![0.0; n_iterations];
    let mut final_weights = Vec::with_capacity(n_trials);
    let (mut distortion, mut nulling) = (0.0f64, 0.0f64);
    for o in outcomes {
        for (acc, e) in curve.iter_mut().zip(&o.sq_err) {
            *acc += e;
        }
        distortion = distortion.max(o.distortion);
        nulling = nulling.max(o.nulling);
        final_weights.push(o.weights);
    }
    let n = n_trials as f64;
    curve.iter_mut().for_each(|v| *v /= n);
    Ok(OnlineRun { curve, final_weights, max_distortion_error: distortion, max_nulling_residual: nulling })
}

/// Mean over the trailing `window` samples (fewer at the start).
pub fn trailing_average(curve: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(curve.len());
    let mut sum = 0.0;
    for (k, &v) in curve.iter().enumerate() {
        sum += v;
        if k >= window {
            sum -= curve[k - window];
        }
        out.push(sum / (k + 1).min(window) as f64);
    }
    out
}
