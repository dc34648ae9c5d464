//! Narrowband array model: scenarios, steering vectors, correlated source
//! synthesis and SNR/SIR calibration.
//!
//! Received snapshots follow `y(k) = Σ_j s_j(k) h_j + n(k)` with unit-norm
//! channels `h_j`. Column 0 of the channel matrix is always the desired source.
//!
//! The source covariance is stored as `C[l][j] = E[s_l(k) s_j(k)*]`, so
//! `H C Hᴴ` is the noise-free part of the receive covariance. In that layout the
//! desired/interferer correlation `c_j = E[s_0* s_j]` is `C[j][0]` and the
//! interferer cross term `c_{l,j} = E[s_l* s_j]` is `C[j][l]`.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{c64, hermitian_eigenvalues, norm_sq, CMatrix, CVector, C64};

const UNIT_NORM_TOL: f64 = 1e-12;

/// Full second-order description of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    channels: CMatrix,
    source_cov: CMatrix,
    noise_power: f64,
}

impl Scenario {
    pub fn new(channels: CMatrix, source_cov: CMatrix, noise_power: f64) -> Result<Self> {
        let n = channels.nrows();
        let m = channels.ncols();
        if n == 0 || m == 0 {
            return Err(Error::Dimension("channel matrix must have at least one row and column".into()));
        }
        if source_cov.nrows() != m || source_cov.ncols() != m {
            return Err(Error::Dimension(format!(
                "source covariance is {}x{}, expected {m}x{m}",
                source_cov.nrows(),
                source_cov.ncols()
            )));
        }
        if !(noise_power.is_finite() && noise_power >= 0.0) {
            return Err(Error::InvalidArgument(format!("noise power {noise_power} must be finite and >= 0")));
        }
        for (j, col) in channels.column_iter().enumerate() {
            let nrm = col.norm();
            if (nrm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::InvalidArgument(format!("channel {j} has norm {nrm}, expected 1")));
            }
        }
        let scale = source_cov.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let skew = (&source_cov - source_cov.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if skew > 1e-12 * scale {
            return Err(Error::InvalidArgument("source covariance is not Hermitian".into()));
        }
        let ev = hermitian_eigenvalues(&source_cov);
        let (lo, hi) = (ev[0], ev[ev.len() - 1]);
        if lo < -1e-10 * hi.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidArgument(format!(
                "source covariance is not positive semidefinite (min eigenvalue {lo:e})"
            )));
        }
        for l in 0..m {
            for j in 0..m {
                let bound = (source_cov[(l, l)].re.max(0.0) * source_cov[(j, j)].re.max(0.0)).sqrt();
                if source_cov[(l, j)].norm() > bound * (1.0 + 1e-9) + 1e-12 * scale {
                    return Err(Error::InvalidArgument(format!("correlation ({l},{j}) exceeds Cauchy-Schwarz bound")));
                }
            }
        }
        Ok(Self { channels, source_cov, noise_power })
    }

    pub fn n_sensors(&self) -> usize {
        self.channels.nrows()
    }

    pub fn n_interferers(&self) -> usize {
        self.channels.ncols() - 1
    }

    pub fn channels(&self) -> &CMatrix {
        &self.channels
    }

    pub fn source_cov(&self) -> &CMatrix {
        &self.source_cov
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn desired_channel(&self) -> CVector {
        self.channels.column(0).into_owned()
    }

    /// `H_I = [h_1 … h_J]`, N×J.
    pub fn interference_channels(&self) -> CMatrix {
        self.channels.columns(1, self.n_interferers()).into_owned()
    }

    pub fn desired_power(&self) -> f64 {
        self.source_cov[(0, 0)].re
    }

    pub fn source_power(&self, j: usize) -> f64 {
        self.source_cov[(j, j)].re
    }

    /// `c_j = E[s_0* s_j]`.
    pub fn correlation(&self, j: usize) -> C64 {
        self.source_cov[(j, 0)]
    }

    /// `c_{l,j} = E[s_l* s_j]`.
    pub fn cross_correlation(&self, l: usize, j: usize) -> C64 {
        self.source_cov[(j, l)]
    }

    /// Interference block `C[1.., 1..]`.
    pub fn interference_cov(&self) -> CMatrix {
        let j = self.n_interferers();
        self.source_cov.view((1, 1), (j, j)).into_owned()
    }

    pub fn with_noise_power(&self, noise_power: f64) -> Result<Self> {
        Self::new(self.channels.clone(), self.source_cov.clone(), noise_power)
    }

    /// Power of the desired field at the sensors, `σ₀²‖h₀‖²`.
    pub fn desired_field_power(&self) -> f64 {
        self.desired_power() * norm_sq(&self.desired_channel())
    }

    /// `trace(H_I C_I H_Iᴴ)`, including interferer cross terms.
    pub fn interference_field_power(&self) -> f64 {
        if self.n_interferers() == 0 {
            return 0.0;
        }
        let hi = self.interference_channels();
        (&hi * self.interference_cov() * hi.adjoint()).trace().re
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * (self.desired_field_power() / (self.n_sensors() as f64 * self.noise_power)).log10()
    }

    pub fn sir_db(&self) -> f64 {
        10.0 * (self.desired_field_power() / self.interference_field_power()).log10()
    }
}

/// How a source's samples are drawn.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceKind {
    WhiteGaussian,
    /// `x(k) = Σ_i a_i x(k-i) + e(k)`, `e ~ CN(0, innovation_power)`.
    Ar { coefficients: Vec<f64>, innovation_power: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceModel {
    pub kind: SourceKind,
    /// Relative phase `φ_j` of an interferer.
    pub relative_phase: f64,
    /// Power `σ_v²` of the private noise mixed into an interferer.
    pub leak_power: f64,
}

impl SourceModel {
    pub fn white() -> Self {
        Self { kind: SourceKind::WhiteGaussian, relative_phase: 0.0, leak_power: 0.0 }
    }

    /// Order-6 AR source with every coefficient 0.2.
    pub fn ar6() -> Self {
        Self {
            kind: SourceKind::Ar { coefficients: vec![0.2; 6], innovation_power: 1.0 },
            relative_phase: 0.0,
            leak_power: 0.0,
        }
    }

    pub fn interferer(relative_phase: f64, leak_power: f64) -> Self {
        Self { kind: SourceKind::WhiteGaussian, relative_phase, leak_power }
    }
}

/// `σ_v² = 1/ρ² − 1`, the leak power giving correlation magnitude `ρ` (with σ₀² = 1).
pub fn leak_power_for_rho(rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidArgument(format!("rho {rho} outside (0, 1]")));
    }
    Ok(1.0 / (rho * rho) - 1.0)
}

/// One Monte Carlo record.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalBlock {
    pub sources: CMatrix,
    pub noise: CMatrix,
    pub snapshots: CMatrix,
}

impl SignalBlock {
    pub fn block_length(&self) -> usize {
        self.snapshots.ncols()
    }
}

/// Unit-norm ULA response `(1/√N)[1, e^{2πi(d/λ)cosθ}, …]`.
pub fn ula_steering(theta: f64, n_sensors: usize, spacing_ratio: f64) -> Result<CVector> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::InvalidArgument(format!("DOA {theta} outside [0, pi]")));
    }
    if n_sensors == 0 {
        return Err(Error::InvalidArgument("n_sensors must be >= 1".into()));
    }
    if !(spacing_ratio > 0.0 && spacing_ratio.is_finite()) {
        return Err(Error::InvalidArgument(format!("spacing ratio {spacing_ratio} must be > 0")));
    }
    let amp = 1.0 / (n_sensors as f64).sqrt();
    let step = 2.0 * PI * spacing_ratio * theta.cos();
    Ok(CVector::from_fn(n_sensors, |i, _| C64::from_polar(amp, step * i as f64)))
}

/// DOA grid `{(j+1)π/(J+2)}` with `θ₀ = ⌈(J+1)/3⌉π/(J+2)` moved to slot 0.
pub fn toy_doa_grid(n_interferers: usize) -> Result<Vec<f64>> {
    if n_interferers == 0 {
        return Err(Error::InvalidArgument("toy grid needs at least one interferer".into()));
    }
    let j = n_interferers;
    let denom = (j + 2) as f64;
    let mut grid: Vec<f64> = (0..=j).map(|i| (i + 1) as f64 * PI / denom).collect();
    let m = (j + 1).div_ceil(3);
    // θ₀ = mπ/(J+2) sits at grid index m-1
    grid.swap(0, m - 1);
    Ok(grid)
}

/// ULA channel matrix for the toy DOA grid.
pub fn toy_channels(n_sensors: usize, n_interferers: usize, spacing_ratio: f64) -> Result<CMatrix> {
    let doas = toy_doa_grid(n_interferers)?;
    let cols = doas
        .iter()
        .map(|&t| ula_steering(t, n_sensors, spacing_ratio))
        .collect::<Result<Vec<_>>>()?;
    Ok(CMatrix::from_columns(&cols))
}

/// Source covariance for interferers `s_j = σ_j e^{iφ_j}(s₀ + v_j)/√(1+σ_v²)`.
///
/// `powers` and `phases` hold the J interferer entries.
pub fn correlated_interference_cov(
    powers: &[f64],
    phases: &[f64],
    leak_power: f64,
    desired_power: f64,
) -> Result<CMatrix> {
    correlated_cov_per_source(powers, phases, &vec![leak_power; powers.len()], desired_power)
}

/// As [`correlated_interference_cov`] with one leak power per interferer.
pub fn correlated_cov_per_source(
    powers: &[f64],
    phases: &[f64],
    leak_powers: &[f64],
    desired_power: f64,
) -> Result<CMatrix> {
    let j = powers.len();
    if phases.len() != j || leak_powers.len() != j {
        return Err(Error::Dimension("powers, phases and leak powers must have equal length".into()));
    }
    if powers.iter().chain(leak_powers).any(|&p| !(p.is_finite() && p >= 0.0))
        || !(desired_power.is_finite() && desired_power >= 0.0)
    {
        return Err(Error::InvalidArgument("powers must be finite and >= 0".into()));
    }
    // amplitude a_j with s_j = a_j (s0 + v_j)
    let amp: Vec<C64> = (0..j)
        .map(|i| C64::from_polar(powers[i].sqrt() / (1.0 + leak_powers[i]).sqrt(), phases[i]))
        .collect();
    let mut c = CMatrix::zeros(j + 1, j + 1);
    c[(0, 0)] = c64(desired_power, 0.0);
    for l in 0..j {
        c[(l + 1, 0)] = amp[l] * desired_power;
        c[(0, l + 1)] = c[(l + 1, 0)].conj();
        for m in 0..j {
            let shared = if l == m { desired_power + leak_powers[l] } else { desired_power };
            c[(l + 1, m + 1)] = amp[l] * amp[m].conj() * shared;
        }
    }
    Ok(c)
}

/// Unit-power template: σ₀² = 1, every interferer at power 1 with correlation
/// magnitude `rho`, noise power 1. Intended to be passed to [`calibrate_powers`].
pub fn correlated_template(channels: CMatrix, rho: f64, phases: &[f64]) -> Result<Scenario> {
    let j = channels.ncols().saturating_sub(1);
    if phases.len() != j {
        return Err(Error::Dimension(format!("{} phases given for {j} interferers", phases.len())));
    }
    let leak = leak_power_for_rho(rho)?;
    let cov = correlated_interference_cov(&vec![1.0; j], phases, leak, 1.0)?;
    Scenario::new(channels, cov, 1.0)
}

/// Sets the noise power for the requested SNR and rescales all interferers by a
/// common factor for the requested SIR. `sir_db = +∞` removes the interference.
pub fn calibrate_powers(template: &Scenario, snr_db: f64, sir_db: f64) -> Result<Scenario> {
    if snr_db.is_nan() || sir_db.is_nan() {
        return Err(Error::InvalidArgument("SNR/SIR must not be NaN".into()));
    }
    let signal = template.desired_field_power();
    if signal <= 0.0 {
        return Err(Error::Infeasible("desired field power is zero".into()));
    }
    let noise = signal / (template.n_sensors() as f64 * 10f64.powf(snr_db / 10.0));

    let target = signal * 10f64.powf(-sir_db / 10.0);
    let current = template.interference_field_power();
    let kappa = if target == 0.0 {
        0.0
    } else if current <= 0.0 {
        return Err(Error::Infeasible(format!(
            "interference field power is zero but SIR {sir_db} dB was requested"
        )));
    } else {
        target / current
    };

    let mut cov = template.source_cov().clone();
    let m = cov.nrows();
    let root = kappa.sqrt();
    for l in 1..m {
        cov[(l, 0)] *= root;
        cov[(0, l)] *= root;
        for j in 1..m {
            cov[(l, j)] *= kappa;
        }
    }
    Scenario::new(template.channels().clone(), cov, noise)
}

/// Renormalizes every column to unit norm; returns the original norms.
pub fn normalize_columns(m: &CMatrix) -> Result<(CMatrix, Vec<f64>)> {
    let mut out = m.clone();
    let mut scales = Vec::with_capacity(m.ncols());
    for (j, mut col) in out.column_iter_mut().enumerate() {
        let nrm = col.norm();
        if nrm == 0.0 || !nrm.is_finite() {
            return Err(Error::InvalidArgument(format!("column {j} has zero or non-finite norm")));
        }
        col.unscale_mut(nrm);
        scales.push(nrm);
    }
    Ok((out, scales))
}

/// Channel matrix read from a text file, renormalized to unit-norm columns.
#[derive(Debug, Clone)]
pub struct ChannelImport {
    pub channels: CMatrix,
    /// Original column norms.
    pub scales: Vec<f64>,
}

/// Parses `a`, `a+bi`, `a-bi`, `bi` (a trailing `j` is also accepted).
pub fn parse_complex(token: &str) -> Option<C64> {
    let t = token.trim();
    if t.is_empty() {
        return None;
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return t.parse::<f64>().ok().map(|re| c64(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let parse_im = |s: &str| match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => s.parse::<f64>().ok(),
    };
    match split {
        Some(i) => Some(c64(body[..i].parse().ok()?, parse_im(&body[i..])?)),
        None => Some(c64(0.0, parse_im(body)?)),
    }
}

/// One sensor row per line, whitespace-separated entries; blank lines and
/// lines starting with `#` are skipped.
pub fn parse_channel_matrix(text: &str) -> Result<ChannelImport> {
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                parse_complex(tok).ok_or_else(|| Error::Parse { line: idx + 1, msg: format!("bad entry `{tok}`") })
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected {} columns, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse { line: 0, msg: "no matrix rows".into() });
    }
    let (n, m) = (rows.len(), rows[0].len());
    let raw = CMatrix::from_fn(n, m, |i, j| rows[i][j]);
    let (channels, scales) = normalize_columns(&raw)?;
    Ok(ChannelImport { channels, scales })
}

pub fn load_channel_matrix(path: impl AsRef<Path>) -> Result<ChannelImport> {
    parse_channel_matrix(&std::fs::read_to_string(path)?)
}

/// Companion-matrix spectral radius of `x(k) = Σ a_i x(k-i)`.
pub fn ar_spectral_radius(coefficients: &[f64]) -> f64 {
    let p = coefficients.len();
    if p == 0 {
        return 0.0;
    }
    let companion = companion_matrix(coefficients);
    companion.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn companion_matrix(coefficients: &[f64]) -> DMatrix<f64> {
    let p = coefficients.len();
    DMatrix::from_fn(p, p, |i, j| if i == 0 { coefficients[j] } else if i == j + 1 { 1.0 } else { 0.0 })
}

/// When the companion spectral radius is `≥ 1`, scales the coefficient vector
/// by the single factor `c ∈ (0, 1)` that puts the radius at 0.99.
///
/// A factor of `0.99/ρ` alone is not enough: for all-positive coefficients the
/// dominant root shrinks more slowly than the coefficients do.
pub fn stabilize_ar(coefficients: &[f64]) -> Vec<f64> {
    const TARGET: f64 = 0.99;
    if ar_spectral_radius(coefficients) < 1.0 {
        return coefficients.to_vec();
    }
    let scaled = |c: f64| coefficients.iter().map(|a| a * c).collect::<Vec<_>>();
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ar_spectral_radius(&scaled(mid)) < TARGET {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    scaled(lo)
}

/// Stationary variance of a stable AR process with unit innovation power.
pub fn ar_stationary_variance(coefficients: &[f64]) -> f64 {
    let p = coefficients.len();
    if p == 0 {
        return 1.0;
    }
    // P = A P Aᵀ + e₁e₁ᵀ  ⇔  (I − A⊗A) vec P = vec(e₁e₁ᵀ)
    let a = companion_matrix(coefficients);
    let kron = a.kronecker(&a);
    let lhs = DMatrix::<f64>::identity(p * p, p * p) - kron;
    let mut rhs = DVector::<f64>::zeros(p * p);
    rhs[0] = 1.0;
    let vec_p = lhs.lu().solve(&rhs).expect("stable AR gives a nonsingular Lyapunov system");
    vec_p[0]
}

/// Per-trial seed splitting rule.
pub fn trial_seed(master_seed: u64, trial_index: u64) -> u64 {
    master_seed ^ trial_index
}

#[inline]
fn complex_normal(rng: &mut ChaCha8Rng, std: f64) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im) * (std * std::f64::consts::FRAC_1_SQRT_2)
}

enum DesiredSource {
    White { std: f64 },
    Ar { coefficients: Vec<f64>, history: Vec<C64>, innovation_std: f64, scale: f64 },
}

/// Streaming sample generator: identical draw order to [`generate_block`], so a
/// long record can be consumed chunk by chunk without materializing it.
///
/// AR desired sources are scaled by the analytic stationary variance here,
/// whereas [`generate_block`] normalizes the realized block exactly.
pub struct SignalStream {
    channels: CMatrix,
    desired: DesiredSource,
    amplitudes: Vec<C64>,
    leak_std: Vec<f64>,
    noise_std: f64,
    rng: ChaCha8Rng,
}

impl SignalStream {
    pub fn new(scenario: &Scenario, models: &[SourceModel], seed: u64) -> Result<Self> {
        let j = scenario.n_interferers();
        if models.len() != j + 1 {
            return Err(Error::Dimension(format!("{} source models for {} sources", models.len(), j + 1)));
        }
        let sigma0_sq = scenario.desired_power();
        let rng = ChaCha8Rng::seed_from_u64(seed);

        let mut amplitudes = Vec::with_capacity(j);
        let mut leak_std = Vec::with_capacity(j);
        for (idx, m) in models.iter().enumerate().skip(1) {
            if !(m.leak_power.is_finite() && m.leak_power >= 0.0) {
                return Err(Error::InvalidArgument(format!("source {idx}: leak power must be finite and >= 0")));
            }
            let denom = sigma0_sq + m.leak_power;
            // σ_j² recovered from C[j][j] = σ_j²(σ₀² + σ_v²)/(1 + σ_v²)
            let power = if denom > 0.0 { scenario.source_power(idx) * (1.0 + m.leak_power) / denom } else { 0.0 };
            amplitudes.push(C64::from_polar(power.sqrt() / (1.0 + m.leak_power).sqrt(), m.relative_phase));
            leak_std.push(m.leak_power.sqrt());
        }

        let desired = match &models[0].kind {
            SourceKind::WhiteGaussian => DesiredSource::White { std: sigma0_sq.sqrt() },
            SourceKind::Ar { coefficients, innovation_power } => {
                if coefficients.is_empty() {
                    return Err(Error::InvalidArgument("AR model needs at least one coefficient".into()));
                }
                if !(innovation_power.is_finite() && *innovation_power > 0.0) {
                    return Err(Error::InvalidArgument("AR innovation power must be > 0".into()));
                }
                let coefficients = stabilize_ar(coefficients);
                let var = innovation_power * ar_stationary_variance(&coefficients);
                DesiredSource::Ar {
                    history: vec![C64::default(); coefficients.len()],
                    innovation_std: innovation_power.sqrt(),
                    scale: (sigma0_sq / var).sqrt(),
                    coefficients,
                }
            }
        };

        let mut stream = Self {
            channels: scenario.channels().clone(),
            desired,
            amplitudes,
            leak_std,
            noise_std: scenario.noise_power().sqrt(),
            rng,
        };
        if let DesiredSource::Ar { coefficients, .. } = &stream.desired {
            let burn_in = 10 * coefficients.len();
            for _ in 0..burn_in {
                stream.next_desired();
            }
        }
        Ok(stream)
    }

    fn next_desired(&mut self) -> C64 {
        match &mut self.desired {
            DesiredSource::White { std } => complex_normal(&mut self.rng, *std),
            DesiredSource::Ar { coefficients, history, innovation_std, scale } => {
                let mut x = complex_normal(&mut self.rng, *innovation_std);
                for (a, h) in coefficients.iter().zip(history.iter()) {
                    x += *h * *a;
                }
                history.rotate_right(1);
                history[0] = x;
                x * *scale
            }
        }
    }

    /// Next `k` samples.
    pub fn next_block(&mut self, k: usize) -> SignalBlock {
        let n = self.channels.nrows();
        let m = self.channels.ncols();
        let mut sources = CMatrix::zeros(m, k);
        let mut noise = CMatrix::zeros(n, k);
        for t in 0..k {
            let s0 = self.next_desired();
            sources[(0, t)] = s0;
            for j in 0..self.amplitudes.len() {
                let v = complex_normal(&mut self.rng, self.leak_std[j]);
                sources[(j + 1, t)] = self.amplitudes[j] * (s0 + v);
            }
            for i in 0..n {
                noise[(i, t)] = complex_normal(&mut self.rng, self.noise_std);
            }
        }
        let snapshots = &self.channels * &sources + &noise;
        SignalBlock { sources, noise, snapshots }
    }
}

/// Draws a K-sample block. Interferers follow the shared-desired-signal recipe
/// with each model's phase and leak power; amplitudes come from the scenario's
/// source powers. Deterministic in `seed`.
pub fn generate_block(scenario: &Scenario, models: &[SourceModel], k: usize, seed: u64) -> Result<SignalBlock> {
    if k == 0 {
        return Err(Error::InvalidArgument("block length must be >= 1".into()));
    }
    let mut stream = SignalStream::new(scenario, models, seed)?;
    let mut block = stream.next_block(k);
    if matches!(models[0].kind, SourceKind::Ar { .. }) {
        let target = scenario.desired_power();
        let realized = block.sources.row(0).iter().map(|z| z.norm_sqr()).sum::<f64>() / k as f64;
        if realized > 0.0 {
            let gain = (target / realized).sqrt() - 1.0;
            for t in 0..k {
                let delta = block.sources[(0, t)] * gain;
                block.sources[(0, t)] += delta;
                for j in 0..stream.amplitudes.len() {
                    block.sources[(j + 1, t)] += stream.amplitudes[j] * delta;
                }
            }
            block.snapshots = scenario.channels() * &block.sources + &block.noise;
        }
    }
    Ok(block)
}
