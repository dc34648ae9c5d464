//! Sweep execution: scenario rebuild per axis point, beamformer construction,
//! MSE evaluation (closed form or Monte Carlo) and ε grid search.

use std::time::Instant;

use rayon::prelude::*;
use rzf_core::adaptive::{run_online, trailing_average, OnlineAlgorithm};
use rzf_core::array_model::{
    calibrate_powers, correlated_cov_per_source, leak_power_for_rho, load_channel_matrix, toy_channels, trial_seed,
    Scenario, SignalStream, SourceModel,
};
use rzf_core::beamformers::{
    a_mmse_with_error, epsilon_mvdr, mmse_dr, mvdr, rzf_from_epsilon, rzf_from_lambda, zf, BeamformerLabel,
    StatisticsError,
};
use rzf_core::covariance::{analytic_covariance, gram_of};
use rzf_core::linalg::{c64, hermitian_part, CMatrix, CVector};
use rzf_core::theory::{leakage_powers, mse_closed_form};

use crate::config::{ConfigError, CovarianceMode, DesiredSignal, EpsilonUnits, ExperimentConfig, Method, ScenarioSource, SweepAxis};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("leadfield {path}: {source}")]
    Leadfield { path: String, source: rzf_core::Error },
    #[error(transparent)]
    Core(#[from] rzf_core::Error),
}

/// One `(axis point, beamformer)` outcome. Failed points keep `mse_db = None`
/// and carry the message in `error`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub axis: f64,
    pub beamformer: String,
    pub mse_db: Option<f64>,
    pub epsilon: Option<f64>,
    pub lambda: Option<f64>,
    pub leak_noise: Option<f64>,
    pub leak_interf: Option<f64>,
    pub error: Option<String>,
}

impl ResultRow {
    fn failed(axis: f64, beamformer: &str, msg: String) -> Self {
        Self {
            axis,
            beamformer: beamformer.to_string(),
            mse_db: None,
            epsilon: None,
            lambda: None,
            leak_noise: None,
            leak_interf: None,
            error: Some(msg),
        }
    }

    pub fn is_error(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub seed: u64,
    pub config_hash: String,
    pub tool_version: String,
    pub wall_time_s: f64,
    pub config: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub rows: Vec<ResultRow>,
    pub manifest: Manifest,
}

impl SweepResult {
    pub fn errors(&self) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(|r| r.is_error())
    }

    /// Rows of one beamformer in axis order.
    pub fn series(&self, label: &str) -> Vec<&ResultRow> {
        self.rows.iter().filter(|r| r.beamformer == label).collect()
    }
}

/// `σ_n²‖w‖²` and the interference power left in the output.
pub fn leakage_decomposition(w: &CVector, scenario: &Scenario) -> (f64, f64) {
    leakage_powers(w, scenario)
}

/// `10·log₁₀(MSE/σ₀²)`.
pub fn mse_db(mse: f64, scenario: &Scenario) -> f64 {
    10.0 * (mse / scenario.desired_power()).log10()
}

/// `{0}` plus 200 log-spaced budgets from `1e-8·ε_MVDR` to `ε_MVDR`.
pub fn default_epsilon_grid(eps_mvdr: f64) -> Vec<f64> {
    std::iter::once(0.0)
        .chain((0..200).map(|i| eps_mvdr * 10f64.powf(-8.0 + 8.0 * i as f64 / 199.0)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonSearchRow {
    pub requested: f64,
    /// `min(requested, ε_MVDR)`.
    pub evaluated: f64,
    pub clamped: bool,
    /// `∞` for the zero-forcing endpoint.
    pub lambda: f64,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonSearch {
    pub best_index: usize,
    pub epsilon_mvdr: f64,
    pub table: Vec<EpsilonSearchRow>,
    pub best_weights: CVector,
}

impl EpsilonSearch {
    pub fn best(&self) -> &EpsilonSearchRow {
        &self.table[self.best_index]
    }
}

/// RZF MSE (closed form against `scenario`) at each budget, with weights built
/// from `r`. Ties go to the larger requested ε.
pub fn epsilon_grid_search(scenario: &Scenario, r: &CMatrix, grid: &[f64]) -> rzf_core::Result<EpsilonSearch> {
    if grid.is_empty() {
        return Err(rzf_core::Error::InvalidArgument("epsilon grid is empty".into()));
    }
    if let Some(bad) = grid.iter().find(|&&e| !(e >= 0.0)) {
        return Err(rzf_core::Error::InvalidArgument(format!("epsilon {bad} must be >= 0")));
    }
    let h0 = scenario.desired_channel();
    let hi = scenario.interference_channels();
    let eps_mvdr = epsilon_mvdr(r, &h0, &hi)?;
    let solved = grid
        .par_iter()
        .map(|&requested| {
            let (bf, report) = rzf_from_epsilon(r, &h0, &hi, requested)?;
            let mse = mse_closed_form(&bf.weights, scenario);
            let row = EpsilonSearchRow {
                requested,
                evaluated: requested.min(eps_mvdr),
                clamped: requested > eps_mvdr,
                lambda: report.lambda,
                mse,
            };
            Ok((row, bf.weights))
        })
        .collect::<rzf_core::Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, (row, _)) in solved.iter().enumerate().skip(1) {
        let cur = &solved[best].0;
        let tol = 1e-12 * cur.mse.abs();
        if row.mse < cur.mse - tol || ((row.mse - cur.mse).abs() <= tol && row.requested > cur.requested) {
            best = i;
        }
    }
    let best_weights = solved[best].1.clone();
    Ok(EpsilonSearch {
        best_index: best,
        epsilon_mvdr: eps_mvdr,
        table: solved.into_iter().map(|(row, _)| row).collect(),
        best_weights,
    })
}

/// Channel matrix of the configured array, desired column first.
pub fn base_channels(exp: &ExperimentConfig) -> Result<CMatrix, ExperimentError> {
    match &exp.scenario {
        ScenarioSource::Toy { n_sensors, n_interferers, spacing } => Ok(toy_channels(*n_sensors, *n_interferers, *spacing)?),
        ScenarioSource::Leadfield { path, n_interferers } => {
            let shown = path.display().to_string();
            let import = load_channel_matrix(path).map_err(|source| ExperimentError::Leadfield { path: shown.clone(), source })?;
            let need = n_interferers + 1;
            if import.channels.ncols() < need {
                return Err(ExperimentError::Leadfield {
                    path: shown,
                    source: rzf_core::Error::Dimension(format!(
                        "{} columns, need {need} (desired + {n_interferers} interferers)",
                        import.channels.ncols()
                    )),
                });
            }
            Ok(import.channels.columns(0, need).into_owned())
        }
    }
}

/// Source parameters at one axis point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointParams {
    pub snr_db: f64,
    pub sir_db: f64,
    pub rho: f64,
}

impl PointParams {
    pub fn at(exp: &ExperimentConfig, value: f64) -> Self {
        let mut p = Self { snr_db: exp.snr_db, sir_db: exp.sir_db, rho: exp.rho };
        match exp.axis {
            SweepAxis::SnrDb => p.snr_db = value,
            SweepAxis::SirDb => p.sir_db = value,
            SweepAxis::Rho => p.rho = value,
            _ => {}
        }
        p
    }
}

/// Calibrated scenario and source models for one set of parameters.
pub fn build_scenario(
    exp: &ExperimentConfig,
    channels: &CMatrix,
    p: PointParams,
) -> rzf_core::Result<(Scenario, Vec<SourceModel>)> {
    let j = channels.ncols() - 1;
    let phases = exp.interferer_phases();
    let leak = leak_power_for_rho(p.rho)?;
    let cov = correlated_cov_per_source(&vec![1.0; j], &phases, &vec![leak; j], 1.0)?;
    let template = Scenario::new(channels.clone(), cov, 1.0)?;
    let scenario = calibrate_powers(&template, p.snr_db, p.sir_db)?;
    let desired = match exp.desired {
        DesiredSignal::White => SourceModel::white(),
        DesiredSignal::Ar6 => SourceModel::ar6(),
    };
    let models = std::iter::once(desired).chain(phases.iter().map(|&ph| SourceModel::interferer(ph, leak))).collect();
    Ok((scenario, models))
}

/// How RZF picks its operating point.
#[derive(Debug, Clone, PartialEq)]
enum RzfTuning {
    Epsilon(f64),
    Lambda(f64),
    Search(Option<Vec<f64>>),
}

impl RzfTuning {
    fn for_point(exp: &ExperimentConfig, value: f64) -> Self {
        match exp.axis {
            SweepAxis::Epsilon => Self::Epsilon(value),
            SweepAxis::Lambda => Self::Lambda(value),
            _ => match exp.epsilon {
                Some(e) => Self::Epsilon(e),
                None if exp.epsilon_grid.is_empty() => Self::Search(None),
                None => Self::Search(Some(exp.epsilon_grid.clone())),
            },
        }
    }
}

fn to_absolute(units: EpsilonUnits, eps: f64, eps_mvdr: f64) -> f64 {
    match units {
        EpsilonUnits::Absolute => eps,
        EpsilonUnits::Mvdr => eps * eps_mvdr,
    }
}

/// Weights plus the (ε, λ) actually used.
struct Built {
    weights: CVector,
    epsilon: Option<f64>,
    lambda: Option<f64>,
}

fn build_rzf(exp: &ExperimentConfig, tuning: &RzfTuning, scenario: &Scenario, r: &CMatrix) -> rzf_core::Result<Built> {
    let h0 = scenario.desired_channel();
    let hi = scenario.interference_channels();
    let lam = |l: f64| if l.is_finite() { Some(l) } else { Some(f64::INFINITY) };
    match tuning {
        RzfTuning::Lambda(l) => {
            let bf = rzf_from_lambda(r, &h0, &hi, *l)?;
            Ok(Built { epsilon: Some(bf.leakage(&hi)), lambda: Some(*l), weights: bf.weights })
        }
        RzfTuning::Epsilon(e) => {
            let eps = to_absolute(exp.epsilon_units, *e, epsilon_mvdr(r, &h0, &hi)?);
            let (bf, report) = rzf_from_epsilon(r, &h0, &hi, eps)?;
            Ok(Built { epsilon: Some(report.epsilon_achieved), lambda: lam(report.lambda), weights: bf.weights })
        }
        RzfTuning::Search(grid) => {
            let eps_mvdr = epsilon_mvdr(r, &h0, &hi)?;
            let grid = match grid {
                None => default_epsilon_grid(eps_mvdr),
                Some(g) => g.iter().map(|&e| to_absolute(exp.epsilon_units, e, eps_mvdr)).collect(),
            };
            let search = epsilon_grid_search(scenario, r, &grid)?;
            let best = search.best();
            Ok(Built { epsilon: Some(best.evaluated), lambda: lam(best.lambda), weights: search.best_weights })
        }
    }
}

fn build_batch(
    exp: &ExperimentConfig,
    label: BeamformerLabel,
    tuning: &RzfTuning,
    scenario: &Scenario,
    r: &CMatrix,
) -> rzf_core::Result<Built> {
    let h0 = scenario.desired_channel();
    let hi = scenario.interference_channels();
    let plain = |weights: CVector, lambda: Option<f64>| {
        let eps = (hi.adjoint() * &weights).norm_squared();
        Built { weights, epsilon: Some(eps), lambda }
    };
    Ok(match label {
        BeamformerLabel::Mvdr => plain(mvdr(r, &h0)?.weights, Some(0.0)),
        BeamformerLabel::Zf => plain(zf(r, scenario.channels())?.weights, Some(f64::INFINITY)),
        BeamformerLabel::MmseDr => plain(mmse_dr(scenario)?.weights, None),
        BeamformerLabel::AMmse => {
            let err = StatisticsError { beta: exp.beta, eps_rho: exp.eps_rho, eps_phi: exp.eps_phi };
            plain(a_mmse_with_error(r, scenario, err)?.weights, None)
        }
        BeamformerLabel::Rzf => build_rzf(exp, tuning, scenario, r)?,
    })
}

#[derive(Debug, Clone, Copy, Default)]
struct Accum {
    mse: f64,
    epsilon: Option<f64>,
    lambda: Option<f64>,
    noise: f64,
    interf: f64,
}

const CHUNK: usize = 4096;

/// Sample covariance from the next `k` stream samples.
fn streamed_covariance(stream: &mut SignalStream, n: usize, k: usize) -> CMatrix {
    let mut acc = CMatrix::zeros(n, n);
    let mut done = 0;
    while done < k {
        let m = CHUNK.min(k - done);
        let y = stream.next_block(m).snapshots;
        acc += &y * y.adjoint();
        done += m;
    }
    hermitian_part(&(acc / c64(k as f64, 0.0)))
}

/// Mean `|wᴴy − s₀|²` of every column of `w` over the next `k` stream samples.
fn streamed_mse(stream: &mut SignalStream, w: &CMatrix, k: usize) -> Vec<f64> {
    let mut err = vec![0.0; w.ncols()];
    let mut done = 0;
    while done < k {
        let m = CHUNK.min(k - done);
        let block = stream.next_block(m);
        let out = w.adjoint() * &block.snapshots;
        for (b, e) in err.iter_mut().enumerate() {
            for t in 0..m {
                *e += (out[(b, t)] - block.sources[(0, t)]).norm_sqr();
            }
        }
        done += m;
    }
    err.iter().map(|e| e / k as f64).collect()
}

/// Batch rows for one scenario, in method order.
fn batch_rows(
    exp: &ExperimentConfig,
    labels: &[BeamformerLabel],
    tuning: &RzfTuning,
    scenario: &Scenario,
    models: &[SourceModel],
    axis: f64,
) -> Vec<ResultRow> {
    let finish = |label: BeamformerLabel, acc: rzf_core::Result<Accum>| -> ResultRow {
        match acc {
            Err(e) => ResultRow::failed(axis, label.as_str(), e.to_string()),
            Ok(a) => {
                let db = mse_db(a.mse, scenario);
                if !db.is_finite() {
                    return ResultRow::failed(axis, label.as_str(), format!("non-finite MSE {}", a.mse));
                }
                ResultRow {
                    axis,
                    beamformer: label.as_str().to_string(),
                    mse_db: Some(db),
                    epsilon: a.epsilon,
                    lambda: a.lambda,
                    leak_noise: Some(a.noise),
                    leak_interf: Some(a.interf),
                    error: None,
                }
            }
        }
    };

    match exp.covariance {
        CovarianceMode::Analytic => {
            let r = analytic_covariance(scenario).matrix;
            labels
                .iter()
                .map(|&label| {
                    let acc = build_batch(exp, label, tuning, scenario, &r).map(|b| {
                        let (noise, interf) = leakage_decomposition(&b.weights, scenario);
                        Accum { mse: mse_closed_form(&b.weights, scenario), epsilon: b.epsilon, lambda: b.lambda, noise, interf }
                    });
                    finish(label, acc)
                })
                .collect()
        }
        CovarianceMode::Sample(k) => {
            let n = scenario.n_sensors();
            // per trial: R̂ from the first k samples, MSE on the next k
            let trials: Vec<Vec<rzf_core::Result<Accum>>> = (0..exp.trials)
                .into_par_iter()
                .map(|t| {
                    let mut stream = match SignalStream::new(scenario, models, trial_seed(exp.seed, t as u64)) {
                        Ok(s) => s,
                        Err(e) => return labels.iter().map(|_| Err(clone_err(&e))).collect(),
                    };
                    let r = streamed_covariance(&mut stream, n, k);
                    let built: Vec<rzf_core::Result<Built>> =
                        labels.iter().map(|&l| build_batch(exp, l, tuning, scenario, &r)).collect();
                    let ok: Vec<&Built> = built.iter().filter_map(|b| b.as_ref().ok()).collect();
                    let w = if ok.is_empty() {
                        CMatrix::zeros(n, 0)
                    } else {
                        CMatrix::from_columns(&ok.iter().map(|b| b.weights.clone()).collect::<Vec<_>>())
                    };
                    let mut mses = streamed_mse(&mut stream, &w, k).into_iter();
                    built
                        .into_iter()
                        .map(|b| {
                            b.map(|b| {
                                let (noise, interf) = leakage_decomposition(&b.weights, scenario);
                                Accum { mse: mses.next().unwrap_or(f64::NAN), epsilon: b.epsilon, lambda: b.lambda, noise, interf }
                            })
                        })
                        .collect()
                })
                .collect();
            labels
                .iter()
                .enumerate()
                .map(|(i, &label)| {
                    let per: rzf_core::Result<Vec<Accum>> = trials.iter().map(|t| t[i].as_ref().map(|a| *a).map_err(clone_err)).collect();
                    finish(label, per.map(|v| average(&v)))
                })
                .collect()
        }
    }
}

fn clone_err(e: &rzf_core::Error) -> rzf_core::Error {
    rzf_core::Error::InvalidArgument(e.to_string())
}

fn mean_opt(v: impl Iterator<Item = Option<f64>>, n: f64) -> Option<f64> {
    v.sum::<Option<f64>>().map(|s| s / n)
}

fn average(v: &[Accum]) -> Accum {
    let n = v.len() as f64;
    Accum {
        mse: v.iter().map(|a| a.mse).sum::<f64>() / n,
        epsilon: mean_opt(v.iter().map(|a| a.epsilon), n),
        lambda: mean_opt(v.iter().map(|a| a.lambda), n),
        noise: v.iter().map(|a| a.noise).sum::<f64>() / n,
        interf: v.iter().map(|a| a.interf).sum::<f64>() / n,
    }
}

/// Batch ε the online DDAA run targets: the RZF operating point under the analytic covariance.
fn ddaa_batch_epsilon(exp: &ExperimentConfig, tuning: &RzfTuning, scenario: &Scenario) -> rzf_core::Result<f64> {
    let r = analytic_covariance(scenario).matrix;
    let built = build_rzf(exp, tuning, scenario, &r)?;
    Ok(built.epsilon.unwrap_or(0.0))
}

fn online_algorithm(exp: &ExperimentConfig, method: Method, batch_eps: f64, scenario: &Scenario) -> OnlineAlgorithm {
    match method {
        Method::CnlmsMvdr => OnlineAlgorithm::CnlmsMvdr { step: exp.step },
        Method::CnlmsZf => OnlineAlgorithm::CnlmsZf { step: exp.step },
        _ => {
            let smax = gram_of(&scenario.interference_channels()).sigma_max;
            OnlineAlgorithm::Ddaa { epsilon: batch_eps / (smax * smax), step: exp.step, alpha: exp.alpha }
        }
    }
}

/// Trailing-average window of the reported learning curves.
pub const CURVE_WINDOW: usize = 30;

struct OnlineOutcome {
    curve: Vec<f64>,
    epsilon: Option<f64>,
    noise: f64,
    interf: f64,
}

fn run_online_method(
    exp: &ExperimentConfig,
    method: Method,
    tuning: &RzfTuning,
    scenario: &Scenario,
    models: &[SourceModel],
    iterations: usize,
) -> rzf_core::Result<OnlineOutcome> {
    let batch_eps = if method == Method::Ddaa { ddaa_batch_epsilon(exp, tuning, scenario)? } else { 0.0 };
    let alg = online_algorithm(exp, method, batch_eps, scenario);
    let run = run_online(alg, scenario, models, iterations, exp.trials, exp.seed)?;
    let n = run.final_weights.len() as f64;
    let (mut noise, mut interf) = (0.0, 0.0);
    for w in &run.final_weights {
        let (a, b) = leakage_decomposition(w, scenario);
        noise += a / n;
        interf += b / n;
    }
    let epsilon = match method {
        Method::Ddaa => Some(batch_eps),
        Method::CnlmsZf => Some(0.0),
        _ => None,
    };
    Ok(OnlineOutcome { curve: run.curve, epsilon, noise, interf })
}

fn online_row(axis: f64, method: Method, scenario: &Scenario, out: &OnlineOutcome, mse: f64) -> ResultRow {
    let db = mse_db(mse, scenario);
    if !db.is_finite() {
        return ResultRow::failed(axis, method.label(), format!("non-finite MSE {mse}"));
    }
    ResultRow {
        axis,
        beamformer: method.label().to_string(),
        mse_db: Some(db),
        epsilon: out.epsilon,
        lambda: None,
        leak_noise: Some(out.noise),
        leak_interf: Some(out.interf),
        error: None,
    }
}

/// Rows for a single non-iteration axis point.
fn point_rows(exp: &ExperimentConfig, channels: &CMatrix, value: f64) -> Vec<ResultRow> {
    let (scenario, models) = match build_scenario(exp, channels, PointParams::at(exp, value)) {
        Ok(s) => s,
        Err(e) => return exp.methods.iter().map(|m| ResultRow::failed(value, m.label(), e.to_string())).collect(),
    };
    let tuning = RzfTuning::for_point(exp, value);
    let labels: Vec<BeamformerLabel> = exp
        .methods
        .iter()
        .filter_map(|m| match m {
            Method::Batch(l) => Some(*l),
            _ => None,
        })
        .collect();
    let mut batch = batch_rows(exp, &labels, &tuning, &scenario, &models, value).into_iter();
    exp.methods
        .iter()
        .map(|&m| match m {
            Method::Batch(_) => batch.next().expect("one batch row per label"),
            online => match run_online_method(exp, online, &tuning, &scenario, &models, exp.iterations.max(1)) {
                Err(e) => ResultRow::failed(value, online.label(), e.to_string()),
                Ok(out) => {
                    // steady state: mean over the second half of the curve
                    let tail = &out.curve[out.curve.len() / 2..];
                    let mse = tail.iter().sum::<f64>() / tail.len() as f64;
                    online_row(value, online, &scenario, &out, mse)
                }
            },
        })
        .collect()
}

/// Learning curves (trailing average) at the grid iterations; batch methods as flat references.
fn iteration_rows(exp: &ExperimentConfig, channels: &CMatrix) -> Vec<ResultRow> {
    let fail_all = |msg: String| -> Vec<ResultRow> {
        exp.grid
            .iter()
            .flat_map(|&x| exp.methods.iter().map(move |m| (x, m)))
            .map(|(x, m)| ResultRow::failed(x, m.label(), msg.clone()))
            .collect()
    };
    let (scenario, models) = match build_scenario(exp, channels, PointParams::at(exp, 0.0)) {
        Ok(s) => s,
        Err(e) => return fail_all(e.to_string()),
    };
    let tuning = RzfTuning::for_point(exp, 0.0);
    let labels: Vec<BeamformerLabel> = exp
        .methods
        .iter()
        .filter_map(|m| match m {
            Method::Batch(l) => Some(*l),
            _ => None,
        })
        .collect();
    let reference = batch_rows(exp, &labels, &tuning, &scenario, &models, 0.0);
    let last = exp.grid.iter().fold(0.0f64, |a, &b| a.max(b)) as usize;
    let online: Vec<(Method, rzf_core::Result<(OnlineOutcome, Vec<f64>)>)> = exp
        .methods
        .iter()
        .filter(|m| m.is_online())
        .map(|&m| {
            let out = run_online_method(exp, m, &tuning, &scenario, &models, last).map(|o| {
                let avg = trailing_average(&o.curve, CURVE_WINDOW);
                (o, avg)
            });
            (m, out)
        })
        .collect();

    let mut rows = Vec::with_capacity(exp.grid.len() * exp.methods.len());
    for &x in &exp.grid {
        let mut batch = reference.iter();
        let mut on = online.iter();
        for &m in &exp.methods {
            rows.push(match m {
                Method::Batch(_) => ResultRow { axis: x, ..batch.next().expect("one batch row per label").clone() },
                _ => {
                    let (_, res) = on.next().expect("one online run per method");
                    match res {
                        Err(e) => ResultRow::failed(x, m.label(), e.to_string()),
                        Ok((out, avg)) => online_row(x, m, &scenario, out, avg[x as usize - 1]),
                    }
                }
            });
        }
    }
    rows
}

pub fn run_sweep(exp: &ExperimentConfig) -> Result<SweepResult, ExperimentError> {
    exp.validate()?;
    let started = Instant::now();
    let channels = base_channels(exp)?;
    let rows = if exp.axis == SweepAxis::Iteration {
        iteration_rows(exp, &channels)
    } else {
        exp.grid
            .par_iter()
            .map(|&x| point_rows(exp, &channels, x))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    };
    Ok(SweepResult {
        axis: exp.axis,
        rows,
        manifest: Manifest {
            seed: exp.seed,
            config_hash: exp.config_hash(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: started.elapsed().as_secs_f64(),
            config: exp.canonical(),
        },
    })
}

/// ε grid search at the fixed parameters; one row per grid budget.
pub fn run_epsilon_search(exp: &ExperimentConfig) -> Result<(SweepResult, EpsilonSearch), ExperimentError> {
    exp.validate()?;
    let started = Instant::now();
    let channels = base_channels(exp)?;
    let (scenario, _) = build_scenario(exp, &channels, PointParams { snr_db: exp.snr_db, sir_db: exp.sir_db, rho: exp.rho })?;
    let r = analytic_covariance(&scenario).matrix;
    let eps_mvdr = epsilon_mvdr(&r, &scenario.desired_channel(), &scenario.interference_channels())?;
    let grid: Vec<f64> = if exp.epsilon_grid.is_empty() {
        default_epsilon_grid(eps_mvdr)
    } else {
        exp.epsilon_grid.iter().map(|&e| to_absolute(exp.epsilon_units, e, eps_mvdr)).collect()
    };
    let search = epsilon_grid_search(&scenario, &r, &grid)?;
    let h0 = scenario.desired_channel();
    let hi = scenario.interference_channels();
    let rows = search
        .table
        .iter()
        .map(|row| {
            let (noise, interf) = rzf_from_epsilon(&r, &h0, &hi, row.requested)
                .map(|(bf, _)| leakage_decomposition(&bf.weights, &scenario))
                .unwrap_or((f64::NAN, f64::NAN));
            ResultRow {
                axis: row.requested,
                beamformer: "RZF".into(),
                mse_db: Some(mse_db(row.mse, &scenario)),
                epsilon: Some(row.evaluated),
                lambda: Some(row.lambda),
                leak_noise: Some(noise),
                leak_interf: Some(interf),
                error: None,
            }
        })
        .collect();
    let result = SweepResult {
        axis: SweepAxis::Epsilon,
        rows,
        manifest: Manifest {
            seed: exp.seed,
            config_hash: exp.config_hash(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: started.elapsed().as_secs_f64(),
            config: exp.canonical(),
        },
    };
    Ok((result, search))
}
