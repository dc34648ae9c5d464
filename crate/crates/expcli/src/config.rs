//! Experiment description: a flat `key = value` file plus command-line overrides.
//!
//! ```text
//! # rho sweep on the 16-sensor toy array
//! scenario = toy
//! n_sensors = 16
//! n_interferers = 7
//! axis = rho
//! grid = 0.2, 0.4, 0.6, 0.8, 0.95
//! snr_db = 0
//! sir_db = 0
//! beamformers = MVDR, ZF, RZF, MMSE_DR
//! ```
//!
//! Grids accept explicit lists, `lin:a:b:n` and `log:a:b:n` (`n` points from `a`
//! to `b`, geometric for `log`).

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rzf_core::beamformers::BeamformerLabel;
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}:{line}: {msg}")]
    Syntax { path: String, line: usize, msg: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {msg}")]
    Value { key: String, msg: String },
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSource {
    /// Uniform linear array on the evenly spaced DOA grid.
    Toy { n_sensors: usize, n_interferers: usize, spacing: f64 },
    /// Channel matrix file; column 0 is the desired source, the next `n_interferers` columns interfere.
    Leadfield { path: PathBuf, n_interferers: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    SnrDb,
    SirDb,
    Rho,
    Epsilon,
    Lambda,
    Iteration,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::SnrDb => "snr_db",
            Self::SirDb => "sir_db",
            Self::Rho => "rho",
            Self::Epsilon => "epsilon",
            Self::Lambda => "lambda",
            Self::Iteration => "iteration",
        }
    }
}

impl FromStr for SweepAxis {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "snr_db" | "snr" => Self::SnrDb,
            "sir_db" | "sir" => Self::SirDb,
            "rho" => Self::Rho,
            "epsilon" | "eps" => Self::Epsilon,
            "lambda" => Self::Lambda,
            "iteration" | "iter" => Self::Iteration,
            _ => return Err(format!("unknown axis `{s}`")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceMode {
    Analytic,
    /// Beamformers built from a sample covariance of this many snapshots.
    Sample(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesiredSignal {
    White,
    Ar6,
}

/// How ε values in the config are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsilonUnits {
    Absolute,
    /// Multiples of the scenario's `ε_MVDR`.
    Mvdr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Batch(BeamformerLabel),
    Ddaa,
    CnlmsMvdr,
    CnlmsZf,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Self::Batch(l) => l.as_str(),
            Self::Ddaa => "DDAA",
            Self::CnlmsMvdr => "CNLMS_MVDR",
            Self::CnlmsZf => "CNLMS_ZF",
        }
    }

    pub fn is_online(self) -> bool {
        !matches!(self, Self::Batch(_))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "MVDR" => Self::Batch(BeamformerLabel::Mvdr),
            "ZF" => Self::Batch(BeamformerLabel::Zf),
            "RZF" => Self::Batch(BeamformerLabel::Rzf),
            "MMSE_DR" => Self::Batch(BeamformerLabel::MmseDr),
            "A_MMSE" => Self::Batch(BeamformerLabel::AMmse),
            "DDAA" => Self::Ddaa,
            "CNLMS_MVDR" => Self::CnlmsMvdr,
            "CNLMS_ZF" => Self::CnlmsZf,
            _ => return Err(format!("unknown beamformer `{s}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: ScenarioSource,
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    pub snr_db: f64,
    pub sir_db: f64,
    pub rho: f64,
    /// One phase per interferer; a single value is broadcast.
    pub phases: Vec<f64>,
    pub beta: f64,
    pub eps_rho: f64,
    pub eps_phi: f64,
    pub covariance: CovarianceMode,
    pub desired: DesiredSignal,
    pub trials: usize,
    pub seed: u64,
    /// Absolute RZF budgets searched when ε is neither swept nor fixed. Empty
    /// means a 200-point log grid over `[1e-8, 1]·ε_MVDR` plus 0.
    pub epsilon_grid: Vec<f64>,
    pub epsilon: Option<f64>,
    /// Units of the ε axis, `epsilon_grid` and `epsilon`.
    pub epsilon_units: EpsilonUnits,
    pub iterations: usize,
    pub step: f64,
    pub alpha: f64,
    pub methods: Vec<Method>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioSource::Toy { n_sensors: 16, n_interferers: 7, spacing: 0.5 },
            axis: SweepAxis::SnrDb,
            grid: vec![0.0],
            snr_db: 0.0,
            sir_db: 0.0,
            rho: 0.6,
            phases: vec![0.0],
            beta: 0.8,
            eps_rho: 0.1,
            eps_phi: std::f64::consts::PI / 12.0,
            covariance: CovarianceMode::Analytic,
            desired: DesiredSignal::White,
            trials: 1,
            seed: 1,
            epsilon_grid: Vec::new(),
            epsilon: None,
            epsilon_units: EpsilonUnits::Absolute,
            iterations: 10_000,
            step: 0.1,
            alpha: 0.5,
            methods: vec![
                Method::Batch(BeamformerLabel::Mvdr),
                Method::Batch(BeamformerLabel::Zf),
                Method::Batch(BeamformerLabel::Rzf),
                Method::Batch(BeamformerLabel::MmseDr),
            ],
        }
    }
}

pub const DEFAULT_SAMPLE_COUNT: usize = 8000;

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let t = v.trim();
    let parsed = match t {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        "pi" => Ok(std::f64::consts::PI),
        _ => t.parse::<f64>(),
    };
    parsed.map_err(|e| ConfigError::Value { key: key.into(), msg: format!("`{t}`: {e}") })
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    let t = v.trim().replace('_', "");
    if let Ok(n) = t.parse::<usize>() {
        return Ok(n);
    }
    // allow 1e4-style integers
    match t.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 1e15 => Ok(x as usize),
        _ => Err(ConfigError::Value { key: key.into(), msg: format!("`{}` is not a nonnegative integer", v.trim()) }),
    }
}

/// Explicit list, `lin:a:b:n` or `log:a:b:n`.
pub fn parse_grid(key: &str, v: &str) -> Result<Vec<f64>> {
    let t = v.trim();
    let ranged = |rest: &str, log: bool| -> Result<Vec<f64>> {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(ConfigError::Value { key: key.into(), msg: format!("expected a:b:n in `{t}`") });
        }
        let (a, b) = (parse_f64(key, parts[0])?, parse_f64(key, parts[1])?);
        let n = parse_usize(key, parts[2])?;
        if log && (a <= 0.0 || b <= 0.0) {
            return Err(ConfigError::Value { key: key.into(), msg: "log grid endpoints must be > 0".into() });
        }
        Ok(match n {
            0 => Vec::new(),
            1 => vec![a],
            _ => (0..n)
                .map(|i| {
                    let f = i as f64 / (n - 1) as f64;
                    if log { 10f64.powf(a.log10() + f * (b.log10() - a.log10())) } else { a + f * (b - a) }
                })
                .collect(),
        })
    };
    if let Some(rest) = t.strip_prefix("lin:") {
        ranged(rest, false)
    } else if let Some(rest) = t.strip_prefix("log:") {
        ranged(rest, true)
    } else if t.is_empty() {
        Ok(Vec::new())
    } else {
        t.split(',').map(|x| parse_f64(key, x)).collect()
    }
}

fn parse_list<T: FromStr<Err = String>>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|msg| ConfigError::Value { key: key.into(), msg }))
        .collect()
}

/// Flat key-value assignments in file order; later entries win.
pub fn parse_assignments(text: &str, origin: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Syntax { path: origin.into(), line: i + 1, msg: format!("expected key = value, got `{line}`") });
        };
        let k = k.trim();
        if k.is_empty() {
            return Err(ConfigError::Syntax { path: origin.into(), line: i + 1, msg: "empty key".into() });
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        let mut exp = Self::default();
        exp.apply(&parse_assignments(&text, &path.display().to_string())?)?;
        Ok(exp)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut exp = Self::default();
        exp.apply(&parse_assignments(text, "<text>")?)?;
        Ok(exp)
    }

    pub fn apply(&mut self, assignments: &[(String, String)]) -> Result<()> {
        // scenario fields are gathered first so their order in the file does not matter
        let mut scenario_kind: Option<String> = None;
        let (mut n, mut j, mut spacing, mut leadfield) = match &self.scenario {
            ScenarioSource::Toy { n_sensors, n_interferers, spacing } => (*n_sensors, *n_interferers, *spacing, None),
            ScenarioSource::Leadfield { path, n_interferers } => (16, *n_interferers, 0.5, Some(path.clone())),
        };
        let mut sample_count = match self.covariance {
            CovarianceMode::Sample(k) => k,
            CovarianceMode::Analytic => DEFAULT_SAMPLE_COUNT,
        };
        let mut sample_mode = matches!(self.covariance, CovarianceMode::Sample(_));
        for (key, v) in assignments {
            let key = key.as_str();
            match key {
                "scenario" => scenario_kind = Some(v.to_ascii_lowercase()),
                "n_sensors" => n = parse_usize(key, v)?,
                "n_interferers" => j = parse_usize(key, v)?,
                "spacing" => spacing = parse_f64(key, v)?,
                "leadfield" => leadfield = Some(PathBuf::from(v)),
                "axis" => self.axis = v.parse().map_err(|msg| ConfigError::Value { key: key.into(), msg })?,
                "grid" => self.grid = parse_grid(key, v)?,
                "snr_db" => self.snr_db = parse_f64(key, v)?,
                "sir_db" => self.sir_db = parse_f64(key, v)?,
                "rho" => self.rho = parse_f64(key, v)?,
                "phi" | "phases" => self.phases = parse_grid(key, v)?,
                "beta" => self.beta = parse_f64(key, v)?,
                "eps_rho" => self.eps_rho = parse_f64(key, v)?,
                "eps_phi" => self.eps_phi = parse_f64(key, v)?,
                "covariance" => match v.to_ascii_lowercase().as_str() {
                    "analytic" => sample_mode = false,
                    "sample" => sample_mode = true,
                    other => return Err(ConfigError::Value { key: key.into(), msg: format!("`{other}` is not analytic|sample") }),
                },
                "sample_count" => sample_count = parse_usize(key, v)?,
                "desired" => {
                    self.desired = match v.to_ascii_lowercase().as_str() {
                        "white" => DesiredSignal::White,
                        "ar6" | "ar" => DesiredSignal::Ar6,
                        other => return Err(ConfigError::Value { key: key.into(), msg: format!("`{other}` is not white|ar6") }),
                    }
                }
                "trials" => self.trials = parse_usize(key, v)?,
                "seed" => {
                    self.seed = v.trim().parse().map_err(|e| ConfigError::Value { key: key.into(), msg: format!("{e}") })?
                }
                "epsilon_grid" => self.epsilon_grid = parse_grid(key, v)?,
                "epsilon" => {
                    self.epsilon = if v.is_empty() || v == "auto" { None } else { Some(parse_f64(key, v)?) };
                }
                "epsilon_units" => {
                    self.epsilon_units = match v.to_ascii_lowercase().as_str() {
                        "absolute" | "abs" => EpsilonUnits::Absolute,
                        "mvdr" | "relative" => EpsilonUnits::Mvdr,
                        other => return Err(ConfigError::Value { key: key.into(), msg: format!("`{other}` is not absolute|mvdr") }),
                    }
                }
                "iterations" => self.iterations = parse_usize(key, v)?,
                "step" => self.step = parse_f64(key, v)?,
                "alpha" => self.alpha = parse_f64(key, v)?,
                "beamformers" => self.methods = parse_list(key, v)?,
                _ => return Err(ConfigError::UnknownKey(key.to_string())),
            }
        }
        let leadfield_mode = match scenario_kind.as_deref() {
            Some("toy") => false,
            Some("leadfield") => true,
            Some(other) => {
                return Err(ConfigError::Value { key: "scenario".into(), msg: format!("`{other}` is not toy|leadfield") })
            }
            None => matches!(self.scenario, ScenarioSource::Leadfield { .. }),
        };
        self.scenario = if leadfield_mode {
            let path = leadfield.ok_or_else(|| ConfigError::Invalid("scenario = leadfield needs `leadfield = <path>`".into()))?;
            ScenarioSource::Leadfield { path, n_interferers: j }
        } else {
            ScenarioSource::Toy { n_sensors: n, n_interferers: j, spacing }
        };
        self.covariance = if sample_mode { CovarianceMode::Sample(sample_count) } else { CovarianceMode::Analytic };
        Ok(())
    }

    pub fn n_interferers(&self) -> usize {
        match &self.scenario {
            ScenarioSource::Toy { n_interferers, .. } | ScenarioSource::Leadfield { n_interferers, .. } => *n_interferers,
        }
    }

    /// Interferer phases with a single value broadcast.
    pub fn interferer_phases(&self) -> Vec<f64> {
        let j = self.n_interferers();
        if self.phases.len() == 1 {
            vec![self.phases[0]; j]
        } else {
            self.phases.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.methods.is_empty() {
            return bad("beamformer list is empty".into());
        }
        if self.grid.is_empty() {
            return bad("sweep grid is empty".into());
        }
        if self.grid.iter().any(|x| x.is_nan()) {
            return bad("sweep grid contains NaN".into());
        }
        let inc = self.grid.windows(2).all(|w| w[1] > w[0]);
        let dec = self.grid.windows(2).all(|w| w[1] < w[0]);
        if !(inc || dec) {
            return bad("sweep grid must be strictly monotone".into());
        }
        match &self.scenario {
            ScenarioSource::Toy { n_sensors, n_interferers, spacing } => {
                if *n_interferers == 0 || n_interferers + 1 > *n_sensors {
                    return bad(format!("toy array needs 1 <= J < N, got N = {n_sensors}, J = {n_interferers}"));
                }
                if !(*spacing > 0.0 && spacing.is_finite()) {
                    return bad(format!("spacing {spacing} must be > 0"));
                }
            }
            ScenarioSource::Leadfield { n_interferers, .. } => {
                if *n_interferers == 0 {
                    return bad("leadfield scenario needs n_interferers >= 1".into());
                }
            }
        }
        let phases = self.interferer_phases();
        if phases.len() != self.n_interferers() {
            return bad(format!("{} phases for {} interferers", phases.len(), self.n_interferers()));
        }
        let rhos: Vec<f64> = if self.axis == SweepAxis::Rho { self.grid.clone() } else { vec![self.rho] };
        let uses_ammse = self.methods.contains(&Method::Batch(BeamformerLabel::AMmse));
        for &rho in &rhos {
            if !(rho > 0.0 && rho <= 1.0) {
                return bad(format!("rho {rho} outside (0, 1]"));
            }
            // the ρ perturbation only feeds A-MMSE
            if uses_ammse && !(self.eps_rho > -rho && self.eps_rho < 1.0 - rho) {
                return bad(format!("eps_rho {} outside (-rho, 1 - rho) for rho = {rho}", self.eps_rho));
            }
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("beta {} must be > 0", self.beta));
        }
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if let CovarianceMode::Sample(k) = self.covariance {
            if k == 0 {
                return bad("sample_count must be >= 1".into());
            }
        }
        if self.epsilon_grid.iter().any(|&e| !(e >= 0.0)) {
            return bad("epsilon grid values must be >= 0".into());
        }
        if self.epsilon.is_some_and(|e| !(e >= 0.0)) {
            return bad("epsilon must be >= 0".into());
        }
        if matches!(self.axis, SweepAxis::Epsilon | SweepAxis::Lambda) && self.grid.iter().any(|&x| !(x >= 0.0)) {
            return bad(format!("{} grid values must be >= 0", self.axis.as_str()));
        }
        if self.axis == SweepAxis::Iteration {
            if self.grid.iter().any(|&x| !(x >= 1.0 && x.fract() == 0.0 && x < 1e12)) {
                return bad("iteration grid values must be integers >= 1".into());
            }
            if !self.methods.iter().any(|m| m.is_online()) {
                return bad("iteration axis needs at least one online method".into());
            }
        }
        if !(self.step > 0.0 && self.step < 2.0) {
            return bad(format!("step {} outside (0, 2)", self.step));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha {} outside [0, 1]", self.alpha));
        }
        if !(self.snr_db.is_finite()) || self.sir_db.is_nan() {
            return bad("SNR must be finite and SIR not NaN".into());
        }
        Ok(())
    }

    /// Stable text rendering used for hashing and the manifest.
    pub fn canonical(&self) -> String {
        let mut m: BTreeMap<&str, String> = BTreeMap::new();
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",");
        match &self.scenario {
            ScenarioSource::Toy { n_sensors, n_interferers, spacing } => {
                m.insert("scenario", "toy".into());
                m.insert("n_sensors", n_sensors.to_string());
                m.insert("n_interferers", n_interferers.to_string());
                m.insert("spacing", format!("{spacing:e}"));
            }
            ScenarioSource::Leadfield { path, n_interferers } => {
                m.insert("scenario", "leadfield".into());
                m.insert("leadfield", path.display().to_string());
                m.insert("n_interferers", n_interferers.to_string());
            }
        }
        m.insert("axis", self.axis.as_str().into());
        m.insert("grid", list(&self.grid));
        m.insert("snr_db", format!("{:e}", self.snr_db));
        m.insert("sir_db", format!("{:e}", self.sir_db));
        m.insert("rho", format!("{:e}", self.rho));
        m.insert("phases", list(&self.phases));
        m.insert("beta", format!("{:e}", self.beta));
        m.insert("eps_rho", format!("{:e}", self.eps_rho));
        m.insert("eps_phi", format!("{:e}", self.eps_phi));
        m.insert(
            "covariance",
            match self.covariance {
                CovarianceMode::Analytic => "analytic".into(),
                CovarianceMode::Sample(k) => format!("sample({k})"),
            },
        );
        m.insert("desired", format!("{:?}", self.desired).to_ascii_lowercase());
        m.insert("trials", self.trials.to_string());
        m.insert("seed", self.seed.to_string());
        m.insert("epsilon_grid", list(&self.epsilon_grid));
        m.insert("epsilon", self.epsilon.map_or("auto".into(), |e| format!("{e:e}")));
        m.insert("epsilon_units", format!("{:?}", self.epsilon_units).to_ascii_lowercase());
        m.insert("iterations", self.iterations.to_string());
        m.insert("step", format!("{:e}", self.step));
        m.insert("alpha", format!("{:e}", self.alpha));
        m.insert("beamformers", self.methods.iter().map(|x| x.label()).collect::<Vec<_>>().join(","));
        m.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn config_hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        assert_eq!(parse_grid("g", "1, 2,3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_grid("g", "lin:0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        let g = parse_grid("g", "log:1e-2:1:3").unwrap();
        assert!((g[1] - 0.1).abs() < 1e-15);
        assert!(parse_grid("g", "log:0:1:3").is_err());
        assert!(parse_grid("g", "1,x").is_err());
    }

    #[test]
    fn file_order_does_not_matter_for_scenario() {
        let s = ExperimentConfig::from_text("n_interferers = 2\nscenario = toy\nn_sensors = 6\n").unwrap();
        assert_eq!(s.scenario, ScenarioSource::Toy { n_sensors: 6, n_interferers: 2, spacing: 0.5 });
    }

    #[test]
    fn syntax_errors_report_lines() {
        let e = ExperimentConfig::from_text("seed = 3\nnonsense\n").unwrap_err();
        assert!(e.to_string().contains(":2:"), "{e}");
        assert!(matches!(ExperimentConfig::from_text("colour = red").unwrap_err(), ConfigError::UnknownKey(_)));
    }

    #[test]
    fn validation_rules() {
        let ok = ExperimentConfig::default();
        assert!(ok.validate().is_ok());
        let mut s = ok.clone();
        s.methods.clear();
        assert!(s.validate().is_err());
        let mut s = ok.clone();
        s.grid = vec![1.0, 1.0];
        assert!(s.validate().is_err());
        let mut s = ok.clone();
        s.grid = vec![3.0, 2.0, 1.0];
        assert!(s.validate().is_ok());
        let mut s = ok.clone();
        s.rho = 0.0;
        assert!(s.validate().is_err());
        let mut s = ok.clone();
        s.beta = 0.0;
        assert!(s.validate().is_err());
        let mut s = ok.clone();
        s.rho = 0.95;
        s.eps_rho = 0.1;
        assert!(s.validate().is_ok());
        s.methods.push(Method::Batch(BeamformerLabel::AMmse));
        assert!(s.validate().is_err());
        let mut s = ok.clone();
        s.axis = SweepAxis::Rho;
        s.grid = vec![0.5, 1.2];
        assert!(s.validate().is_err());
    }

    #[test]
    fn methods_parse_case_insensitively() {
        let s = ExperimentConfig::from_text("beamformers = mvdr, a-mmse, DDAA, cnlms_zf").unwrap();
        assert_eq!(s.methods, vec![
            Method::Batch(BeamformerLabel::Mvdr),
            Method::Batch(BeamformerLabel::AMmse),
            Method::Ddaa,
            Method::CnlmsZf
        ]);
        assert!(ExperimentConfig::from_text("beamformers = LMS").is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(a.config_hash(), b.config_hash());
        b.seed = 2;
        assert_ne!(a.config_hash(), b.config_hash());
        assert_eq!(a.config_hash().len(), 64);
    }

    #[test]
    fn sample_mode_keeps_count() {
        let s = ExperimentConfig::from_text("covariance = sample\n").unwrap();
        assert_eq!(s.covariance, CovarianceMode::Sample(DEFAULT_SAMPLE_COUNT));
        let s = ExperimentConfig::from_text("sample_count = 1e6\ncovariance = sample").unwrap();
        assert_eq!(s.covariance, CovarianceMode::Sample(1_000_000));
    }
}
