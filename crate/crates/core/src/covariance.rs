//! Receive covariance: exact from a [`Scenario`], or estimated from snapshots.

use rayon::prelude::*;

use crate::array_model::Scenario;
use crate::error::{Error, Result};
use crate::linalg::{c64, hermitian_part, spectral_norm, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceKind {
    Analytic,
    Sample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate {
    pub matrix: CMatrix,
    /// Number of snapshots averaged; 0 for the analytic covariance.
    pub sample_count: usize,
    pub kind: CovarianceKind,
}

/// `R = H C Hᴴ + σ_n² I`.
pub fn analytic_covariance(scenario: &Scenario) -> CovarianceEstimate {
    let h = scenario.channels();
    let n = scenario.n_sensors();
    let mut r = h * scenario.source_cov() * h.adjoint();
    for i in 0..n {
        r[(i, i)] += c64(scenario.noise_power(), 0.0);
    }
    CovarianceEstimate { matrix: hermitian_part(&r), sample_count: 0, kind: CovarianceKind::Analytic }
}

/// `(1/K) Σ_k y(k) y(k)ᴴ`, symmetrized.
pub fn sample_covariance(snapshots: &CMatrix) -> Result<CovarianceEstimate> {
    let k = snapshots.ncols();
    if k == 0 || snapshots.nrows() == 0 {
        return Err(Error::InvalidArgument("empty snapshot set".into()));
    }
    let acc = snapshots * snapshots.adjoint();
    Ok(CovarianceEstimate {
        matrix: hermitian_part(&(acc / c64(k as f64, 0.0))),
        sample_count: k,
        kind: CovarianceKind::Sample,
    })
}

/// Accumulates `Σ y yᴴ` over column shards in parallel and merges by summation.
pub fn sample_covariance_sharded(snapshots: &CMatrix, shard: usize) -> Result<CovarianceEstimate> {
    let k = snapshots.ncols();
    let n = snapshots.nrows();
    if k == 0 || n == 0 {
        return Err(Error::InvalidArgument("empty snapshot set".into()));
    }
    let shard = shard.max(1);
    let starts: Vec<usize> = (0..k).step_by(shard).collect();
    let acc = starts
        .par_iter()
        .map(|&s| {
            let cols = snapshots.columns(s, shard.min(k - s));
            &cols * cols.adjoint()
        })
        .reduce(|| CMatrix::zeros(n, n), |a, b| a + b);
    Ok(CovarianceEstimate {
        matrix: hermitian_part(&(acc / c64(k as f64, 0.0))),
        sample_count: k,
        kind: CovarianceKind::Sample,
    })
}

/// Gram matrix `H_Iᴴ H_I`, its largest singular value and `H̃_I = H_I/σ_max(H_I)`.
#[derive(Debug, Clone)]
pub struct InterferenceGram {
    pub gram: CMatrix,
    pub sigma_max: f64,
    pub normalized: CMatrix,
}

pub fn interference_gram(scenario: &Scenario) -> Result<InterferenceGram> {
    if scenario.n_interferers() == 0 {
        return Err(Error::InvalidArgument("interference gram needs J >= 1".into()));
    }
    let hi = scenario.interference_channels();
    Ok(gram_of(&hi))
}

pub fn gram_of(hi: &CMatrix) -> InterferenceGram {
    let sigma_max = spectral_norm(hi);
    InterferenceGram { gram: hi.adjoint() * hi, sigma_max, normalized: hi / c64(sigma_max, 0.0) }
}
