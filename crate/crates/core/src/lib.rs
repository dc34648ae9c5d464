//! Relaxed zero-forcing (RZF) beamforming under temporally correlated
//! interference: batch beamformers, single-interferer MSE theory and online
//! implementations.

pub mod adaptive;
pub mod array_model;
pub mod beamformers;
pub mod covariance;
pub mod error;
pub mod linalg;
pub mod theory;

pub use error::{Error, Result};
