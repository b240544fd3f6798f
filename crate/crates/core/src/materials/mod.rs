//! Dielectric response on the imaginary frequency axis.
//!
//! Every material is reduced to `eps(i xi)`, a real number `>= 1` for a
//! passive causal medium. Tabulated data is stored on the imaginary axis;
//! real-axis absorption data goes through [`kramers_kronig_to_imaginary_axis`]
//! once, at ingestion.

mod io;
mod kramers_kronig;
mod table;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::CODATA;

pub use io::{load_optical_table, parse_optical_table, TableFormat};
pub use kramers_kronig::{kramers_kronig_to_imaginary_axis, AbsorptionSpectrum, KramersKronigOptions};
pub use table::{HighExtrapolation, Interpolation, LowExtrapolation, TabulatedDielectric};

/// Plasma wavelength of the built-in gold preset, metres.
pub const GOLD_PLASMA_WAVELENGTH: f64 = 137e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaterialError {
    #[error("imaginary frequency must be finite and > 0 (got {0})")]
    NonPositiveFrequency(f64),
    #[error("plasma frequency must be finite and > 0 (got {0})")]
    PlasmaFrequency(f64),
    #[error("frequency {xi} outside tabulated range [{min}, {max}] with extrapolation disabled")]
    OutsideGrid { xi: f64, min: f64, max: f64 },
    #[error("table needs at least two nodes (got {0})")]
    TooFewNodes(usize),
    #[error("grid and value columns differ in length ({grid} vs {values})")]
    LengthMismatch { grid: usize, values: usize },
    #[error("frequency grid not strictly increasing and positive at node {0}")]
    NonIncreasingGrid(usize),
    #[error("permittivity {value} < 1 at node {index}")]
    PermittivityBelowOne { index: usize, value: f64 },
    #[error("negative absorption {value} at node {index}")]
    NegativeAbsorption { index: usize, value: f64 },
    #[error("non-finite value at node {0}")]
    NonFinite(usize),
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("{path}: missing mandatory '#format: A|B' header")]
    MissingFormatHeader { path: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("numerical failure during ingestion: {0}")]
    Quadrature(#[from] crate::quadrature::QuadratureError),
}

/// Analytic plasma model `eps(i xi) = 1 + omega_p^2 / xi^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlasmaModel {
    omega_p: f64,
}

impl PlasmaModel {
    pub fn new(omega_p: f64) -> Result<Self, MaterialError> {
        if !(omega_p.is_finite() && omega_p > 0.0) {
            return Err(MaterialError::PlasmaFrequency(omega_p));
        }
        Ok(PlasmaModel { omega_p })
    }

    /// From the plasma wavelength `lambda_p = 2 pi c / omega_p`.
    pub fn from_wavelength(lambda_p: f64) -> Result<Self, MaterialError> {
        PlasmaModel::new(2.0 * PI * CODATA.c / lambda_p)
    }

    pub fn omega_p(&self) -> f64 {
        self.omega_p
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * PI * CODATA.c / self.omega_p
    }

    pub fn epsilon(&self, xi: f64) -> f64 {
        let r = self.omega_p / xi;
        1.0 + r * r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum MaterialModel {
    /// Formal `eps -> inf` limit.
    PerfectReflector,
    Plasma(PlasmaModel),
    Tabulated(TabulatedDielectric),
}

/// Value of `eps(i xi)`; the perfect reflector has no finite value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Permittivity {
    Finite(f64),
    Infinite,
}

/// Behaviour of the material as `xi -> 0`, needed by the zero-frequency
/// Matsubara term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StaticResponse {
    PerfectConductor,
    /// `eps` diverges with `lim xi^2 eps(i xi) = omega_sq` (rad^2/s^2).
    Conductor { omega_sq: f64 },
    Dielectric { eps0: f64 },
}

impl MaterialModel {
    /// Gold described by the plasma model with `lambda_p = 137 nm`.
    pub fn gold_plasma() -> Self {
        MaterialModel::Plasma(PlasmaModel::from_wavelength(GOLD_PLASMA_WAVELENGTH).expect("valid preset"))
    }

    pub fn plasma_wavelength(lambda_p: f64) -> Result<Self, MaterialError> {
        Ok(MaterialModel::Plasma(PlasmaModel::from_wavelength(lambda_p)?))
    }

    pub fn epsilon_imag(&self, xi: f64) -> Result<Permittivity, MaterialError> {
        if !(xi.is_finite() && xi > 0.0) {
            return Err(MaterialError::NonPositiveFrequency(xi));
        }
        match self {
            MaterialModel::PerfectReflector => Ok(Permittivity::Infinite),
            MaterialModel::Plasma(p) => Ok(Permittivity::Finite(p.epsilon(xi))),
            MaterialModel::Tabulated(t) => t.epsilon(xi).map(Permittivity::Finite),
        }
    }

    pub fn static_response(&self) -> Result<StaticResponse, MaterialError> {
        match self {
            MaterialModel::PerfectReflector => Ok(StaticResponse::PerfectConductor),
            MaterialModel::Plasma(p) => Ok(StaticResponse::Conductor { omega_sq: p.omega_p * p.omega_p }),
            MaterialModel::Tabulated(t) => t.static_response(),
        }
    }

    /// Characteristic length of the optical response (plasma wavelength),
    /// if the model has one.
    pub fn plasma_length(&self) -> Option<f64> {
        match self {
            MaterialModel::Plasma(p) => Some(p.wavelength()),
            _ => None,
        }
    }
}
