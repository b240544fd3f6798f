//! Numerical engines shared by the physics modules: adaptive quadrature on
//! `[0, inf)`, Matsubara summation with tail control, and Richardson
//! extrapolated second derivatives.
//!
//! Everything here is pure. Identical inputs give bit-identical outputs.

mod adaptive;
mod derivative;
mod matsubara;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use adaptive::{
    integrate_interval, integrate_semi_infinite, try_integrate_interval, try_integrate_interval_carrying,
    try_integrate_semi_infinite, try_integrate_semi_infinite_carrying, CarriedIntegral,
};
pub use derivative::{second_derivative, try_second_derivative, Derivative};
pub use matsubara::{matsubara_sum, try_matsubara_sum_smooth, MATSUBARA_TERM_BUDGET};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("relative tolerance {0} outside (1e-14, 1e-2)")]
    RelTolOutOfRange(f64),
    #[error("absolute tolerance {0} must be finite and non-negative")]
    InvalidAbsTol(f64),
    #[error("max_subdivisions {0} below the minimum of 8")]
    TooFewSubdivisions(usize),
    #[error("map scale {0} must be finite and positive")]
    InvalidMapScale(f64),
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFiniteSample { x: f64 },
    #[error("invalid integration interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("series shows no decay within {0} terms")]
    NoDecay(usize),
    #[error("derivative point {0} must be finite and positive")]
    InvalidPoint(f64),
}

/// Variable change used to bring `[0, inf)` onto a finite range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SemiInfiniteMap {
    /// `x = -scale * ln(u)`, `u` in `(0, 1]`. An integrand decaying like
    /// `exp(-x / scale)` becomes constant in `u`.
    Log { scale: f64 },
}

impl Default for SemiInfiniteMap {
    fn default() -> Self {
        SemiInfiniteMap::Log { scale: 1.0 }
    }
}

impl SemiInfiniteMap {
    pub fn scale(&self) -> f64 {
        match *self {
            SemiInfiniteMap::Log { scale } => scale,
        }
    }

    pub fn with_scale(&self, scale: f64) -> Self {
        match *self {
            SemiInfiniteMap::Log { .. } => SemiInfiniteMap::Log { scale },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub mapping: SemiInfiniteMap,
}

impl QuadratureSpec {
    pub fn new(
        rel_tol: f64,
        abs_tol: f64,
        max_subdivisions: usize,
        mapping: SemiInfiniteMap,
    ) -> Result<Self, QuadratureError> {
        let spec = QuadratureSpec { rel_tol, abs_tol, max_subdivisions, mapping };
        spec.validate()?;
        Ok(spec)
    }

    /// Default budget with the given relative tolerance.
    pub fn with_rel_tol(rel_tol: f64) -> Result<Self, QuadratureError> {
        QuadratureSpec::new(rel_tol, 0.0, 4000, SemiInfiniteMap::default())
    }

    pub fn validate(&self) -> Result<(), QuadratureError> {
        if !(self.rel_tol > 1e-14 && self.rel_tol < 1e-2) {
            return Err(QuadratureError::RelTolOutOfRange(self.rel_tol));
        }
        if !(self.abs_tol.is_finite() && self.abs_tol >= 0.0) {
            return Err(QuadratureError::InvalidAbsTol(self.abs_tol));
        }
        if self.max_subdivisions < 8 {
            return Err(QuadratureError::TooFewSubdivisions(self.max_subdivisions));
        }
        let scale = self.mapping.scale();
        if !(scale.is_finite() && scale > 0.0) {
            return Err(QuadratureError::InvalidMapScale(scale));
        }
        Ok(())
    }

    /// Copy with the tolerance tightened by `factor` (clamped to the valid
    /// range). Used for the inner level of nested integrals.
    pub fn tightened(&self, factor: f64) -> Self {
        QuadratureSpec {
            rel_tol: (self.rel_tol / factor).max(2e-14),
            abs_tol: self.abs_tol / factor,
            ..*self
        }
    }

    /// Copy with the semi-infinite map scale replaced.
    pub fn with_map_scale(&self, scale: f64) -> Self {
        QuadratureSpec { mapping: self.mapping.with_scale(scale), ..*self }
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-8,
            abs_tol: 0.0,
            max_subdivisions: 4000,
            mapping: SemiInfiniteMap::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    /// `false` when the subdivision or term budget ran out before the
    /// tolerance was met; `value` is then the best available estimate.
    pub converged: bool,
}
