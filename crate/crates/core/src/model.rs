//! Physical constants and the geometry/spectral value types shared by the
//! engines.
//!
//! Public APIs take and return SI. Internally, lengths are divided by a
//! reference length `l` and imaginary frequencies are carried as the
//! wavenumber `xi * l / c`, so the exponentials `exp(-2 kappa L)` stay well
//! conditioned over the whole quadrature domain.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::materials::MaterialModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J s.
    pub hbar: f64,
    /// Speed of light, m/s.
    pub c: f64,
    /// Boltzmann constant, J/K.
    pub k_b: f64,
}

/// CODATA 2018 exact/recommended values.
pub const CODATA: PhysicalConstants = PhysicalConstants {
    hbar: 1.054_571_817e-34,
    c: 299_792_458.0,
    k_b: 1.380_649e-23,
};

impl Default for PhysicalConstants {
    fn default() -> Self {
        CODATA
    }
}

impl PhysicalConstants {
    /// `hbar * c`, J m.
    pub fn hbar_c(&self) -> f64 {
        self.hbar * self.c
    }

    /// Spacing of the Matsubara frequencies `2 pi k_B T / hbar`, rad/s.
    pub fn matsubara_spacing(&self, temperature: f64) -> f64 {
        2.0 * std::f64::consts::PI * self.k_b * temperature / self.hbar
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("separation_L must be finite and > 0 (got {0})")]
    Separation(f64),
    #[error("area_A must be finite and > 0 (got {0})")]
    Area(f64),
    #[error("temperature_T must be finite and >= 0 (got {0})")]
    Temperature(f64),
    #[error("reference length must be finite and > 0 (got {0})")]
    ReferenceLength(f64),
    #[error("spectral point needs xi >= 0 and k >= 0 (got xi = {xi}, k = {k})")]
    SpectralPoint { xi: f64, k: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    separation: f64,
    area: f64,
    temperature: f64,
}

impl Geometry {
    pub fn new(separation: f64, area: f64, temperature: f64) -> Result<Self, ModelError> {
        if !(separation.is_finite() && separation > 0.0) {
            return Err(ModelError::Separation(separation));
        }
        if !(area.is_finite() && area > 0.0) {
            return Err(ModelError::Area(area));
        }
        if !(temperature.is_finite() && temperature >= 0.0) {
            return Err(ModelError::Temperature(temperature));
        }
        Ok(Geometry { separation, area, temperature })
    }

    /// Zero-temperature geometry.
    pub fn at_zero_temperature(separation: f64, area: f64) -> Result<Self, ModelError> {
        Geometry::new(separation, area, 0.0)
    }

    pub fn separation(&self) -> f64 {
        self.separation
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn with_separation(&self, separation: f64) -> Result<Self, ModelError> {
        Geometry::new(separation, self.area, self.temperature)
    }

    pub fn with_temperature(&self, temperature: f64) -> Result<Self, ModelError> {
        Geometry::new(self.separation, self.area, temperature)
    }
}

/// Geometry in units of a reference length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledGeometry {
    /// `L / l`.
    pub separation: f64,
    /// `A / l^2`.
    pub area: f64,
    /// Kelvin, not rescaled.
    pub temperature: f64,
    /// The reference length `l` in metres; multiply lengths by it to restore SI.
    pub length_unit: f64,
}

impl ScaledGeometry {
    pub fn to_si(&self) -> Result<Geometry, ModelError> {
        Geometry::new(
            self.separation * self.length_unit,
            self.area * self.length_unit * self.length_unit,
            self.temperature,
        )
    }
}

pub fn dimensionless_rescale(geometry: &Geometry, reference_length: f64) -> Result<ScaledGeometry, ModelError> {
    if !(reference_length.is_finite() && reference_length > 0.0) {
        return Err(ModelError::ReferenceLength(reference_length));
    }
    Ok(ScaledGeometry {
        separation: geometry.separation / reference_length,
        area: geometry.area / (reference_length * reference_length),
        temperature: geometry.temperature,
        length_unit: reference_length,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    TE,
    TM,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::TE, Polarization::TM];
}

/// One node of the imaginary-frequency integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    /// Imaginary frequency, rad/s.
    pub xi: f64,
    /// Transverse wavevector modulus, 1/m.
    pub k: f64,
    pub pol: Polarization,
}

impl SpectralPoint {
    pub fn new(xi: f64, k: f64, pol: Polarization) -> Result<Self, ModelError> {
        if !(xi.is_finite() && xi >= 0.0 && k.is_finite() && k >= 0.0) {
            return Err(ModelError::SpectralPoint { xi, k });
        }
        Ok(SpectralPoint { xi, k, pol })
    }

    /// `sqrt(k^2 + xi^2 / c^2)`, the decay constant of the vacuum field.
    pub fn kappa(&self, c: f64) -> f64 {
        self.k.hypot(self.xi / c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MirrorPair {
    pub mirror1: MaterialModel,
    pub mirror2: MaterialModel,
    pub geometry: Geometry,
}

impl MirrorPair {
    pub fn new(mirror1: MaterialModel, mirror2: MaterialModel, geometry: Geometry) -> Self {
        MirrorPair { mirror1, mirror2, geometry }
    }

    /// Two identical mirrors.
    pub fn symmetric(material: MaterialModel, geometry: Geometry) -> Self {
        MirrorPair { mirror1: material.clone(), mirror2: material, geometry }
    }

    pub fn with_geometry(&self, geometry: Geometry) -> Self {
        MirrorPair { geometry, ..self.clone() }
    }
}
