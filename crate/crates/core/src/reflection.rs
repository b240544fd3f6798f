//! Specular reflection on a thick mirror and the cavity loop functions.
//!
//! # Sign convention
//!
//! Amplitudes are ratios of electric-field amplitudes in the basis
//! `e_TE = z x k_hat` and `e_TM = (sigma k_z k_hat - k z_hat) / omega` for a
//! wave travelling in direction `sigma = +/-1` along `z`. On the imaginary
//! axis `omega = i xi`, `k_z = i kappa` with `kappa = sqrt(k^2 + xi^2/c^2)`
//! (the standard vacuum dispersion; the `c k_z` relation printed with the
//! thick-mirror Fresnel law in some references has a misprint), and
//!
//! | polarization | amplitude                                   | perfect mirror |
//! |--------------|---------------------------------------------|----------------|
//! | TE           | `(kappa - kappa_m) / (kappa + kappa_m)`     | `-1`           |
//! | TM           | `(eps kappa - kappa_m) / (eps kappa + kappa_m)` | `+1`       |
//!
//! with `kappa_m = sqrt(k^2 + eps xi^2/c^2)`. The cavity only ever sees the
//! same-polarization product `r1 r2`, which is `+1` for perfect mirrors in
//! both polarizations.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::materials::{MaterialError, MaterialModel, Permittivity, StaticResponse};
use crate::model::{Polarization, SpectralPoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReflectionError {
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error("round-trip factor |rho| = {0} >= 1; the cavity would be unstable")]
    Lasing(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionAmplitudes {
    pub r_te: f64,
    pub r_tm: f64,
}

impl ReflectionAmplitudes {
    pub const PERFECT: ReflectionAmplitudes = ReflectionAmplitudes { r_te: -1.0, r_tm: 1.0 };

    pub fn get(&self, pol: Polarization) -> f64 {
        match pol {
            Polarization::TE => self.r_te,
            Polarization::TM => self.r_tm,
        }
    }
}

/// Amplitudes for permittivity `eps` at wavenumber `q = xi / c` and
/// transverse wavevector `k` (any consistent length unit).
///
/// Written so that `eps -> 1` does not cancel: `kappa - kappa_m` and
/// `eps^2 kappa^2 - kappa_m^2` are expanded analytically.
#[inline]
pub fn fresnel_from_permittivity(eps: Permittivity, q: f64, k: f64) -> ReflectionAmplitudes {
    let eps = match eps {
        Permittivity::Infinite => return ReflectionAmplitudes::PERFECT,
        Permittivity::Finite(e) => e,
    };
    let em1 = eps - 1.0;
    let kappa = (k * k + q * q).sqrt();
    let kappa_m = (kappa * kappa + em1 * q * q).sqrt();
    let te_den = kappa + kappa_m;
    let tm_den = eps * kappa + kappa_m;
    ReflectionAmplitudes {
        r_te: -em1 * q * q / (te_den * te_den),
        r_tm: em1 * ((eps + 1.0) * k * k + eps * q * q) / (tm_den * tm_den),
    }
}

/// Fresnel amplitudes at imaginary frequency for a thick mirror.
pub fn fresnel_imag(material: &MaterialModel, point: &SpectralPoint, c: f64) -> Result<ReflectionAmplitudes, ReflectionError> {
    let eps = material.epsilon_imag(point.xi)?;
    Ok(fresnel_from_permittivity(eps, point.xi / c, point.k))
}

/// The `xi -> 0` limit of the amplitudes, used by the zero Matsubara term.
/// `k` and `c` in SI.
pub fn fresnel_static(response: StaticResponse, k: f64, c: f64) -> ReflectionAmplitudes {
    match response {
        StaticResponse::PerfectConductor => ReflectionAmplitudes::PERFECT,
        StaticResponse::Conductor { omega_sq } => {
            let kappa_m = (k * k + omega_sq / (c * c)).sqrt();
            ReflectionAmplitudes { r_te: (k - kappa_m) / (k + kappa_m), r_tm: 1.0 }
        }
        StaticResponse::Dielectric { eps0 } => {
            ReflectionAmplitudes { r_te: 0.0, r_tm: (eps0 - 1.0) / (eps0 + 1.0) }
        }
    }
}

/// Closed-loop function `f = rho / (1 - rho)` and the intracavity spectral
/// density ratio `g = (1 - |rho|^2) / |1 - rho|^2`, `rho = r1 r2 e^{2 i k_z L}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopFunctions {
    pub f: Complex64,
    pub g: f64,
}

pub fn loop_functions(r1r2: Complex64, phase: Complex64) -> Result<LoopFunctions, ReflectionError> {
    let rho = r1r2 * phase;
    let norm = rho.norm();
    if norm >= 1.0 || norm.is_nan() {
        return Err(ReflectionError::Lasing(norm));
    }
    let u = Complex64::new(1.0, 0.0) - rho;
    let u2 = u.norm_sqr();
    // 1 - |rho|^2 = 2 Re(u) - |u|^2, accurate when rho is close to 1.
    let g = (2.0 * u.re - u2) / u2;
    Ok(LoopFunctions { f: rho / u, g })
}
