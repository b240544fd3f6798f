//! Lateral Casimir force between two mirrors with uniaxial sinusoidal
//! corrugations `h1 = a1 cos(kappa_C x)` and `h2 = a2 cos(kappa_C (x - b))`.
//!
//! Heights are measured towards the cavity, so the local separation is
//! `L - h1 - h2`. The energy correction bilinear in the amplitudes is
//!
//! `dE = (A/2) G_C(kappa_C) a1 a2 cos(kappa_C b)`,
//!
//! and the lateral force is `F = -d(dE)/db`. In the proximity force
//! approximation `G_C` is replaced by `G_0 = (1/A) d2E_PP/dL2`.
//!
//! Profiles enter through their complex Fourier components, so every
//! result depends on the two profile offsets only through `b`.

mod kernel;
mod operator;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lifshitz::{Lifshitz, LifshitzError};
use crate::materials::MaterialError;
use crate::model::{MirrorPair, ModelError, PhysicalConstants, CODATA};
use crate::quadrature::{try_second_derivative, QuadratureError, QuadratureSpec};

pub use kernel::{kernel_integral, KernelIntegral, KernelResult};
pub use operator::{rayleigh_block, Block, FirstOrderReflection, RayleighFirstOrder, SpecularLimit};

/// Corrugation amplitudes must stay below this fraction of the shortest
/// length in the problem for the expansion to be trusted.
pub const PERTURBATIVE_FRACTION: f64 = 0.1;

/// First grid node of a `rho_C` curve must satisfy `kappa_C L` at most this.
pub const ANCHOR_KAPPA_L: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorrugationError {
    #[error(transparent)]
    Lifshitz(#[from] LifshitzError),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("corrugation amplitudes must be finite and >= 0 (a1 = {a1}, a2 = {a2})")]
    Amplitude { a1: f64, a2: f64 },
    #[error("corrugation wavevector kappa_C must be finite and > 0 (got {0})")]
    InvalidWavevector(f64),
    #[error("lateral mismatch b must be finite (got {0})")]
    Mismatch(f64),
    #[error("operator couples k to k + ({dx}, {dy}); only +/- kappa_C = {kappa_c} along x is allowed")]
    SelectionRule { dx: f64, dy: f64, kappa_c: f64 },
    #[error("operator built for kappa_C = {operator}, kernel requested at {requested}")]
    OperatorMismatch { operator: f64, requested: f64 },
    #[error("response kernel is only available at T = 0 (got T = {0} K)")]
    Temperature(f64),
    #[error("round-trip factor {0} is not below one")]
    Lasing(f64),
    #[error("kappa_C grid must be positive and strictly increasing (index {0})")]
    InvalidGrid(usize),
    #[error("first kappa_C node gives kappa_C L = {0}, above the anchoring limit of 1e-3")]
    UnanchoredGrid(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrugationSpec {
    /// Amplitude on mirror 1, m.
    pub a1: f64,
    /// Amplitude on mirror 2, m.
    pub a2: f64,
    /// `2 pi / lambda_C`, 1/m.
    pub kappa_c: f64,
    /// Lateral mismatch between crests, m.
    pub b: f64,
}

/// One sinusoidal profile `a cos(kappa_C (x - offset))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile {
    pub amplitude: f64,
    pub offset: f64,
}

impl Profile {
    /// Fourier component at wavevector `q` (`+/- kappa_C`).
    pub fn component(&self, q: f64) -> Complex64 {
        Complex64::from_polar(0.5 * self.amplitude, -q * self.offset)
    }
}

impl CorrugationSpec {
    pub fn new(a1: f64, a2: f64, kappa_c: f64, b: f64) -> Result<Self, CorrugationError> {
        if !(a1.is_finite() && a2.is_finite() && a1 >= 0.0 && a2 >= 0.0) {
            return Err(CorrugationError::Amplitude { a1, a2 });
        }
        if !(kappa_c.is_finite() && kappa_c > 0.0) {
            return Err(CorrugationError::InvalidWavevector(kappa_c));
        }
        if !b.is_finite() {
            return Err(CorrugationError::Mismatch(b));
        }
        Ok(CorrugationSpec { a1, a2, kappa_c, b })
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.kappa_c
    }

    pub fn with_mismatch(&self, b: f64) -> Result<Self, CorrugationError> {
        CorrugationSpec::new(self.a1, self.a2, self.kappa_c, b)
    }

    /// Mirror 1 at offset zero, mirror 2 shifted by `b`.
    pub fn profiles(&self) -> (Profile, Profile) {
        (Profile { amplitude: self.a1, offset: 0.0 }, Profile { amplitude: self.a2, offset: self.b })
    }

    /// Shortest length the amplitudes are compared against.
    pub fn limiting_length(&self, pair: &MirrorPair) -> f64 {
        [self.wavelength(), pair.geometry.separation()]
            .into_iter()
            .chain(pair.mirror1.plasma_length())
            .chain(pair.mirror2.plasma_length())
            .fold(f64::INFINITY, f64::min)
    }

    /// `a1, a2 < 0.1 min(lambda_C, lambda_P, L)`.
    pub fn is_perturbative(&self, pair: &MirrorPair) -> bool {
        self.a1.max(self.a2) < PERTURBATIVE_FRACTION * self.limiting_length(pair)
    }

    fn warn_if_not_perturbative(&self, pair: &MirrorPair) -> bool {
        let ok = self.is_perturbative(pair);
        if !ok {
            log::warn!(
                "corrugation amplitudes (a1 = {:e}, a2 = {:e}) are not small against {:e} m; first-order results are unreliable",
                self.a1,
                self.a2,
                self.limiting_length(pair)
            );
        }
        ok
    }
}

/// `A G sum_Q h1(-Q) h2(Q)`: the bilinear energy for kernel value `g`.
pub fn cross_energy(g: f64, area: f64, kappa_c: f64, p1: Profile, p2: Profile) -> f64 {
    let s: Complex64 = [kappa_c, -kappa_c].iter().map(|&q| p1.component(-q) * p2.component(q)).sum();
    area * g * s.re
}

/// `-d/d(offset2)` of [`cross_energy`].
pub fn cross_lateral_force(g: f64, area: f64, kappa_c: f64, p1: Profile, p2: Profile) -> f64 {
    let s: Complex64 = [kappa_c, -kappa_c]
        .iter()
        .map(|&q| Complex64::new(0.0, q) * p1.component(-q) * p2.component(q))
        .sum();
    area * g * s.re
}

/// A corrugation result with its propagated error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correction {
    pub value: f64,
    pub error_estimate: f64,
    /// Amplitudes satisfied the perturbative condition.
    pub perturbative: bool,
}

/// `d2E_PP/dL2` (J/m^2 times area, i.e. J/m^2 for the given plate) from the
/// plane-mirror engine and Richardson differentiation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Curvature {
    pub value: f64,
    pub error_estimate: f64,
    pub noise_limited: bool,
}

/// Tolerance used for energies that are differentiated twice.
fn differentiation_spec(spec: &QuadratureSpec) -> QuadratureSpec {
    QuadratureSpec { rel_tol: (spec.rel_tol * 1e-3).max(1e-12), ..*spec }
}

pub fn energy_curvature(pair: &MirrorPair, spec: &QuadratureSpec) -> Result<Curvature, CorrugationError> {
    energy_curvature_with(pair, spec, &CODATA)
}

pub fn energy_curvature_with(
    pair: &MirrorPair,
    spec: &QuadratureSpec,
    constants: &PhysicalConstants,
) -> Result<Curvature, CorrugationError> {
    spec.validate()?;
    let inner = differentiation_spec(spec);
    let engine = Lifshitz { constants: *constants, spec: inner, reference_length: None };
    // Holding the reference length fixed keeps E(L) a smooth function of L.
    let engine = engine.with_reference_length(pair.geometry.separation());
    let energy = |l: f64| -> Result<f64, CorrugationError> {
        let p = pair.with_geometry(pair.geometry.with_separation(l)?);
        Ok(engine.free_energy(&p)?.energy)
    };
    let d = try_second_derivative(energy, pair.geometry.separation(), inner.rel_tol)?;
    if d.noise_limited {
        log::warn!("second derivative of the plane-mirror energy is noise limited");
    }
    Ok(Curvature { value: d.value, error_estimate: d.error_estimate, noise_limited: d.noise_limited })
}

fn pfa_parts(pair: &MirrorPair, corr: &CorrugationSpec, spec: &QuadratureSpec) -> Result<(Curvature, bool), CorrugationError> {
    let ok = corr.warn_if_not_perturbative(pair);
    Ok((energy_curvature(pair, spec)?, ok))
}

/// `dE_PFA = (1/2) E_PP'' [(a1^2 + a2^2)/2 + a1 a2 cos(kappa_C b)]`.
pub fn pfa_energy_correction(
    pair: &MirrorPair,
    corr: &CorrugationSpec,
    spec: &QuadratureSpec,
) -> Result<Correction, CorrugationError> {
    let (curv, perturbative) = pfa_parts(pair, corr, spec)?;
    Ok(pfa_energy_from_curvature(&curv, pair.geometry.area(), corr, perturbative))
}

pub fn pfa_energy_from_curvature(curv: &Curvature, area: f64, corr: &CorrugationSpec, perturbative: bool) -> Correction {
    let (p1, p2) = corr.profiles();
    let g0 = curv.value / area;
    let self_terms = 0.25 * curv.value * (corr.a1 * corr.a1 + corr.a2 * corr.a2);
    let value = self_terms + cross_energy(g0, area, corr.kappa_c, p1, p2);
    let weight = 0.25 * (corr.a1 * corr.a1 + corr.a2 * corr.a2) + 0.5 * corr.a1 * corr.a2;
    Correction { value, error_estimate: curv.error_estimate * weight, perturbative }
}

/// `F_PFA = (1/2) E_PP'' kappa_C a1 a2 sin(kappa_C b)`.
pub fn pfa_lateral_force(
    pair: &MirrorPair,
    corr: &CorrugationSpec,
    spec: &QuadratureSpec,
) -> Result<Correction, CorrugationError> {
    let (curv, perturbative) = pfa_parts(pair, corr, spec)?;
    Ok(pfa_lateral_force_from_curvature(&curv, pair.geometry.area(), corr, perturbative))
}

pub fn pfa_lateral_force_from_curvature(curv: &Curvature, area: f64, corr: &CorrugationSpec, perturbative: bool) -> Correction {
    lateral_force_from_kernel_value(curv.value / area, curv.error_estimate / area, area, corr, perturbative)
}

fn lateral_force_from_kernel_value(g: f64, g_err: f64, area: f64, corr: &CorrugationSpec, perturbative: bool) -> Correction {
    let (p1, p2) = corr.profiles();
    let value = cross_lateral_force(g, area, corr.kappa_c, p1, p2);
    let error_estimate = 0.5 * area * g_err * corr.kappa_c * corr.a1 * corr.a2 * (corr.kappa_c * corr.b).sin().abs();
    Correction { value, error_estimate, perturbative }
}

/// `G_C`, the independent `G_0` and their ratio at `kappa_C`.
pub fn response_kernel(
    pair: &MirrorPair,
    kappa_c: f64,
    delta_r1: &dyn FirstOrderReflection,
    delta_r2: &dyn FirstOrderReflection,
    spec: &QuadratureSpec,
) -> Result<KernelResult, CorrugationError> {
    let curv = energy_curvature(pair, spec)?;
    response_kernel_with_curvature(pair, kappa_c, delta_r1, delta_r2, spec, &curv)
}

/// As [`response_kernel`] with `G_0` taken from an already computed
/// curvature of the same pair.
pub fn response_kernel_with_curvature(
    pair: &MirrorPair,
    kappa_c: f64,
    delta_r1: &dyn FirstOrderReflection,
    delta_r2: &dyn FirstOrderReflection,
    spec: &QuadratureSpec,
    curvature: &Curvature,
) -> Result<KernelResult, CorrugationError> {
    let gc = kernel_integral(pair, kappa_c, delta_r1, delta_r2, spec, &CODATA)?;
    let area = pair.geometry.area();
    let g0 = curvature.value / area;
    let g0_err = curvature.error_estimate / area;
    let rho = gc.value / g0;
    let rho_err = rho.abs() * (gc.error_estimate / gc.value.abs() + g0_err / g0.abs());
    Ok(KernelResult {
        kappa_c,
        g_c: gc.value,
        g_c_error: gc.error_estimate,
        g_0: g0,
        g_0_error: g0_err,
        rho_c: rho,
        rho_c_error: rho_err,
        g_0_noise_limited: curvature.noise_limited,
        numerics: gc.numerics,
    })
}

/// Beyond-PFA lateral force `(A/2) G_C kappa_C a1 a2 sin(kappa_C b)`, with
/// the kernel it was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LateralForce {
    pub force: Correction,
    pub kernel: KernelResult,
}

impl LateralForce {
    /// The proximity-force value from the same run's `G_0`.
    pub fn pfa(&self, area: f64, corr: &CorrugationSpec) -> Correction {
        lateral_force_from_kernel_value(self.kernel.g_0, self.kernel.g_0_error, area, corr, self.force.perturbative)
    }
}

pub fn lateral_force_beyond_pfa(
    pair: &MirrorPair,
    corr: &CorrugationSpec,
    delta_r1: &dyn FirstOrderReflection,
    delta_r2: &dyn FirstOrderReflection,
    spec: &QuadratureSpec,
) -> Result<LateralForce, CorrugationError> {
    let perturbative = corr.warn_if_not_perturbative(pair);
    let kernel = response_kernel(pair, corr.kappa_c, delta_r1, delta_r2, spec)?;
    Ok(lateral_force_from_kernel(&kernel, pair.geometry.area(), corr, perturbative))
}

pub fn lateral_force_from_kernel(kernel: &KernelResult, area: f64, corr: &CorrugationSpec, perturbative: bool) -> LateralForce {
    LateralForce {
        force: lateral_force_from_kernel_value(kernel.g_c, kernel.g_c_error, area, corr, perturbative),
        kernel: *kernel,
    }
}

/// Which first-order operator a curve builds at each `kappa_C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    #[default]
    Rayleigh,
    SpecularLimit,
}

impl OperatorKind {
    pub fn build(self, kappa_c: f64) -> Result<Box<dyn FirstOrderReflection>, CorrugationError> {
        Ok(match self {
            OperatorKind::Rayleigh => Box::new(RayleighFirstOrder::new(kappa_c)?),
            OperatorKind::SpecularLimit => Box::new(SpecularLimit { kappa_c }),
        })
    }
}

/// `rho_C` over a `kappa_C` grid whose first node anchors the proximity
/// force limit. Nodes run concurrently and share one `G_0`.
pub fn rho_curve(
    pair: &MirrorPair,
    kappa_grid: &[f64],
    operators: (OperatorKind, OperatorKind),
    spec: &QuadratureSpec,
) -> Result<Vec<KernelResult>, CorrugationError> {
    for (i, &k) in kappa_grid.iter().enumerate() {
        if !(k.is_finite() && k > 0.0) || (i > 0 && k <= kappa_grid[i - 1]) {
            return Err(CorrugationError::InvalidGrid(i));
        }
    }
    let Some(&first) = kappa_grid.first() else {
        return Err(CorrugationError::InvalidGrid(0));
    };
    let anchor = first * pair.geometry.separation();
    if anchor > ANCHOR_KAPPA_L * (1.0 + 1e-12) {
        return Err(CorrugationError::UnanchoredGrid(anchor));
    }
    let curvature = energy_curvature(pair, spec)?;
    kappa_grid
        .par_iter()
        .map(|&k| {
            let r1 = operators.0.build(k)?;
            let r2 = operators.1.build(k)?;
            response_kernel_with_curvature(pair, k, r1.as_ref(), r2.as_ref(), spec, &curvature)
        })
        .collect()
}

#[cfg(test)]
mod tests;
