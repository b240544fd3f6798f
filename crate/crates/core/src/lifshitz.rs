//! Casimir energy, free energy and force between two plane mirrors from the
//! specular scattering formula on the imaginary frequency axis,
//!
//! `E/A = (hbar / 2 pi) int dxi  sum_p int k dk / 2 pi  ln(1 - r1 r2 e^{-2 kappa L})`,
//!
//! and at `T > 0` the frequency integral becomes the Matsubara sum
//! `k_B T sum'_n` over `xi_n = 2 pi n k_B T / hbar`.
//!
//! # Sign conventions
//!
//! | quantity            | sign                                            |
//! |---------------------|-------------------------------------------------|
//! | `energy`            | negative for bound (attracting) mirrors         |
//! | `force`             | `-dE/dL`; negative means attraction             |
//! | `attractive`        | `true` when `dE/dL > 0`                         |
//! | `ratio_to_casimir`  | `(dE/dL) / F_Cas`, with `F_Cas = hbar c pi^2 A / (240 L^4) > 0` |

use std::cell::Cell;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::materials::{MaterialError, MaterialModel, Permittivity};
use crate::model::{dimensionless_rescale, Geometry, MirrorPair, ModelError, PhysicalConstants, CODATA};
use crate::quadrature::{
    try_integrate_semi_infinite, try_matsubara_sum_smooth, IntegralResult, QuadratureError, QuadratureSpec,
};
use crate::reflection::{fresnel_from_permittivity, fresnel_static, ReflectionAmplitudes};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LifshitzError {
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("round-trip factor r1 r2 exp(-2 kappa L) = {0} is not below one")]
    Lasing(f64),
    #[error("separation grid must be positive and strictly increasing (index {0})")]
    InvalidGrid(usize),
}

/// Closed-form Casimir energy and force for perfect mirrors at `T = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdealCasimir {
    /// `-hbar c pi^2 A / (720 L^3)`, J.
    pub energy: f64,
    /// `dE/dL = hbar c pi^2 A / (240 L^4)`, N (positive: attraction).
    pub force: f64,
    /// `force / A`, Pa.
    pub pressure: f64,
}

pub fn casimir_ideal(geometry: &Geometry, constants: &PhysicalConstants) -> IdealCasimir {
    let l = geometry.separation();
    let a = geometry.area();
    let hc = constants.hbar_c();
    let force = hc * PI * PI * a / (240.0 * l.powi(4));
    IdealCasimir {
        energy: -hc * PI * PI * a / (720.0 * l.powi(3)),
        force,
        pressure: force / a,
    }
}

/// Diagnostics aggregated over a nested evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Numerics {
    /// Outer frequency integral (or Matsubara sum) in reduced units.
    pub outer: IntegralResult,
    /// Total integrand evaluations, all levels.
    pub evaluations: usize,
    /// Largest relative error estimate reported by an inner integral.
    pub worst_inner_rel_error: f64,
    /// Every level met its tolerance.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyResult {
    /// Energy at `T = 0`, free energy at `T > 0`, J.
    pub energy: f64,
    pub error_estimate: f64,
    pub temperature: f64,
    pub numerics: Numerics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceResult {
    /// `-dE/dL`, N. Negative means attraction.
    pub force: f64,
    pub error_estimate: f64,
    /// `force / A`, Pa.
    pub pressure: f64,
    pub attractive: bool,
    /// `eta_F = (dE/dL) / F_Cas`.
    pub ratio_to_casimir: f64,
    pub numerics: Numerics,
}

/// One row of an `eta_F(L)` sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaPoint {
    pub separation: f64,
    pub eta: f64,
    pub eta_error: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Quantity {
    /// `ln(1 - rho)`
    Energy,
    /// `d/dL ln(1 - rho) * (reference length)` = `2 q rho / (1 - rho)`
    Derivative,
}

/// Scattering-formula engine. Holds only configuration; every call is pure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lifshitz {
    pub constants: PhysicalConstants,
    pub spec: QuadratureSpec,
    /// Internal length unit. `None` uses the separation itself.
    pub reference_length: Option<f64>,
}

impl Default for Lifshitz {
    fn default() -> Self {
        Lifshitz { constants: CODATA, spec: QuadratureSpec::default(), reference_length: None }
    }
}

/// Everything the integrand needs, in reduced units.
struct Reduced<'a> {
    m1: &'a MaterialModel,
    m2: &'a MaterialModel,
    /// `L / l`
    d: f64,
    /// `l` in metres.
    unit: f64,
    c: f64,
}

impl Reduced<'_> {
    /// Permittivities at reduced wavenumber `x = xi l / c > 0`.
    fn permittivities(&self, x: f64) -> Result<(Permittivity, Permittivity), MaterialError> {
        let xi = x * self.c / self.unit;
        Ok((self.m1.epsilon_imag(xi)?, self.m2.epsilon_imag(xi)?))
    }

    /// `int_x^inf q dq sum_p h(rho_p)` with `q = sqrt(K^2 + x^2)`.
    fn inner(
        &self,
        x: f64,
        quantity: Quantity,
        spec: &QuadratureSpec,
        evals: &Cell<usize>,
        worst: &Cell<f64>,
        converged: &Cell<bool>,
    ) -> Result<f64, LifshitzError> {
        enum Source {
            Dynamic(Permittivity, Permittivity),
            Static(crate::materials::StaticResponse, crate::materials::StaticResponse),
        }
        let source = if x > 0.0 {
            let (e1, e2) = self.permittivities(x)?;
            Source::Dynamic(e1, e2)
        } else {
            Source::Static(self.m1.static_response()?, self.m2.static_response()?)
        };
        let c_reduced = self.c / self.unit;
        let d = self.d;

        let integrand = |t: f64| -> Result<f64, LifshitzError> {
            let q = x + t;
            let k = (t * (t + 2.0 * x)).sqrt();
            let (r1, r2): (ReflectionAmplitudes, ReflectionAmplitudes) = match source {
                Source::Dynamic(e1, e2) => (fresnel_from_permittivity(e1, x, k), fresnel_from_permittivity(e2, x, k)),
                Source::Static(s1, s2) => (fresnel_static(s1, k, c_reduced), fresnel_static(s2, k, c_reduced)),
            };
            let decay = (-2.0 * q * d).exp();
            let mut sum = 0.0;
            for (a, b) in [(r1.r_te, r2.r_te), (r1.r_tm, r2.r_tm)] {
                let rho = a * b * decay;
                if rho.abs() >= 1.0 {
                    return Err(LifshitzError::Lasing(rho));
                }
                sum += match quantity {
                    Quantity::Energy => (-rho).ln_1p(),
                    Quantity::Derivative => 2.0 * q * rho / (1.0 - rho),
                };
            }
            Ok(q * sum)
        };

        let r = try_integrate_semi_infinite(integrand, spec)?;
        evals.set(evals.get() + r.evaluations);
        if r.value != 0.0 {
            worst.set(worst.get().max(r.error_estimate / r.value.abs()));
        }
        if !r.converged {
            converged.set(false);
        }
        Ok(r.value)
    }
}

impl Lifshitz {
    pub fn new(spec: QuadratureSpec) -> Self {
        Lifshitz { spec, ..Lifshitz::default() }
    }

    pub fn with_reference_length(mut self, reference_length: f64) -> Self {
        self.reference_length = Some(reference_length);
        self
    }

    /// Reduced integral of `quantity` over frequencies (or the Matsubara
    /// sum), together with the scale factor `l` in metres.
    fn reduced_integral(&self, pair: &MirrorPair, quantity: Quantity) -> Result<(f64, f64, Numerics), LifshitzError> {
        self.spec.validate()?;
        let geometry = &pair.geometry;
        let unit = self.reference_length.unwrap_or(geometry.separation());
        let scaled = dimensionless_rescale(geometry, unit)?;
        let red = Reduced { m1: &pair.mirror1, m2: &pair.mirror2, d: scaled.separation, unit, c: self.constants.c };

        // Integrands decay like exp(-2 q d); match the map to that length.
        let natural = self.spec.mapping.scale() / (2.0 * red.d);
        let outer_spec = self.spec.with_map_scale(natural);
        let inner_spec = self.spec.tightened(10.0).with_map_scale(natural);

        let evals = Cell::new(0usize);
        let worst = Cell::new(0.0f64);
        let converged = Cell::new(true);

        let outer = if geometry.temperature() > 0.0 {
            let dx = self.constants.matsubara_spacing(geometry.temperature()) * unit / self.constants.c;
            let mut r = try_matsubara_sum_smooth(
                |n| red.inner(n * dx, quantity, &inner_spec, &evals, &worst, &converged),
                &outer_spec,
            )?;
            r.value *= dx;
            r.error_estimate *= dx;
            r
        } else {
            try_integrate_semi_infinite(
                |x| red.inner(x, quantity, &inner_spec, &evals, &worst, &converged),
                &outer_spec,
            )?
        };

        let numerics = Numerics {
            outer,
            evaluations: evals.get(),
            worst_inner_rel_error: worst.get(),
            converged: outer.converged && converged.get(),
        };
        Ok((outer.value, unit, numerics))
    }

    pub fn free_energy(&self, pair: &MirrorPair) -> Result<EnergyResult, LifshitzError> {
        let (value, unit, numerics) = self.reduced_integral(pair, Quantity::Energy)?;
        let prefactor = pair.geometry.area() * self.constants.hbar_c() / (unit.powi(3) * 4.0 * PI * PI);
        let energy = prefactor * value;
        let error_estimate =
            prefactor * numerics.outer.error_estimate + numerics.worst_inner_rel_error * energy.abs();
        if !numerics.converged {
            log::warn!("free energy at L = {:e} m did not reach rel_tol {:e}", pair.geometry.separation(), self.spec.rel_tol);
        }
        Ok(EnergyResult { energy, error_estimate, temperature: pair.geometry.temperature(), numerics })
    }

    /// Force from the analytically differentiated integrand
    /// `d/dL ln(1 - rho) = 2 kappa rho / (1 - rho)`.
    pub fn force(&self, pair: &MirrorPair) -> Result<ForceResult, LifshitzError> {
        let (value, unit, numerics) = self.reduced_integral(pair, Quantity::Derivative)?;
        let area = pair.geometry.area();
        let prefactor = area * self.constants.hbar_c() / (unit.powi(4) * 4.0 * PI * PI);
        let de_dl = prefactor * value;
        let error_estimate = prefactor * numerics.outer.error_estimate + numerics.worst_inner_rel_error * de_dl.abs();
        let ideal = casimir_ideal(&pair.geometry, &self.constants);
        if !numerics.converged {
            log::warn!("force at L = {:e} m did not reach rel_tol {:e}", pair.geometry.separation(), self.spec.rel_tol);
        }
        Ok(ForceResult {
            force: -de_dl,
            error_estimate,
            pressure: -de_dl / area,
            attractive: de_dl > 0.0,
            ratio_to_casimir: de_dl / ideal.force,
            numerics,
        })
    }

    /// `eta_F` over a positive, strictly increasing separation grid. Points
    /// are evaluated concurrently; the output keeps the grid order.
    pub fn eta_curve(&self, pair: &MirrorPair, separations: &[f64]) -> Result<Vec<EtaPoint>, LifshitzError> {
        for (i, &l) in separations.iter().enumerate() {
            if !(l.is_finite() && l > 0.0) || (i > 0 && l <= separations[i - 1]) {
                return Err(LifshitzError::InvalidGrid(i));
            }
        }
        separations
            .par_iter()
            .map(|&l| {
                let p = pair.with_geometry(pair.geometry.with_separation(l)?);
                let f = self.force(&p)?;
                let ideal = casimir_ideal(&p.geometry, &self.constants);
                Ok(EtaPoint {
                    separation: l,
                    eta: f.ratio_to_casimir,
                    eta_error: f.error_estimate / ideal.force,
                    converged: f.numerics.converged,
                })
            })
            .collect()
    }
}

pub fn free_energy(pair: &MirrorPair, spec: &QuadratureSpec) -> Result<EnergyResult, LifshitzError> {
    Lifshitz::new(*spec).free_energy(pair)
}

pub fn force(pair: &MirrorPair, spec: &QuadratureSpec) -> Result<ForceResult, LifshitzError> {
    Lifshitz::new(*spec).force(pair)
}

pub fn eta_curve(pair: &MirrorPair, separations: &[f64], spec: &QuadratureSpec) -> Result<Vec<EtaPoint>, LifshitzError> {
    Lifshitz::new(*spec).eta_curve(pair, separations)
}
