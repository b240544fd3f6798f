//! The second-order response kernel
//!
//! `G_C = -hbar int dxi/2pi int d^2k/(2pi)^2 sum_{p p'}
//!        [e^{-kappa L}/D_p(k)] R1_{p p'}(k, k'') [e^{-kappa'' L}/D_p'(k'')] R2_{p' p}(k'', k)`
//!
//! with `k'' = k + kappa_C x`, `D_p = 1 - r1_p r2_p e^{-2 kappa L}`. Mirror 2
//! faces the opposite way; in the common basis its first-order block is the
//! local one with the polarization-mixing entries negated.

use std::cell::Cell;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{CorrugationError, FirstOrderReflection};
use crate::lifshitz::Numerics;
use crate::materials::Permittivity;
use crate::model::{MirrorPair, PhysicalConstants};
use crate::quadrature::{
    try_integrate_interval, try_integrate_interval_carrying, try_integrate_semi_infinite_carrying, IntegralResult,
    QuadratureSpec,
};
use crate::reflection::{fresnel_from_permittivity, ReflectionAmplitudes};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelResult {
    /// 1/m.
    pub kappa_c: f64,
    /// J/m^4.
    pub g_c: f64,
    pub g_c_error: f64,
    /// `(1/A) d2E_PP/dL2`, J/m^4.
    pub g_0: f64,
    pub g_0_error: f64,
    pub rho_c: f64,
    pub rho_c_error: f64,
    pub g_0_noise_limited: bool,
    pub numerics: Numerics,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelIntegral {
    pub value: f64,
    pub error_estimate: f64,
    pub numerics: Numerics,
}

/// Per-frequency data shared by every wavevector.
struct Slice {
    eps1: Permittivity,
    eps2: Permittivity,
    x: f64,
    d: f64,
}

impl Slice {
    fn amplitudes(&self, k: f64) -> (ReflectionAmplitudes, ReflectionAmplitudes) {
        (fresnel_from_permittivity(self.eps1, self.x, k), fresnel_from_permittivity(self.eps2, self.x, k))
    }

    /// `e^{-kappa d} / D_p` for both polarizations.
    fn propagators(&self, k: f64) -> Result<[f64; 2], CorrugationError> {
        let kappa = (k * k + self.x * self.x).sqrt();
        let (r1, r2) = self.amplitudes(k);
        let half = (-kappa * self.d).exp();
        let mut out = [0.0; 2];
        for (o, rr) in out.iter_mut().zip([r1.r_te * r2.r_te, r1.r_tm * r2.r_tm]) {
            let rho = rr * half * half;
            if rho.abs() >= 1.0 {
                return Err(CorrugationError::Lasing(rho));
            }
            *o = half / (1.0 - rho);
        }
        Ok(out)
    }
}

struct Tally {
    evals: Cell<usize>,
    worst: Cell<f64>,
    converged: Cell<bool>,
}

impl Tally {
    fn record(&self, r: &IntegralResult) {
        self.evals.set(self.evals.get() + r.evaluations);
        if r.value != 0.0 {
            self.worst.set(self.worst.get().max(r.error_estimate / r.value.abs()));
        }
        if !r.converged {
            self.converged.set(false);
        }
    }
}

/// Tolerances of the three nested levels.
struct Levels {
    outer: QuadratureSpec,
    middle: QuadratureSpec,
    inner: QuadratureSpec,
}

/// `G_C(kappa_C)` at `T = 0`, J/m^4.
pub fn kernel_integral(
    pair: &MirrorPair,
    kappa_c: f64,
    delta_r1: &dyn FirstOrderReflection,
    delta_r2: &dyn FirstOrderReflection,
    spec: &QuadratureSpec,
    constants: &PhysicalConstants,
) -> Result<KernelIntegral, CorrugationError> {
    spec.validate()?;
    if !(kappa_c.is_finite() && kappa_c > 0.0) {
        return Err(CorrugationError::InvalidWavevector(kappa_c));
    }
    for op in [delta_r1, delta_r2] {
        if (op.kappa_c() - kappa_c).abs() > 1e-12 * kappa_c {
            return Err(CorrugationError::OperatorMismatch { operator: op.kappa_c(), requested: kappa_c });
        }
    }
    let geometry = &pair.geometry;
    if geometry.temperature() > 0.0 {
        return Err(CorrugationError::Temperature(geometry.temperature()));
    }

    // Reduced units: lengths in L, frequencies as x = xi L / c.
    let unit = geometry.separation();
    let d = 1.0;
    let kc = kappa_c * unit;
    let c = constants.c;

    let natural = spec.mapping.scale() / (2.0 * d);
    let tally = Tally { evals: Cell::new(0), worst: Cell::new(0.0), converged: Cell::new(true) };

    // Nested integral; each level returns (value, propagated error of the
    // levels below), so the final error estimate accounts for every level.
    let nested = |levels: &Levels| -> Result<(IntegralResult, f64), CorrugationError> {
        let angular = |slice: &Slice, k: f64, p_k: [f64; 2]| -> Result<(f64, f64), CorrugationError> {
            let f = |theta: f64| -> Result<f64, CorrugationError> {
                let (sin, cos) = theta.sin_cos();
                let kin = [k * cos, k * sin];
                let kout = [kin[0] + kc, kin[1]];
                let p_out = slice.propagators((kout[0] * kout[0] + kout[1] * kout[1]).sqrt())?;
                // Mirror 1 scatters k'' back into k; mirror 2 sends k to k''.
                let m1 = delta_r1.block_reduced(slice.eps1, slice.x, kout, kin, unit)?;
                let mut m2 = delta_r2.block_reduced(slice.eps2, slice.x, kin, kout, unit)?;
                m2[0][1] = -m2[0][1];
                m2[1][0] = -m2[1][0];
                let mut sum = 0.0;
                for p in 0..2 {
                    for pp in 0..2 {
                        sum += m1[p][pp] * p_out[pp] * m2[pp][p] * p_k[p];
                    }
                }
                Ok(sum)
            };
            let r = try_integrate_interval(f, 0.0, PI, &levels.inner)?;
            tally.record(&r);
            Ok((r.value, r.error_estimate))
        };

        let radial = |x: f64| -> Result<(f64, f64), CorrugationError> {
            let xi = x * c / unit;
            let slice = Slice { eps1: pair.mirror1.epsilon_imag(xi)?, eps2: pair.mirror2.epsilon_imag(xi)?, x, d };
            let g = |t: f64| -> Result<(f64, f64), CorrugationError> {
                let q = x + t;
                let k = (t * (t + 2.0 * x)).sqrt();
                let p_k = slice.propagators(k)?;
                // k dk = q dq
                let (j, e) = angular(&slice, k, p_k)?;
                Ok((q * j, q * e))
            };
            // The angular integral has a kink where |k''| can reach zero,
            // k = kappa_C; split the radial range there.
            let t_split = kc.hypot(x) - x;
            let near = try_integrate_interval_carrying(g, 0.0, t_split, &levels.middle)?;
            let far = try_integrate_semi_infinite_carrying(|s| g(t_split + s), &levels.middle)?;
            tally.record(&near.result);
            tally.record(&far.result);
            let value = near.result.value + far.result.value;
            Ok((value, near.result.error_estimate + far.result.error_estimate + near.carried + far.carried))
        };

        let outer = try_integrate_semi_infinite_carrying(radial, &levels.outer)?;
        Ok((outer.result, outer.carried))
    };

    // A coarse pilot sets the absolute scale, so that regions contributing
    // negligibly to the total are not resolved to full relative precision.
    let coarse = QuadratureSpec { rel_tol: spec.rel_tol.max(1e-3), abs_tol: 0.0, ..*spec };
    let (pilot, _) = nested(&Levels {
        outer: coarse.with_map_scale(natural),
        middle: coarse.with_map_scale(natural),
        inner: coarse,
    })?;
    let floor = QuadratureSpec { abs_tol: spec.abs_tol.max(0.1 * spec.rel_tol * pilot.value.abs()), ..*spec };
    tally.converged.set(true);
    let (outer, propagated) = nested(&Levels {
        outer: spec.with_map_scale(natural),
        middle: floor.with_map_scale(natural),
        inner: floor,
    })?;

    // theta in [0, pi] covers half the plane; k_y -> -k_y is a symmetry.
    let prefactor = -constants.hbar_c() / unit.powi(5) / (8.0 * PI * PI * PI) * 2.0;
    let value = prefactor * outer.value;
    let numerics = Numerics {
        outer,
        evaluations: tally.evals.get() + outer.evaluations,
        worst_inner_rel_error: tally.worst.get(),
        converged: outer.converged && tally.converged.get(),
    };
    if !numerics.converged {
        log::warn!("response kernel at kappa_C = {kappa_c:e} 1/m did not reach rel_tol {:e}", spec.rel_tol);
    }
    let error_estimate = prefactor.abs() * (outer.error_estimate + propagated.abs());
    Ok(KernelIntegral { value, error_estimate, numerics })
}
