//! First-order non-specular reflection on a sinusoidally corrugated mirror.
//!
//! A profile `h(x, y)` (positive towards the cavity) scatters an incoming
//! mode `(k, p)` into `(k', p')` with amplitude `R_{p'p}(k', k) * h~(k' - k)`
//! at first order in `h`. For `h = a cos(kappa_C x)` only `k' = k +/- kappa_C x`
//! is reached. Blocks are indexed `[out][in]` in the order `[TE, TM]`, in
//! the field-amplitude basis of the specular amplitudes.
//!
//! At imaginary frequency, with `q = xi / c`, `kappa = sqrt(k^2 + q^2)`,
//! `kappa_m = sqrt(k^2 + eps q^2)`, primes on outgoing quantities,
//! `c = k_hat . k'_hat` and `s = z . (k_hat x k'_hat)`:
//!
//! ```text
//! TE <- TE   -2 kappa (eps-1) q^2 c                    / ((kappa' + kappa_m')(kappa + kappa_m))
//! TM <- TM    2 kappa (eps-1) (eps k k' + kappa_m kappa_m' c) / ((eps kappa' + kappa_m')(eps kappa + kappa_m))
//! TM <- TE   -2 kappa (eps-1) q kappa_m' s             / ((eps kappa' + kappa_m')(kappa + kappa_m))
//! TE <- TM   -2 kappa (eps-1) q kappa_m s              / ((kappa' + kappa_m')(eps kappa + kappa_m))
//! ```
//!
//! For `k' = k` the diagonal reduces to `2 kappa r_p`, the derivative of the
//! specular amplitude with respect to a rigid displacement of the mirror.

use serde::{Deserialize, Serialize};

use super::CorrugationError;
use crate::materials::Permittivity;

/// `[out][in]`, `[TE, TM]`.
pub type Block = [[f64; 2]; 2];

/// Relative tolerance on the selection rule `k_out - k_in = +/- kappa_C x`.
const SELECTION_TOL: f64 = 1e-9;

/// First-order non-specular amplitude of one mirror, per unit corrugation
/// amplitude, in the mirror's own frame.
///
/// Wavenumbers are in any consistent unit (`q = xi / c`, `k_in`, `k_out`,
/// and [`FirstOrderReflection::kappa_c`]); the block carries the inverse of
/// that unit.
pub trait FirstOrderReflection: Send + Sync {
    /// Corrugation wavevector the operator was built for (1/m).
    fn kappa_c(&self) -> f64;

    /// Amplitudes coupling `k_in` to `k_out` for a mirror of permittivity
    /// `eps` at imaginary frequency `q = xi / c`.
    fn block(&self, eps: Permittivity, q: f64, k_in: [f64; 2], k_out: [f64; 2]) -> Result<Block, CorrugationError>;

    /// Same block with wavenumbers in units of `1 / unit` (metres), returned
    /// in the same reduced unit.
    fn block_reduced(
        &self,
        eps: Permittivity,
        q: f64,
        k_in: [f64; 2],
        k_out: [f64; 2],
        unit: f64,
    ) -> Result<Block, CorrugationError> {
        let s = 1.0 / unit;
        let b = self.block(eps, q * s, [k_in[0] * s, k_in[1] * s], [k_out[0] * s, k_out[1] * s])?;
        Ok(b.map(|row| row.map(|v| v * unit)))
    }
}

fn check_selection(kappa_c: f64, k_in: [f64; 2], k_out: [f64; 2]) -> Result<(), CorrugationError> {
    let dx = k_out[0] - k_in[0];
    let dy = k_out[1] - k_in[1];
    let norm = |v: [f64; 2]| (v[0] * v[0] + v[1] * v[1]).sqrt();
    let scale = kappa_c.max(norm(k_in)).max(norm(k_out));
    if (dx.abs() - kappa_c).abs() > SELECTION_TOL * scale || dy.abs() > SELECTION_TOL * scale {
        return Err(CorrugationError::SelectionRule { dx, dy, kappa_c });
    }
    Ok(())
}

/// `(cos, sin)` of the angle from `a` (norm `na`) to `b` (norm `nb`);
/// `(1, 0)` when either vanishes.
fn relative_angle(a: [f64; 2], na: f64, b: [f64; 2], nb: f64) -> (f64, f64) {
    if na == 0.0 || nb == 0.0 {
        return (1.0, 0.0);
    }
    let inv = 1.0 / (na * nb);
    ((a[0] * b[0] + a[1] * b[1]) * inv, (a[0] * b[1] - a[1] * b[0]) * inv)
}

/// Rayleigh (first-order small-slope) amplitudes of a thick mirror with a
/// local permittivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayleighFirstOrder {
    pub kappa_c: f64,
}

impl RayleighFirstOrder {
    pub fn new(kappa_c: f64) -> Result<Self, CorrugationError> {
        if !(kappa_c.is_finite() && kappa_c > 0.0) {
            return Err(CorrugationError::InvalidWavevector(kappa_c));
        }
        Ok(RayleighFirstOrder { kappa_c })
    }
}

/// Amplitudes without the selection-rule check.
pub fn rayleigh_block(eps: Permittivity, q: f64, k_in: [f64; 2], k_out: [f64; 2]) -> Block {
    // Plain square roots: arguments are moderate, and hypot is slow in this
    // innermost loop.
    let k2 = k_in[0] * k_in[0] + k_in[1] * k_in[1];
    let kp2 = k_out[0] * k_out[0] + k_out[1] * k_out[1];
    let (k, kp) = (k2.sqrt(), kp2.sqrt());
    let kappa = (k2 + q * q).sqrt();
    let kappa_p = (kp2 + q * q).sqrt();
    let (c, s) = relative_angle(k_in, k, k_out, kp);
    match eps {
        Permittivity::Infinite => [
            [-2.0 * kappa * c, -2.0 * q * s],
            [-2.0 * kappa * q * s / kappa_p, 2.0 * (k * kp + q * q * c) / kappa_p],
        ],
        Permittivity::Finite(eps) => {
            let em1 = eps - 1.0;
            let km = (kappa * kappa + em1 * q * q).sqrt();
            let km_p = (kappa_p * kappa_p + em1 * q * q).sqrt();
            let te_in = kappa + km;
            let tm_in = eps * kappa + km;
            let te_out = kappa_p + km_p;
            let tm_out = eps * kappa_p + km_p;
            let pre = 2.0 * kappa * em1;
            [
                [-pre * q * q * c / (te_out * te_in), -pre * q * km * s / (te_out * tm_in)],
                [-pre * q * km_p * s / (tm_out * te_in), pre * (eps * k * kp + km * km_p * c) / (tm_out * tm_in)],
            ]
        }
    }
}

impl FirstOrderReflection for RayleighFirstOrder {
    fn kappa_c(&self) -> f64 {
        self.kappa_c
    }

    fn block(&self, eps: Permittivity, q: f64, k_in: [f64; 2], k_out: [f64; 2]) -> Result<Block, CorrugationError> {
        check_selection(self.kappa_c, k_in, k_out)?;
        Ok(rayleigh_block(eps, q, k_in, k_out))
    }
}

/// The long-wavelength limit: a rigid displacement of the flat mirror,
/// `diag(2 kappa r_TE, 2 kappa r_TM)` at the incoming wavevector, with no
/// polarization mixing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecularLimit {
    pub kappa_c: f64,
}

impl FirstOrderReflection for SpecularLimit {
    fn kappa_c(&self) -> f64 {
        self.kappa_c
    }

    fn block(&self, eps: Permittivity, q: f64, k_in: [f64; 2], k_out: [f64; 2]) -> Result<Block, CorrugationError> {
        check_selection(self.kappa_c, k_in, k_out)?;
        let k = k_in[0].hypot(k_in[1]);
        let r = crate::reflection::fresnel_from_permittivity(eps, q, k);
        let two_kappa = 2.0 * k.hypot(q);
        Ok([[two_kappa * r.r_te, 0.0], [0.0, two_kappa * r.r_tm]])
    }
}
