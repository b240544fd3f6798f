//! Five-point central second derivative with Richardson extrapolation.

use super::QuadratureError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub value: f64,
    pub error_estimate: f64,
    /// Set when successive Richardson levels disagree by more than 1e-3
    /// relative, i.e. the stencil is resolving noise rather than curvature.
    pub noise_limited: bool,
}

const NOISE_THRESHOLD: f64 = 1e-3;

fn stencil<E, F>(f: &mut F, x0: f64, f0: f64, h: f64) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let fp1 = f(x0 + h)?;
    let fm1 = f(x0 - h)?;
    let fp2 = f(x0 + 2.0 * h)?;
    let fm2 = f(x0 - 2.0 * h)?;
    Ok((-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h))
}

/// Second derivative of a fallible `f` at `x0 > 0`.
///
/// The base step is `h = x0 * max(1e-3, rel_tol^(1/4))`. Stencils at `h`,
/// `h/2` and `h/4` give two Richardson estimates (the stencil error is
/// `O(h^4)`); the finer one is returned and their difference is the error
/// estimate.
pub fn try_second_derivative<E, F>(mut f: F, x0: f64, rel_tol: f64) -> Result<Derivative, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<QuadratureError>,
{
    if !(x0.is_finite() && x0 > 0.0) {
        return Err(QuadratureError::InvalidPoint(x0).into());
    }
    let h = x0 * rel_tol.abs().powf(0.25).max(1e-3);
    let f0 = f(x0)?;
    let d1 = stencil(&mut f, x0, f0, h)?;
    let d2 = stencil(&mut f, x0, f0, 0.5 * h)?;
    let d4 = stencil(&mut f, x0, f0, 0.25 * h)?;

    let r1 = (16.0 * d2 - d1) / 15.0;
    let r2 = (16.0 * d4 - d2) / 15.0;
    let error_estimate = (r2 - r1).abs();
    let noise_limited = error_estimate > NOISE_THRESHOLD * r2.abs();

    Ok(Derivative { value: r2, error_estimate, noise_limited })
}

pub fn second_derivative<F>(mut f: F, x0: f64, rel_tol: f64) -> Result<Derivative, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    try_second_derivative(|x| Ok::<_, QuadratureError>(f(x)), x0, rel_tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_is_exact() {
        let d = second_derivative(|x| x.powi(3), 2.0, 1e-8).unwrap();
        assert!((d.value - 12.0).abs() < 1e-9, "{}", d.value);
        assert!(!d.noise_limited);
    }

    #[test]
    fn inverse_cube() {
        let d = second_derivative(|x| x.powi(-3), 1.0, 1e-8).unwrap();
        assert!((d.value / 12.0 - 1.0).abs() < 1e-6, "{}", d.value);
    }

    #[test]
    fn noisy_function_is_flagged() {
        let mut k = 0u64;
        let d = second_derivative(
            |x| {
                k = k.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                x * x + 1e-4 * ((k >> 11) as f64 / (1u64 << 53) as f64)
            },
            1.0,
            1e-8,
        )
        .unwrap();
        assert!(d.noise_limited);
    }

    #[test]
    fn rejects_bad_point() {
        assert_eq!(
            second_derivative(|x| x, -1.0, 1e-8).unwrap_err(),
            QuadratureError::InvalidPoint(-1.0)
        );
    }
}
