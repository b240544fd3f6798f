//! Dispersion relation from real-axis absorption to the imaginary axis:
//!
//! `eps(i xi) = 1 + (2/pi) int_0^inf w Im eps(w) / (w^2 + xi^2) dw`.
//!
//! Inside the tabulated range `Im eps` is interpolated log-log (linear where
//! a node is zero). Outside it, power laws fitted to the two end nodes are
//! used: the low tail exponent is clamped to `[-1.9, 8]` (integrable at
//! zero, covers Drude `w^-1` and insulator `w^1`), the high tail exponent to
//! `<= -0.5` (integrable at infinity; Lorentz/Drude give `w^-3`).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{MaterialError, TabulatedDielectric};
use crate::quadrature::{integrate_interval, integrate_semi_infinite, QuadratureSpec};

/// Real-frequency absorption `Im eps(w)` on a strictly increasing positive grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionSpectrum {
    omega: Vec<f64>,
    im_eps: Vec<f64>,
}

impl AbsorptionSpectrum {
    pub fn new(omega: Vec<f64>, im_eps: Vec<f64>) -> Result<Self, MaterialError> {
        if omega.len() != im_eps.len() {
            return Err(MaterialError::LengthMismatch { grid: omega.len(), values: im_eps.len() });
        }
        if omega.len() < 2 {
            return Err(MaterialError::TooFewNodes(omega.len()));
        }
        for (i, (&w, &y)) in omega.iter().zip(&im_eps).enumerate() {
            if !w.is_finite() || !y.is_finite() {
                return Err(MaterialError::NonFinite(i));
            }
            if w <= 0.0 || (i > 0 && w <= omega[i - 1]) {
                return Err(MaterialError::NonIncreasingGrid(i));
            }
            if y < 0.0 {
                return Err(MaterialError::NegativeAbsorption { index: i, value: y });
            }
        }
        Ok(AbsorptionSpectrum { omega, im_eps })
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn im_eps(&self) -> &[f64] {
        &self.im_eps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KramersKronigOptions {
    /// Relative tolerance of each sub-integral.
    pub rel_tol: f64,
    /// Density of the output imaginary-axis grid.
    pub points_per_decade: usize,
    /// The output grid spans `[w_min / 10^d, w_max * 10^d]` with `d` this value.
    pub extend_decades: f64,
}

impl Default for KramersKronigOptions {
    fn default() -> Self {
        KramersKronigOptions { rel_tol: 1e-9, points_per_decade: 12, extend_decades: 2.0 }
    }
}

fn power_exponent(x0: f64, y0: f64, x1: f64, y1: f64) -> Option<f64> {
    (y0 > 0.0 && y1 > 0.0).then(|| (y1 / y0).ln() / (x1 / x0).ln())
}

/// The dispersion integral `int_0^inf w Im eps(w) / (w^2 + xi^2) dw` for one `xi`.
fn dispersion_integral(spec_data: &AbsorptionSpectrum, xi: f64, qspec: &QuadratureSpec) -> Result<f64, MaterialError> {
    let w = &spec_data.omega;
    let y = &spec_data.im_eps;
    let n = w.len();
    let xi2 = xi * xi;
    let mut total = 0.0;

    // Low tail on (0, w0): y0 (w/w0)^alpha, with w = w0 e^{-s}.
    if y[0] > 0.0 {
        let alpha = power_exponent(w[0], y[0], w[1], y[1]).unwrap_or(1.0).clamp(-1.9, 8.0);
        let a2 = xi2 / (w[0] * w[0]);
        let s = qspec.with_map_scale(1.0 / (alpha + 2.0));
        let r = integrate_semi_infinite(|s| (-(alpha + 2.0) * s).exp() / ((-2.0 * s).exp() + a2), &s)?;
        total += y[0] * r.value;
    }

    // Tabulated range in the variable ln w.
    for i in 0..n - 1 {
        let (w0, w1, y0, y1) = (w[i], w[i + 1], y[i], y[i + 1]);
        if y0 == 0.0 && y1 == 0.0 {
            continue;
        }
        let (l0, l1) = (w0.ln(), w1.ln());
        let log_interp = y0 > 0.0 && y1 > 0.0;
        let slope = if log_interp { (y1 / y0).ln() / (l1 - l0) } else { (y1 - y0) / (l1 - l0) };
        let r = integrate_interval(
            |l| {
                let om = l.exp();
                let im = if log_interp { y0 * (slope * (l - l0)).exp() } else { y0 + slope * (l - l0) };
                om * om * im / (om * om + xi2)
            },
            l0,
            l1,
            qspec,
        )?;
        total += r.value;
    }

    // High tail on (w_n, inf): y_n (w/w_n)^beta, with w = w_n e^{s}.
    if y[n - 1] > 0.0 {
        let beta = power_exponent(w[n - 2], y[n - 2], w[n - 1], y[n - 1]).unwrap_or(-3.0).min(-0.5);
        let a2 = xi2 / (w[n - 1] * w[n - 1]);
        let s = qspec.with_map_scale(1.0 / -beta);
        let r = integrate_semi_infinite(|s| ((beta + 2.0) * s).exp() / ((2.0 * s).exp() + a2), &s)?;
        total += y[n - 1] * r.value;
    }
    Ok(total)
}

/// Transform real-axis absorption into an imaginary-axis table. The output
/// grid is log-spaced over the input range extended by
/// `options.extend_decades` on both sides.
pub fn kramers_kronig_to_imaginary_axis(
    spectrum: &AbsorptionSpectrum,
    options: &KramersKronigOptions,
) -> Result<TabulatedDielectric, MaterialError> {
    let qspec = QuadratureSpec::with_rel_tol(options.rel_tol)?;
    let n = spectrum.omega.len();
    let lo = spectrum.omega[0].log10() - options.extend_decades;
    let hi = spectrum.omega[n - 1].log10() + options.extend_decades;
    let count = ((hi - lo) * options.points_per_decade as f64).ceil() as usize + 1;
    let grid: Vec<f64> = (0..count)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (count - 1) as f64))
        .collect();

    let values = grid
        .par_iter()
        .map(|&xi| dispersion_integral(spectrum, xi, &qspec).map(|v| 1.0 + 2.0 / std::f64::consts::PI * v))
        .collect::<Result<Vec<f64>, _>>()?;

    TabulatedDielectric::new(grid, values)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Single Lorentz oscillator `eps(w) = 1 + wp^2 / (w0^2 - w^2 - i g w)`.
    /// On the imaginary axis `eps(i xi) = 1 + wp^2 / (w0^2 + xi^2 + g xi)`.
    #[derive(Clone, Copy)]
    pub(crate) struct Lorentz {
        pub wp: f64,
        pub w0: f64,
        pub gamma: f64,
    }

    impl Lorentz {
        pub(crate) fn im_eps(&self, w: f64) -> f64 {
            let d = self.w0 * self.w0 - w * w;
            self.wp * self.wp * self.gamma * w / (d * d + self.gamma * self.gamma * w * w)
        }

        pub(crate) fn re_eps(&self, w: f64) -> f64 {
            let d = self.w0 * self.w0 - w * w;
            1.0 + self.wp * self.wp * d / (d * d + self.gamma * self.gamma * w * w)
        }

        pub(crate) fn eps_imag_axis(&self, xi: f64) -> f64 {
            1.0 + self.wp * self.wp / (self.w0 * self.w0 + xi * xi + self.gamma * xi)
        }
    }

    pub(crate) const TEST_MEDIUM: Lorentz = Lorentz { wp: 1.2e16, w0: 4e15, gamma: 6e14 };

    pub(crate) fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
    }

    fn spectrum(l: &Lorentz, n: usize) -> AbsorptionSpectrum {
        let omega = log_grid(l.w0 * 1e-3, l.w0 * 1e3, n);
        let im = omega.iter().map(|&w| l.im_eps(w)).collect();
        AbsorptionSpectrum::new(omega, im).unwrap()
    }

    #[test]
    fn lorentz_matches_closed_form() {
        let l = TEST_MEDIUM;
        let table = kramers_kronig_to_imaginary_axis(&spectrum(&l, 600), &KramersKronigOptions::default()).unwrap();
        for xi in log_grid(l.w0 * 1e-2, l.w0 * 1e2, 25) {
            let got = table.epsilon(xi).unwrap();
            let exact = l.eps_imag_axis(xi);
            assert!((got / exact - 1.0).abs() < 1e-2, "xi = {xi:e}: {got} vs {exact}");
        }
    }

    #[test]
    fn zero_absorption_is_vacuum() {
        let omega = log_grid(1e13, 1e17, 50);
        let s = AbsorptionSpectrum::new(omega, vec![0.0; 50]).unwrap();
        let table = kramers_kronig_to_imaginary_axis(&s, &KramersKronigOptions::default()).unwrap();
        assert!(table.values().iter().all(|&v| v == 1.0));
        assert_eq!(table.epsilon(3.3e15).unwrap(), 1.0);
    }

    #[test]
    fn insensitive_to_far_ultraviolet_absorption() {
        // Working range up to xi_max; absorption is altered only above 100 xi_max.
        let l = TEST_MEDIUM;
        let xi_max = 10.0 * l.w0;
        let extra = Lorentz { wp: l.wp, w0: 1e3 * xi_max, gamma: 3e2 * xi_max };
        let omega = log_grid(l.w0 * 1e-3, extra.w0 * 1e2, 1200);
        let a: Vec<f64> = omega.iter().map(|&w| l.im_eps(w)).collect();
        let b: Vec<f64> = omega
            .iter()
            .map(|&w| if w > 100.0 * xi_max { l.im_eps(w) + extra.im_eps(w) } else { l.im_eps(w) })
            .collect();
        let opts = KramersKronigOptions::default();
        let ta = kramers_kronig_to_imaginary_axis(&AbsorptionSpectrum::new(omega.clone(), a).unwrap(), &opts).unwrap();
        let tb = kramers_kronig_to_imaginary_axis(&AbsorptionSpectrum::new(omega, b).unwrap(), &opts).unwrap();
        for xi in log_grid(l.w0 * 1e-2, xi_max, 30) {
            let (ea, eb) = (ta.epsilon(xi).unwrap(), tb.epsilon(xi).unwrap());
            assert!((eb / ea - 1.0).abs() < 1e-3, "xi = {xi:e}: {ea} vs {eb}");
        }
    }

    #[test]
    fn converged_in_grid_refinement() {
        // Documented resolution: 100 points per decade of the real-axis grid.
        let l = TEST_MEDIUM;
        let opts = KramersKronigOptions::default();
        let coarse = kramers_kronig_to_imaginary_axis(&spectrum(&l, 600), &opts).unwrap();
        let fine = kramers_kronig_to_imaginary_axis(&spectrum(&l, 2400), &opts).unwrap();
        for xi in log_grid(l.w0 * 1e-2, l.w0 * 1e2, 25) {
            let (c, f) = (coarse.epsilon(xi).unwrap(), fine.epsilon(xi).unwrap());
            assert!((c / f - 1.0).abs() < 5e-3, "xi = {xi:e}: {c} vs {f}");
        }
    }

    #[test]
    fn rejects_negative_absorption() {
        let err = AbsorptionSpectrum::new(vec![1.0, 2.0], vec![0.1, -0.2]).unwrap_err();
        assert_eq!(err, MaterialError::NegativeAbsorption { index: 1, value: -0.2 });
        assert!(AbsorptionSpectrum::new(vec![], vec![]).is_err());
        assert_eq!(
            AbsorptionSpectrum::new(vec![2.0, 1.0], vec![0.1, 0.2]).unwrap_err(),
            MaterialError::NonIncreasingGrid(1)
        );
    }
}
