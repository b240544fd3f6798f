//! Matsubara sums `term(0)/2 + sum_{n>=1} term(n)`.

use super::{try_integrate_semi_infinite, IntegralResult, QuadratureError, QuadratureSpec};

/// Hard cap on the number of explicitly evaluated terms.
pub const MATSUBARA_TERM_BUDGET: usize = 1 << 20;

/// Number of terms summed explicitly before the smooth variant hands the
/// remainder to the Euler-Maclaurin tail.
const DIRECT_TERMS: usize = 48;

/// Running geometric tail bound: once two consecutive ratios
/// `|t_n / t_{n-1}|` are below one, the remainder is bounded by
/// `|t_n| q / (1 - q)` with `q` the larger of the two ratios.
#[derive(Debug, Default)]
struct TailTracker {
    prev: Option<f64>,
    prev_ratio: Option<f64>,
}

impl TailTracker {
    fn push(&mut self, t: f64) -> Option<f64> {
        let t = t.abs();
        let ratio = match self.prev {
            Some(p) if p == 0.0 && t == 0.0 => Some(0.0),
            Some(p) if p > 0.0 => Some(t / p),
            _ => None,
        };
        let bound = match (ratio, self.prev_ratio) {
            (Some(r1), Some(r0)) if r1 < 1.0 && r0 < 1.0 => {
                let q = r1.max(r0);
                Some(t * q / (1.0 - q))
            }
            _ => None,
        };
        self.prev = Some(t);
        self.prev_ratio = ratio;
        bound
    }
}

/// Sum `term(0)/2 + sum_{n>=1} term(n)` for terms decaying geometrically
/// beyond some index. The geometric tail bound is reported in
/// `error_estimate`.
pub fn matsubara_sum<F>(mut term: F, spec: &QuadratureSpec) -> Result<IntegralResult, QuadratureError>
where
    F: FnMut(u64) -> f64,
{
    let mut sum = 0.0;
    let mut tail = TailTracker::default();
    for n in 0..MATSUBARA_TERM_BUDGET {
        let t = term(n as u64);
        if !t.is_finite() {
            return Err(QuadratureError::NonFiniteSample { x: n as f64 });
        }
        sum += if n == 0 { 0.5 * t } else { t };
        if let Some(bound) = tail.push(t) {
            if bound <= spec.abs_tol.max(spec.rel_tol * sum.abs()) {
                return Ok(IntegralResult {
                    value: sum,
                    error_estimate: bound,
                    evaluations: n + 1,
                    converged: true,
                });
            }
        }
    }
    Err(QuadratureError::NoDecay(MATSUBARA_TERM_BUDGET))
}

/// Matsubara sum for a term that is also defined between integer indices.
///
/// The first terms are summed explicitly. When the sequence has not reached
/// its geometric tail after a few dozen terms (a low temperature, where the
/// term varies slowly in `n`), the remainder from index `N` is taken from the
/// Euler-Maclaurin formula
///
/// `sum_{n>=N} f(n) = int_N^inf f + f(N)/2 - f'(N)/12 + f'''(N)/720 - ...`,
///
/// with the derivatives from central differences of unit step. As the
/// temperature goes to zero the result tends to the continuous integral.
pub fn try_matsubara_sum_smooth<E, F>(mut term: F, spec: &QuadratureSpec) -> Result<IntegralResult, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<QuadratureError>,
{
    let mut values = Vec::with_capacity(DIRECT_TERMS + 3);
    let mut sum = 0.0;
    let mut tail = TailTracker::default();
    let mut evaluations = 0;
    for n in 0..DIRECT_TERMS {
        let t = term(n as f64)?;
        evaluations += 1;
        if !t.is_finite() {
            return Err(QuadratureError::NonFiniteSample { x: n as f64 }.into());
        }
        sum += if n == 0 { 0.5 * t } else { t };
        values.push(t);
        if let Some(bound) = tail.push(t) {
            if bound <= spec.abs_tol.max(spec.rel_tol * sum.abs()) {
                return Ok(IntegralResult { value: sum, error_estimate: bound, evaluations, converged: true });
            }
        }
    }

    // Euler-Maclaurin remainder starting at index n0 (already summed up to
    // n0 - 1). Needs f(n0 - 2) .. f(n0 + 2).
    let n0 = DIRECT_TERMS;
    let fm2 = values[n0 - 2];
    let fm1 = values[n0 - 1];
    let f0 = term(n0 as f64)?;
    let fp1 = term(n0 as f64 + 1.0)?;
    let fp2 = term(n0 as f64 + 2.0)?;
    evaluations += 3;

    let d1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / 12.0;
    let d3 = 0.5 * (fp2 - 2.0 * fp1 + 2.0 * fm1 - fm2);

    // Decay length of the remainder, used as the map scale.
    let scale = if f0 != 0.0 && d1 != 0.0 && (d1 / f0) < 0.0 {
        (f0 / d1).abs().clamp(1.0, 1e12)
    } else {
        1.0
    };
    let tail_spec = spec.tightened(10.0).with_map_scale(scale);
    let integral = try_integrate_semi_infinite(|s| term(n0 as f64 + s), &tail_spec)?;
    evaluations += integral.evaluations;

    let remainder = integral.value + 0.5 * f0 - d1 / 12.0 + d3 / 720.0;
    sum += remainder;

    // With f^(5) ~ d3 * (d3 / d1): the next Euler-Maclaurin term is
    // f^(5)/30240 and the stencil error on d1 is f^(5)/30 (entering as /12).
    let d5 = if d1 != 0.0 { (d3 * d3 / d1).abs() } else { d3.abs() };
    let fd_error = d5 / 360.0;
    let em_error = d5 / 30240.0;
    let error_estimate = integral.error_estimate + fd_error + em_error;
    let converged = integral.converged && error_estimate <= spec.abs_tol.max(spec.rel_tol * sum.abs());

    Ok(IntegralResult { value: sum, error_estimate, evaluations, converged })
}
