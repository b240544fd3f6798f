//! Adaptive Gauss-Kronrod integration on finite and semi-infinite ranges.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{IntegralResult, QuadratureError, QuadratureSpec, SemiInfiniteMap};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    carried: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    // Largest error first; ties broken by position so the pop order is total.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// 21-point Kronrod rule with the embedded 10-point Gauss error estimate,
/// rescaled the way QUADPACK does it.
/// The second component of the sample is carried along with the Kronrod
/// weights only; it does not drive the error estimate.
fn kronrod21<E, F>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64, f64), E>
where
    F: FnMut(f64) -> Result<(f64, f64), E>,
    E: From<QuadratureError>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let mut sample = |x: f64| -> Result<(f64, f64), E> {
        let (y, w) = f(x)?;
        if y.is_finite() && w.is_finite() {
            Ok((y, w))
        } else {
            Err(QuadratureError::NonFiniteSample { x }.into())
        }
    };

    let (fc, wc) = sample(center)?;
    let mut res_k = WGK[10] * fc;
    let mut carried = WGK[10] * wc;
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    for j in 0..10 {
        let dx = half * XGK[j];
        let (f1, w1) = sample(center - dx)?;
        let (f2, w2) = sample(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        carried += WGK[j] * (w1 + w2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();

    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((value, err, carried * half))
}

pub(crate) const KRONROD_POINTS: usize = 21;

/// Result of an integral that carries a second, passive integrand along
/// (typically the error estimates of nested inner integrals).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarriedIntegral {
    pub result: IntegralResult,
    /// Integral of the passive component with the final panel set.
    pub carried: f64,
}

/// Globally adaptive bisection on `[a, b]` for `f(x) = (value, passive)`.
/// Refinement is driven by the first component only.
pub fn try_integrate_interval_carrying<E, F>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<CarriedIntegral, E>
where
    F: FnMut(f64) -> Result<(f64, f64), E>,
    E: From<QuadratureError>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(QuadratureError::InvalidInterval { a, b }.into());
    }
    if a == b {
        let result = IntegralResult { value: 0.0, error_estimate: 0.0, evaluations: 0, converged: true };
        return Ok(CarriedIntegral { result, carried: 0.0 });
    }

    let (value, error, carried) = kronrod21(&mut f, a, b)?;
    let mut evaluations = KRONROD_POINTS;
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error, carried });
    let mut total = value;
    let mut total_err = error;
    let mut panels = 1;

    let target = |v: f64| spec.abs_tol.max(spec.rel_tol * v.abs());

    while total_err > target(total) && panels < spec.max_subdivisions {
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel width at machine resolution; nothing left to split.
            heap.push(worst);
            break;
        }
        let (v1, e1, c1) = kronrod21(&mut f, worst.a, mid)?;
        let (v2, e2, c2) = kronrod21(&mut f, mid, worst.b)?;
        evaluations += 2 * KRONROD_POINTS;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1, carried: c1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2, carried: c2 });
        panels += 1;
    }

    // Re-sum in a fixed order so the result does not carry the running
    // updates' rounding history.
    let mut done: Vec<Panel> = heap.into_vec();
    done.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value: f64 = done.iter().map(|p| p.value).sum();
    let error_estimate: f64 = done.iter().map(|p| p.error).sum();
    let carried: f64 = done.iter().map(|p| p.carried).sum();

    Ok(CarriedIntegral {
        result: IntegralResult { value, error_estimate, evaluations, converged: error_estimate <= target(value) },
        carried,
    })
}

/// Globally adaptive bisection on `[a, b]`.
pub fn try_integrate_interval<E, F>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralResult, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<QuadratureError>,
{
    Ok(try_integrate_interval_carrying(|x| -> Result<(f64, f64), E> { Ok((f(x)?, 0.0)) }, a, b, spec)?.result)
}

/// Integrate `f` over `[a, b]`.
pub fn integrate_interval<F>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralResult, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_interval(|x| Ok::<_, QuadratureError>(f(x)), a, b, spec)
}

/// [`try_integrate_interval_carrying`] on `[0, inf)` through the map of
/// `spec.mapping`.
pub fn try_integrate_semi_infinite_carrying<E, F>(mut f: F, spec: &QuadratureSpec) -> Result<CarriedIntegral, E>
where
    F: FnMut(f64) -> Result<(f64, f64), E>,
    E: From<QuadratureError>,
{
    match spec.mapping {
        SemiInfiniteMap::Log { scale } => {
            // x = -scale ln u, dx = scale du / u, u in (0, 1].
            let mapped = |u: f64| -> Result<(f64, f64), E> {
                if u <= 0.0 {
                    return Ok((0.0, 0.0));
                }
                let x = -scale * u.ln();
                let (y, w) = f(x)?;
                let jac = scale / u;
                Ok((if y == 0.0 { 0.0 } else { y * jac }, if w == 0.0 { 0.0 } else { w * jac }))
            };
            try_integrate_interval_carrying(mapped, 0.0, 1.0, spec)
        }
    }
}

/// Fallible form of [`integrate_semi_infinite`]; the integrand may abort
/// the integration with its own error type.
pub fn try_integrate_semi_infinite<E, F>(mut f: F, spec: &QuadratureSpec) -> Result<IntegralResult, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<QuadratureError>,
{
    Ok(try_integrate_semi_infinite_carrying(|x| -> Result<(f64, f64), E> { Ok((f(x)?, 0.0)) }, spec)?.result)
}

/// Integrate `f` over `[0, inf)` for integrands that decay at least
/// exponentially. The range is mapped onto `(0, 1]` and bisected adaptively.
pub fn integrate_semi_infinite<F>(mut f: F, spec: &QuadratureSpec) -> Result<IntegralResult, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_semi_infinite(|x| Ok::<_, QuadratureError>(f(x)), spec)
}
