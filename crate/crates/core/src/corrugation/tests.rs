use super::*;
use crate::materials::MaterialModel;
use crate::model::Geometry;
use std::f64::consts::PI;

const AREA: f64 = 1e-8;

fn pair(m: MaterialModel, l: f64) -> MirrorPair {
    MirrorPair::symmetric(m, Geometry::new(l, AREA, 0.0).unwrap())
}

fn gold(l: f64) -> MirrorPair {
    pair(MaterialModel::gold_plasma(), l)
}

fn spec(rel_tol: f64) -> QuadratureSpec {
    QuadratureSpec::with_rel_tol(rel_tol).unwrap()
}

fn kernel(p: &MirrorPair, kappa_l: f64, kind: OperatorKind, rel_tol: f64) -> KernelResult {
    let k = kappa_l / p.geometry.separation();
    let op = kind.build(k).unwrap();
    response_kernel(p, k, op.as_ref(), op.as_ref(), &spec(rel_tol)).unwrap()
}

#[test]
fn spec_validation() {
    assert!(CorrugationSpec::new(-1e-9, 0.0, 1e6, 0.0).is_err());
    assert!(CorrugationSpec::new(1e-9, 1e-9, 0.0, 0.0).is_err());
    assert!(CorrugationSpec::new(1e-9, 1e-9, 1e6, f64::NAN).is_err());
    let c = CorrugationSpec::new(1e-9, 2e-9, 2.0 * PI / 1e-6, 0.0).unwrap();
    assert!((c.wavelength() - 1e-6).abs() < 1e-21);
}

#[test]
fn perturbative_flag() {
    let p = gold(200e-9);
    // min(lambda_C, lambda_P, L) = lambda_P = 137 nm.
    let ok = CorrugationSpec::new(13e-9, 5e-9, 2.0 * PI / 1e-6, 0.0).unwrap();
    let bad = CorrugationSpec::new(14e-9, 5e-9, 2.0 * PI / 1e-6, 0.0).unwrap();
    assert!(ok.is_perturbative(&p));
    assert!(!bad.is_perturbative(&p));
    let short = CorrugationSpec::new(13e-9, 5e-9, 2.0 * PI / 100e-9, 0.0).unwrap();
    assert!(!short.is_perturbative(&p));
}

#[test]
fn pfa_perfect_mirrors_match_closed_form_curvature() {
    let l = 1e-6;
    let p = pair(MaterialModel::PerfectReflector, l);
    let corr = CorrugationSpec::new(10e-9, 7e-9, 2.0 * PI / 2e-6, 0.3e-6).unwrap();
    // E = -hbar c pi^2 A / (720 L^3)  =>  E'' = -hbar c pi^2 A / (60 L^5)
    let e2 = -CODATA.hbar_c() * PI * PI * AREA / (60.0 * l.powi(5));
    let k = corr.kappa_c;
    let expected = 0.5 * e2 * (0.5 * (corr.a1 * corr.a1 + corr.a2 * corr.a2) + corr.a1 * corr.a2 * (k * corr.b).cos());
    let got = pfa_energy_correction(&p, &corr, &spec(1e-8)).unwrap();
    assert!(got.perturbative);
    assert!((got.value / expected - 1.0).abs() < 1e-6, "{} vs {}", got.value, expected);
    let f = pfa_lateral_force(&p, &corr, &spec(1e-8)).unwrap();
    let f_expected = 0.5 * e2 * k * corr.a1 * corr.a2 * (k * corr.b).sin();
    assert!((f.value / f_expected - 1.0).abs() < 1e-6);
}

#[test]
fn pfa_structure() {
    let p = gold(300e-9);
    let curv = energy_curvature(&p, &spec(1e-8)).unwrap();
    assert!(curv.value < 0.0 && !curv.noise_limited);
    let lc = 1.5e-6;
    let k = 2.0 * PI / lc;
    let a = 5e-9;

    // Quarter period: the cross term vanishes.
    let quarter = CorrugationSpec::new(a, a, k, lc / 4.0).unwrap();
    let e = pfa_energy_from_curvature(&curv, AREA, &quarter, true);
    assert!((e.value / (0.5 * curv.value * a * a) - 1.0).abs() < 1e-12);

    // Single corrugation: no dependence on the mismatch.
    let single = CorrugationSpec::new(a, 0.0, k, 0.0).unwrap();
    let e0 = pfa_energy_from_curvature(&curv, AREA, &single, true).value;
    for b in [0.1e-6, 0.4e-6, 1.1e-6] {
        let eb = pfa_energy_from_curvature(&curv, AREA, &single.with_mismatch(b).unwrap(), true).value;
        assert_eq!(eb, e0);
    }

    // Force zeros and extremum.
    let g0 = curv.value / AREA;
    let f = |b: f64| {
        let c = CorrugationSpec::new(a, 2.0 * a, k, b).unwrap();
        let (p1, p2) = c.profiles();
        cross_lateral_force(g0, AREA, k, p1, p2)
    };
    assert_eq!(f(0.0), 0.0);
    let fmax = 0.5 * curv.value * k * a * 2.0 * a;
    assert!((f(lc / 4.0) / fmax - 1.0).abs() < 1e-14);
    for i in 0..50 {
        assert!(f(i as f64 * lc / 50.0).abs() <= fmax.abs() * (1.0 + 1e-14));
    }
}

#[test]
fn pfa_force_is_minus_energy_slope() {
    let p = gold(250e-9);
    let curv = energy_curvature(&p, &spec(1e-8)).unwrap();
    let k = 2.0 * PI / 0.8e-6;
    let corr = CorrugationSpec::new(4e-9, 6e-9, k, 0.0).unwrap();
    let energy = |b: f64| pfa_energy_from_curvature(&curv, AREA, &corr.with_mismatch(b).unwrap(), true).value;
    let mut rng_b = 0.0137e-6;
    for _ in 0..20 {
        rng_b = (rng_b * 7.31 + 0.113e-6) % 0.8e-6;
        let h = 1e-4 / k;
        let fd = -(energy(rng_b - 2.0 * h) - 8.0 * energy(rng_b - h) + 8.0 * energy(rng_b + h) - energy(rng_b + 2.0 * h))
            / (12.0 * h);
        let (p1, p2) = corr.with_mismatch(rng_b).unwrap().profiles();
        let exact = cross_lateral_force(curv.value / AREA, AREA, k, p1, p2);
        let scale = 0.5 * curv.value.abs() * k * corr.a1 * corr.a2;
        assert!((fd - exact).abs() < 1e-6 * scale, "b = {rng_b}: {fd} vs {exact}");
    }
}

#[test]
fn specular_limit_operator_gives_curvature() {
    let p = gold(200e-9);
    let r = kernel(&p, 1e-3, OperatorKind::SpecularLimit, 1e-8);
    assert!(r.numerics.converged);
    // The operator ignores k'' - k; what remains is the O((kappa_C L)^2)
    // offset of the propagators, ~1e-6.
    assert!((r.rho_c - 1.0).abs() < 1e-5 + r.rho_c_error, "{}", r.rho_c);
}

#[test]
fn rayleigh_kernel_reaches_proximity_limit() {
    for m in [MaterialModel::PerfectReflector, MaterialModel::gold_plasma()] {
        let r = kernel(&pair(m, 200e-9), 1e-3, OperatorKind::Rayleigh, 1e-6);
        assert!((r.rho_c - 1.0).abs() < 1e-4, "{}", r.rho_c);
        assert!(r.g_c < 0.0 && r.g_0 < 0.0);
    }
}

#[test]
fn vanishing_plasma_wavelength_recovers_perfect_mirrors() {
    let l = 200e-9;
    let rho = |m: MaterialModel| kernel(&pair(m, l), 1.0, OperatorKind::Rayleigh, 1e-6).rho_c;
    let perfect = rho(MaterialModel::PerfectReflector);
    let p100 = rho(MaterialModel::plasma_wavelength(l / 100.0).unwrap());
    let p1000 = rho(MaterialModel::plasma_wavelength(l / 1000.0).unwrap());
    assert!((p1000 - perfect).abs() < 1e-4);
    assert!((p100 - p1000).abs() < 2e-3);
    assert!((p1000 - perfect).abs() < (p100 - perfect).abs());
}

#[test]
fn beyond_pfa_force_is_rho_times_pfa() {
    let p = gold(200e-9);
    let k = 2.0 / 200e-9;
    let op = RayleighFirstOrder::new(k).unwrap();
    let corr = CorrugationSpec::new(3e-9, 4e-9, k, 0.17e-6).unwrap();
    let f = lateral_force_beyond_pfa(&p, &corr, &op, &op, &spec(1e-5)).unwrap();
    let pfa = f.pfa(AREA, &corr);
    assert!((f.force.value / pfa.value - f.kernel.rho_c).abs() < 1e-14);
    assert!(f.kernel.rho_c < 1.0 && f.kernel.rho_c > 0.0);
    // Half a period: sin(pi) = 0 up to rounding of the phase.
    let half = lateral_force_from_kernel(&f.kernel, AREA, &corr.with_mismatch(corr.wavelength() / 2.0).unwrap(), true);
    assert!(half.force.value.abs() < 1e-14 * f.force.value.abs().max(pfa.value.abs()) * 10.0);
}

#[test]
fn kernel_rejects_bad_requests() {
    let p = gold(200e-9);
    let k = 1e6;
    let op = RayleighFirstOrder::new(k).unwrap();
    let other = RayleighFirstOrder::new(2e6).unwrap();
    assert!(matches!(
        response_kernel(&p, k, &op, &other, &spec(1e-4)),
        Err(CorrugationError::OperatorMismatch { .. })
    ));
    let warm = p.with_geometry(p.geometry.with_temperature(300.0).unwrap());
    assert!(matches!(response_kernel(&warm, k, &op, &op, &spec(1e-4)), Err(CorrugationError::Temperature(_))));

    /// Couples k to k + kappa_C y instead of x.
    struct Wrong(f64);
    impl FirstOrderReflection for Wrong {
        fn kappa_c(&self) -> f64 {
            self.0
        }
        fn block(&self, eps: crate::materials::Permittivity, q: f64, k_in: [f64; 2], _k_out: [f64; 2]) -> Result<Block, CorrugationError> {
            RayleighFirstOrder::new(self.0)?.block(eps, q, k_in, [k_in[0], k_in[1] + self.0])
        }
    }
    assert!(matches!(
        response_kernel(&p, k, &Wrong(k), &op, &spec(1e-4)),
        Err(CorrugationError::SelectionRule { .. })
    ));
}

#[test]
fn rho_curve_grid_rules() {
    let p = gold(200e-9);
    let ops = (OperatorKind::Rayleigh, OperatorKind::Rayleigh);
    let l = 200e-9;
    assert!(matches!(rho_curve(&p, &[1e-2 / l, 1.0 / l], ops, &spec(1e-4)), Err(CorrugationError::UnanchoredGrid(_))));
    assert!(matches!(rho_curve(&p, &[1e-3 / l, 1e-3 / l], ops, &spec(1e-4)), Err(CorrugationError::InvalidGrid(1))));
    assert!(matches!(rho_curve(&p, &[], ops, &spec(1e-4)), Err(CorrugationError::InvalidGrid(0))));
}

#[test]
fn rho_curve_shape_and_self_convergence() {
    let l = 200e-9;
    let p = gold(l);
    let grid: Vec<f64> = [1e-3, 0.5, 2.0, 6.0].iter().map(|x| x / l).collect();
    let ops = (OperatorKind::Rayleigh, OperatorKind::Rayleigh);
    let curve = rho_curve(&p, &grid, ops, &spec(1e-5)).unwrap();
    assert!((curve[0].rho_c - 1.0).abs() < 1e-3);
    for w in curve.windows(2) {
        assert!(w[1].rho_c < w[0].rho_c);
    }
    assert!(curve.iter().all(|r| r.rho_c <= 1.0 + 1e-3));

    let loose = rho_curve(&p, &grid, ops, &spec(2e-5)).unwrap();
    for (a, b) in curve.iter().zip(&loose) {
        assert!((a.rho_c - b.rho_c).abs() <= a.rho_c_error + b.rho_c_error, "{} vs {}", a.rho_c, b.rho_c);
    }
}

#[test]
fn cross_energy_depends_only_on_mismatch() {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = -3.7e-2;
    for _ in 0..1000 {
        let k = 10f64.powf(rng.gen_range(5.0..8.0));
        let (a1, a2) = (rng.gen_range(0.0..1e-8), rng.gen_range(0.0..1e-8));
        let (x1, x2, shift) = (rng.gen_range(-1e-6..1e-6), rng.gen_range(-1e-6..1e-6), rng.gen_range(-1e-5..1e-5));
        let e = cross_energy(g, AREA, k, Profile { amplitude: a1, offset: x1 }, Profile { amplitude: a2, offset: x2 });
        let es = cross_energy(
            g,
            AREA,
            k,
            Profile { amplitude: a1, offset: x1 + shift },
            Profile { amplitude: a2, offset: x2 + shift },
        );
        let scale = (0.5 * AREA * g * a1 * a2).abs();
        // Phases k x up to ~1e3 rad: rounding of the phase is ~1e-13.
        assert!((e - es).abs() <= 1e-10 * scale + f64::MIN_POSITIVE);
        let b = x2 - x1;
        assert!((e - 0.5 * AREA * g * a1 * a2 * (k * b).cos()).abs() <= 1e-10 * scale + f64::MIN_POSITIVE);
    }
}
