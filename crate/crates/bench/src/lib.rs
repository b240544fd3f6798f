//! Fixtures shared by the benchmarks.

use casimir_core::{Geometry, MaterialModel, MirrorPair, QuadratureSpec};

pub const AREA: f64 = 1e-4;

pub fn gold(separation: f64, temperature: f64) -> MirrorPair {
    MirrorPair::symmetric(MaterialModel::gold_plasma(), Geometry::new(separation, AREA, temperature).expect("valid geometry"))
}

pub fn perfect(separation: f64) -> MirrorPair {
    MirrorPair::symmetric(MaterialModel::PerfectReflector, Geometry::new(separation, AREA, 0.0).expect("valid geometry"))
}

pub fn spec(rel_tol: f64) -> QuadratureSpec {
    QuadratureSpec::with_rel_tol(rel_tol).expect("valid tolerance")
}
