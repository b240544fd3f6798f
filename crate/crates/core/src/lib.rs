//! Casimir interaction between plane and corrugated mirrors: specular
//! scattering-formula energies and forces, dispersive material models, and
//! the first-order lateral-force response kernel for corrugated plates.

pub mod corrugation;
pub mod lifshitz;
pub mod materials;
pub mod model;
pub mod quadrature;
pub mod reflection;

pub use corrugation::{
    CorrugationError, CorrugationSpec, FirstOrderReflection, KernelResult, OperatorKind, RayleighFirstOrder, SpecularLimit,
};
pub use lifshitz::{casimir_ideal, EnergyResult, EtaPoint, ForceResult, IdealCasimir, Lifshitz, LifshitzError};
pub use materials::{MaterialError, MaterialModel, Permittivity, PlasmaModel, StaticResponse, TabulatedDielectric};
pub use model::{Geometry, MirrorPair, ModelError, PhysicalConstants, Polarization, SpectralPoint, CODATA};
pub use quadrature::{IntegralResult, QuadratureError, QuadratureSpec};
pub use reflection::{ReflectionAmplitudes, ReflectionError};
