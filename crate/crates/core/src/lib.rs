//! Numerical toolkit for Legendre distributions on manifolds with boundary
//! associated with a pair of intersecting Legendre submanifolds.
//!
//! Everything is generic over [`scalar::Scalar`] (`f32`, `f64`); the `…64`
//! aliases below fix `f64`.

pub mod amplitude;
pub mod blowup;
pub mod chebyshev;
pub mod contact;
pub mod corner;
pub mod decompose;
pub mod error;
pub mod linalg;
pub mod oscillatory;
pub mod phase;
pub mod poly;
pub mod quad;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Cx, Scalar};

pub type Cx64 = Cx<f64>;
pub type Poly64 = poly::Polynomial<f64>;
pub type CxPoly64 = poly::Polynomial<Cx64>;

pub type ContactPoint64 = contact::ContactPoint<f64>;
pub type TangentVector64 = contact::TangentVector<f64>;
pub type TangentSubspace64 = contact::TangentSubspace<f64>;

pub type PhaseFunction64 = phase::PhaseFunction<f64>;
pub type IntersectingPhase64 = phase::IntersectingPhase<f64>;
pub type ModelPhaseData64 = phase::ModelPhaseData<f64>;

pub type XPoint64 = blowup::XPoint<f64>;
pub type ChartPoint64 = blowup::ChartPoint<f64>;

pub type SchwartzAmplitude64 = amplitude::SchwartzAmplitude<f64>;
pub type DecayReport64 = amplitude::DecayReport<f64>;

pub type Type1_64 = oscillatory::Type1<f64>;
pub type Type2_64 = oscillatory::Type2<f64>;
pub type Intersecting64 = oscillatory::Intersecting<f64>;
pub type Fibred64 = oscillatory::Fibred<f64>;
pub type ModelDistribution64 = oscillatory::ModelDistribution<f64>;
pub type EvalReport64 = oscillatory::EvalReport<f64>;
pub type EvalOptions64 = oscillatory::EvalOptions<f64>;

pub type Decomposition64 = decompose::Decomposition<f64>;
pub type AsymptoticTable64 = corner::AsymptoticTable<f64>;
pub type WitnessReport64 = corner::WitnessReport<f64>;
