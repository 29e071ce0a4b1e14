//! Simulation library for interpolated bilinear Gaussian comparison
//! functionals.
//!
//! The object of study is a two-set free-energy-style functional: an inner
//! sum of exponentials of a bilinear Gaussian field over one index set,
//! raised to a signed power and summed over the other, evaluated along an
//! interpolation path `t` between a fully coupled field (a Gaussian matrix
//! plus a shared scalar) and a decoupled one (two independent Gaussian
//! vectors). The library provides
//!
//! - per-draw log-domain evaluation of the field and partition quantities
//!   ([`kernel`]),
//! - both derivative estimators (standard interpolation and closed form),
//!   their lifted power-functional counterparts, the large-beta limit
//!   functionals of Slepian/Gordon type, and the adjusted-value transform
//!   ([`estimators`]),
//! - seeded, reproducible Monte Carlo with common random numbers across
//!   the whole t-grid ([`montecarlo`]),
//! - curve reconstruction by integration plus comparison-principle
//!   verdicts ([`curves`]),
//! - a Gauss-Hermite tensor oracle for exact expectations on tiny
//!   instances ([`quadrature`]),
//! - the six bundled benchmark tables ([`tables`]), CSV emission
//!   ([`report`]) and a property-check suite ([`checks`]).

pub mod checks;
pub mod curves;
pub mod error;
pub mod estimators;
pub mod kernel;
pub mod mat;
pub mod model;
pub mod montecarlo;
pub mod quadrature;
pub mod report;
pub mod tables;

pub use error::{Error, Result};
pub use estimators::Functional;
pub use model::{
    builtin_sets, load_vector_set, ComparisonInstance, EstimatorResult, GaussianDraw, SetFormat,
    VectorSet,
};
pub use montecarlo::{estimate, estimate_curve, CurveResult, SamplerConfig};
