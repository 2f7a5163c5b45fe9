//! Directed preferential attachment and its limiting joint degree law.
//!
//! The crate grows the three-rule directed random graph, iterates the exact
//! recursion for the limiting joint in/out-degree probabilities, evaluates
//! the closed-form generating function and the heavy-tail limit densities,
//! draws exact samples of the limit law through its Pareto-mixed negative
//! binomial representation, and provides the histogram/KS machinery that
//! cross-validates all of those routes against each other.
//!
//! The numeric core is generic over the scalar type through [`Real`]
//! (implemented for `f32` and `f64`); the RNG-driven components (graph
//! growth, limit sampling) are fixed to `f64`, which is the scalar all
//! reproducibility and accuracy contracts are stated for. Concrete `f64`
//! aliases for the main types live at the crate root.

pub mod densities;
pub mod estimators;
pub mod genfunc;
pub mod graph;
pub mod params;
pub mod quad;
pub mod recursion;
pub mod rng;
pub mod sampler;
pub mod scalar;
pub mod special;

pub use params::{DerivedConstants, ModelParams, ParamError, TailWarning};
pub use scalar::Real;

/// Model parameters over `f64`.
pub type Params64 = ModelParams<f64>;
/// Derived constants over `f64`.
pub type Derived64 = DerivedConstants<f64>;
/// Dense recursion grid over `f64`.
pub type Grid64 = recursion::DegreeGrid<f64>;
/// Sampled density curve over `f64`.
pub type Curve64 = densities::DensityCurve<f64>;
/// Conditional histogram over `f64`.
pub type Histogram64 = estimators::ConditionalHistogram<f64>;
