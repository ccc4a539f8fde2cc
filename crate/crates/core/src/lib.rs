//! Numerical laboratory for degenerate complex Monge-Ampere equations
//! (omega + dd^c phi)^n = e^(t phi) f omega^n on the flat complex torus
//! C^n / (Z^n + i Z^n).
//!
//! The crate is organized around five pieces:
//! - [`grid`] / [`field`]: periodic grid geometry, the discrete complex
//!   Hessian and Monge-Ampere measure, norms and quadrature;
//! - [`density`]: algebraic right-hand sides with marked zeros and poles,
//!   plus empirical integrability tests for klt-type exponents;
//! - [`capacity`]: a dictionary lower bound for the Monge-Ampere capacity,
//!   the domination condition checker and the sublevel decay iteration;
//! - [`solver`]: damped Newton continuation for the fixed and exponential
//!   right-hand-side equations, with a fixed-point outer mode for
//!   cross-validation, plus stability/Hoelder/uniqueness experiments.

pub mod capacity;
pub mod density;
pub mod field;
pub mod grid;
pub mod linalg;
pub mod solver;
pub(crate) mod util;

pub use density::{algebraic_density, klt_check, AlgebraicDensitySpec, Density, KltSpec};
pub use field::{
    complex_hessian, ma_measure, norm, prolong, translate, NormKind, PeriodicField, ReferenceForm,
};
pub use grid::GridSpec;
