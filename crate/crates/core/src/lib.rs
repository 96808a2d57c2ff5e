//! Numerical engine for minimal graph surfaces in flat pseudo-Riemannian
//! 3-space and the geometry built on top of them.
//!
//! Given a solution `phi` of the generalized minimal-surface equation
//! (closed-form expression or sampled grid), the crate constructs the induced
//! metric `h`, the conformal metric `g = h/sqrt(rho)` with constant
//! determinant, the harmonic scalar catalog, the Lax pair of the associated
//! sigma model, and the even-dimensional Ricci-flat block metrics
//! `diag(e^{2 Phi} g, eps_1 g, ..., eps_n g)`. Every identity in the chain is
//! exposed as a residual evaluator so it can be verified to quantified
//! tolerances over point clouds or grids.
//!
//! Differentiation is exact where possible: closed-form fields are evaluated
//! with third-order Taylor (jet) arithmetic, gridded fields with high-order
//! centered stencils. Everything downstream consumes jets, never raw
//! expressions.

pub mod builder;
pub mod conformal;
pub mod curvature;
mod error;
pub mod expr;
pub mod grid;
pub mod jet;
pub mod linalg;
pub mod point;
pub mod report;
pub mod sigmalax;
pub mod surfaces;

pub use error::{Error, Result};
pub use expr::ScalarExpr;
pub use grid::GridField;
pub use jet::{Jet1, Jet2, Jet3};
pub use point::{CloudSpec, Domain, Mask, Point2, Rect};
pub use report::{ResidualReport, ResidualStat};
