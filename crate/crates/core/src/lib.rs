//! Conformal minimal immersions of circular planar domains with a prescribed
//! Gauss map and prescribed flux.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: circular domains, homology loops, contour and path quadrature, sampling grids.
//! - [`holomorphic`]: polynomials, rational maps, exp-form and spray multipliers, winding numbers.
//! - [`nullcurve`]: null data, the Weierstrass lift, Gauss maps and the ℤ₂ component class.
//! - [`periodsolver`]: period maps, period-dominating sprays and the multiplier solvers.
//! - [`surface`]: integration to immersions, verification residuals, deformations, meshes.
//!
//! All numerics are in `f64` / [`C64`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod expr;
pub mod geometry;
pub mod holomorphic;
pub mod linalg;
pub mod nullcurve;
pub mod periodsolver;
pub mod surface;

pub use num_complex::Complex64 as C64;

pub use geometry::{CircularDomain, DomainGrid, Hole, HomologyLoop, PathInDomain, QuadratureSpec};
pub use holomorphic::{
    ExpMultiplier, Holomorphic, LaurentExpansion, Polynomial, RationalMap, SprayMultiplier,
};
pub use nullcurve::{NullData, NullField, WeierstrassPair};
pub use periodsolver::{PeriodTarget, PeriodVector, SolveOptions, SolveReport, TargetMode};
pub use surface::{ImmersionField, StabilityReport};

/// The imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);

/// Any error produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] geometry::GeometryError),
    #[error(transparent)]
    Holo(#[from] holomorphic::HoloError),
    #[error(transparent)]
    Null(#[from] nullcurve::NullError),
    #[error(transparent)]
    Solve(#[from] periodsolver::SolveError),
    #[error(transparent)]
    Surface(#[from] surface::SurfaceError),
    #[error(transparent)]
    Expr(#[from] expr::ExprError),
}
