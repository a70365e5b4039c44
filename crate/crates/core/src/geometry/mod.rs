//! Circular domains, homology loops, quadrature and sampling grids.

mod domain;
mod grid;
mod quadrature;

pub use domain::{CircularDomain, Hole, HomologyLoop};
pub use grid::{DomainGrid, GridChart};
pub use quadrature::{
    contour_integral, contour_integral_fixed, contour_integral_vec, gauss_legendre, path_integral,
    path_integral_vec, segment_integral_vec, LoopIntegral, PathInDomain, QuadratureSpec,
};

use crate::C64;

#[derive(Debug, Clone, thiserror::Error)]
pub enum GeometryError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid quadrature: {0}")]
    InvalidQuadrature(String),
    #[error("{what} did not converge (last change {change:.3e})")]
    NonConvergent { what: &'static str, change: f64 },
    #[error("path leaves the domain near segment {index} at {point}")]
    PathLeavesDomain { index: usize, point: C64 },
    #[error("boundary offset {offset} too large for boundary gap {gap}")]
    OffsetTooLarge { offset: f64, gap: f64 },
    #[error("grid resolution {0} below the minimum of 4")]
    InvalidResolution(usize),
}
