//! Brute-force validators that share no code paths with the closed forms they check.

mod diff;
mod quadrature;
pub mod stats;
mod voronoi;

pub use diff::central_diff;
pub use quadrature::{quadrature_score, QuadratureEstimate, QuadratureGrid, MAX_QUADRATURE_NODES, MIN_NODES_PER_AXIS};
pub use voronoi::voronoi_brute;
