//! Periodic centroidal Voronoi tessellations on 2D flat tori.
//!
//! The crate provides:
//! - exact periodic Voronoi/Delaunay geometry on square and hexagonal tori,
//! - the quantization energy with its analytic gradient, sparse Hessian and
//!   graph-Laplacian preconditioner,
//! - Lloyd's method, L-BFGS(M) and preconditioned L-BFGS(M,T) solvers,
//! - the MACN ("move away from closest neighbor") hybrid method for probing
//!   the energy landscape, plus a configurable simulated-annealing baseline,
//! - regularity measures and batch statistics (ECDFs, performance ratios).

pub mod energy;
pub mod error;
pub mod macn;
pub mod optimize;
pub mod polygon;
pub mod stats;
pub mod tessellation;
pub mod torus;
pub mod vec2;

pub use energy::{energy, gradient, graph_laplacian, hessian, Density, EnergyReport, GraphLaplacian, SparseHessian};
pub use error::{PcvtError, Result};

pub use macn::{
    annealing_baseline, hybrid, macn_c_step, macn_delta_step, macn_step, AnnealSchedule,
    BlockKind, DeltaRule, HybridTrace, InnerOptimizer, MacnConfig, SeriesPoint, StageOutcome,
};
pub use optimize::{lbfgs, lloyd, plbfgs, solve_preconditioner, OptimizerOptions, OptimizerReport, Termination};
pub use polygon::{
    isoperimetric_ratio, polygon_area, polygon_centroid, polygon_perimeter, polygon_second_moment,
    regular_hexagon, R_HEX,
};

pub use stats::{ecdf, regularity, summarize, Ecdf, Measures, RegularityReport, StatsSummary};
pub use tessellation::{build_tessellation, CellEdge, ClosestNeighbor, PeriodicTessellation};
pub use torus::{honeycomb_generators, GeneratorSet, TorusDomain, TorusKind};
pub use vec2::Vec2;

/// Fixed displacement of the annealing step: a quarter of the linear
/// length-scale per generator, `0.25 * sqrt(|domain| / n)`.
pub fn delta_displacement(domain: &TorusDomain, n: usize) -> f64 {
    0.25 * (domain.area() / n as f64).sqrt()
}
