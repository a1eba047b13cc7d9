//! Solvers driving generator configurations to centroidal tessellations:
//! Lloyd's fixed-point iteration, L-BFGS(M), and the graph-Laplacian
//! preconditioned L-BFGS(M,T), all under the convergence criterion
//! `||DE|| / n < tol`.

mod cholesky;
mod lbfgs;
mod line_search;
mod objective;

pub use cholesky::solve_preconditioner;
pub use lbfgs::{lbfgs, plbfgs};

use std::time::{Duration, Instant};

use crate::energy::energy;
use crate::error::Result;
use crate::stats::regularity_fractions;
use crate::tessellation::{build_tessellation, PeriodicTessellation};
use crate::torus::{GeneratorSet, TorusDomain};

/// Strong-Wolfe sufficient-decrease constant.
pub const WOLFE_C1: f64 = 1e-4;
/// Strong-Wolfe curvature constant.
pub const WOLFE_C2: f64 = 0.9;

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// `||DE|| / n` dropped below the tolerance.
    Converged,
    /// Iteration cap hit; the report carries the best iterate.
    MaxIterations,
    /// The line search failed even after the steepest-descent fallback.
    LineSearchFailure,
}

/// Common solver options.
#[derive(Debug, Clone, Copy)]
pub struct OptimizerOptions {
    /// Convergence tolerance on `||DE|| / n`; `None` uses the scale-aware
    /// default `1e-12 * sqrt(|domain|)`.
    pub tol: Option<f64>,
    pub max_iterations: usize,
    /// Isoperimetric tolerance used for the regularity columns of the trace.
    pub epsilon: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            tol: None,
            max_iterations: 1_000_000,
            epsilon: crate::stats::DEFAULT_EPSILON,
        }
    }
}

impl OptimizerOptions {
    pub fn with_tol(tol: f64) -> Self {
        OptimizerOptions {
            tol: Some(tol),
            ..Default::default()
        }
    }

    pub fn resolve_tol(&self, domain: &TorusDomain) -> f64 {
        self.tol.unwrap_or(1e-12 * domain.area().sqrt())
    }
}

/// One recorded iteration.
#[derive(Debug, Clone, Copy)]
pub struct TraceRow {
    pub f: f64,
    pub e: f64,
    /// `||DE|| / n`.
    pub diff: f64,
    pub h: f64,
    pub r_eps: f64,
}

/// Certificate of an accepted quasi-Newton step: both margins are
/// non-negative when the strong Wolfe conditions hold.
#[derive(Debug, Clone, Copy)]
pub struct WolfeCert {
    pub alpha: f64,
    /// `f(0) + c1 * alpha * phi'(0) - f(alpha)`.
    pub decrease_margin: f64,
    /// `c2 * |phi'(0)| - |phi'(alpha)|`.
    pub curvature_margin: f64,
}

/// Outcome of one solver run.
#[derive(Debug, Clone)]
pub struct OptimizerReport {
    pub final_gens: GeneratorSet,
    pub iterations: usize,
    /// Row 0 is the initial state; one row per iteration afterwards.
    pub trace: Vec<TraceRow>,
    pub termination: Termination,
    pub wall: Duration,
    /// One certificate per accepted quasi-Newton step (empty for Lloyd).
    pub wolfe: Vec<WolfeCert>,
}

impl OptimizerReport {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    pub fn final_trace(&self) -> &TraceRow {
        self.trace.last().expect("trace is never empty")
    }
}

pub(crate) fn trace_row(
    rep: &crate::energy::EnergyReport,
    tess: &PeriodicTessellation,
    epsilon: f64,
) -> TraceRow {
    let (h, r_eps) = regularity_fractions(tess, epsilon);
    TraceRow {
        f: rep.f,
        e: rep.e,
        diff: rep.diff(),
        h,
        r_eps,
    }
}

/// Lloyd's method: iterate `x_i <- c_i` until `||DE|| / n < tol`.
///
/// The energy is non-increasing along the iteration. On hitting the
/// iteration cap the report carries the last (hence best) iterate with
/// `Termination::MaxIterations`.
pub fn lloyd(
    domain: &TorusDomain,
    gens: &GeneratorSet,
    opts: &OptimizerOptions,
) -> Result<OptimizerReport> {
    let start = Instant::now();
    let tol = opts.resolve_tol(domain);
    let mut gens = gens.clone();
    let mut tess = build_tessellation(domain, &gens)?;
    let mut rep = energy(domain, &gens, &tess);
    let mut trace = vec![trace_row(&rep, &tess, opts.epsilon)];
    let mut iterations = 0usize;
    let mut termination = Termination::Converged;

    while rep.diff() >= tol {
        if iterations >= opts.max_iterations {
            termination = Termination::MaxIterations;
            break;
        }
        gens = GeneratorSet::new(domain, tess.centroids().to_vec())?;
        tess = build_tessellation(domain, &gens)?;
        rep = energy(domain, &gens, &tess);
        iterations += 1;
        trace.push(trace_row(&rep, &tess, opts.epsilon));
    }

    Ok(OptimizerReport {
        final_gens: gens,
        iterations,
        trace,
        termination,
        wall: start.elapsed(),
        wolfe: Vec::new(),
    })
}
