//! Objective abstraction for the quasi-Newton core.
//!
//! The CVT energy is evaluated through this seam so tests can drive the
//! identical two-loop/line-search machinery with synthetic objectives.

use crate::energy::{energy, graph_laplacian};
use crate::error::{PcvtError, Result};
use crate::optimize::cholesky::solve_preconditioner;
use crate::optimize::{trace_row, TraceRow};
use crate::tessellation::{build_tessellation, PeriodicTessellation};
use crate::torus::{GeneratorSet, TorusDomain};
use crate::vec2::Vec2;

#[derive(Debug, Clone)]
pub(crate) struct ObjectiveEval {
    pub value: f64,
    pub grad: Vec<f64>,
    /// Convergence measure (`||DE|| / n` for the CVT energy).
    pub diff: f64,
    pub row: TraceRow,
}

pub(crate) trait Objective {
    fn dim(&self) -> usize;

    /// Evaluate at a trial point; `None` marks an invalid point (the line
    /// search treats it as arbitrarily bad).
    fn eval(&mut self, x: &[f64]) -> Option<ObjectiveEval>;

    /// The most recent successful `eval` became the accepted iterate.
    fn commit(&mut self);

    /// Signature of the current iterate's combinatorial structure.
    fn adjacency_signature(&self) -> u64 {
        0
    }

    /// Solve the preconditioning system at the current iterate; `None`
    /// skips preconditioning for this iteration.
    fn preconditioned_direction(&mut self, _q: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

/// The scaled CVT energy as an optimization objective over flattened
/// generator coordinates (lift; reduction happens per evaluation).
pub(crate) struct CvtObjective<'a> {
    domain: &'a TorusDomain,
    n: usize,
    epsilon: f64,
    pending: Option<(GeneratorSet, PeriodicTessellation)>,
    current: Option<(GeneratorSet, PeriodicTessellation)>,
}

impl<'a> CvtObjective<'a> {
    pub fn new(domain: &'a TorusDomain, n: usize, epsilon: f64) -> Self {
        CvtObjective {
            domain,
            n,
            epsilon,
            pending: None,
            current: None,
        }
    }

    fn unflatten(&self, x: &[f64]) -> Vec<Vec2> {
        x.chunks_exact(2).map(|c| Vec2::new(c[0], c[1])).collect()
    }

    /// Strict evaluation for the initial iterate: propagates geometry
    /// errors instead of masking them.
    pub fn eval_strict(&mut self, x: &[f64]) -> Result<ObjectiveEval> {
        let gens = GeneratorSet::new(self.domain, self.unflatten(x))?;
        let tess = build_tessellation(self.domain, &gens)?;
        let rep = energy(self.domain, &gens, &tess);
        let out = ObjectiveEval {
            value: rep.e,
            grad: rep.grad_e_flat(),
            diff: rep.diff(),
            row: trace_row(&rep, &tess, self.epsilon),
        };
        self.pending = Some((gens, tess));
        Ok(out)
    }

}

impl Objective for CvtObjective<'_> {
    fn dim(&self) -> usize {
        2 * self.n
    }

    fn eval(&mut self, x: &[f64]) -> Option<ObjectiveEval> {
        self.eval_strict(x).ok()
    }

    fn commit(&mut self) {
        if let Some(p) = self.pending.take() {
            self.current = Some(p);
        }
    }

    fn adjacency_signature(&self) -> u64 {
        self.current
            .as_ref()
            .map_or(0, |(_, tess)| tess.adjacency_signature())
    }

    fn preconditioned_direction(&mut self, q: &[f64]) -> Option<Vec<f64>> {
        let (gens, tess) = self.current.as_ref()?;
        let g = match graph_laplacian(self.domain, gens, tess) {
            Ok(g) => g,
            Err(PcvtError::Unsupported(_)) => return None,
            Err(_) => return None,
        };
        solve_preconditioner(&g, q).ok()
    }
}
