//! Limited-memory BFGS with optional graph-Laplacian preconditioning.
//!
//! The search direction comes from the standard two-loop recursion over at
//! most M stored curvature pairs, seeded by the scaling
//! `H0 = (s'y / y'y) I`; every T-th iteration the seed is replaced by a
//! solve against the preconditioner. Steps satisfy the strong Wolfe
//! conditions.

use std::collections::VecDeque;
use std::time::Instant;

use crate::error::Result;
use crate::optimize::line_search::strong_wolfe;
use crate::optimize::objective::{CvtObjective, Objective, ObjectiveEval};
use crate::optimize::{
    OptimizerOptions, OptimizerReport, Termination, TraceRow, WolfeCert, WOLFE_C1, WOLFE_C2,
};
use crate::torus::{GeneratorSet, TorusDomain};

pub(crate) struct CoreOptions {
    pub memory: usize,
    /// Precondition every `t` iterations (starting at k = 0); `None` never
    /// preconditions.
    pub period: Option<usize>,
    pub tol: f64,
    pub max_iterations: usize,
    pub c1: f64,
    pub c2: f64,
}

pub(crate) struct CoreOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub trace: Vec<TraceRow>,
    pub wolfe: Vec<WolfeCert>,
    pub termination: Termination,
}

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn lbfgs_core<O: Objective>(
    obj: &mut O,
    mut x: Vec<f64>,
    init: ObjectiveEval,
    opts: &CoreOptions,
) -> CoreOutcome {
    let dim = obj.dim();
    debug_assert_eq!(x.len(), dim);
    obj.commit();

    let mut cur = init;
    let mut trace = vec![cur.row];
    let mut wolfe = Vec::new();
    let mut pairs: VecDeque<Pair> = VecDeque::with_capacity(opts.memory);
    let mut k = 0usize;
    let mut adjacency = obj.adjacency_signature();
    let mut best_x = x.clone();
    let mut best_value = cur.value;
    let termination;

    loop {
        if cur.diff < opts.tol {
            termination = Termination::Converged;
            break;
        }
        if k >= opts.max_iterations {
            termination = Termination::MaxIterations;
            break;
        }

        // Two-loop recursion.
        let mut q = cur.grad.clone();
        let mut alphas = Vec::with_capacity(pairs.len());
        for pair in pairs.iter().rev() {
            let a = pair.rho * dot(&pair.s, &q);
            for (qi, yi) in q.iter_mut().zip(&pair.y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        let preconditioned = matches!(opts.period, Some(t) if k.is_multiple_of(t));
        let mut r = if preconditioned {
            obj.preconditioned_direction(&q)
        } else {
            None
        }
        .unwrap_or_else(|| {
            let gamma = pairs
                .back()
                .map_or(1.0, |p| dot(&p.s, &p.y) / dot(&p.y, &p.y));
            q.iter().map(|&qi| gamma * qi).collect()
        });
        for (pair, &a) in pairs.iter().zip(alphas.iter().rev()) {
            let b = pair.rho * dot(&pair.y, &r);
            for (ri, si) in r.iter_mut().zip(&pair.s) {
                *ri += (a - b) * si;
            }
        }
        let mut p: Vec<f64> = r.iter().map(|&ri| -ri).collect();

        // Guard against non-descent directions (possible right after a
        // preconditioned redirect on an indefinite stretch).
        let mut d0 = dot(&cur.grad, &p);
        if d0 >= 0.0 {
            p = cur.grad.iter().map(|&g| -g).collect();
            d0 = -dot(&cur.grad, &cur.grad);
        }
        if d0 == 0.0 {
            termination = Termination::Converged;
            break;
        }

        let alpha_init = if k == 0 {
            let gnorm = dot(&cur.grad, &cur.grad).sqrt();
            (1.0 / (1.0 + gnorm)).min(1.0)
        } else {
            1.0
        };

        let mut accepted = strong_wolfe(obj, &x, &p, cur.value, d0, alpha_init, opts.c1, opts.c2);
        if accepted.is_none() {
            // One steepest-descent fallback, then abort with the best
            // iterate.
            let sd: Vec<f64> = cur.grad.iter().map(|&g| -g).collect();
            let d0sd = -dot(&cur.grad, &cur.grad);
            let a0 = 1.0 / (1.0 + (-d0sd).sqrt());
            accepted = strong_wolfe(obj, &x, &sd, cur.value, d0sd, a0, opts.c1, opts.c2);
            if accepted.is_some() {
                pairs.clear();
                p = sd;
            }
        }
        let Some(acc) = accepted else {
            termination = Termination::LineSearchFailure;
            break;
        };

        let s: Vec<f64> = p.iter().map(|&pi| acc.alpha * pi).collect();
        let y: Vec<f64> = acc
            .eval
            .grad
            .iter()
            .zip(&cur.grad)
            .map(|(gn, go)| gn - go)
            .collect();
        for (xi, si) in x.iter_mut().zip(&s) {
            *xi += si;
        }
        obj.commit();
        let new_adjacency = obj.adjacency_signature();

        let sy = dot(&s, &y);
        if sy > 0.0 {
            if pairs.len() == opts.memory {
                pairs.pop_front();
            }
            pairs.push_back(Pair { s, y, rho: 1.0 / sy });
        } else if new_adjacency != adjacency {
            // Curvature pairs straddling a combinatorial change of the
            // Delaunay adjacency can poison the inverse-Hessian model.
            pairs.clear();
        }
        adjacency = new_adjacency;

        cur = acc.eval;
        wolfe.push(acc.cert);
        trace.push(cur.row);
        if cur.value < best_value {
            best_value = cur.value;
            best_x = x.clone();
        }
        k += 1;
    }

    if termination != Termination::Converged && best_value < cur.value {
        x = best_x;
    }

    CoreOutcome {
        x,
        iterations: k,
        trace,
        wolfe,
        termination,
    }
}

fn run_cvt(
    domain: &TorusDomain,
    gens: &GeneratorSet,
    memory: usize,
    period: Option<usize>,
    opts: &OptimizerOptions,
) -> Result<OptimizerReport> {
    let start = Instant::now();
    let mut obj = CvtObjective::new(domain, gens.len(), opts.epsilon);
    let x0: Vec<f64> = gens
        .positions()
        .iter()
        .flat_map(|p| [p.x, p.y])
        .collect();
    let init = obj.eval_strict(&x0)?;
    let core = CoreOptions {
        memory,
        period,
        tol: opts.resolve_tol(domain),
        max_iterations: opts.max_iterations,
        c1: WOLFE_C1,
        c2: WOLFE_C2,
    };
    let out = lbfgs_core(&mut obj, x0, init, &core);
    let final_gens = GeneratorSet::new(
        domain,
        out.x
            .chunks_exact(2)
            .map(|c| crate::vec2::Vec2::new(c[0], c[1]))
            .collect(),
    )?;
    Ok(OptimizerReport {
        final_gens,
        iterations: out.iterations,
        trace: out.trace,
        termination: out.termination,
        wall: start.elapsed(),
        wolfe: out.wolfe,
    })
}

/// L-BFGS(M) on the scaled energy under the strong Wolfe conditions.
pub fn lbfgs(
    domain: &TorusDomain,
    gens: &GeneratorSet,
    memory: usize,
    opts: &OptimizerOptions,
) -> Result<OptimizerReport> {
    run_cvt(domain, gens, memory.max(1), None, opts)
}

/// Preconditioned L-BFGS(M,T): every `period`-th iteration redirects the
/// search direction through a modified-Cholesky solve against the periodic
/// graph Laplacian. `period = None` never preconditions and reproduces
/// `lbfgs` exactly.
pub fn plbfgs(
    domain: &TorusDomain,
    gens: &GeneratorSet,
    memory: usize,
    period: Option<usize>,
    opts: &OptimizerOptions,
) -> Result<OptimizerReport> {
    run_cvt(domain, gens, memory.max(1), period.map(|t| t.max(1)), opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::objective::{Objective, ObjectiveEval};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Synthetic strictly convex quadratic driven through the same
    /// optimizer interface as the CVT energy.
    struct Quadratic {
        // Dense SPD matrix, row-major.
        a: Vec<f64>,
        b: Vec<f64>,
        dim: usize,
    }

    impl Objective for Quadratic {
        fn dim(&self) -> usize {
            self.dim
        }

        fn eval(&mut self, x: &[f64]) -> Option<ObjectiveEval> {
            let n = self.dim;
            let mut ax = vec![0.0; n];
            for (i, a) in ax.iter_mut().enumerate() {
                for (j, &xj) in x.iter().enumerate() {
                    *a += self.a[i * n + j] * xj;
                }
            }
            let value = 0.5 * dot(x, &ax) - dot(&self.b, x);
            let grad: Vec<f64> = ax.iter().zip(&self.b).map(|(a, b)| a - b).collect();
            let gn = dot(&grad, &grad).sqrt();
            Some(ObjectiveEval {
                value,
                diff: gn / n as f64,
                row: TraceRow {
                    f: value,
                    e: value,
                    diff: gn / n as f64,
                    h: 0.0,
                    r_eps: 0.0,
                },
                grad,
            })
        }

        fn commit(&mut self) {}
    }

    #[test]
    fn quadratic_converges_within_dimension_iterations() {
        // With full memory and a near-exact line search, the two-loop
        // recursion reproduces conjugate-gradient behavior on a quadratic.
        let dim = 6;
        let mut a = vec![0.0; dim * dim];
        for i in 0..dim {
            a[i * dim + i] = 2.0 + i as f64;
            if i + 1 < dim {
                a[i * dim + i + 1] = 0.5;
                a[(i + 1) * dim + i] = 0.5;
            }
        }
        let b: Vec<f64> = (0..dim).map(|i| (i as f64 + 1.0) * 0.3).collect();
        let mut obj = Quadratic { a, b, dim };
        let x0 = vec![0.0; dim];
        let init = obj.eval(&x0).unwrap();
        let core = CoreOptions {
            memory: dim + 2,
            period: None,
            tol: 1e-10,
            max_iterations: 100,
            c1: 1e-4,
            c2: 1e-6,
        };
        let out = lbfgs_core(&mut obj, x0, init, &core);
        assert_eq!(out.termination, Termination::Converged);
        assert!(
            out.iterations <= dim + 2,
            "took {} iterations",
            out.iterations
        );
    }

    #[test]
    fn lbfgs_converges_on_small_cvt() {
        let dom = TorusDomain::unit_square();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let gens = GeneratorSet::random(&dom, 24, &mut rng).unwrap();
        let report = lbfgs(&dom, &gens, 7, &OptimizerOptions::with_tol(1e-11)).unwrap();
        assert!(report.converged(), "termination {:?}", report.termination);
        assert!(report.final_trace().e > 1.0);
        // Wolfe certificates hold for every accepted step.
        for (i, c) in report.wolfe.iter().enumerate() {
            assert!(
                c.decrease_margin >= -1e-12 * (1.0 + report.trace[i].e.abs()),
                "step {i}: decrease margin {}",
                c.decrease_margin
            );
            assert!(
                c.curvature_margin >= -1e-12,
                "step {i}: curvature margin {}",
                c.curvature_margin
            );
        }
    }

    #[test]
    fn plbfgs_without_period_matches_lbfgs_exactly() {
        let dom = TorusDomain::hexagonal_unit_area();
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let gens = GeneratorSet::random(&dom, 30, &mut rng).unwrap();
        let opts = OptimizerOptions::with_tol(1e-10);
        let a = lbfgs(&dom, &gens, 5, &opts).unwrap();
        let b = plbfgs(&dom, &gens, 5, None, &opts).unwrap();
        assert_eq!(a.iterations, b.iterations);
        for (ra, rb) in a.trace.iter().zip(b.trace.iter()) {
            assert_eq!(ra.f.to_bits(), rb.f.to_bits());
            assert_eq!(ra.diff.to_bits(), rb.diff.to_bits());
        }
        for (pa, pb) in a
            .final_gens
            .positions()
            .iter()
            .zip(b.final_gens.positions())
        {
            assert_eq!(pa.x.to_bits(), pb.x.to_bits());
            assert_eq!(pa.y.to_bits(), pb.y.to_bits());
        }
    }

    #[test]
    fn plbfgs_with_preconditioning_converges() {
        let dom = TorusDomain::unit_square();
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let gens = GeneratorSet::random(&dom, 40, &mut rng).unwrap();
        let report = plbfgs(&dom, &gens, 20, Some(20), &OptimizerOptions::with_tol(1e-10)).unwrap();
        assert!(report.converged());
        assert!(report.final_trace().e > 1.0);
    }

    #[test]
    fn runs_are_deterministic() {
        let dom = TorusDomain::unit_square();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let gens = GeneratorSet::random(&dom, 32, &mut rng).unwrap();
        let opts = OptimizerOptions::with_tol(1e-9);
        let a = lbfgs(&dom, &gens, 7, &opts).unwrap();
        let b = lbfgs(&dom, &gens, 7, &opts).unwrap();
        assert_eq!(a.iterations, b.iterations);
        for (pa, pb) in a
            .final_gens
            .positions()
            .iter()
            .zip(b.final_gens.positions())
        {
            assert_eq!(pa.x.to_bits(), pb.x.to_bits());
            assert_eq!(pa.y.to_bits(), pb.y.to_bits());
        }
    }
}
