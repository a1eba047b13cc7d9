//! Modified Cholesky solve against the graph-Laplacian preconditioner.
//!
//! The Laplacian is positive semi-definite with null vector 1, so plain
//! factorization can break down; a minimal diagonal shift from a fixed
//! ladder restores positive definiteness without distorting descent
//! directions.

use crate::energy::GraphLaplacian;
use crate::error::{PcvtError, Result};

/// Shift ladder, in units of `trace(G) / n`.
const SHIFT_LADDER: [f64; 6] = [1e-14, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4];

/// In-place lower Cholesky factorization of the symmetric matrix stored
/// row-major in `a`; returns false on a non-positive pivot.
pub(crate) fn cholesky_factor(a: &mut [f64], n: usize) -> bool {
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= a[i * n + k] * a[j * n + k];
            }
            if i == j {
                if !sum.is_finite() || sum <= 0.0 {
                    return false;
                }
                a[i * n + i] = sum.sqrt();
            } else {
                a[i * n + j] = sum / a[j * n + j];
            }
        }
    }
    true
}

/// Solve `L L' x = b` given the lower factor in `a`.
pub(crate) fn cholesky_solve(a: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= a[i * n + k] * b[k];
        }
        b[i] = sum / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut sum = b[i];
        for k in i + 1..n {
            sum -= a[k * n + i] * b[k];
        }
        b[i] = sum / a[i * n + i];
    }
}

/// Solve the preconditioning system `(G + sigma I) r = q` independently for
/// each coordinate axis, with `sigma` the smallest shift from the ladder
/// that lets the factorization succeed.
///
/// `q` is the interleaved 2N vector `(x0, y0, x1, y1, ...)`; the result uses
/// the same layout. Errors with `PreconditionFailure` once the ladder is
/// exhausted.
pub fn solve_preconditioner(g: &GraphLaplacian, q: &[f64]) -> Result<Vec<f64>> {
    let n = g.n();
    assert_eq!(q.len(), 2 * n, "expected an interleaved 2N vector");
    let scale: f64 = g.diagonal().iter().sum::<f64>() / n as f64;
    for rung in SHIFT_LADDER {
        let sigma = rung * scale;
        let mut a = g.to_dense();
        for i in 0..n {
            a[i * n + i] += sigma;
        }
        if !cholesky_factor(&mut a, n) {
            continue;
        }
        let mut rx: Vec<f64> = q.iter().step_by(2).copied().collect();
        let mut ry: Vec<f64> = q.iter().skip(1).step_by(2).copied().collect();
        cholesky_solve(&a, n, &mut rx);
        cholesky_solve(&a, n, &mut ry);
        let mut out = Vec::with_capacity(2 * n);
        for i in 0..n {
            out.push(rx[i]);
            out.push(ry[i]);
        }
        return Ok(out);
    }
    Err(PcvtError::PreconditionFailure)
}
