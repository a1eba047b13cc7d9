//! Bracketing strong-Wolfe line search with cubic interpolation.

use crate::optimize::objective::{Objective, ObjectiveEval};
use crate::optimize::WolfeCert;

pub(crate) struct Accepted {
    pub alpha: f64,
    pub eval: ObjectiveEval,
    pub cert: WolfeCert,
}

const MAX_BRACKET: usize = 20;
const MAX_ZOOM: usize = 30;
const ALPHA_MAX: f64 = 1e8;

struct Probe {
    alpha: f64,
    f: f64,
    // Directional derivative; NAN when the point was invalid.
    d: f64,
    eval: Option<ObjectiveEval>,
}

fn probe<O: Objective>(obj: &mut O, x: &[f64], p: &[f64], alpha: f64) -> Probe {
    let trial: Vec<f64> = x.iter().zip(p).map(|(&xi, &pi)| xi + alpha * pi).collect();
    match obj.eval(&trial) {
        Some(ev) => {
            let d = ev.grad.iter().zip(p).map(|(&g, &pi)| g * pi).sum();
            Probe {
                alpha,
                f: ev.value,
                d,
                eval: Some(ev),
            }
        }
        None => Probe {
            alpha,
            f: f64::INFINITY,
            d: f64::NAN,
            eval: None,
        },
    }
}

/// Minimizer of the cubic interpolant through two (alpha, f, f') samples,
/// clamped to the given bounds; falls back to bisection when the fit is
/// degenerate or lands outside.
fn cubic_step(a: &Probe, b: &Probe, lo: f64, hi: f64) -> f64 {
    let fallback = 0.5 * (lo + hi);
    if !a.d.is_finite() || !b.d.is_finite() || !a.f.is_finite() || !b.f.is_finite() {
        return fallback;
    }
    let (x1, f1, g1, x2, f2, g2) = (a.alpha, a.f, a.d, b.alpha, b.f, b.d);
    if x1 == x2 {
        return fallback;
    }
    let d1 = g1 + g2 - 3.0 * (f1 - f2) / (x1 - x2);
    let d2sq = d1 * d1 - g1 * g2;
    if d2sq < 0.0 {
        return fallback;
    }
    let d2 = d2sq.sqrt();
    let t = if x1 <= x2 {
        x2 - (x2 - x1) * ((g2 + d2 - d1) / (g2 - g1 + 2.0 * d2))
    } else {
        x1 - (x1 - x2) * ((g1 + d2 - d1) / (g1 - g2 + 2.0 * d2))
    };
    if !t.is_finite() {
        return fallback;
    }
    // Keep a safeguard margin inside the bracket.
    let width = hi - lo;
    t.clamp(lo + 0.1 * width, hi - 0.1 * width)
}

/// Strong-Wolfe search along `p` from `x`; `f0`/`d0` are the value and
/// directional derivative at `alpha = 0` (`d0 < 0`). Returns `None` when no
/// acceptable step was found.
#[allow(clippy::too_many_arguments)]
pub(crate) fn strong_wolfe<O: Objective>(
    obj: &mut O,
    x: &[f64],
    p: &[f64],
    f0: f64,
    d0: f64,
    alpha_init: f64,
    c1: f64,
    c2: f64,
) -> Option<Accepted> {
    debug_assert!(d0 < 0.0);
    // Near a minimizer the achievable decrease drops below the floating
    // resolution of f while the geometrically computed gradient stays
    // informative; allow that much slack in the sufficient-decrease
    // comparisons (the curvature condition stays strict).
    let noise = 1e-14 * (1.0 + f0.abs());
    let armijo = |alpha: f64, f: f64| f <= f0 + c1 * alpha * d0 + noise;
    let accept = |pr: Probe| -> Option<Accepted> {
        let eval = pr.eval?;
        Some(Accepted {
            alpha: pr.alpha,
            cert: WolfeCert {
                alpha: pr.alpha,
                decrease_margin: f0 + c1 * pr.alpha * d0 - pr.f,
                curvature_margin: c2 * d0.abs() - pr.d.abs(),
            },
            eval,
        })
    };

    let mut prev = Probe {
        alpha: 0.0,
        f: f0,
        d: d0,
        eval: None,
    };
    let mut alpha = alpha_init.min(ALPHA_MAX);

    let mut bracket: Option<(Probe, Probe)> = None;
    for i in 0..MAX_BRACKET {
        let cur = probe(obj, x, p, alpha);
        let invalid = cur.eval.is_none();
        if invalid || !armijo(alpha, cur.f) || (i > 0 && cur.f >= prev.f + noise) {
            bracket = Some((prev, cur));
            break;
        }
        if cur.d.abs() <= -c2 * d0 {
            return accept(cur);
        }
        if cur.d >= 0.0 {
            bracket = Some((cur, prev));
            break;
        }
        let next = (alpha * 2.0).min(ALPHA_MAX);
        prev = cur;
        if alpha >= ALPHA_MAX {
            return None;
        }
        alpha = next;
    }
    // (lo, hi): lo satisfies sufficient decrease with the lower value; hi
    // brackets from the other side (possibly invalid).
    let (mut lo, mut hi) = bracket?;

    for _ in 0..MAX_ZOOM {
        if (hi.alpha - lo.alpha).abs() < 1e-16 * (1.0 + lo.alpha.abs()) {
            break;
        }
        let (a, b) = if lo.alpha < hi.alpha {
            (lo.alpha, hi.alpha)
        } else {
            (hi.alpha, lo.alpha)
        };
        let trial_alpha = cubic_step(&lo, &hi, a, b);
        let cur = probe(obj, x, p, trial_alpha);
        if cur.eval.is_none() || !armijo(trial_alpha, cur.f) || cur.f >= lo.f + noise {
            hi = cur;
            continue;
        }
        if cur.d.abs() <= -c2 * d0 {
            return accept(cur);
        }
        if cur.d * (hi.alpha - lo.alpha) >= 0.0 {
            hi = std::mem::replace(&mut lo, cur);
        } else {
            lo = cur;
        }
    }
    // Fall back to the best sufficient-decrease point if it also satisfies
    // the curvature condition. Re-probe so the accepted point is the most
    // recent evaluation (the commit contract of `Objective`).
    if lo.alpha > 0.0 && lo.eval.is_some() && lo.d.abs() <= -c2 * d0 {
        let re = probe(obj, x, p, lo.alpha);
        if re.eval.is_some() && armijo(re.alpha, re.f) && re.d.abs() <= -c2 * d0 {
            return accept(re);
        }
    }
    None
}
