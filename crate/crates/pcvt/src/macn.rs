//! MACN landscape probing: move each generator away from its closest
//! neighbor.
//!
//! A MACN iteration displaces every generator by a prescribed distance along
//! the unit vector pointing away from its closest neighbor, all updates
//! computed from the same input tessellation. The hybrid method runs Q
//! stages of (K MACN-c preconditioning steps, an inner descent to a
//! centroidal tessellation, one MACN-delta annealing step), probing Q basins
//! of attraction per run. A configurable simulated-annealing baseline over
//! the same inner solvers is provided for comparison.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::energy::energy;
use crate::error::{PcvtError, Result};
use crate::optimize::{lbfgs, lloyd, plbfgs, trace_row, OptimizerOptions, OptimizerReport, TraceRow};
use crate::stats::Measures;
use crate::tessellation::{build_tessellation, PeriodicTessellation};
use crate::torus::{GeneratorSet, TorusDomain};
use crate::vec2::Vec2;

/// Distance rule of the annealing step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaRule {
    /// The fixed displacement `0.25 * sqrt(|domain| / n)` for every
    /// generator, away from its closest neighbor.
    FixedDelta,
    /// Per-cell displacement `|V_i| / |dV_i|` (area over perimeter), away
    /// from the closest neighbor.
    IntrinsicLengthScale,
    /// Fixed displacement away from a uniformly drawn Delaunay neighbor.
    RandomNeighbor,
    /// Fixed displacement at a uniformly drawn angle.
    RandomAngle,
}

/// Inner descent method of the hybrid stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerOptimizer {
    Lloyd,
    Lbfgs { memory: usize },
    Plbfgs { memory: usize, period: usize },
}

impl InnerOptimizer {
    fn run(
        &self,
        domain: &TorusDomain,
        gens: &GeneratorSet,
        opts: &OptimizerOptions,
    ) -> Result<OptimizerReport> {
        match *self {
            InnerOptimizer::Lloyd => lloyd(domain, gens, opts),
            InnerOptimizer::Lbfgs { memory } => lbfgs(domain, gens, memory, opts),
            InnerOptimizer::Plbfgs { memory, period } => {
                plbfgs(domain, gens, memory, Some(period), opts)
            }
        }
    }
}

/// Configuration of one hybrid run.
#[derive(Debug, Clone)]
pub struct MacnConfig {
    /// Preconditioning number: MACN-c iterations per stage.
    pub k: usize,
    /// Probing number: stages (basins probed) per run.
    pub q: usize,
    /// Convergence tolerance on `||DE|| / n` for the inner optimizer;
    /// `None` uses the scale-aware default.
    pub tol: Option<f64>,
    pub delta_rule: DeltaRule,
    pub inner: InnerOptimizer,
    pub rng_seed: u64,
    /// Optional per-stage preconditioning numbers; defaults to constant
    /// `k` across stages.
    pub k_schedule: Option<Vec<usize>>,
    /// Iteration cap for each inner solve.
    pub max_inner_iterations: usize,
    /// Isoperimetric tolerance used in the recorded series.
    pub epsilon: f64,
}

impl MacnConfig {
    pub fn new(k: usize, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(PcvtError::DegenerateInput(
                "probing number q must be at least 1".into(),
            ));
        }
        Ok(MacnConfig {
            k,
            q,
            tol: None,
            delta_rule: DeltaRule::FixedDelta,
            inner: InnerOptimizer::Lloyd,
            rng_seed: 0,
            k_schedule: None,
            max_inner_iterations: 1_000_000,
            epsilon: crate::stats::DEFAULT_EPSILON,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_inner(mut self, inner: InnerOptimizer) -> Self {
        self.inner = inner;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = Some(tol);
        self
    }

    pub fn with_delta_rule(mut self, rule: DeltaRule) -> Self {
        self.delta_rule = rule;
        self
    }

    fn k_for_stage(&self, q: usize) -> usize {
        self.k_schedule
            .as_ref()
            .and_then(|ks| ks.get(q).copied())
            .unwrap_or(self.k)
    }
}

/// Which block of the hybrid produced a series row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    MacnC,
    Inner,
}

/// One recorded iteration of a hybrid or annealing run.
#[derive(Debug, Clone, Copy)]
pub struct SeriesPoint {
    pub stage: usize,
    pub block: BlockKind,
    pub row: TraceRow,
}

/// Outcome of one stage: the centroidal tessellation it reached.
#[derive(Debug, Clone)]
pub struct StageOutcome {
    pub pcvt: GeneratorSet,
    pub measures: Measures,
    pub converged: bool,
    pub inner_iterations: usize,
    /// Wall-clock seconds from the stage start to its tessellation.
    pub seconds: f64,
    /// Metropolis decision of the annealing baseline; `None` for hybrid
    /// stages.
    pub accepted: Option<bool>,
}

/// Full record of a hybrid (or annealing) run.
#[derive(Debug, Clone)]
pub struct HybridTrace {
    pub stages: Vec<StageOutcome>,
    /// Per-iteration measures across all blocks, in execution order.
    pub series: Vec<SeriesPoint>,
}

impl HybridTrace {
    /// Lowest stage energy gap of the run.
    pub fn best_e_minus_1(&self) -> f64 {
        self.stages
            .iter()
            .map(|s| s.measures.e_minus_1)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn best_stage(&self) -> &StageOutcome {
        self.stages
            .iter()
            .min_by(|a, b| {
                a.measures
                    .e_minus_1
                    .partial_cmp(&b.measures.e_minus_1)
                    .unwrap()
            })
            .expect("at least one stage")
    }
}

/// One MACN iteration: displace every generator by `distances[i]` along the
/// unit vector away from its closest neighbor, all from the same input
/// tessellation, then reduce into the fundamental domain.
pub fn macn_step(
    domain: &TorusDomain,
    gens: &GeneratorSet,
    tess: &PeriodicTessellation,
    distances: &[f64],
) -> Result<GeneratorSet> {
    let n = gens.len();
    assert_eq!(tess.len(), n);
    assert_eq!(distances.len(), n);
    let mut moved = Vec::with_capacity(n);
    for (i, &distance) in distances.iter().enumerate() {
        let x = tess.generator(i);
        let cn = tess.closest_neighbor(i);
        if cn.distance == 0.0 {
            return Err(PcvtError::CoincidentGenerators {
                i: i.min(cn.index),
                j: i.max(cn.index),
            });
        }
        let dir = (x - cn.image) / cn.distance;
        moved.push(x + dir * distance);
    }
    GeneratorSet::new(domain, moved)
}

/// MACN-c: the per-generator displacement is its distance to the cell
/// centroid.
pub fn macn_c_step(
    domain: &TorusDomain,
    gens: &GeneratorSet,
    tess: &PeriodicTessellation,
) -> Result<GeneratorSet> {
    let distances: Vec<f64> = (0..tess.len())
        .map(|i| domain.distance(tess.generator(i), tess.centroid(i)))
        .collect();
    macn_step(domain, gens, tess, &distances)
}

/// One annealing step under the chosen distance rule.
pub fn macn_delta_step<R: Rng + ?Sized>(
    domain: &TorusDomain,
    gens: &GeneratorSet,
    tess: &PeriodicTessellation,
    rule: DeltaRule,
    rng: &mut R,
) -> Result<GeneratorSet> {
    let n = gens.len();
    let delta = crate::delta_displacement(domain, n);
    match rule {
        DeltaRule::FixedDelta => macn_step(domain, gens, tess, &vec![delta; n]),
        DeltaRule::IntrinsicLengthScale => {
            let distances: Vec<f64> = (0..n).map(|i| tess.area(i) / tess.perimeter(i)).collect();
            macn_step(domain, gens, tess, &distances)
        }
        DeltaRule::RandomNeighbor => {
            let mut moved = Vec::with_capacity(n);
            for i in 0..n {
                let nbrs = tess.neighbors_of(i);
                let j = nbrs[rng.random_range(0..nbrs.len())];
                let x = tess.generator(i);
                let away = domain.min_image(x - tess.generator(j));
                let len = away.norm();
                if len == 0.0 {
                    return Err(PcvtError::CoincidentGenerators {
                        i: i.min(j),
                        j: i.max(j),
                    });
                }
                moved.push(x + away * (delta / len));
            }
            GeneratorSet::new(domain, moved)
        }
        DeltaRule::RandomAngle => {
            let mut moved = Vec::with_capacity(n);
            for i in 0..n {
                let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                moved.push(tess.generator(i) + Vec2::new(theta.cos(), theta.sin()) * delta);
            }
            GeneratorSet::new(domain, moved)
        }
    }
}

/// Build the tessellation, deterministically nudging coincident generators
/// apart (index-hashed angle, `1e-9 sqrt(|domain|/n)` displacement) when a
/// MACN step collides a pair.
fn build_or_nudge(
    domain: &TorusDomain,
    gens: &mut GeneratorSet,
) -> Result<PeriodicTessellation> {
    const GOLDEN_FRAC: f64 = 0.618033988749895;
    for _ in 0..32 {
        match build_tessellation(domain, gens) {
            Ok(t) => return Ok(t),
            Err(PcvtError::CoincidentGenerators { i, j }) => {
                let idx = i.max(j);
                let angle = std::f64::consts::TAU * ((idx as f64 * GOLDEN_FRAC).fract());
                let eps = 1e-9 * (domain.area() / gens.len() as f64).sqrt();
                let mut positions = gens.positions().to_vec();
                positions[idx] += Vec2::new(angle.cos(), angle.sin()) * eps;
                *gens = GeneratorSet::new(domain, positions)?;
            }
            Err(e) => return Err(e),
        }
    }
    Err(PcvtError::NumericalFailure(
        "could not separate coincident generators".into(),
    ))
}

fn measures_of(row: &TraceRow) -> Measures {
    Measures {
        e_minus_1: row.e - 1.0,
        h: row.h,
        r_eps: row.r_eps,
    }
}

/// The hybrid method: Q stages of K MACN-c steps, inner descent to a
/// centroidal tessellation, and (between stages) one MACN-delta step.
///
/// A stage whose inner solve fails to converge is marked and the run
/// continues from its best iterate.
pub fn hybrid(domain: &TorusDomain, init: &GeneratorSet, cfg: &MacnConfig) -> Result<HybridTrace> {
    if cfg.q == 0 {
        return Err(PcvtError::DegenerateInput("probing number is zero".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let opts = OptimizerOptions {
        tol: cfg.tol,
        max_iterations: cfg.max_inner_iterations,
        epsilon: cfg.epsilon,
    };
    let mut gens = init.clone();
    let mut stages = Vec::with_capacity(cfg.q);
    let mut series = Vec::new();

    for stage in 0..cfg.q {
        let stage_start = std::time::Instant::now();
        for _ in 0..cfg.k_for_stage(stage) {
            let tess = build_or_nudge(domain, &mut gens)?;
            let rep = energy(domain, &gens, &tess);
            series.push(SeriesPoint {
                stage,
                block: BlockKind::MacnC,
                row: trace_row(&rep, &tess, cfg.epsilon),
            });
            gens = macn_c_step(domain, &gens, &tess)?;
        }

        // Nudge apart any collision the last MACN-c step produced before
        // handing over to the inner solver.
        build_or_nudge(domain, &mut gens)?;
        let report = cfg.inner.run(domain, &gens, &opts)?;
        gens = report.final_gens.clone();
        series.extend(report.trace.iter().map(|&row| SeriesPoint {
            stage,
            block: BlockKind::Inner,
            row,
        }));
        stages.push(StageOutcome {
            pcvt: gens.clone(),
            measures: measures_of(report.final_trace()),
            converged: report.converged(),
            inner_iterations: report.iterations,
            seconds: stage_start.elapsed().as_secs_f64(),
            accepted: None,
        });

        if stage + 1 < cfg.q {
            let tess = build_or_nudge(domain, &mut gens)?;
            gens = macn_delta_step(domain, &gens, &tess, cfg.delta_rule, &mut rng)?;
        }
    }

    Ok(HybridTrace { stages, series })
}

/// Cooling schedule and proposal parameters of the annealing baseline.
#[derive(Debug, Clone)]
pub struct AnnealSchedule {
    /// Number of centroidal tessellations computed (including the initial
    /// one).
    pub stages: usize,
    /// Initial temperature (on the scaled energy gap).
    pub t0: f64,
    /// Geometric decay factor per stage.
    pub decay: f64,
    /// Perturbation amplitude factor: each generator moves uniformly in a
    /// disk of radius `amplitude * sqrt(|V_i|)`.
    pub amplitude: f64,
    pub inner: InnerOptimizer,
    pub tol: Option<f64>,
    pub max_inner_iterations: usize,
    pub epsilon: f64,
}

impl AnnealSchedule {
    pub fn new(stages: usize, t0: f64, decay: f64, amplitude: f64) -> Self {
        AnnealSchedule {
            stages,
            t0,
            decay,
            amplitude,
            inner: InnerOptimizer::Lbfgs { memory: 7 },
            tol: None,
            max_inner_iterations: 1_000_000,
            epsilon: crate::stats::DEFAULT_EPSILON,
        }
    }
}

/// Simulated-annealing baseline: perturb the current centroidal
/// tessellation with cell-size-dependent amplitude, re-minimize, and accept
/// by the Metropolis rule on the energy gap under the cooling temperature.
pub fn annealing_baseline<R: Rng + ?Sized>(
    domain: &TorusDomain,
    init: &GeneratorSet,
    schedule: &AnnealSchedule,
    rng: &mut R,
) -> Result<HybridTrace> {
    if schedule.stages == 0 {
        return Err(PcvtError::DegenerateInput("zero annealing stages".into()));
    }
    let opts = OptimizerOptions {
        tol: schedule.tol,
        max_iterations: schedule.max_inner_iterations,
        epsilon: schedule.epsilon,
    };
    let mut stages = Vec::with_capacity(schedule.stages);
    let mut series = Vec::new();

    let run_inner = |gens: &GeneratorSet, stage: usize, series: &mut Vec<SeriesPoint>|
     -> Result<OptimizerReport> {
        let report = schedule.inner.run(domain, gens, &opts)?;
        series.extend(report.trace.iter().map(|&row| SeriesPoint {
            stage,
            block: BlockKind::Inner,
            row,
        }));
        Ok(report)
    };

    let t0 = std::time::Instant::now();
    let report = run_inner(init, 0, &mut series)?;
    let mut current = report.final_gens.clone();
    let mut current_e = report.final_trace().e;
    stages.push(StageOutcome {
        pcvt: current.clone(),
        measures: measures_of(report.final_trace()),
        converged: report.converged(),
        inner_iterations: report.iterations,
        seconds: t0.elapsed().as_secs_f64(),
        accepted: Some(true),
    });

    for stage in 1..schedule.stages {
        let stage_start = std::time::Instant::now();
        let tess = build_tessellation(domain, &current)?;
        let mut proposal = Vec::with_capacity(current.len());
        for i in 0..current.len() {
            let radius = schedule.amplitude * tess.area(i).sqrt();
            let r = radius * rng.random::<f64>().sqrt();
            let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            proposal.push(tess.generator(i) + Vec2::new(theta.cos(), theta.sin()) * r);
        }
        let mut proposal = GeneratorSet::new(domain, proposal)?;
        build_or_nudge(domain, &mut proposal)?;

        let report = run_inner(&proposal, stage, &mut series)?;
        let new_e = report.final_trace().e;
        let temperature = schedule.t0 * schedule.decay.powi(stage as i32 - 1);
        let accepted = if new_e <= current_e {
            true
        } else if temperature <= 0.0 {
            false
        } else {
            rng.random::<f64>() < (-(new_e - current_e) / temperature).exp()
        };
        stages.push(StageOutcome {
            pcvt: report.final_gens.clone(),
            measures: measures_of(report.final_trace()),
            converged: report.converged(),
            inner_iterations: report.iterations,
            seconds: stage_start.elapsed().as_secs_f64(),
            accepted: Some(accepted),
        });
        if accepted {
            current = report.final_gens;
            current_e = new_e;
        }
    }

    Ok(HybridTrace { stages, series })
}
