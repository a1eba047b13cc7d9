//! Seeded batch execution.
//!
//! Per-run randomness comes from a counter-based scheme: every run owns
//! stream `run_index` of a ChaCha generator keyed by the master seed, so
//! batches reproduce bit-identically regardless of scheduling or worker
//! count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use pcvt::{
    annealing_baseline, hybrid, lbfgs, lloyd, plbfgs, AnnealSchedule, GeneratorSet, MacnConfig,
    OptimizerOptions, TorusDomain,
};

use crate::config::{ExperimentConfig, MethodSpec};

/// Measures of one stage of one run.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StageRow {
    pub stage: usize,
    pub e_minus_1: f64,
    pub h: f64,
    pub r_eps: f64,
    pub iterations: usize,
    pub seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accepted: Option<bool>,
    pub converged: bool,
}

/// Full record of one run.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ResultRecord {
    pub run: usize,
    pub seed: u64,
    pub method: String,
    pub stages: Vec<StageRow>,
    /// Final generator positions (the last stage's tessellation).
    pub positions: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ResultRecord {
    /// Lowest energy gap over the run's stages.
    pub fn best_e_minus_1(&self) -> f64 {
        self.stages
            .iter()
            .map(|s| s.e_minus_1)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Per-run generator: stream `run` of the master-seeded ChaCha cipher.
pub fn run_rng(master_seed: u64, run: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(run as u64);
    rng
}

/// Execute one run of the configured method.
pub fn run_single(cfg: &ExperimentConfig, run: usize) -> ResultRecord {
    let started = std::time::Instant::now();
    match run_single_inner(cfg, run) {
        Ok(rec) => rec,
        Err(e) => ResultRecord {
            run,
            seed: cfg.master_seed,
            method: cfg.method.label(),
            stages: Vec::new(),
            positions: Vec::new(),
            error: Some(format!("{e:#} after {:.3}s", started.elapsed().as_secs_f64())),
        },
    }
}

fn run_single_inner(cfg: &ExperimentConfig, run: usize) -> anyhow::Result<ResultRecord> {
    let domain: TorusDomain = cfg.domain.build()?;
    let mut rng = run_rng(cfg.master_seed, run);
    let init = GeneratorSet::random(&domain, cfg.n, &mut rng)?;
    let opts = OptimizerOptions {
        tol: cfg.tol,
        max_iterations: cfg.max_iterations,
        epsilon: cfg.epsilon,
    };

    let (stages, final_gens) = match &cfg.method {
        MethodSpec::Lloyd => {
            let t0 = std::time::Instant::now();
            let rep = lloyd(&domain, &init, &opts)?;
            (vec![baseline_stage(&rep, t0)], rep.final_gens)
        }
        MethodSpec::Lbfgs { m } => {
            let t0 = std::time::Instant::now();
            let rep = lbfgs(&domain, &init, *m, &opts)?;
            (vec![baseline_stage(&rep, t0)], rep.final_gens)
        }
        MethodSpec::Plbfgs { m, t } => {
            let t0 = std::time::Instant::now();
            let rep = plbfgs(&domain, &init, *m, Some(*t), &opts)?;
            (vec![baseline_stage(&rep, t0)], rep.final_gens)
        }
        MethodSpec::Hybrid { k, q, rule, inner } => {
            let mut mc = MacnConfig::new(*k, *q)?;
            mc.tol = cfg.tol;
            mc.delta_rule = (*rule).into();
            mc.inner = (*inner).into();
            mc.rng_seed = rng.random();
            mc.max_inner_iterations = cfg.max_iterations;
            mc.epsilon = cfg.epsilon;
            let trace = hybrid(&domain, &init, &mc)?;
            trace_stages(trace)
        }
        MethodSpec::Anneal {
            stages,
            t0,
            decay,
            amplitude,
            inner,
        } => {
            let mut sched = AnnealSchedule::new(*stages, *t0, *decay, *amplitude);
            sched.inner = (*inner).into();
            sched.tol = cfg.tol;
            sched.max_inner_iterations = cfg.max_iterations;
            sched.epsilon = cfg.epsilon;
            let trace = annealing_baseline(&domain, &init, &sched, &mut rng)?;
            trace_stages(trace)
        }
    };

    Ok(ResultRecord {
        run,
        seed: cfg.master_seed,
        method: cfg.method.label(),
        stages,
        positions: final_gens.positions().iter().map(|&p| p.into()).collect(),
        error: None,
    })
}

fn baseline_stage(rep: &pcvt::OptimizerReport, t0: std::time::Instant) -> StageRow {
    let last = rep.final_trace();
    StageRow {
        stage: 0,
        e_minus_1: last.e - 1.0,
        h: last.h,
        r_eps: last.r_eps,
        iterations: rep.iterations,
        seconds: t0.elapsed().as_secs_f64(),
        accepted: None,
        converged: rep.converged(),
    }
}

fn trace_stages(trace: pcvt::HybridTrace) -> (Vec<StageRow>, GeneratorSet) {
    let final_gens = trace
        .stages
        .last()
        .expect("at least one stage")
        .pcvt
        .clone();
    let stages = trace
        .stages
        .into_iter()
        .enumerate()
        .map(|(q, s)| StageRow {
            stage: q,
            e_minus_1: s.measures.e_minus_1,
            h: s.measures.h,
            r_eps: s.measures.r_eps,
            iterations: s.inner_iterations,
            seconds: s.seconds,
            accepted: s.accepted,
            converged: s.converged,
        })
        .collect();
    (stages, final_gens)
}

/// Run the whole batch. Completed records stream to `sink` in run order
/// (a reorder buffer bridges out-of-order completion under threads); the
/// returned vector is also ordered by run. Per-run failures are recorded
/// and do not abort the batch.
pub fn run_batch_with<F>(cfg: &ExperimentConfig, mut sink: F) -> anyhow::Result<Vec<ResultRecord>>
where
    F: FnMut(&ResultRecord),
{
    if cfg.threads == Some(1) {
        // Serial fast path.
        let mut out = Vec::with_capacity(cfg.runs);
        for run in 0..cfg.runs {
            let rec = run_single(cfg, run);
            sink(&rec);
            out.push(rec);
        }
        return Ok(out);
    }

    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(t) = cfg.threads {
            b = b.num_threads(t);
        }
        b.build()?
    };
    let (tx, rx) = std::sync::mpsc::channel::<ResultRecord>();
    let ordered = std::thread::scope(|scope| {
        let producer = scope.spawn(move || {
            pool.install(|| {
                (0..cfg.runs).into_par_iter().for_each_with(tx, |tx, run| {
                    let _ = tx.send(run_single(cfg, run));
                });
            });
        });
        let mut pending: std::collections::BTreeMap<usize, ResultRecord> =
            std::collections::BTreeMap::new();
        let mut next = 0usize;
        let mut ordered = Vec::with_capacity(cfg.runs);
        for rec in rx {
            pending.insert(rec.run, rec);
            while let Some(rec) = pending.remove(&next) {
                sink(&rec);
                ordered.push(rec);
                next += 1;
            }
        }
        producer.join().expect("producer thread");
        ordered
    });
    Ok(ordered)
}

/// Run the whole batch, collecting records in run order.
pub fn run_batch(cfg: &ExperimentConfig) -> anyhow::Result<Vec<ResultRecord>> {
    run_batch_with(cfg, |_| {})
}

/// One (k, batch) sweep point: per-stage mean and minimum energy gaps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPoint {
    pub k: usize,
    pub stage: usize,
    pub mean_e_minus_1: f64,
    pub min_e_minus_1: f64,
    pub mean_h: f64,
    pub mean_r_eps: f64,
}

/// Sweep the preconditioning number over `ks`, running a reduced batch per
/// value and aggregating per-stage statistics.
pub fn sweep_k(cfg: &ExperimentConfig, ks: &[usize]) -> anyhow::Result<Vec<SweepPoint>> {
    let MethodSpec::Hybrid { q, rule, inner, .. } = cfg.method else {
        anyhow::bail!("sweep-k requires a hybrid method configuration");
    };
    let mut points = Vec::new();
    for &k in ks {
        let mut sub = cfg.clone();
        sub.method = MethodSpec::Hybrid { k, q, rule, inner };
        let records = run_batch(&sub)?;
        for stage in 0..q {
            let vals: Vec<&StageRow> = records
                .iter()
                .filter_map(|r| r.stages.get(stage))
                .collect();
            if vals.is_empty() {
                continue;
            }
            let m = vals.len() as f64;
            points.push(SweepPoint {
                k,
                stage,
                mean_e_minus_1: vals.iter().map(|s| s.e_minus_1).sum::<f64>() / m,
                min_e_minus_1: vals
                    .iter()
                    .map(|s| s.e_minus_1)
                    .fold(f64::INFINITY, f64::min),
                mean_h: vals.iter().map(|s| s.h).sum::<f64>() / m,
                mean_r_eps: vals.iter().map(|s| s.r_eps).sum::<f64>() / m,
            });
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{DomainKind, DomainSpec};

    fn small_cfg(method: MethodSpec, runs: usize) -> ExperimentConfig {
        ExperimentConfig {
            domain: DomainSpec {
                kind: DomainKind::Square,
                size: None,
            },
            n: 12,
            method,
            runs,
            master_seed: 7,
            tol: Some(1e-8),
            out_dir: None,
            render: false,
            epsilon: 0.005,
            threads: None,
            max_iterations: 200_000,
        }
    }

    #[test]
    fn single_run_hybrid_q1_k0_matches_inner() {
        let hybrid_cfg = small_cfg(
            MethodSpec::Hybrid {
                k: 0,
                q: 1,
                rule: crate::config::DeltaRuleSpec::FixedDelta,
                inner: crate::config::InnerSpec::Lloyd,
            },
            1,
        );
        let lloyd_cfg = small_cfg(MethodSpec::Lloyd, 1);
        let a = run_single(&hybrid_cfg, 0);
        let b = run_single(&lloyd_cfg, 0);
        assert!(a.error.is_none() && b.error.is_none());
        assert_eq!(a.stages.len(), 1);
        assert_eq!(a.stages[0].e_minus_1.to_bits(), b.stages[0].e_minus_1.to_bits());
        assert_eq!(a.positions, b.positions);
    }

    #[test]
    fn batch_is_deterministic_and_ordered() {
        let cfg = small_cfg(MethodSpec::Lbfgs { m: 5 }, 6);
        let a = run_batch(&cfg).unwrap();
        let b = run_batch(&cfg).unwrap();
        assert_eq!(a.len(), 6);
        for (ra, rb) in a.iter().zip(&b) {
            assert_eq!(ra.run, rb.run);
            assert_eq!(ra.stages[0].e_minus_1.to_bits(), rb.stages[0].e_minus_1.to_bits());
            assert_eq!(ra.positions, rb.positions);
        }
        // Distinct runs really sample distinct initializations.
        assert_ne!(a[0].positions, a[1].positions);
    }

    #[test]
    fn serial_and_parallel_agree() {
        let mut cfg = small_cfg(MethodSpec::Lloyd, 5);
        cfg.threads = Some(1);
        let serial = run_batch(&cfg).unwrap();
        cfg.threads = Some(4);
        let parallel = run_batch(&cfg).unwrap();
        for (ra, rb) in serial.iter().zip(&parallel) {
            assert_eq!(ra.run, rb.run);
            assert_eq!(ra.positions, rb.positions);
            assert_eq!(ra.stages[0].e_minus_1.to_bits(), rb.stages[0].e_minus_1.to_bits());
        }
    }
}
