//! Statistical behavior of the hybrid method over seeded batches.

use pcvt::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn run_batch(n: usize, k: usize, q: usize, runs: usize, tol: f64) -> Vec<Vec<f64>> {
    let dom = TorusDomain::unit_square();
    let mut per_stage = vec![Vec::with_capacity(runs); q];
    for run in 0..runs as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(run);
        rng.set_stream(77);
        let init = GeneratorSet::random(&dom, n, &mut rng).unwrap();
        let cfg = MacnConfig::new(k, q)
            .unwrap()
            .with_seed(run)
            .with_tol(tol);
        let trace = hybrid(&dom, &init, &cfg).unwrap();
        for (stage, s) in trace.stages.iter().enumerate() {
            per_stage[stage].push(s.measures.e_minus_1);
        }
    }
    per_stage
}

/// Percentile of the bootstrap distribution of the mean of `diffs`.
fn bootstrap_mean_percentile(diffs: &[f64], pct: f64, resamples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = diffs.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| {
            (0..n).map(|_| diffs[rng.random_range(0..n)]).sum::<f64>() / n as f64
        })
        .collect();
    means.sort_by(|a, b| a.partial_cmp(b).unwrap());
    means[((pct / 100.0) * (resamples as f64 - 1.0)).round() as usize]
}

#[test]
fn stage_means_are_non_increasing_at_95_percent_confidence() {
    // Mean stage energies decrease with the stage index. Per consecutive
    // pair the assertion is statistical: the lower 95% bootstrap bound of
    // the paired mean difference must not be positive (no significant
    // increase), and the whole path must strictly decrease.
    let q = 4;
    let per_stage = run_batch(50, 150, q, 100, 1e-8);
    let means: Vec<f64> = per_stage
        .iter()
        .map(|s| s.iter().sum::<f64>() / s.len() as f64)
        .collect();
    for w in 0..q - 1 {
        let diffs: Vec<f64> = per_stage[w + 1]
            .iter()
            .zip(&per_stage[w])
            .map(|(b, a)| b - a)
            .collect();
        let lower = bootstrap_mean_percentile(&diffs, 5.0, 2000, 1234 + w as u64);
        assert!(
            lower <= 0.0,
            "stage {w} -> {}: bootstrap lower bound {lower} > 0 (means {means:?})",
            w + 1
        );
    }
    assert!(
        means[q - 1] < means[0],
        "no overall decrease: {means:?}"
    );
}

#[test]
fn converged_non_honeycomb_outputs_exceed_ground_energy() {
    // On the hexagonal torus with an admissible n, no converged output
    // falls below the ground energy, and everything that is not the
    // perfect honeycomb sits strictly above it.
    let dom = TorusDomain::hexagonal_unit_area();
    let n = 49;
    let mut above = 0;
    let mut at_ground = 0;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(3);
        let init = GeneratorSet::random(&dom, n, &mut rng).unwrap();
        let report = lloyd(&dom, &init, &OptimizerOptions::with_tol(1e-10)).unwrap();
        assert!(report.converged());
        let last = report.final_trace();
        assert!(
            last.e >= 1.0 - 1e-12,
            "converged output below the ground energy: {}",
            last.e
        );
        if last.e > 1.0 + 1e-9 {
            // A defective tessellation cannot be fully hexagonally regular.
            assert!(last.r_eps < 1.0, "E = {} but R_eps = 1", last.e);
            above += 1;
        } else {
            // Reaching the ground energy means reaching the honeycomb.
            assert_eq!(last.h, 1.0);
            assert_eq!(last.r_eps, 1.0);
            at_ground += 1;
        }
    }
    // At this small n both outcomes occur across seeds.
    assert!(above > 0, "every run reached the ground state");
    assert!(at_ground > 0, "no run reached the ground state");
}

#[test]
fn r_eps_never_exceeds_h_along_full_runs() {
    let dom = TorusDomain::unit_square();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let init = GeneratorSet::random(&dom, 40, &mut rng).unwrap();
    let cfg = MacnConfig::new(50, 3).unwrap().with_seed(9).with_tol(1e-9);
    let trace = hybrid(&dom, &init, &cfg).unwrap();
    assert!(!trace.series.is_empty());
    for sp in &trace.series {
        assert!(sp.row.r_eps <= sp.row.h + 1e-15);
    }
}

#[test]
fn hybrid_beats_plain_descent_on_average_small_scale() {
    // The point of the method: probing reaches lower energies than the
    // plain inner descent from the same initializations.
    let dom = TorusDomain::unit_square();
    let n = 50;
    let runs = 20;
    let mut hybrid_best = Vec::new();
    let mut lloyd_final = Vec::new();
    for run in 0..runs {
        let mut rng = ChaCha8Rng::seed_from_u64(run);
        rng.set_stream(55);
        let init = GeneratorSet::random(&dom, n, &mut rng).unwrap();
        let cfg = MacnConfig::new(200, 5)
            .unwrap()
            .with_seed(run)
            .with_tol(1e-9);
        hybrid_best.push(hybrid(&dom, &init, &cfg).unwrap().best_e_minus_1());
        let rep = lloyd(&dom, &init, &OptimizerOptions::with_tol(1e-9)).unwrap();
        lloyd_final.push(rep.final_trace().e - 1.0);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(
        mean(&hybrid_best) < mean(&lloyd_final),
        "hybrid {} vs lloyd {}",
        mean(&hybrid_best),
        mean(&lloyd_final)
    );
}
