//! Regularity measures and batch statistics.
//!
//! A tessellation is scored by the fraction `H` of cells with exactly six
//! neighbors and the stricter fraction `R_eps` of six-neighbor cells whose
//! isoperimetric ratio is within `eps` of the regular hexagon's. Batches of
//! runs are compared through ECDFs, the performance ratio `tau`, and the
//! correlation ratio between the two measures.

use crate::error::{PcvtError, Result};
use crate::polygon::R_HEX;
use crate::tessellation::PeriodicTessellation;

/// Default isoperimetric tolerance (0.5%).
pub const DEFAULT_EPSILON: f64 = 0.005;

/// Per-tessellation regularity measures.
#[derive(Debug, Clone)]
pub struct RegularityReport {
    /// Fraction of cells with exactly six neighbors.
    pub h: f64,
    /// Fraction of cells that are regular hexagons within the isoperimetric
    /// tolerance.
    pub r_eps: f64,
    pub epsilon: f64,
    /// Per-cell flags: six neighbors.
    pub hexagonal: Vec<bool>,
    /// Per-cell flags: hexagonal and isoperimetrically regular.
    pub eps_regular: Vec<bool>,
    /// Per-cell isoperimetric ratios (perimeter squared over area).
    pub iso_ratios: Vec<f64>,
}

/// Compute the regularity measures of a tessellation.
pub fn regularity(tess: &PeriodicTessellation, epsilon: f64) -> RegularityReport {
    let n = tess.len();
    let mut hexagonal = Vec::with_capacity(n);
    let mut eps_regular = Vec::with_capacity(n);
    let mut iso_ratios = Vec::with_capacity(n);
    let mut nh = 0usize;
    let mut nr = 0usize;
    for i in 0..n {
        let hex = tess.edge_count(i) == 6;
        let r = tess.isoperimetric_ratio(i);
        let reg = hex && (1.0 - r / R_HEX).abs() <= epsilon;
        nh += usize::from(hex);
        nr += usize::from(reg);
        hexagonal.push(hex);
        eps_regular.push(reg);
        iso_ratios.push(r);
    }
    RegularityReport {
        h: nh as f64 / n as f64,
        r_eps: nr as f64 / n as f64,
        epsilon,
        hexagonal,
        eps_regular,
        iso_ratios,
    }
}

/// Lightweight fractions used in traces; computed without the per-cell
/// vectors of [`RegularityReport`].
pub fn regularity_fractions(tess: &PeriodicTessellation, epsilon: f64) -> (f64, f64) {
    let n = tess.len();
    let mut nh = 0usize;
    let mut nr = 0usize;
    for i in 0..n {
        if tess.edge_count(i) == 6 {
            nh += 1;
            if (1.0 - tess.isoperimetric_ratio(i) / R_HEX).abs() <= epsilon {
                nr += 1;
            }
        }
    }
    (nh as f64 / n as f64, nr as f64 / n as f64)
}

/// Empirical cumulative distribution function of a sample.
#[derive(Debug, Clone)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

/// Build an ECDF from a nonempty sample.
pub fn ecdf(samples: &[f64]) -> Result<Ecdf> {
    if samples.is_empty() {
        return Err(PcvtError::EmptySample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-finite sample"));
    Ok(Ecdf { sorted })
}

impl Ecdf {
    /// Fraction of samples less than or equal to `x` (right-continuous).
    pub fn evaluate(&self, x: f64) -> f64 {
        let k = self.sorted.partition_point(|&s| s <= x);
        k as f64 / self.sorted.len() as f64
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        *self.sorted.last().unwrap()
    }
}

/// One run's measured triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measures {
    pub e_minus_1: f64,
    pub h: f64,
    pub r_eps: f64,
}

/// Mean, standard deviation (unbiased), extrema and the ECDF value at the
/// reference for one measure of one batch column.
#[derive(Debug, Clone, Copy)]
pub struct SummaryRow {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    /// For the energy: fraction of samples at or below the reference.
    /// For regularity measures: fraction at or above the reference
    /// (reported as `1 - f` evaluated at the reference).
    pub f_star: f64,
}

/// Statistics of one column (a hybrid stage or a baseline method).
#[derive(Debug, Clone)]
pub struct ColumnStats {
    pub e_minus_1: SummaryRow,
    pub r_eps: SummaryRow,
    pub h: SummaryRow,
    /// Correlation ratio between how faithfully H and R_eps track E-1.
    pub rho: f64,
    pub count: usize,
}

/// Full comparison of hybrid per-stage batches against baseline batches.
#[derive(Debug, Clone)]
pub struct StatsSummary {
    pub hybrid_stages: Vec<ColumnStats>,
    pub baselines: Vec<(String, ColumnStats)>,
    /// Lowest energy gap sampled by the hybrid method over all stages.
    pub e_min_minus_1: f64,
    /// Lowest energy gap among all baseline samples.
    pub e_ref_minus_1: f64,
    /// References for the regularity measures (best over baselines).
    pub r_eps_ref: f64,
    pub h_ref: f64,
    /// Performance ratio (E_min - 1) / (E_ref - 1).
    pub tau: f64,
    pub epsilon: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn std_unbiased(xs: &[f64], m: f64) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn cov_unbiased(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    if xs.len() < 2 {
        return 0.0;
    }
    xs.iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / (xs.len() - 1) as f64
}

/// Correlation ratio: `sigma_R * cov(E-1, H) / (sigma_H * cov(E-1, R))`.
pub fn correlation_ratio(samples: &[Measures]) -> f64 {
    let e: Vec<f64> = samples.iter().map(|m| m.e_minus_1).collect();
    let h: Vec<f64> = samples.iter().map(|m| m.h).collect();
    let r: Vec<f64> = samples.iter().map(|m| m.r_eps).collect();
    let sigma_r = std_unbiased(&r, mean(&r));
    let sigma_h = std_unbiased(&h, mean(&h));
    sigma_r * cov_unbiased(&e, &h) / (sigma_h * cov_unbiased(&e, &r))
}

fn column_stats(samples: &[Measures], e_ref: f64, r_ref: f64, h_ref: f64) -> ColumnStats {
    let e: Vec<f64> = samples.iter().map(|m| m.e_minus_1).collect();
    let h: Vec<f64> = samples.iter().map(|m| m.h).collect();
    let r: Vec<f64> = samples.iter().map(|m| m.r_eps).collect();
    let row = |xs: &[f64], f_star: f64| -> SummaryRow {
        let m = mean(xs);
        SummaryRow {
            mean: m,
            std: std_unbiased(xs, m),
            min: xs.iter().cloned().fold(f64::INFINITY, f64::min),
            max: xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            f_star,
        }
    };
    let fe = ecdf(&e).expect("nonempty");
    let fh = ecdf(&h).expect("nonempty");
    let fr = ecdf(&r).expect("nonempty");
    // Larger is better for the regularity measures: report the fraction of
    // runs at or above the reference. The strict ECDF evaluates "<= x", so
    // subtract the strictly-below fraction.
    let above = |f: &Ecdf, x: f64| 1.0 - f.evaluate(x) + frac_eq(f, x);
    ColumnStats {
        e_minus_1: row(&e, fe.evaluate(e_ref)),
        r_eps: row(&r, above(&fr, r_ref)),
        h: row(&h, above(&fh, h_ref)),
        rho: correlation_ratio(samples),
        count: samples.len(),
    }
}

fn frac_eq(f: &Ecdf, x: f64) -> f64 {
    let below = f.sorted.partition_point(|&s| s < x);
    let at_or_below = f.sorted.partition_point(|&s| s <= x);
    (at_or_below - below) as f64 / f.sorted.len() as f64
}

/// Summarize hybrid per-stage batches against baseline batches.
///
/// `hybrid_stages[q]` holds the stage-q measures of every hybrid run;
/// each `(name, samples)` baseline is a flat batch. The energy reference is
/// the minimum over all baseline samples, the regularity references the
/// maxima.
pub fn summarize(
    hybrid_stages: &[Vec<Measures>],
    baselines: &[(String, Vec<Measures>)],
    epsilon: f64,
) -> Result<StatsSummary> {
    if hybrid_stages.is_empty() || hybrid_stages.iter().any(|s| s.is_empty()) {
        return Err(PcvtError::InsufficientData(
            "hybrid batch has an empty stage".into(),
        ));
    }
    if baselines.is_empty() || baselines.iter().any(|(_, s)| s.is_empty()) {
        return Err(PcvtError::InsufficientData("empty baseline batch".into()));
    }

    let e_ref = baselines
        .iter()
        .flat_map(|(_, s)| s.iter().map(|m| m.e_minus_1))
        .fold(f64::INFINITY, f64::min);
    let r_ref = baselines
        .iter()
        .flat_map(|(_, s)| s.iter().map(|m| m.r_eps))
        .fold(f64::NEG_INFINITY, f64::max);
    let h_ref = baselines
        .iter()
        .flat_map(|(_, s)| s.iter().map(|m| m.h))
        .fold(f64::NEG_INFINITY, f64::max);

    let e_min = hybrid_stages
        .iter()
        .flat_map(|s| s.iter().map(|m| m.e_minus_1))
        .fold(f64::INFINITY, f64::min);

    Ok(StatsSummary {
        hybrid_stages: hybrid_stages
            .iter()
            .map(|s| column_stats(s, e_ref, r_ref, h_ref))
            .collect(),
        baselines: baselines
            .iter()
            .map(|(name, s)| (name.clone(), column_stats(s, e_ref, r_ref, h_ref)))
            .collect(),
        e_min_minus_1: e_min,
        e_ref_minus_1: e_ref,
        r_eps_ref: r_ref,
        h_ref,
        tau: e_min / e_ref,
        epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tessellation::build_tessellation;
    use crate::torus::{honeycomb_generators, GeneratorSet, TorusDomain};
    use crate::vec2::Vec2;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn honeycomb_is_fully_regular() {
        let dom = TorusDomain::hexagonal_unit_area();
        let gens = honeycomb_generators(&dom, 5, 3).unwrap();
        let tess = build_tessellation(&dom, &gens).unwrap();
        let rep = regularity(&tess, 1e-9);
        assert_eq!(rep.h, 1.0);
        assert_eq!(rep.r_eps, 1.0);
    }

    #[test]
    fn offset_square_lattice_has_no_hexagons() {
        let dom = TorusDomain::unit_square();
        let gens =
            GeneratorSet::new(&dom, vec![Vec2::new(0.0, 0.0), Vec2::new(0.5, 0.5)]).unwrap();
        let tess = build_tessellation(&dom, &gens).unwrap();
        let rep = regularity(&tess, DEFAULT_EPSILON);
        assert_eq!(rep.h, 0.0);
        assert_eq!(rep.r_eps, 0.0);
        assert!(rep.iso_ratios.iter().all(|&r| r >= 4.0 * std::f64::consts::PI));
    }

    #[test]
    fn r_eps_below_h_and_monotone_in_eps() {
        let dom = TorusDomain::unit_square();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let gens = GeneratorSet::random(&dom, 300, &mut rng).unwrap();
        let tess = build_tessellation(&dom, &gens).unwrap();
        let mut prev = 0.0;
        for eps in [0.001, 0.005, 0.02, 0.1, 0.5] {
            let rep = regularity(&tess, eps);
            assert!(rep.r_eps <= rep.h);
            assert!(rep.r_eps >= prev);
            prev = rep.r_eps;
        }
    }

    #[test]
    fn all_cells_satisfy_isoperimetric_inequality() {
        let dom = TorusDomain::hexagonal_unit_area();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let gens = GeneratorSet::random(&dom, 200, &mut rng).unwrap();
        let tess = build_tessellation(&dom, &gens).unwrap();
        let rep = regularity(&tess, DEFAULT_EPSILON);
        let four_pi = 4.0 * std::f64::consts::PI;
        for &r in &rep.iso_ratios {
            assert!(r >= four_pi * (1.0 - 1e-12));
        }
    }

    #[test]
    fn ecdf_basics() {
        let f = ecdf(&[1.0, 2.0, 3.0]).unwrap();
        assert_relative_eq!(f.evaluate(2.0), 2.0 / 3.0);
        assert_eq!(f.evaluate(0.5), 0.0);
        assert_eq!(f.evaluate(3.0), 1.0);
        assert_eq!(f.evaluate(100.0), 1.0);
        assert!(ecdf(&[]).is_err());
    }

    #[test]
    fn ecdf_matches_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        use rand::Rng;
        let samples: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>()).collect();
        let f = ecdf(&samples).unwrap();
        for _ in 0..200 {
            let x: f64 = rng.random::<f64>() * 1.2 - 0.1;
            let brute = samples.iter().filter(|&&s| s <= x).count() as f64
                / samples.len() as f64;
            assert_eq!(f.evaluate(x), brute);
        }
    }

    fn m(e: f64, h: f64, r: f64) -> Measures {
        Measures {
            e_minus_1: e,
            h,
            r_eps: r,
        }
    }

    #[test]
    fn tau_identity_and_self_comparison() {
        let hybrid = vec![vec![
            m(0.004, 0.92, 0.70),
            m(0.003, 0.93, 0.75),
            m(0.005, 0.91, 0.65),
        ]];
        let base = vec![("lloyd".to_string(), hybrid[0].clone())];
        let s = summarize(&hybrid, &base, DEFAULT_EPSILON).unwrap();
        assert_relative_eq!(s.tau, 1.0);
        assert_relative_eq!(s.e_min_minus_1, 0.003);
        assert_relative_eq!(s.e_ref_minus_1, 0.003);
        // Exactly one of three samples ties the reference minimum.
        assert_relative_eq!(s.hybrid_stages[0].e_minus_1.f_star, 1.0 / 3.0);
        assert_relative_eq!(s.tau, (s.e_min_minus_1) / (s.e_ref_minus_1));
    }

    #[test]
    fn correlation_ratio_matches_direct_formula() {
        // Fixture with a known covariance structure.
        let samples = vec![
            m(0.010, 0.80, 0.40),
            m(0.008, 0.83, 0.47),
            m(0.006, 0.87, 0.55),
            m(0.004, 0.90, 0.66),
            m(0.002, 0.95, 0.81),
        ];
        let e: Vec<f64> = samples.iter().map(|x| x.e_minus_1).collect();
        let h: Vec<f64> = samples.iter().map(|x| x.h).collect();
        let r: Vec<f64> = samples.iter().map(|x| x.r_eps).collect();
        let n = 5.0;
        let mm = |v: &[f64]| v.iter().sum::<f64>() / n;
        let (me, mh, mr) = (mm(&e), mm(&h), mm(&r));
        let cov = |a: &[f64], ma: f64, b: &[f64], mb: f64| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - ma) * (y - mb))
                .sum::<f64>()
                / (n - 1.0)
        };
        let sad = |a: &[f64], ma: f64| cov(a, ma, a, ma).sqrt();
        let direct = sad(&r, mr) * cov(&e, me, &h, mh) / (sad(&h, mh) * cov(&e, me, &r, mr));
        assert_relative_eq!(correlation_ratio(&samples), direct, epsilon = 1e-12);
    }

    #[test]
    fn empty_batches_rejected() {
        let good = vec![vec![m(0.004, 0.9, 0.7)]];
        assert!(summarize(&[], &[("x".into(), good[0].clone())], 0.005).is_err());
        assert!(summarize(&good, &[], 0.005).is_err());
        assert!(summarize(&good, &[("x".into(), vec![])], 0.005).is_err());
    }
}
