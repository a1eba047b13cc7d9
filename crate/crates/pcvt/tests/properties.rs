//! Property tests over randomized geometry.

use pcvt::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn domains() -> impl Strategy<Value = TorusDomain> {
    prop_oneof![
        (0.2f64..5.0).prop_map(|s| TorusDomain::square(s).unwrap()),
        (0.2f64..5.0).prop_map(|s| TorusDomain::hexagonal(s).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn torus_metric_axioms(dom in domains(), seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = dom.sample(&mut rng);
        let b = dom.sample(&mut rng);
        let c = dom.sample(&mut rng);
        let dab = dom.distance(a, b);
        let dba = dom.distance(b, a);
        prop_assert!((dab - dba).abs() <= 1e-12 * (1.0 + dab));
        prop_assert!(dom.distance(a, a) == 0.0);
        // Triangle inequality with floating slack.
        prop_assert!(dab <= dom.distance(a, c) + dom.distance(c, b) + 1e-12);
        // Never longer than the direct Euclidean representative.
        prop_assert!(dab <= (a - b).norm() + 1e-12);
    }

    #[test]
    fn reduction_is_idempotent(dom in domains(), x in -20.0f64..20.0, y in -20.0f64..20.0) {
        let p = Vec2::new(x, y);
        let r = dom.reduce(p);
        let rr = dom.reduce(r);
        prop_assert!((r - rr).norm() <= 1e-12 * (1.0 + r.norm()));
        prop_assert!(dom.distance(p, r) <= 1e-9 * (1.0 + p.norm()));
    }

    #[test]
    fn partition_and_edge_symmetry(seed in 0u64..500, n in 2usize..40) {
        let dom = TorusDomain::unit_square();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gens = GeneratorSet::random(&dom, n, &mut rng).unwrap();
        let tess = build_tessellation(&dom, &gens).unwrap();
        prop_assert!((tess.total_area() - 1.0).abs() <= 1e-12);
        for i in 0..n {
            prop_assert!(!tess.edges(i).is_empty());
            for e in tess.edges(i) {
                prop_assert!(e.neighbor != i || e.offset != (0, 0));
                let twin = tess
                    .edges(e.neighbor)
                    .iter()
                    .any(|f| f.neighbor == i && f.offset == (-e.offset.0, -e.offset.1));
                prop_assert!(twin);
            }
        }
    }

    #[test]
    fn second_moment_parallel_axis(seed in 0u64..500, px in -2.0f64..2.0, py in -2.0f64..2.0) {
        // Moment about any point equals the centroid moment plus the area
        // times the squared shift.
        let dom = TorusDomain::unit_square();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gens = GeneratorSet::random(&dom, 6, &mut rng).unwrap();
        let tess = build_tessellation(&dom, &gens).unwrap();
        let poly: Vec<Vec2> = tess.cell_vertices(0).to_vec();
        let area = polygon_area(&poly).unwrap();
        let c = polygon_centroid(&poly).unwrap();
        let m0 = polygon_second_moment(&poly, c).unwrap();
        let p = Vec2::new(px, py);
        let mp = polygon_second_moment(&poly, p).unwrap();
        let expect = m0 + area * (p - c).norm_sq();
        prop_assert!((mp - expect).abs() <= 1e-9 * (1.0 + expect.abs()));
    }

    #[test]
    fn energy_scales_like_length_to_the_fourth(seed in 0u64..200, lambda in 0.3f64..4.0) {
        let base = TorusDomain::unit_square();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gens = GeneratorSet::random(&base, 12, &mut rng).unwrap();
        let tess = build_tessellation(&base, &gens).unwrap();
        let rep = energy(&base, &gens, &tess);

        let dom2 = TorusDomain::square(lambda).unwrap();
        let gens2 = GeneratorSet::new(
            &dom2,
            gens.positions().iter().map(|&p| p * lambda).collect(),
        )
        .unwrap();
        let tess2 = build_tessellation(&dom2, &gens2).unwrap();
        let rep2 = energy(&dom2, &gens2, &tess2);

        prop_assert!((rep2.e - rep.e).abs() <= 1e-10 * rep.e);
        prop_assert!((rep2.f - rep.f * lambda.powi(4)).abs() <= 1e-9 * rep2.f);
        // The regularity measures are scale-free as well.
        let (h1, r1) = (regularity(&tess, 0.005), regularity(&tess2, 0.005));
        prop_assert!(h1.h == r1.h);
        prop_assert!(h1.r_eps == r1.r_eps);
    }
}
