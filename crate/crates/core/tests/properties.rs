use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use varbesov::atoms::{atomize, Window, DEFAULT_GAMMA};
use varbesov::besov::{besov_norm, besov_norm_peetre, besov_norm_sharp};
use varbesov::grid::{indicator, DyadicCube, Grid, GridFunction};
use varbesov::harness::{run_lemma_check, Config, Harness, LemmaId};
use varbesov::phi::{band_limited_random, TransformPair};
use varbesov::sequence::{b_norm, SpaceParams};

fn small() -> Grid {
    Grid::new(1, 1, 5).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(24) })]

    #[test]
    fn dyadic_cubes_partition_the_domain(v in -1i32..5) {
        let g = small();
        let mut cover = vec![0.0; g.len()];
        for m in 0..g.positions_per_axis(v) as i64 {
            let chi = indicator(&DyadicCube::new(v, &[m]), &g).unwrap();
            for (c, x) in cover.iter_mut().zip(&chi.values) {
                *c += x.re;
            }
        }
        prop_assert!(cover.iter().all(|c| (*c - 1.0).abs() < 1e-15));
    }

    #[test]
    fn sample_lies_in_its_cube(idx in 0usize..64, v in -1i32..5) {
        let g = small();
        let q = g.cube_containing(idx, v);
        prop_assert!(q.sample_indices(&g).contains(&idx));
    }

    #[test]
    fn reconstruction_on_band_limited_functions(seed in 0u64..10_000) {
        let g = small();
        let pair = TransformPair::new(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let top = rng.gen_range(0..=g.jfine as i32 - 2);
        let f = band_limited_random(&g, top, &mut rng);
        let back = pair.synthesize(&pair.analyze(&f).unwrap()).unwrap();
        prop_assert!(back.sub(&f).unwrap().l2_norm() <= 1e-8 * f.l2_norm());
    }

    #[test]
    fn analysis_is_linear(seed in 0u64..10_000, c in -5.0f64..5.0) {
        let g = small();
        let pair = TransformPair::new(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = band_limited_random(&g, 2, &mut rng);
        let a = pair.analyze(&f.scaled(c)).unwrap();
        let b = pair.analyze(&f).unwrap().scaled(c.into());
        prop_assert!(a.max_abs_diff(&b) <= 1e-12 * (1.0 + c.abs()) * f.l2_norm());
    }

    #[test]
    fn atomization_is_homogeneous(seed in 0u64..10_000, c in 0.1f64..10.0) {
        let g = small();
        let pair = TransformPair::new(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = band_limited_random(&g, 2, &mut rng);
        let w = Window::Bump { gamma: DEFAULT_GAMMA };
        let (l1, a1) = atomize(&f, &pair, w, 1, -1).unwrap();
        let (l2, a2) = atomize(&f.scaled(c), &pair, w, 1, -1).unwrap();
        prop_assert_eq!(a1.atoms.len(), a2.atoms.len());
        prop_assert!(l1.scaled(c.into()).max_abs_diff(&l2) <= 1e-12 * c * f.l2_norm());
    }

    #[test]
    fn norm_variants_are_ordered(seed in 0u64..10_000, alpha in 0.2f64..1.5, tau in 0.0f64..0.4, p in 1.2f64..4.0, q in 1.0f64..4.0) {
        let g = small();
        let pair = TransformPair::new(&g).unwrap();
        let sp = SpaceParams::constant(&g, alpha, tau, p, q).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = band_limited_random(&g, 2, &mut rng);
        let base = besov_norm(&f, &sp, &pair).unwrap().value;
        let sharp = besov_norm_sharp(&f, &sp, &pair).unwrap().value;
        let peetre = besov_norm_peetre(&f, &sp, &pair, None).unwrap().result.value;
        prop_assert!(sharp <= base * (1.0 + 1e-9));
        prop_assert!(base <= peetre * (1.0 + 1e-9));
    }

    #[test]
    fn sequence_norm_of_analysis_is_homogeneous(seed in 0u64..10_000, c in 0.1f64..10.0) {
        let g = small();
        let pair = TransformPair::new(&g).unwrap();
        let sp = SpaceParams::constant(&g, 0.7, 0.2, 2.0, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = band_limited_random(&g, 2, &mut rng);
        let a = b_norm(&pair.analyze(&f).unwrap(), &sp, &g).unwrap().value;
        let b = b_norm(&pair.analyze(&f.scaled(c)).unwrap(), &sp, &g).unwrap().value;
        prop_assert!((b - c * a).abs() <= 1e-6 * c * a);
    }
}

#[test]
fn zero_function_has_zero_coefficients() {
    let g = small();
    let pair = TransformPair::new(&g).unwrap();
    let zero = GridFunction::from_real(&g, &vec![0.0; g.len()]).unwrap();
    assert!(pair.analyze(&zero).unwrap().is_zero());
}

#[test]
fn phi_transform_is_bounded_on_the_default_grid() {
    let mut c = Config::new(Grid::default_for_dim(1));
    c.corpus.size = 10;
    c.corpus.sequences = 20;
    let r = run_lemma_check(&Harness::new(c).unwrap(), LemmaId::PhiTran).unwrap();
    println!("phi_tran: c = {:.4e} over {} cases", r.empirical_constant, r.ratios.len());
    assert!(r.pass, "{:?}", r.conditions);
}
