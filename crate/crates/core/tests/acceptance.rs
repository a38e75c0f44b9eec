//! Acceptance battery on the default grid (n = 1, jmax = 3, jfine = 7).
//!
//! Every criterion prints one `PASS`/`FAIL` line and then asserts it.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use varbesov::exponent::{conjugate_exponent, ExponentField, ExponentSpec, Role};
use varbesov::grid::{indicator, DyadicCube, Grid, GridFunction};
use varbesov::harness::{run_embedding, run_lemma_check, run_oracle_reduction, CheckReport, Config, EmbeddingId, Harness, LemmaId};
use varbesov::modular::{luxemburg_norm, modular, unit_ball_check, MixedTerms};
use varbesov::phi::TransformPair;
use varbesov::sequence::indicator_norm;
use varbesov::solver::{bisect_unit_level, SolveOpts};

fn grid() -> Grid {
    Grid::default_for_dim(1)
}

fn harness(functions: usize, sequences: usize) -> Harness {
    let mut c = Config::new(grid());
    c.corpus.size = functions;
    c.corpus.sequences = sequences;
    Harness::new(c).unwrap()
}

fn verdict(n: u32, name: &str, ok: bool, detail: String) {
    println!("{} criterion {n:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} ({name}) failed: {detail}");
}

fn summary(r: &CheckReport) -> String {
    let failed: Vec<&str> = r.conditions.iter().filter(|(_, ok)| !ok).map(|(w, _)| w.as_str()).collect();
    format!(
        "c = {:.4e} over {} cases (bound {:.1e}), refinement {}{}",
        r.empirical_constant,
        r.ratios.len(),
        r.bound,
        r.refinement
            .as_ref()
            .map(|x| format!("{:.4e} -> {:.4e} ({:.2}%)", x.coarse, x.fine, 100.0 * x.relative_change))
            .unwrap_or_else(|| "n/a".into()),
        if failed.is_empty() { String::new() } else { format!(", failed: {failed:?}") }
    )
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn random_p(rng: &mut ChaCha8Rng, g: &Grid, lo: f64, hi: f64) -> ExponentField {
    let c0 = rng.gen_range(lo..hi);
    let c1 = rng.gen_range(lo..hi) - c0;
    let spec = ExponentSpec::bump(c0, c1, rng.gen_range(0.0..g.side()), rng.gen_range(0.5..3.0));
    ExponentField::from_spec(g, Role::Integrability, &spec).unwrap()
}

#[test]
fn criterion_01_luxemburg_closed_form() {
    let g = grid();
    let mut worst = 0.0f64;
    for p in [1.0, 2.0, 3.0, 10.0] {
        let pf = ExponentField::constant(&g, Role::Integrability, p).unwrap();
        // |B| = 1/4, 1, 4 in one dimension
        for (v, vol) in [(2, 0.25), (0, 1.0), (-2, 4.0)] {
            let q = DyadicCube::new(v, &[1]);
            let expect = f64::powf(vol, 1.0 / p);
            let chi = indicator(&q, &g).unwrap();
            worst = worst.max(rel(luxemburg_norm(&chi, &pf, 1e-13).unwrap().value, expect));
            worst = worst.max(rel(indicator_norm(&q, &pf).unwrap(), expect));
        }
    }
    verdict(1, "Luxemburg norm of indicators", worst <= 1e-9, format!("max rel. error {worst:.3e}"));
}

#[test]
fn criterion_02_unit_ball_property() {
    let g = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut agree, mut counted, mut skipped) = (0, 0, 0);
    for _ in 0..1000 {
        let p = random_p(&mut rng, &g, 0.5, 6.0);
        let scale = rng.gen_range(-1.5f64..1.5).exp();
        let f = GridFunction::from_real(&g, &(0..g.len()).map(|_| scale * rng.gen_range(-1.0..1.0)).collect::<Vec<_>>()).unwrap();
        let rho = modular(&f, &p).unwrap();
        if (rho - 1.0).abs() < 1e-8 {
            skipped += 1;
            continue;
        }
        let (norm_le, mod_le) = unit_ball_check(&f, &p).unwrap();
        counted += 1;
        agree += usize::from(norm_le == mod_le);
    }
    verdict(
        2,
        "unit-ball property",
        agree == counted && counted > 0,
        format!("{agree}/{counted} agree, {skipped} in the boundary band"),
    );
}

#[test]
fn criterion_03_mixed_norm_routes() {
    let g = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let p = random_p(&mut rng, &g, 0.6, 5.0);
        let q = ExponentField::from_spec(&g, Role::Summability, &ExponentSpec::bump(rng.gen_range(0.5..4.0), rng.gen_range(-0.4..2.0), 3.0, 2.0))
            .unwrap();
        let levels = rng.gen_range(1..6);
        let scale = rng.gen_range(-2.0f64..2.0).exp();
        let fs: Vec<GridFunction> = (0..levels)
            .map(|_| {
                GridFunction::new(
                    &g,
                    (0..g.len()).map(|_| Complex64::new(scale * rng.gen_range(-1.0..1.0), scale * rng.gen_range(-1.0..1.0))).collect(),
                )
                .unwrap()
            })
            .collect();
        let terms = MixedTerms::from_functions(&fs, &p, &q).unwrap();
        worst = worst.max(rel(terms.modular(1e-14).unwrap(), terms.modular_simplified(1e-14).unwrap()));
        // norm by the nested solve vs bisection on the simplified modular
        let nested = terms.norm_general(SolveOpts::with_tol(1e-13)).unwrap().value;
        let bisected = bisect_unit_level(
            |mu| {
                let scaled: Vec<GridFunction> = fs.iter().map(|f| f.scaled(1.0 / mu)).collect();
                MixedTerms::from_functions(&scaled, &p, &q).unwrap().modular_simplified(1e-14).unwrap()
            },
            1e-13,
        )
        .unwrap();
        worst = worst.max(rel(nested, bisected));
    }
    verdict(3, "mixed-norm semimodular vs simplified route", worst <= 1e-8, format!("max rel. deviation {worst:.3e}"));
}

#[test]
fn criterion_04_duality_product() {
    let g = grid();
    let mut exact = 0.0f64;
    // p ∈ (1, ∞): at p = 1 the conjugate is the capped ∞ sentinel
    for p in [1.25, 1.5, 2.0, 3.0, 10.0] {
        let pf = ExponentField::constant(&g, Role::Integrability, p).unwrap();
        let pc = conjugate_exponent(&pf).unwrap();
        for v in g.min_level()..=g.max_level() {
            let q = DyadicCube::new(v, &[0]);
            let prod = indicator_norm(&q, &pf).unwrap() * indicator_norm(&q, &pc).unwrap();
            exact = exact.max(rel(prod, q.volume(1)));
        }
    }
    let r = run_lemma_check(&harness(20, 50), LemmaId::Duality).unwrap();
    let ok = exact <= 1e-9 && r.pass;
    verdict(4, "duality product", ok, format!("constant p: max rel. error {exact:.3e}; variable p: {}", summary(&r)));
}

#[test]
fn criterion_05_calderon_and_reconstruction() {
    let h = harness(20, 1);
    let pair = TransformPair::new(&h.config.grid).unwrap();
    let residual = pair.calderon_residual();
    let mut worst = 0.0f64;
    for f in &h.corpus.functions {
        let back = pair.synthesize(&pair.analyze(f).unwrap()).unwrap();
        worst = worst.max(back.sub(f).unwrap().l2_norm() / f.l2_norm());
    }
    verdict(
        5,
        "Calderón identity and T∘S reconstruction",
        residual <= 1e-12 && worst <= 1e-8,
        format!("residual {residual:.3e}, reconstruction error {worst:.3e}"),
    );
}

#[test]
fn criterion_06_constant_exponent_collapse() {
    let r = run_oracle_reduction(&harness(20, 100)).unwrap();
    verdict(6, "constant-exponent collapse", r.pass, format!("max rel. deviation {:.3e} over {} comparisons", r.empirical_constant, r.ratios.len()));
}

#[test]
fn criterion_07_lambda_star_two_sided() {
    let r = run_lemma_check(&harness(1, 50), LemmaId::LamdaEqui).unwrap();
    verdict(7, "λ* two-sided bound", r.pass, summary(&r));
}

#[test]
fn criterion_08_norm_variants() {
    let r = run_lemma_check(&harness(20, 1), LemmaId::NormVariants).unwrap();
    verdict(8, "norm-variant equivalences", r.pass, summary(&r));
}

#[test]
fn criterion_09_coefficient_bound() {
    let r = run_lemma_check(&harness(1, 50), LemmaId::KeyLemmaSection3).unwrap();
    verdict(9, "coefficient bound", r.pass, summary(&r));
}

#[test]
fn criterion_10_embeddings() {
    let h = harness(20, 50);
    let mut ok = true;
    let mut parts = Vec::new();
    for id in [EmbeddingId::ElemQ, EmbeddingId::ElemAlpha, EmbeddingId::Sobolev, EmbeddingId::Further] {
        let r = run_embedding(&h, id).unwrap();
        ok &= r.pass;
        if id == EmbeddingId::ElemQ {
            ok &= r.ratios.iter().all(|x| x.ratio <= 1.0 + 1e-9);
        }
        parts.push(format!("{id}: {}", summary(&r)));
    }
    verdict(10, "embeddings", ok, parts.join("; "));
}

#[test]
fn criterion_11_atomic_round_trip() {
    let r = run_lemma_check(&harness(20, 1), LemmaId::Atomic).unwrap();
    verdict(11, "atomic round trip", r.pass, summary(&r));
}

#[test]
fn criterion_12_kernel_lemmas() {
    let h = harness(20, 1);
    let mut ok = true;
    let mut parts = Vec::new();
    for id in [LemmaId::Dhr, LemmaId::RTrick, LemmaId::DhhrEstimate, LemmaId::AlmHasto, LemmaId::KeyEstimate1, LemmaId::KeyLemma] {
        let r = run_lemma_check(&h, id).unwrap();
        ok &= r.pass;
        parts.push(format!("{id}: {}", summary(&r)));
    }
    verdict(12, "kernel lemma suite", ok, parts.join("; "));
}
