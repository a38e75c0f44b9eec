//! The `𝔅^{α(·),τ(·)}_{p(·),q(·)}` quasi-norm and its equivalent variants.
//!
//! Every variant builds a [`LevelStack`] of `ln|h_v|` and hands it to the
//! shared cube-supremum engine; only the stack and the cube set differ.

use serde::Serialize;
use std::f64::consts::LN_2;

use crate::error::{domain, Error, Result};
use crate::exponent::ExponentField;
use crate::grid::{Grid, GridFunction};
use crate::phi::TransformPair;
use crate::sequence::{cube_regions, region_sup, LevelStack, SpaceParams, StartRule, SupNorm};
use crate::solver::{NormResult, SolveOpts, DEFAULT_TOL};

/// Default tolerance of the `𝔅`-type solves.
pub const BESOV_TOL: f64 = DEFAULT_TOL * 1e-2;

fn check(f: &GridFunction, sp: &SpaceParams, pair: &TransformPair) -> Result<()> {
    sp.validate()?;
    if f.grid != pair.grid {
        return Err(Error::GridMismatch("function and transform pair differ".into()));
    }
    sp.p.check_grid(&f.grid)?;
    if !f.is_finite() {
        return domain("function has non-finite samples");
    }
    Ok(())
}

fn weighted_logs(values: &[f64], v: i32, alpha: &ExponentField) -> Vec<f64> {
    values.iter().zip(alpha.samples()).map(|(a, al)| a.ln() + v as f64 * al * LN_2).collect()
}

/// `ln|2^{vα} φ_v ∗ f|` for `v = 0..=v_max`.
pub fn band_stack(f: &GridFunction, alpha: &ExponentField, pair: &TransformPair) -> Result<LevelStack> {
    let bands = pair.band_projections(f)?;
    let levels = bands.iter().enumerate().map(|(v, b)| weighted_logs(&b.abs(), v as i32, alpha)).collect();
    Ok(LevelStack { first: 0, levels })
}

fn sup_over(stack: &LevelStack, grid: &Grid, sp: &SpaceParams, window: (i32, i32), rule: StartRule) -> Result<SupNorm> {
    if window.0 > window.1 {
        return domain(format!("empty cube window {window:?}"));
    }
    let regions = cube_regions(grid, window, rule)?;
    if regions.iter().all(|r| r.start.max(stack.first) > stack.last()) {
        return domain("no cube in the window has a band inside the available range");
    }
    region_sup(stack, &regions, &sp.p, &sp.q, &sp.tau, SolveOpts::with_tol(BESOV_TOL))
}

pub fn besov_norm_detailed(f: &GridFunction, sp: &SpaceParams, pair: &TransformPair) -> Result<SupNorm> {
    check(f, sp, pair)?;
    let stack = band_stack(f, &sp.alpha, pair)?;
    sup_over(&stack, &f.grid, sp, sp.window, StartRule::VPlus)
}

pub fn besov_norm(f: &GridFunction, sp: &SpaceParams, pair: &TransformPair) -> Result<NormResult> {
    Ok(besov_norm_detailed(f, sp, pair)?.result)
}

/// Whether `(τp − 1)^− ≥ 0`, under which the sharp norm is equivalent.
pub fn sharp_hypothesis(sp: &SpaceParams) -> bool {
    sp.tau.samples().iter().zip(sp.p.samples()).all(|(t, p)| t * p - 1.0 >= 0.0)
}

/// Supremum restricted to `|P| ≤ 1`, inner levels `v ≥ v_P`.
pub fn besov_norm_sharp(f: &GridFunction, sp: &SpaceParams, pair: &TransformPair) -> Result<NormResult> {
    check(f, sp, pair)?;
    let stack = band_stack(f, &sp.alpha, pair)?;
    let window = (sp.window.0.max(0), sp.window.1);
    Ok(sup_over(&stack, &f.grid, sp, window, StartRule::VPlus)?.result)
}

/// Inner levels start at `v_P^+ − γ`; level `−γ` uses `Φ_{−γ}` and every
/// later level, including `0`, uses `φ_v`.
pub fn besov_norm_shifted(f: &GridFunction, sp: &SpaceParams, pair: &TransformPair, gamma: i32) -> Result<NormResult> {
    check(f, sp, pair)?;
    if gamma < 0 {
        return domain("γ must be non-negative");
    }
    if gamma > f.grid.jmax as i32 {
        return domain(format!("γ = {gamma} needs scales beyond the domain side 2^{}", f.grid.jmax));
    }
    if gamma == 0 {
        return besov_norm(f, sp, pair);
    }
    let spec = pair.spectral().spectrum(f);
    let mut levels = Vec::new();
    for v in -gamma..=pair.v_max() {
        let mult = pair.dilated(v, v == -gamma);
        let band = pair.spectral().synthesize_from(&spec, &mult);
        levels.push(weighted_logs(&band.abs(), v, &sp.alpha));
    }
    let stack = LevelStack { first: -gamma, levels };
    Ok(sup_over(&stack, &f.grid, sp, sp.window, StartRule::Shift(gamma))?.result)
}

fn peetre_inputs(f: &GridFunction, sp: &SpaceParams, pair: &TransformPair, v: i32, a: f64) -> Result<Vec<f64>> {
    check(f, sp, pair)?;
    if !(a > 0.0) {
        return domain("Peetre exponent a must be positive");
    }
    let band = pair.band_project(f, v)?;
    Ok(band.abs().iter().zip(sp.alpha.samples()).map(|(b, al)| b * (v as f64 * al).exp2()).collect())
}

fn peetre_from(g: &[f64], grid: &Grid, v: i32, a: f64, early_exit: bool) -> Vec<f64> {
    let scale = (v as f64).exp2();
    let mut order: Vec<usize> = (0..g.len()).collect();
    order.sort_by(|&x, &y| g[y].total_cmp(&g[x]));
    (0..grid.len())
        .map(|x| {
            let mut best = 0.0f64;
            for &y in &order {
                // the weight is at most 1, so no later y can beat `best`
                if early_exit && g[y] <= best {
                    break;
                }
                let w = (1.0 + scale * grid.periodic_distance(x, y)).powf(-a);
                best = best.max(g[y] * w);
            }
            best
        })
        .collect()
}

/// `sup_y 2^{vα(y)} |φ_v ∗ f(y)| / (1 + 2^v |x − y|)^a`, scanning `y` in
/// decreasing order of the numerator and stopping once it cannot win.
pub fn peetre_maximal(f: &GridFunction, sp: &SpaceParams, pair: &TransformPair, v: i32, a: f64) -> Result<GridFunction> {
    let g = peetre_inputs(f, sp, pair, v, a)?;
    GridFunction::from_real(&f.grid, &peetre_from(&g, &f.grid, v, a, true))
}

/// Exhaustive `y`-scan, kept as the oracle for [`peetre_maximal`].
pub fn peetre_maximal_full(f: &GridFunction, sp: &SpaceParams, pair: &TransformPair, v: i32, a: f64) -> Result<GridFunction> {
    let g = peetre_inputs(f, sp, pair, v, a)?;
    GridFunction::from_real(&f.grid, &peetre_from(&g, &f.grid, v, a, false))
}

/// Order `m` of the η-kernel estimate used for the Peetre threshold.
pub fn default_kernel_order(dim: usize) -> f64 {
    2.0 * dim as f64 + 2.0
}

/// `m τ^+ / (τp)^−`; infinite when `(τp)^− = 0 < τ^+`.
pub fn peetre_threshold(sp: &SpaceParams, m: f64) -> f64 {
    let tp = sp.tau_p_inf();
    let tau_plus = sp.tau.sup();
    if tau_plus <= 0.0 {
        0.0
    } else if tp <= 0.0 {
        f64::INFINITY
    } else {
        m * tau_plus / tp
    }
}

/// Twice the threshold, but never below `2n/p^−` so that `τ ≡ 0` still gets a
/// usable decay.
pub fn default_peetre_a(sp: &SpaceParams) -> f64 {
    let n = sp.grid().dim as f64;
    let m = default_kernel_order(sp.grid().dim);
    let floor = n / sp.p.inf();
    let t = peetre_threshold(sp, m);
    if t.is_finite() {
        2.0 * t.max(floor)
    } else {
        2.0 * (m + floor)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PeetreNorm {
    pub result: NormResult,
    pub a: f64,
    pub threshold: f64,
    /// `a` does not exceed the threshold, so equivalence is not guaranteed.
    pub below_threshold: bool,
}

/// `besov_norm` with `2^{vα} φ_v ∗ f` replaced by the Peetre maximal function.
/// `a = None` uses [`default_peetre_a`].
pub fn besov_norm_peetre(f: &GridFunction, sp: &SpaceParams, pair: &TransformPair, a: Option<f64>) -> Result<PeetreNorm> {
    check(f, sp, pair)?;
    let a = a.unwrap_or_else(|| default_peetre_a(sp));
    let threshold = peetre_threshold(sp, default_kernel_order(f.grid.dim));
    let mut levels = Vec::new();
    for v in 0..=pair.v_max() {
        let g = peetre_inputs(f, sp, pair, v, a)?;
        levels.push(peetre_from(&g, &f.grid, v, a, true).into_iter().map(f64::ln).collect());
    }
    let stack = LevelStack { first: 0, levels };
    let result = sup_over(&stack, &f.grid, sp, sp.window, StartRule::VPlus)?.result;
    Ok(PeetreNorm { result, a, threshold, below_threshold: a <= threshold })
}

/// Empirical constant `c` of `2^{v(α + n(τ − 1/p))} |φ_v ∗ f(x)| ≤ c ‖f‖_𝔅`.
pub fn holder_growth_check(f: &GridFunction, sp: &SpaceParams, pair: &TransformPair) -> Result<f64> {
    let norm = besov_norm(f, sp, pair)?.value;
    if norm == 0.0 {
        return domain("growth ratio needs a function with nonzero norm");
    }
    let n = f.grid.dim as f64;
    let bands = pair.band_projections(f)?;
    let mut best = 0.0f64;
    for (v, b) in bands.iter().enumerate() {
        for (i, z) in b.values.iter().enumerate() {
            let e = sp.alpha.at(i) + n * (sp.tau.at(i) - 1.0 / sp.p.at(i));
            best = best.max((v as f64 * e).exp2() * z.norm());
        }
    }
    Ok(best / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::{ExponentSpec, Role};
    use crate::oracle::{self, Scalars};
    use crate::phi::{band_limited_random, single_band};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (Grid, TransformPair) {
        let g = Grid::new(1, 3, 7).unwrap();
        let pair = TransformPair::new(&g).unwrap();
        (g, pair)
    }

    fn variable(g: &Grid) -> SpaceParams {
        let f = |role, s: ExponentSpec| ExponentField::from_spec(g, role, &s).unwrap();
        SpaceParams::new(
            f(Role::Smoothness, ExponentSpec::bump(0.5, 0.8, 3.0, 2.0)),
            f(Role::Tau, ExponentSpec::bump(0.2, 0.1, 5.0, 1.5)),
            f(Role::Integrability, ExponentSpec::bump(1.5, 2.5, 2.0, 2.0)),
            f(Role::Summability, ExponentSpec::bump(1.2, 2.0, 6.0, 2.0)),
        )
        .unwrap()
    }

    fn func(g: &Grid, seed: u64) -> GridFunction {
        band_limited_random(g, g.jfine as i32 - 2, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn zero_function() {
        let (g, pair) = setup();
        let sp = variable(&g);
        let z = GridFunction::zeros(&g);
        assert_eq!(besov_norm(&z, &sp, &pair).unwrap().value, 0.0);
        assert_eq!(besov_norm_sharp(&z, &sp, &pair).unwrap().value, 0.0);
        assert_eq!(besov_norm_shifted(&z, &sp, &pair, 1).unwrap().value, 0.0);
        assert_eq!(besov_norm_peetre(&z, &sp, &pair, None).unwrap().result.value, 0.0);
        assert!(peetre_maximal(&z, &sp, &pair, 2, 3.0).unwrap().is_zero());
        assert!(holder_growth_check(&z, &sp, &pair).is_err());
    }

    #[test]
    fn constant_exponents_match_scalar_oracle() {
        let (g, pair) = setup();
        for (k, s) in [(0.5, 0.2, 2.0, 1.5), (1.0, 0.0, 1.0, 2.0), (0.3, 0.6, 3.0, 1.0)].iter().enumerate() {
            let sc = Scalars { alpha: s.0, tau: s.1, p: s.2, q: s.3 };
            let sp = SpaceParams::constant(&g, sc.alpha, sc.tau, sc.p, sc.q).unwrap();
            let f = func(&g, 40 + k as u64);
            let a = besov_norm(&f, &sp, &pair).unwrap().value;
            let b = oracle::besov_norm(&f, &pair.profiles, pair.v_max(), sc, sp.window);
            assert!((a - b).abs() <= 1e-8 * b, "{a} vs {b}");
        }
    }

    #[test]
    fn tau_zero_is_classical_besov() {
        let (g, pair) = setup();
        let sp = SpaceParams::constant(&g, 0.7, 0.0, 2.0, 1.5).unwrap();
        let f = func(&g, 9);
        let a = besov_norm(&f, &sp, &pair).unwrap().value;
        let b = oracle::classical_besov(&f, &pair.profiles, pair.v_max(), 0.7, 2.0, 1.5);
        assert!((a - b).abs() <= 1e-8 * b, "{a} vs {b}");
    }

    #[test]
    fn variant_orderings() {
        let (g, pair) = setup();
        let sp = variable(&g);
        for seed in 0..3 {
            let f = func(&g, seed);
            let base = besov_norm(&f, &sp, &pair).unwrap().value;
            let sharp = besov_norm_sharp(&f, &sp, &pair).unwrap().value;
            let pe = besov_norm_peetre(&f, &sp, &pair, None).unwrap();
            assert!(sharp <= base);
            assert!(base <= pe.result.value * (1.0 + 1e-12));
            assert!(!pe.below_threshold);
            let sh = besov_norm_shifted(&f, &sp, &pair, 1).unwrap().value;
            assert!(sh > 0.0 && sh.is_finite());
        }
    }

    #[test]
    fn shifted_zero_is_base() {
        let (g, pair) = setup();
        let sp = variable(&g);
        let f = func(&g, 2);
        assert_eq!(besov_norm_shifted(&f, &sp, &pair, 0).unwrap().value, besov_norm(&f, &sp, &pair).unwrap().value);
        assert!(besov_norm_shifted(&f, &sp, &pair, 4).is_err());
        assert!(besov_norm_shifted(&f, &sp, &pair, -1).is_err());
    }

    #[test]
    fn peetre_fast_matches_full_and_dominates() {
        let (g, pair) = setup();
        let sp = variable(&g);
        let f = func(&g, 17);
        for v in [0, 3, 5] {
            let fast = peetre_maximal(&f, &sp, &pair, v, 2.5).unwrap();
            let full = peetre_maximal_full(&f, &sp, &pair, v, 2.5).unwrap();
            assert_eq!(fast.values, full.values);
            let b = pair.band_project(&f, v).unwrap();
            for i in 0..g.len() {
                let own = (v as f64 * sp.alpha.at(i)).exp2() * b.values[i].norm();
                assert!(fast.values[i].re >= own);
            }
        }
    }

    #[test]
    fn peetre_2d_fast_matches_full() {
        let g = Grid::new(2, 1, 4).unwrap();
        let pair = TransformPair::new(&g).unwrap();
        let sp = SpaceParams::constant(&g, 0.5, 0.1, 2.0, 2.0).unwrap();
        let f = func(&g, 4);
        let fast = peetre_maximal(&f, &sp, &pair, 2, 3.0).unwrap();
        let full = peetre_maximal_full(&f, &sp, &pair, 2, 3.0).unwrap();
        assert_eq!(fast.values, full.values);
    }

    #[test]
    fn threshold_flag() {
        let (g, pair) = setup();
        let sp = SpaceParams::constant(&g, 0.5, 0.25, 2.0, 2.0).unwrap();
        // m τ⁺/(τp)⁻ = 4 · 0.25 / 0.5 = 2
        assert!((peetre_threshold(&sp, 4.0) - 2.0).abs() < 1e-15);
        let f = func(&g, 1);
        assert!(besov_norm_peetre(&f, &sp, &pair, Some(1.0)).unwrap().below_threshold);
        assert!(!besov_norm_peetre(&f, &sp, &pair, Some(5.0)).unwrap().below_threshold);
    }

    #[test]
    fn growth_single_band_by_enumeration() {
        let (g, pair) = setup();
        let sp = SpaceParams::constant(&g, 0.5, 0.3, 2.0, 1.0).unwrap();
        let f = single_band(&g, 3, &mut ChaCha8Rng::seed_from_u64(8));
        let c = holder_growth_check(&f, &sp, &pair).unwrap();
        // only bands 2..4 see the function; on band 3 it is the identity
        let norm = besov_norm(&f, &sp, &pair).unwrap().value;
        let mut best = 0.0f64;
        for v in 2..=4 {
            let b = pair.band_project(&f, v).unwrap();
            let e = (v as f64 * (0.5 + 0.3 - 0.5)).exp2();
            best = best.max(b.max_abs() * e);
        }
        assert!((c - best / norm).abs() < 1e-12 * c);
        let c2 = holder_growth_check(&f.scaled(2.0), &sp, &pair).unwrap();
        assert!((c - c2).abs() < 1e-9 * c);
    }

    #[test]
    fn window_monotone_and_plateau() {
        let (g, pair) = setup();
        let sp = variable(&g);
        let f = func(&g, 6);
        let mut last = 0.0;
        let mut values = Vec::new();
        for lo in (g.min_level()..=0).rev() {
            let s = sp.clone().with_window(lo, g.max_level()).unwrap();
            let x = besov_norm(&f, &s, &pair).unwrap().value;
            assert!(x >= last);
            last = x;
            values.push(x);
        }
        // enlarging from the full window again changes nothing
        assert_eq!(values.last(), Some(&last));
    }

    #[test]
    fn two_dimensional_oracle() {
        let g = Grid::new(2, 1, 4).unwrap();
        let pair = TransformPair::new(&g).unwrap();
        let sc = Scalars { alpha: 0.4, tau: 0.2, p: 2.0, q: 1.5 };
        let sp = SpaceParams::constant(&g, sc.alpha, sc.tau, sc.p, sc.q).unwrap();
        let f = func(&g, 21);
        let a = besov_norm(&f, &sp, &pair).unwrap().value;
        let b = oracle::besov_norm(&f, &pair.profiles, pair.v_max(), sc, sp.window);
        assert!((a - b).abs() <= 1e-8 * b, "{a} vs {b}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn homogeneous(seed in 0u64..1000, c in 0.01f64..100.0) {
            let (g, pair) = setup();
            let sp = variable(&g);
            let f = func(&g, seed);
            let a = besov_norm(&f, &sp, &pair).unwrap().value;
            let b = besov_norm(&f.scaled_complex(Complex64::new(0.0, c)), &sp, &pair).unwrap().value;
            prop_assert!((b - c * a).abs() <= 1e-9 * c * a);
        }
    }
}
