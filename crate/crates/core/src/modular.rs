//! Modulars, Luxemburg norms and the mixed `ℓ^{q(·)}(L^{p(·)})` norm.
//!
//! All solves run on logarithms of the samples, so very small or very large
//! values and exponents up to the cap stay well conditioned.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::exponent::{ExponentField, P_CAP};
use crate::grid::{cubes_in_window, GridFunction};
use crate::solver::{solve_logsum, solve_unit_level, LogSum, NormResult, SolveOpts};

fn ln_abs(f: &GridFunction) -> Result<Vec<f64>> {
    if !f.is_finite() {
        return domain("function has non-finite samples");
    }
    Ok(f.values.iter().map(|z| z.norm().ln()).collect())
}

fn lse(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `Σ_x |f(x)|^{p(x)} Δ`.
pub fn modular(f: &GridFunction, p: &ExponentField) -> Result<f64> {
    p.check_grid(&f.grid)?;
    if !f.is_finite() {
        return domain("function has non-finite samples");
    }
    let delta = f.grid.delta();
    let mut s = 0.0;
    for (z, &px) in f.values.iter().zip(p.samples()) {
        let a = z.norm();
        if a > 0.0 {
            s += a.powf(px.min(P_CAP));
        }
    }
    Ok(s * delta)
}

pub fn luxemburg_norm(f: &GridFunction, p: &ExponentField, tol: f64) -> Result<NormResult> {
    p.check_grid(&f.grid)?;
    if tol <= 0.0 {
        return domain("tolerance must be positive");
    }
    let la = ln_abs(f)?;
    luxemburg_from_logs(&la, &p.capped(), f.grid.delta().ln(), SolveOpts::with_tol(tol))
}

/// Luxemburg norm from `ln|g|` samples, exponents and `ln Δ`.
pub fn luxemburg_from_logs(la: &[f64], p: &[f64], ln_delta: f64, opts: SolveOpts) -> Result<NormResult> {
    let p0 = p.first().copied().unwrap_or(1.0);
    if p.iter().all(|&x| x == p0) {
        // closed form for constant exponent
        let s = lse(la.iter().map(|&a| p0 * a));
        if s == f64::NEG_INFINITY {
            return Ok(NormResult::zero(opts.tol));
        }
        return Ok(NormResult::exact(((ln_delta + s) / p0).exp(), opts.tol));
    }
    let c = la.iter().zip(p).map(|(&a, &px)| ln_delta + px * a).collect();
    solve_logsum(&LogSum::new(c, p.to_vec()), opts)
}

/// `(‖f‖ ≤ 1, ϱ(f) ≤ 1)`.
pub fn unit_ball_check(f: &GridFunction, p: &ExponentField) -> Result<(bool, bool)> {
    let n = luxemburg_norm(f, p, crate::solver::DEFAULT_TOL)?;
    Ok((n.value <= 1.0, modular(f, p)? <= 1.0))
}

/// One level of a mixed family: `ln|g_v|` with the exponents at the same samples.
#[derive(Debug, Clone, Default)]
pub struct LevelTerms {
    pub la: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl LevelTerms {
    pub fn is_zero(&self) -> bool {
        self.la.iter().all(|&a| a == f64::NEG_INFINITY)
    }
}

/// A finite family `(g_v)` ready for the mixed modular or norm.
#[derive(Debug, Clone)]
pub struct MixedTerms {
    pub levels: Vec<LevelTerms>,
    pub ln_delta: f64,
    /// `p` is the infinity sentinel everywhere: use the `ℓ^q(L^∞)` branch.
    pub infinite_p: bool,
}

fn constant_of(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let mut first = None;
    for x in xs {
        match first {
            None => first = Some(x),
            Some(f) if f != x => return None,
            _ => {}
        }
    }
    first
}

impl MixedTerms {
    pub fn new(levels: Vec<LevelTerms>, ln_delta: f64) -> Self {
        let infinite_p = levels.iter().flat_map(|l| l.p.iter()).all(|&p| p >= P_CAP)
            && levels.iter().any(|l| !l.p.is_empty());
        let levels = levels
            .into_iter()
            .filter(|l| !l.is_zero())
            .map(|mut l| {
                // drop zero samples once, every solve below ignores them anyway
                let keep: Vec<usize> = (0..l.la.len()).filter(|&i| l.la[i] > f64::NEG_INFINITY).collect();
                l.la = keep.iter().map(|&i| l.la[i]).collect();
                l.p = keep.iter().map(|&i| l.p[i].min(P_CAP)).collect();
                l.q = keep.iter().map(|&i| l.q[i]).collect();
                l
            })
            .collect();
        MixedTerms { levels, ln_delta, infinite_p }
    }

    pub fn from_functions(fs: &[GridFunction], p: &ExponentField, q: &ExponentField) -> Result<Self> {
        let Some(first) = fs.first() else {
            return Ok(MixedTerms { levels: vec![], ln_delta: 0.0, infinite_p: false });
        };
        p.check_grid(&first.grid)?;
        q.check_grid(&first.grid)?;
        let mut levels = Vec::with_capacity(fs.len());
        for f in fs {
            first.check_same_grid(f)?;
            levels.push(LevelTerms { la: ln_abs(f)?, p: p.samples().to_vec(), q: q.samples().to_vec() });
        }
        Ok(MixedTerms::new(levels, first.grid.delta().ln()))
    }

    fn q_constant(&self) -> Option<f64> {
        constant_of(self.levels.iter().flat_map(|l| l.q.iter().copied()))
    }

    /// `ln λ_v` for the level at outer scale `s = ln μ`, with `d ln λ_v / ds`.
    fn level_log(&self, level: &LevelTerms, s: f64, tol: f64) -> Result<(f64, f64)> {
        if self.infinite_p {
            let (mut best, mut slope) = (f64::NEG_INFINITY, 0.0);
            for (a, q) in level.la.iter().zip(&level.q) {
                let v = q * (a - s);
                if v > best {
                    best = v;
                    slope = -q;
                }
            }
            return Ok((best, slope));
        }
        let r: Vec<f64> = level.p.iter().zip(&level.q).map(|(p, q)| p / q).collect();
        let c: Vec<f64> = level.la.iter().zip(&level.p).map(|(a, p)| self.ln_delta + p * (a - s)).collect();
        let ls = LogSum::new(c, r);
        let t = solve_logsum(&ls, SolveOpts::with_tol(tol))?.value.ln();
        let (sum_rt, sum_pt, _) = ls.weighted(t, &level.p);
        Ok((t, -sum_pt / sum_rt))
    }

    /// `Σ_v λ_v` at `μ = 1`.
    pub fn modular(&self, tol: f64) -> Result<f64> {
        let mut total = 0.0;
        for level in &self.levels {
            total += self.level_log(level, 0.0, tol)?.0.exp();
        }
        Ok(total)
    }

    /// `Σ_v ‖ |g_v|^{q} ‖_{p/q}`, the simplified route for `q^+ < ∞`.
    pub fn modular_simplified(&self, tol: f64) -> Result<f64> {
        let mut total = 0.0;
        for level in &self.levels {
            if self.infinite_p {
                total += level.la.iter().zip(&level.q).map(|(a, q)| (q * a).exp()).fold(0.0, f64::max);
                continue;
            }
            let la: Vec<f64> = level.la.iter().zip(&level.q).map(|(a, q)| q * a).collect();
            let r: Vec<f64> = level.p.iter().zip(&level.q).map(|(p, q)| p / q).collect();
            total += luxemburg_from_logs(&la, &r, self.ln_delta, SolveOpts::with_tol(tol))?.value;
        }
        Ok(total)
    }

    fn level_norm_log(&self, level: &LevelTerms, tol: f64) -> Result<f64> {
        if self.infinite_p {
            return Ok(level.la.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        }
        Ok(luxemburg_from_logs(&level.la, &level.p, self.ln_delta, SolveOpts::with_tol(tol))?.value.ln())
    }

    pub fn norm(&self, opts: SolveOpts) -> Result<NormResult> {
        if self.levels.is_empty() {
            return Ok(NormResult::zero(opts.tol));
        }
        if let Some(q) = self.q_constant() {
            let inner = (opts.tol * 1e-2).max(1e-15);
            let mut logs = Vec::with_capacity(self.levels.len());
            for level in &self.levels {
                logs.push(q * self.level_norm_log(level, inner)?);
            }
            return Ok(NormResult::exact((lse(logs.into_iter()) / q).exp(), opts.tol));
        }
        self.norm_general(opts)
    }

    /// Nested Newton solve without the constant-`q` shortcut.
    pub fn norm_general(&self, opts: SolveOpts) -> Result<NormResult> {
        if self.levels.is_empty() {
            return Ok(NormResult::zero(opts.tol));
        }
        let inner = (opts.tol * 1e-3).max(1e-14);
        let qs = self.levels.iter().flat_map(|l| l.q.iter().copied());
        let qmin = qs.clone().fold(f64::INFINITY, f64::min);
        let qmax = qs.fold(f64::NEG_INFINITY, f64::max);
        solve_unit_level(
            |s| {
                let mut ts = Vec::with_capacity(self.levels.len());
                for level in &self.levels {
                    ts.push(self.level_log(level, s, inner)?);
                }
                let g = lse(ts.iter().map(|t| t.0));
                let d = ts.iter().map(|(t, dt)| (t - g).exp() * dt).sum::<f64>();
                Ok((g, d))
            },
            qmin,
            qmax,
            opts,
        )
    }
}

pub fn mixed_modular(fs: &[GridFunction], p: &ExponentField, q: &ExponentField) -> Result<f64> {
    MixedTerms::from_functions(fs, p, q)?.modular(1e-14)
}

pub fn mixed_modular_simplified(fs: &[GridFunction], p: &ExponentField, q: &ExponentField) -> Result<f64> {
    MixedTerms::from_functions(fs, p, q)?.modular_simplified(1e-14)
}

pub fn mixed_norm(fs: &[GridFunction], p: &ExponentField, q: &ExponentField, tol: f64) -> Result<NormResult> {
    if tol <= 0.0 {
        return domain("tolerance must be positive");
    }
    MixedTerms::from_functions(fs, p, q)?.norm(SolveOpts::with_tol(tol))
}

/// Which of the listed sufficient conditions for the mixed functional to be a norm hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MixedNormConditions {
    pub q_constant_ge_1: bool,
    pub p_over_q_ge_1: bool,
    pub p_q_ge_1_and_q_le_p: bool,
}

pub fn mixed_norm_conditions(p: &ExponentField, q: &ExponentField) -> MixedNormConditions {
    let ratio_ok = p.samples().iter().zip(q.samples()).all(|(p, q)| p / q >= 1.0);
    MixedNormConditions {
        q_constant_ge_1: q.is_constant() && q.inf() >= 1.0,
        p_over_q_ge_1: ratio_ok && q.inf() >= 1.0,
        p_q_ge_1_and_q_le_p: p.inf() >= 1.0 && q.inf() >= 1.0 && ratio_ok,
    }
}

/// `sup_{|P| ≥ 1} ‖ f χ_P |P|^{−τ(·)} ‖_{p(·)}` over the dyadic cubes that fit the grid.
pub fn tilde_norm(f: &GridFunction, p: &ExponentField, tau: &ExponentField, tol: f64) -> Result<NormResult> {
    p.check_grid(&f.grid)?;
    tau.check_grid(&f.grid)?;
    if tau.inf() < 0.0 {
        return domain(format!("tilde norm needs tau >= 0, got infimum {}", tau.inf()));
    }
    let grid = f.grid;
    let la = ln_abs(f)?;
    let pc = p.capped();
    let ln_delta = grid.delta().ln();
    let mut best = NormResult::zero(tol);
    for q in cubes_in_window(&grid, grid.min_level(), 0)? {
        // |P|^{−τ} = 2^{v n τ}
        let shift = q.v as f64 * grid.dim as f64 * std::f64::consts::LN_2;
        let idx = q.sample_indices(&grid);
        let lw: Vec<f64> = idx.iter().map(|&i| la[i] + shift * tau.at(i)).collect();
        let pw: Vec<f64> = idx.iter().map(|&i| pc[i]).collect();
        let r = luxemburg_from_logs(&lw, &pw, ln_delta, SolveOpts::with_tol(tol))?;
        if r.value > best.value {
            best = r;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::{ExponentSpec, Role};
    use crate::grid::{indicator, DyadicCube, Grid};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid() -> Grid {
        Grid::new(1, 3, 5).unwrap()
    }

    fn pconst(g: &Grid, v: f64) -> ExponentField {
        ExponentField::constant(g, Role::Integrability, v).unwrap()
    }

    fn pbump(g: &Grid) -> ExponentField {
        ExponentField::from_spec(g, Role::Integrability, &ExponentSpec::bump(1.5, 2.0, 3.0, 2.5)).unwrap()
    }

    fn random(g: &Grid, rng: &mut ChaCha8Rng, scale: f64) -> GridFunction {
        let v = (0..g.len()).map(|_| Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))).collect();
        GridFunction::new(g, v).unwrap()
    }

    #[test]
    fn modular_examples() {
        let g = grid();
        let chi = indicator(&DyadicCube::new(0, &[0]), &g).unwrap();
        assert_eq!(modular(&chi, &pconst(&g, 3.0)).unwrap(), 1.0);
        assert_eq!(modular(&chi.scaled(2.0), &pconst(&g, 3.0)).unwrap(), 8.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = random(&g, &mut rng, 2.0);
        let p = pbump(&g);
        let mut naive = 0.0;
        for i in 0..g.len() {
            naive += f.values[i].norm().powf(p.at(i)) * g.delta();
        }
        assert!((modular(&f, &p).unwrap() - naive).abs() <= 1e-14 * naive);
    }

    #[test]
    fn nonfinite_rejected() {
        let g = grid();
        let mut f = GridFunction::zeros(&g);
        f.values[2] = Complex64::new(f64::INFINITY, 0.0);
        assert!(modular(&f, &pconst(&g, 2.0)).is_err());
        assert!(luxemburg_norm(&f, &pconst(&g, 2.0), 1e-10).is_err());
    }

    #[test]
    fn luxemburg_closed_forms() {
        let g = grid();
        for v in [-2, 0, 2] {
            let q = DyadicCube::new(v, &[0]);
            let chi = indicator(&q, &g).unwrap();
            for p in [1.0, 2.0, 3.0, 10.0] {
                let n = luxemburg_norm(&chi, &pconst(&g, p), 1e-12).unwrap().value;
                let want = q.volume(1).powf(1.0 / p);
                assert!((n - want).abs() <= 1e-12 * want);
            }
        }
        assert_eq!(luxemburg_norm(&GridFunction::zeros(&g), &pbump(&g), 1e-10).unwrap().value, 0.0);
    }

    #[test]
    fn luxemburg_variable_matches_scan() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = random(&g, &mut rng, 1.0);
        let p = pbump(&g);
        let res = luxemburg_norm(&f, &p, 1e-12).unwrap();
        assert!(res.bracketing.0 <= res.value && res.value <= res.bracketing.1);
        assert!(res.bracketing.1 - res.bracketing.0 <= res.tolerance * res.value.max(1.0));
        // monotone scan with step 1e-6 from below
        let mut lam = (res.value - 5e-5).max(1e-6);
        while modular(&f.scaled(1.0 / lam), &p).unwrap() > 1.0 {
            lam += 1e-6;
        }
        assert!((lam - res.value).abs() <= 1e-6 + 1e-12);
        let m = modular(&f.scaled(1.0 / res.value), &p).unwrap();
        assert!((m - 1.0).abs() < 1e-10);
    }

    #[test]
    fn unit_ball_examples() {
        let g = grid();
        let chi = indicator(&DyadicCube::new(0, &[0]), &g).unwrap();
        let p = pconst(&g, 2.0);
        assert_eq!(unit_ball_check(&chi, &p).unwrap(), (true, true));
        assert_eq!(unit_ball_check(&chi.scaled(2.0), &p).unwrap(), (false, false));
    }

    #[test]
    fn mixed_examples() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = pbump(&g);
        let f0 = random(&g, &mut rng, 1.0);
        let q1 = pconst(&g, 1.0);
        let lux = luxemburg_norm(&f0, &p, 1e-13).unwrap().value;
        let mm = mixed_modular(std::slice::from_ref(&f0), &p, &q1).unwrap();
        assert!((mm - lux).abs() <= 1e-11 * lux);
        let zeros = vec![GridFunction::zeros(&g); 3];
        assert_eq!(mixed_modular(&zeros, &p, &q1).unwrap(), 0.0);
        assert_eq!(mixed_modular(&[], &p, &q1).unwrap(), 0.0);
        assert_eq!(mixed_norm(&zeros, &p, &q1, 1e-10).unwrap().value, 0.0);
        let one = vec![GridFunction::zeros(&g), f0.clone(), GridFunction::zeros(&g)];
        let qv = ExponentField::from_spec(&g, Role::Summability, &ExponentSpec::bump(1.2, 1.0, 5.0, 3.0)).unwrap();
        let n = mixed_norm(&one, &p, &qv, 1e-12).unwrap().value;
        assert!((n - lux).abs() <= 1e-9 * lux, "{n} vs {lux}");
    }

    #[test]
    fn mixed_constant_collapse() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let fs: Vec<_> = (0..4).map(|_| random(&g, &mut rng, 1.0)).collect();
        for (p, q) in [(2.0, 2.0), (3.0, 1.5), (1.0, 4.0)] {
            let pe = pconst(&g, p);
            let qe = pconst(&g, q);
            let n = mixed_norm(&fs, &pe, &qe, 1e-12).unwrap().value;
            let want = fs
                .iter()
                .map(|f| (f.values.iter().map(|z| z.norm().powf(p)).sum::<f64>() * g.delta()).powf(q / p))
                .sum::<f64>()
                .powf(1.0 / q);
            assert!((n - want).abs() <= 1e-12 * want);
            let terms = MixedTerms::from_functions(&fs, &pe, &qe).unwrap();
            let general = terms.norm_general(SolveOpts::with_tol(1e-12)).unwrap().value;
            assert!((general - want).abs() <= 1e-10 * want, "{general} vs {want}");
        }
    }

    #[test]
    fn mixed_general_equals_unit_level() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let fs: Vec<_> = (0..3).map(|_| random(&g, &mut rng, 3.0)).collect();
        let p = pbump(&g);
        let q = ExponentField::from_spec(&g, Role::Summability, &ExponentSpec::ramp(1.0, 2.0, 2.0)).unwrap();
        let mu = mixed_norm(&fs, &p, &q, 1e-12).unwrap().value;
        let scaled: Vec<_> = fs.iter().map(|f| f.scaled(1.0 / mu)).collect();
        let m = mixed_modular(&scaled, &p, &q).unwrap();
        assert!((m - 1.0).abs() < 1e-9, "modular at the norm: {m}");
        let inside: Vec<_> = fs.iter().map(|f| f.scaled(1.0 / (mu * (1.0 - 1e-6)))).collect();
        assert!(mixed_modular(&inside, &p, &q).unwrap() > 1.0);
    }

    #[test]
    fn infinite_branch() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let fs: Vec<_> = (0..3).map(|_| random(&g, &mut rng, 1.0)).collect();
        let pinf = pconst(&g, P_CAP);
        let q = pconst(&g, 2.0);
        let want: f64 = fs.iter().map(|f| f.max_abs().powi(2)).sum();
        assert!((mixed_modular(&fs, &pinf, &q).unwrap() - want).abs() < 1e-12 * want);
        let n = mixed_norm(&fs, &pinf, &q, 1e-12).unwrap().value;
        assert!((n - want.sqrt()).abs() < 1e-12 * want.sqrt());
        let qv = ExponentField::from_spec(&g, Role::Summability, &ExponentSpec::bump(1.0, 1.0, 4.0, 2.0)).unwrap();
        let terms = MixedTerms::from_functions(&fs, &pinf, &qv).unwrap();
        let n = terms.norm(SolveOpts::with_tol(1e-12)).unwrap().value;
        let scaled: Vec<_> = fs.iter().map(|f| f.scaled(1.0 / n)).collect();
        assert!((mixed_modular(&scaled, &pinf, &qv).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tilde_examples() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let f = random(&g, &mut rng, 1.0);
        let p = pbump(&g);
        let tau0 = ExponentField::constant(&g, Role::Tau, 0.0).unwrap();
        let t = tilde_norm(&f, &p, &tau0, 1e-12).unwrap().value;
        let full = luxemburg_norm(&f, &p, 1e-12).unwrap().value;
        assert!((t - full).abs() <= 1e-10 * full);
        assert_eq!(tilde_norm(&GridFunction::zeros(&g), &p, &tau0, 1e-10).unwrap().value, 0.0);

        let pc = pconst(&g, 2.0);
        let tau = ExponentField::constant(&g, Role::Tau, 0.3).unwrap();
        let t = tilde_norm(&f, &pc, &tau, 1e-12).unwrap().value;
        let mut brute = 0.0f64;
        for q in cubes_in_window(&g, -3, 0).unwrap() {
            let vol = q.volume(1);
            let r = crate::grid::restrict(&f, &q).unwrap().scaled(vol.powf(-0.3));
            let n = (r.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * g.delta()).sqrt();
            brute = brute.max(n);
        }
        assert!((t - brute).abs() <= 1e-12 * brute);
        let neg = ExponentField::constant(&g, Role::Tau, -0.1).unwrap();
        assert!(tilde_norm(&f, &pc, &neg, 1e-10).is_err());
    }

    #[test]
    fn duality_product_constant() {
        let g = grid();
        for v in [-2, 0, 2] {
            let q = DyadicCube::new(v, &[1]);
            let chi = indicator(&q, &g).unwrap();
            for p in [1.5, 2.0, 4.0] {
                let pe = pconst(&g, p);
                let pp = crate::exponent::conjugate_exponent(&pe).unwrap();
                let prod = luxemburg_norm(&chi, &pe, 1e-12).unwrap().value * luxemburg_norm(&chi, &pp, 1e-12).unwrap().value;
                assert!((prod - q.volume(1)).abs() <= 1e-12 * q.volume(1));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn homogeneity(seed in 0u64..1000, c in 0.01f64..100.0) {
            let g = grid();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random(&g, &mut rng, 1.0);
            let p = pbump(&g);
            let a = luxemburg_norm(&f, &p, 1e-12).unwrap().value;
            let b = luxemburg_norm(&f.scaled(c), &p, 1e-12).unwrap().value;
            prop_assert!((b - c * a).abs() <= 1e-10 * c * a);
        }

        #[test]
        fn monotonicity(seed in 0u64..1000, shrink in 0.0f64..1.0) {
            let g = grid();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random(&g, &mut rng, 2.0);
            let w: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(shrink..1.0)).collect();
            let small = f.weighted(&w);
            let p = pbump(&g);
            prop_assert!(modular(&small, &p).unwrap() <= modular(&f, &p).unwrap());
            let a = luxemburg_norm(&small, &p, 1e-10).unwrap();
            let b = luxemburg_norm(&f, &p, 1e-10).unwrap();
            prop_assert!(a.value <= b.value + b.tolerance * b.value.max(1.0));
        }

        #[test]
        fn unit_ball_agreement(seed in 0u64..10_000, scale in 0.05f64..3.0) {
            let g = grid();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random(&g, &mut rng, scale);
            let p = pbump(&g);
            let m = modular(&f, &p).unwrap();
            let (a, b) = unit_ball_check(&f, &p).unwrap();
            if (m - 1.0).abs() >= 1e-8 {
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn dual_route(seed in 0u64..10_000) {
            let g = grid();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let fs: Vec<_> = (0..3).map(|_| random(&g, &mut rng, 2.0)).collect();
            let p = pbump(&g);
            let q = ExponentField::from_spec(&g, Role::Summability, &ExponentSpec::bump(0.8, 1.5, 6.0, 2.0)).unwrap();
            let a = mixed_modular(&fs, &p, &q).unwrap();
            let b = mixed_modular_simplified(&fs, &p, &q).unwrap();
            prop_assert!((a - b).abs() <= 1e-8 * a.max(1.0));
        }
    }
}
