//! Coefficient sequences on the dyadic lattice and the `𝔟` quasi-norm.
//!
//! The cube-supremum engine in [`region_sup`] is shared with the function-space
//! norms: every variant is a list of regions (cube sample sets with a volume and
//! a first level) swept over a stack of per-level log magnitudes.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

use crate::error::{domain, Error, Result};
use crate::exponent::{ExponentField, Role, P_CAP};
use crate::grid::{cubes_in_window, DyadicCube, Grid, GridFunction};
use crate::modular::{luxemburg_from_logs, LevelTerms, MixedTerms};
use crate::solver::{NormResult, SolveOpts, DEFAULT_TOL};

/// Finitely supported coefficients `λ_{v,m}`, stored densely per level `0..=v_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceCoeffs {
    pub grid: Grid,
    levels: Vec<Vec<Complex64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffEntry {
    pub v: i32,
    pub m: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

impl SequenceCoeffs {
    pub fn zeros(grid: &Grid, v_max: i32) -> Result<Self> {
        if v_max < 0 || v_max > grid.max_level() {
            return domain(format!("v_max {v_max} outside [0, {}]", grid.max_level()));
        }
        let levels = (0..=v_max).map(|v| vec![Complex64::new(0.0, 0.0); Self::level_len(grid, v)]).collect();
        Ok(SequenceCoeffs { grid: *grid, levels })
    }

    fn level_len(grid: &Grid, v: i32) -> usize {
        grid.positions_per_axis(v).pow(grid.dim as u32)
    }

    pub fn v_max(&self) -> i32 {
        self.levels.len() as i32 - 1
    }

    /// Flat position of `m` within level `v`.
    pub fn flat(&self, v: i32, m: &[i64]) -> Result<usize> {
        DyadicCube::new(v, m).check(&self.grid)?;
        if v < 0 {
            return domain("sequence levels start at 0");
        }
        let n = self.grid.positions_per_axis(v);
        Ok(if self.grid.dim == 1 { m[0] as usize } else { m[0] as usize * n + m[1] as usize })
    }

    pub fn position(&self, v: i32, flat: usize) -> Vec<i64> {
        let n = self.grid.positions_per_axis(v);
        if self.grid.dim == 1 {
            vec![flat as i64]
        } else {
            vec![(flat / n) as i64, (flat % n) as i64]
        }
    }

    pub fn get(&self, v: i32, m: &[i64]) -> Complex64 {
        match self.flat(v, m) {
            Ok(i) if v <= self.v_max() => self.levels[v as usize][i],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// Sets an entry, growing `v_max` as needed.
    pub fn set(&mut self, v: i32, m: &[i64], value: Complex64) -> Result<()> {
        let i = self.flat(v, m)?;
        while self.v_max() < v {
            let next = self.v_max() + 1;
            self.levels.push(vec![Complex64::new(0.0, 0.0); Self::level_len(&self.grid, next)]);
        }
        self.levels[v as usize][i] = value;
        Ok(())
    }

    pub fn level(&self, v: i32) -> &[Complex64] {
        &self.levels[v as usize]
    }

    pub fn level_mut(&mut self, v: i32) -> &mut [Complex64] {
        &mut self.levels[v as usize]
    }

    pub fn from_levels(grid: &Grid, levels: Vec<Vec<Complex64>>) -> Result<Self> {
        if levels.is_empty() || levels.len() as i32 - 1 > grid.max_level() {
            return domain("level count outside the grid's range");
        }
        for (v, l) in levels.iter().enumerate() {
            if l.len() != Self::level_len(grid, v as i32) {
                return domain(format!("level {v} has {} entries, expected {}", l.len(), Self::level_len(grid, v as i32)));
            }
            if l.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return domain("non-finite coefficient");
            }
        }
        Ok(SequenceCoeffs { grid: *grid, levels })
    }

    pub fn entries(&self) -> Vec<CoeffEntry> {
        let mut out = Vec::new();
        for (v, l) in self.levels.iter().enumerate() {
            for (i, z) in l.iter().enumerate() {
                if z.re != 0.0 || z.im != 0.0 {
                    out.push(CoeffEntry { v: v as i32, m: self.position(v as i32, i), re: z.re, im: z.im });
                }
            }
        }
        out
    }

    pub fn from_entries(grid: &Grid, entries: &[CoeffEntry]) -> Result<Self> {
        let mut out = Self::zeros(grid, 0)?;
        for e in entries {
            if !e.re.is_finite() || !e.im.is_finite() {
                return domain("non-finite coefficient");
            }
            if e.v > grid.max_level() {
                return domain(format!("coefficient level {} exceeds jfine {}", e.v, grid.jfine));
            }
            out.set(e.v, &e.m, Complex64::new(e.re, e.im))?;
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.levels.iter().flatten().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let levels = self.levels.iter().map(|l| l.iter().map(|z| z * c).collect()).collect();
        SequenceCoeffs { grid: self.grid, levels }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("sequences on different grids".into()));
        }
        let vmax = self.v_max().max(other.v_max());
        let mut out = Self::zeros(&self.grid, vmax)?;
        for v in 0..=vmax {
            for (i, z) in out.levels[v as usize].iter_mut().enumerate() {
                if v <= self.v_max() {
                    *z += self.levels[v as usize][i];
                }
                if v <= other.v_max() {
                    *z += other.levels[v as usize][i];
                }
            }
        }
        Ok(out)
    }

    pub fn abs(&self) -> Self {
        let levels = self.levels.iter().map(|l| l.iter().map(|z| Complex64::new(z.norm(), 0.0)).collect()).collect();
        SequenceCoeffs { grid: self.grid, levels }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let vmax = self.v_max().max(other.v_max());
        let mut worst = 0.0f64;
        for v in 0..=vmax {
            let n = Self::level_len(&self.grid, v);
            for i in 0..n {
                let a = if v <= self.v_max() { self.levels[v as usize][i] } else { Complex64::new(0.0, 0.0) };
                let b = if v <= other.v_max() { other.levels[v as usize][i] } else { Complex64::new(0.0, 0.0) };
                worst = worst.max((a - b).norm());
            }
        }
        worst
    }

    /// Level `v` spread onto the sample grid: `|λ_{v,m}|` on every sample of `Q_{v,m}`.
    pub fn level_on_grid(&self, v: i32) -> Vec<f64> {
        let grid = self.grid;
        let shift = (grid.jfine as i32 - v) as u32;
        let n = grid.positions_per_axis(v);
        (0..grid.len())
            .map(|idx| {
                let ij = grid.unravel(idx);
                let flat = if grid.dim == 1 { ij[0] >> shift } else { (ij[0] >> shift) * n + (ij[1] >> shift) };
                self.levels[v as usize][flat].norm()
            })
            .collect()
    }
}

/// `α, τ, p, q` together with the cube window of the supremum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceParams {
    pub alpha: ExponentField,
    pub tau: ExponentField,
    pub p: ExponentField,
    pub q: ExponentField,
    pub window: (i32, i32),
}

impl SpaceParams {
    pub fn new(alpha: ExponentField, tau: ExponentField, p: ExponentField, q: ExponentField) -> Result<Self> {
        let g = alpha.grid;
        let window = (g.min_level(), g.max_level());
        let sp = SpaceParams { alpha, tau, p, q, window };
        sp.validate()?;
        Ok(sp)
    }

    pub fn constant(grid: &Grid, alpha: f64, tau: f64, p: f64, q: f64) -> Result<Self> {
        Self::new(
            ExponentField::constant(grid, Role::Smoothness, alpha)?,
            ExponentField::constant(grid, Role::Tau, tau)?,
            ExponentField::constant(grid, Role::Integrability, p)?,
            ExponentField::constant(grid, Role::Summability, q)?,
        )
    }

    pub fn with_window(mut self, lo: i32, hi: i32) -> Result<Self> {
        self.window = (lo, hi);
        self.validate()?;
        Ok(self)
    }

    pub fn grid(&self) -> Grid {
        self.alpha.grid
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.alpha.grid;
        for e in [&self.tau, &self.p, &self.q] {
            e.check_grid(&g)?;
        }
        if self.tau.inf() < 0.0 {
            return domain(format!("tau must be nonnegative, infimum is {}", self.tau.inf()));
        }
        if self.q.sup() >= P_CAP {
            return domain("q must stay below the exponent cap for norm computations");
        }
        let (lo, hi) = self.window;
        if lo > hi || lo < g.min_level() || hi > g.max_level() {
            return domain(format!("cube window [{lo}, {hi}] outside [{}, {}]", g.min_level(), g.max_level()));
        }
        Ok(())
    }

    pub fn is_constant(&self) -> bool {
        self.alpha.is_constant() && self.tau.is_constant() && self.p.is_constant() && self.q.is_constant()
    }

    /// `(τp)^−`.
    pub fn tau_p_inf(&self) -> f64 {
        self.tau.samples().iter().zip(self.p.samples()).map(|(t, p)| t * p).fold(f64::INFINITY, f64::min)
    }

    /// `((τp) − 1)^+`.
    pub fn tau_p_minus_one_sup(&self) -> f64 {
        self.tau.samples().iter().zip(self.p.samples()).map(|(t, p)| t * p - 1.0).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `ln|h_v(x)|` for a run of consecutive levels.
#[derive(Debug, Clone)]
pub struct LevelStack {
    pub first: i32,
    pub levels: Vec<Vec<f64>>,
}

impl LevelStack {
    pub fn last(&self) -> i32 {
        self.first + self.levels.len() as i32 - 1
    }

    pub fn get(&self, v: i32) -> Option<&[f64]> {
        if v < self.first || v > self.last() {
            None
        } else {
            Some(&self.levels[(v - self.first) as usize])
        }
    }
}

/// A set of samples standing in for a cube or ball `P`.
#[derive(Debug, Clone)]
pub struct Region {
    pub cube: DyadicCube,
    pub indices: Vec<usize>,
    pub ln_volume: f64,
    /// First level of the inner sequence.
    pub start: i32,
}

#[derive(Debug, Clone, Serialize)]
pub struct SupNorm {
    pub result: NormResult,
    pub argmax: Option<DyadicCube>,
    pub window: (i32, i32),
}

/// How the first level of the inner sequence depends on the cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartRule {
    /// `v ≥ v_P^+`.
    VPlus,
    /// `v ≥ v_P^+ − γ`.
    Shift(i32),
}

pub fn cube_regions(grid: &Grid, window: (i32, i32), rule: StartRule) -> Result<Vec<Region>> {
    let n = grid.dim as f64;
    Ok(cubes_in_window(grid, window.0, window.1)?
        .into_iter()
        .map(|c| {
            let start = match rule {
                StartRule::VPlus => c.v_plus(),
                StartRule::Shift(g) => c.v_plus() - g,
            };
            Region { indices: c.sample_indices(grid), ln_volume: -(c.v as f64) * n * LN_2, start, cube: c }
        })
        .collect())
}

/// Balls `B(c_P, l(P)/2)` in the torus metric, standing in for the cubes.
pub fn ball_regions(grid: &Grid, window: (i32, i32)) -> Result<Vec<Region>> {
    let mut out = Vec::new();
    for c in cubes_in_window(grid, window.0, window.1)? {
        let side = c.side();
        let r = side / 2.0;
        let center: Vec<f64> = c.m.iter().map(|&m| m as f64 * side + r).collect();
        let l = grid.side();
        let indices: Vec<usize> = (0..grid.len())
            .filter(|&i| {
                let x = grid.coord(i);
                let mut d2 = 0.0;
                for k in 0..grid.dim {
                    let d = (x[k] - center[k]).rem_euclid(l);
                    let d = d.min(l - d);
                    d2 += d * d;
                }
                d2 < r * r
            })
            .collect();
        if indices.is_empty() {
            continue;
        }
        let vol = if grid.dim == 1 { 2.0 * r } else { std::f64::consts::PI * r * r };
        out.push(Region { indices, ln_volume: vol.ln(), start: c.v_plus(), cube: c });
    }
    Ok(out)
}

/// `sup_P ‖ ( |P|^{−τ} h_v χ_P )_{v ≥ start(P)} ‖_{ℓ^q(L^p)}`.
pub fn region_sup(
    stack: &LevelStack,
    regions: &[Region],
    p: &ExponentField,
    q: &ExponentField,
    tau: &ExponentField,
    opts: SolveOpts,
) -> Result<SupNorm> {
    let grid = p.grid;
    let ln_delta = grid.delta().ln();
    let pc = p.capped();
    let mut best = NormResult::zero(opts.tol);
    let mut argmax = None;
    let (mut lo, mut hi) = (i32::MAX, i32::MIN);
    for region in regions {
        lo = lo.min(region.cube.v);
        hi = hi.max(region.cube.v);
        let first = region.start.max(stack.first);
        if first > stack.last() {
            continue;
        }
        let weight: Vec<f64> = region.indices.iter().map(|&i| -tau.at(i) * region.ln_volume).collect();
        let pr: Vec<f64> = region.indices.iter().map(|&i| pc[i]).collect();
        let qr: Vec<f64> = region.indices.iter().map(|&i| q.at(i)).collect();
        let mut levels = Vec::new();
        for v in first..=stack.last() {
            let h = stack.get(v).expect("level in range");
            let la: Vec<f64> = region.indices.iter().zip(&weight).map(|(&i, w)| h[i] + w).collect();
            levels.push(LevelTerms { la, p: pr.clone(), q: qr.clone() });
        }
        let r = MixedTerms::new(levels, ln_delta).norm(opts)?;
        if r.value > best.value {
            best = r;
            argmax = Some(region.cube.clone());
        }
    }
    Ok(SupNorm { result: best, argmax, window: (lo, hi) })
}

/// `ln|2^{v(α+n/2)} λ_{v,m(x)}|` on the grid for every level.
pub fn sequence_stack(lambda: &SequenceCoeffs, alpha: &ExponentField) -> LevelStack {
    let n = lambda.grid.dim as f64;
    let levels = (0..=lambda.v_max())
        .map(|v| {
            lambda
                .level_on_grid(v)
                .iter()
                .zip(alpha.samples())
                .map(|(a, al)| a.ln() + v as f64 * (al + n / 2.0) * LN_2)
                .collect()
        })
        .collect();
    LevelStack { first: 0, levels }
}

pub fn b_norm_detailed(lambda: &SequenceCoeffs, sp: &SpaceParams, tol: f64) -> Result<SupNorm> {
    sp.validate()?;
    sp.p.check_grid(&lambda.grid)?;
    if lambda.v_max() > lambda.grid.max_level() {
        return domain("coefficient level exceeds jfine");
    }
    let stack = sequence_stack(lambda, &sp.alpha);
    let regions = cube_regions(&lambda.grid, sp.window, StartRule::VPlus)?;
    region_sup(&stack, &regions, &sp.p, &sp.q, &sp.tau, SolveOpts::with_tol(tol))
}

pub fn b_norm(lambda: &SequenceCoeffs, sp: &SpaceParams, grid: &Grid) -> Result<NormResult> {
    if lambda.grid != *grid {
        return Err(Error::GridMismatch("sequence and grid differ".into()));
    }
    Ok(b_norm_detailed(lambda, sp, DEFAULT_TOL * 1e-2)?.result)
}

/// `b_norm` with each cube replaced by the inscribed ball around its centre.
pub fn b_norm_balls(lambda: &SequenceCoeffs, sp: &SpaceParams) -> Result<NormResult> {
    sp.validate()?;
    let stack = sequence_stack(lambda, &sp.alpha);
    let regions = ball_regions(&lambda.grid, sp.window)?;
    Ok(region_sup(&stack, &regions, &sp.p, &sp.q, &sp.tau, SolveOpts::with_tol(DEFAULT_TOL))?.result)
}

/// Periodic index distance weights `(1+|k|)^{−d}` on a level with `n` positions per axis.
fn decay_kernel(dim: usize, n: usize, d: f64) -> Vec<f64> {
    let wrap = |i: usize| -> f64 {
        let i = i as i64;
        let n = n as i64;
        (if i <= n / 2 { i } else { n - i }) as f64
    };
    if dim == 1 {
        (0..n).map(|i| (1.0 + wrap(i)).powf(-d)).collect()
    } else {
        let mut out = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                out.push((1.0 + (wrap(a).powi(2) + wrap(b).powi(2)).sqrt()).powf(-d));
            }
        }
        out
    }
}

fn fft_nd(data: &mut [Complex64], n: usize, dim: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let plan = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    if dim == 1 {
        plan.process(data);
    } else {
        for row in data.chunks_mut(n) {
            plan.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..n {
            for r in 0..n {
                col[r] = data[r * n + c];
            }
            plan.process(&mut col);
            for r in 0..n {
                data[r * n + c] = col[r];
            }
        }
    }
    if inverse {
        let s = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|z| *z *= s);
    }
}

/// Direct evaluation cutoff: below this many (position, support) pairs we sum directly.
const DIRECT_LIMIT: usize = 1 << 21;

/// `λ*_{v,m} = (Σ_h |λ_{v,h}|^r (1 + |h − m|)^{−d})^{1/r}`, with `|h − m|` the
/// periodic index distance on level `v`, evaluated at every position.
pub fn lambda_star(lambda: &SequenceCoeffs, r: f64, d: f64) -> Result<SequenceCoeffs> {
    if r <= 0.0 || d <= 0.0 {
        return domain(format!("lambda_star needs r > 0 and d > 0, got r={r}, d={d}"));
    }
    let grid = lambda.grid;
    let dim = grid.dim;
    let mut out = SequenceCoeffs::zeros(&grid, lambda.v_max())?;
    for v in 0..=lambda.v_max() {
        let n = grid.positions_per_axis(v);
        let len = n.pow(dim as u32);
        let pow: Vec<f64> = lambda.level(v).iter().map(|z| z.norm().powf(r)).collect();
        let support: Vec<usize> = (0..len).filter(|&i| pow[i] > 0.0).collect();
        if support.is_empty() {
            continue;
        }
        let kernel = decay_kernel(dim, n, d);
        let kidx = |a: usize, b: usize| -> usize {
            if dim == 1 {
                (a + n - b) % n
            } else {
                let (ar, ac, br, bc) = (a / n, a % n, b / n, b % n);
                ((ar + n - br) % n) * n + (ac + n - bc) % n
            }
        };
        let mut sums = vec![0.0; len];
        if len * support.len() <= DIRECT_LIMIT {
            for (m, s) in sums.iter_mut().enumerate() {
                *s = support.iter().filter(|&&h| h != m).map(|&h| pow[h] * kernel[kidx(m, h)]).sum::<f64>();
            }
        } else {
            // off-diagonal part by FFT, clamped; the diagonal term is added exactly below
            let mut kz: Vec<Complex64> = kernel.iter().map(|&k| Complex64::new(k, 0.0)).collect();
            kz[0] = Complex64::new(0.0, 0.0);
            let mut a: Vec<Complex64> = pow.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            fft_nd(&mut kz, n, dim, false);
            fft_nd(&mut a, n, dim, false);
            for (x, k) in a.iter_mut().zip(&kz) {
                *x *= k;
            }
            fft_nd(&mut a, n, dim, true);
            for (s, z) in sums.iter_mut().zip(&a) {
                *s = z.re.max(0.0);
            }
        }
        for (m, o) in out.level_mut(v).iter_mut().enumerate() {
            *o = Complex64::new((pow[m] + sums[m]).powf(1.0 / r), 0.0);
        }
    }
    Ok(out)
}

/// Same as [`lambda_star`] by the plain double loop; an oracle for tests.
pub fn lambda_star_direct(lambda: &SequenceCoeffs, r: f64, d: f64) -> Result<SequenceCoeffs> {
    let grid = lambda.grid;
    let mut out = SequenceCoeffs::zeros(&grid, lambda.v_max())?;
    for v in 0..=lambda.v_max() {
        let n = grid.positions_per_axis(v) as i64;
        let len = lambda.level(v).len();
        for m in 0..len {
            let pm = lambda.position(v, m);
            let mut s = 0.0;
            for h in 0..len {
                let a = lambda.level(v)[h].norm();
                if a == 0.0 {
                    continue;
                }
                let ph = lambda.position(v, h);
                let mut dist2 = 0.0;
                for k in 0..grid.dim {
                    let dd = (ph[k] - pm[k]).rem_euclid(n);
                    let dd = dd.min(n - dd) as f64;
                    dist2 += dd * dd;
                }
                s += a.powf(r) * (1.0 + dist2.sqrt()).powf(-d);
            }
            out.level_mut(v)[m] = Complex64::new(s.powf(1.0 / r), 0.0);
        }
    }
    Ok(out)
}

/// `‖χ_Q‖_{p(·)}`.
pub fn indicator_norm(q: &DyadicCube, p: &ExponentField) -> Result<f64> {
    let grid = p.grid;
    let idx = q.sample_indices(&grid);
    let pc: Vec<f64> = idx.iter().map(|&i| p.at(i).min(P_CAP)).collect();
    Ok(luxemburg_from_logs(&vec![0.0; idx.len()], &pc, grid.delta().ln(), SolveOpts::with_tol(1e-13))?.value)
}

/// Empirical constant `c` in `|λ_{v,m}| 2^{v(α+n/2)} |Q|^{−τ} ‖χ_Q‖_p ≤ c ‖λ‖_𝔟`.
pub fn coeff_bound_ratio(lambda: &SequenceCoeffs, sp: &SpaceParams, grid: &Grid) -> Result<f64> {
    let norm = b_norm(lambda, sp, grid)?.value;
    if norm == 0.0 {
        return domain("coefficient bound ratio needs a nonzero sequence");
    }
    let n = grid.dim as f64;
    let mut best = 0.0f64;
    for v in 0..=lambda.v_max() {
        for (flat, z) in lambda.level(v).iter().enumerate() {
            let a = z.norm();
            if a == 0.0 {
                continue;
            }
            let q = DyadicCube::new(v, &lambda.position(v, flat));
            let chi = indicator_norm(&q, &sp.p)?;
            for i in q.sample_indices(grid) {
                let w = (v as f64 * (sp.alpha.at(i) + n / 2.0) + v as f64 * n * sp.tau.at(i)).exp2();
                best = best.max(a * w * chi);
            }
        }
    }
    Ok(best / norm)
}

/// `g_v = Σ_k 2^{−|k−v|δ} f_k`.
pub fn smooth_levels(fs: &[GridFunction], delta: f64) -> Result<Vec<GridFunction>> {
    if delta <= 0.0 {
        return domain("smoothing exponent must be positive");
    }
    let Some(first) = fs.first() else {
        return Ok(vec![]);
    };
    let mut out = Vec::with_capacity(fs.len());
    for v in 0..fs.len() {
        let mut g = GridFunction::zeros(&first.grid);
        for (k, f) in fs.iter().enumerate() {
            first.check_same_grid(f)?;
            let w = (-(k as f64 - v as f64).abs() * delta).exp2();
            if w == 0.0 {
                continue;
            }
            for (a, b) in g.values.iter_mut().zip(&f.values) {
                *a += b * w;
            }
        }
        out.push(g);
    }
    Ok(out)
}
