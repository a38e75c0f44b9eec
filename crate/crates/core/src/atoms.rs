//! `[K,L]`-atoms: validation, atomization of a band-limited function, synthesis
//! and the decay estimate of `φ_j ∗ ρ_{v,m}`.
//!
//! Atomization follows the reproducing formula: `g_v = ψ_v ∗ f` is cut into
//! cube pieces and each piece is smoothed with a window. The exact window is
//! `φ_v` itself (band-limited, so the pieces are not compactly supported but
//! add up to `f`); the compact window is a polynomial bump with vanishing
//! discrete moments, which yields genuine atoms supported in `γQ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grid::{DyadicCube, Grid, GridFunction};
use crate::phi::{Side, TransformPair};
use crate::sequence::{SequenceCoeffs, SpaceParams};

pub const DEFAULT_GAMMA: f64 = 3.0;
pub const DEFAULT_FD_TOL: f64 = 0.05;
pub const DEFAULT_MOM_TOL: f64 = 1e-10;

/// `K_min = ([α⁺ + nτ⁺] + 1)⁺`, `L_min = max(−1, [n(1/min(1, (τp)⁻/τ⁺) − 1) − α⁻])`.
pub fn kl_requirements(sp: &SpaceParams, n: usize) -> Result<(u32, i32)> {
    if sp.tau.inf() <= 0.0 {
        return domain("K and L thresholds need τ⁻ > 0");
    }
    let n = n as f64;
    let k = ((sp.alpha.sup() + n * sp.tau.sup()).floor() + 1.0).max(0.0) as u32;
    let ratio = (sp.tau_p_inf() / sp.tau.sup()).min(1.0);
    let l = ((n * (1.0 / ratio - 1.0) - sp.alpha.inf()).floor() as i32).max(-1);
    Ok((k, l))
}

/// Bivariate polynomial `Σ c[i][j] u1^i u2^j`.
#[derive(Debug, Clone, PartialEq)]
struct Poly {
    c: Vec<Vec<f64>>,
}

impl Poly {
    fn constant(a: f64) -> Self {
        Poly { c: vec![vec![a]] }
    }

    fn degree(&self) -> (usize, usize) {
        (self.c.len(), self.c.iter().map(Vec::len).max().unwrap_or(0))
    }

    fn mul(&self, o: &Poly) -> Poly {
        let (a0, a1) = self.degree();
        let (b0, b1) = o.degree();
        let mut c = vec![vec![0.0; a1 + b1]; a0 + b0];
        for (i, row) in self.c.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                for (k, orow) in o.c.iter().enumerate() {
                    for (l, y) in orow.iter().enumerate() {
                        c[i + k][j + l] += x * y;
                    }
                }
            }
        }
        Poly { c }
    }

    fn derivative(&self, beta: [usize; 2]) -> Poly {
        let mut c = Vec::new();
        for (i, row) in self.c.iter().enumerate().skip(beta[0]) {
            let mut r = Vec::new();
            for (j, x) in row.iter().enumerate().skip(beta[1]) {
                let f0: f64 = ((i - beta[0] + 1)..=i).map(|t| t as f64).product();
                let f1: f64 = ((j - beta[1] + 1)..=j).map(|t| t as f64).product();
                r.push(x * f0 * f1);
            }
            c.push(r);
        }
        if c.is_empty() {
            c.push(vec![]);
        }
        Poly { c }
    }

    fn eval(&self, u: [f64; 2]) -> f64 {
        let mut s = 0.0;
        for row in self.c.iter().rev() {
            let mut r = 0.0;
            for x in row.iter().rev() {
                r = r * u[1] + x;
            }
            s = s * u[0] + r;
        }
        s
    }
}

/// Multi-indices `β` with `|β| ≤ order` in `dim` variables.
fn multi_indices(dim: usize, order: i32) -> Vec<[usize; 2]> {
    let mut out = Vec::new();
    for t in 0..=order.max(-1) {
        let t = t as usize;
        if dim == 1 {
            out.push([t, 0]);
        } else {
            for a in (0..=t).rev() {
                out.push([a, t - a]);
            }
        }
    }
    out
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-13 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Compact window at one level: `θ_v(u) = (1 − |u|²/r²)^{K+1} (1 − P_v(u))` for
/// `|u| < r`, with `P_v` of degree `≤ L` chosen so that the samples of `θ_v` on
/// the level's lattice have vanishing moments up to order `L`.
#[derive(Debug, Clone)]
pub struct LevelWindow {
    pub v: i32,
    pub radius: f64,
    /// `max_{|β| ≤ K} sup |D^β θ_v|`.
    pub c_theta: f64,
    /// Nonzero samples as (offset in samples, value).
    pub taps: Vec<([i64; 2], f64)>,
}

pub fn level_window(grid: &Grid, v: i32, k: u32, l: i32, gamma: f64) -> Result<LevelWindow> {
    if !(gamma > 1.0) {
        return domain("γ must exceed 1");
    }
    let dim = grid.dim;
    let r = (gamma - 1.0) / 2.0;
    let u_step = ((v - grid.jfine as i32) as f64).exp2();
    // (1 − (u1² + u2²)/r²)^{K+1}
    let mut base = Poly::constant(1.0);
    let mut quad = Poly { c: vec![vec![1.0, 0.0, -1.0 / (r * r)], vec![0.0], vec![-1.0 / (r * r)]] };
    if dim == 1 {
        quad = Poly { c: vec![vec![1.0], vec![0.0], vec![-1.0 / (r * r)]] };
    }
    for _ in 0..=k {
        base = base.mul(&quad);
    }
    let reach = (r / u_step).ceil() as i64;
    let mut pts: Vec<([i64; 2], [f64; 2], f64)> = Vec::new();
    let range2 = if dim == 1 { 0..=0 } else { -reach..=reach };
    for a in -reach..=reach {
        for b in range2.clone() {
            let u = [a as f64 * u_step, b as f64 * u_step];
            if u[0] * u[0] + u[1] * u[1] < r * r {
                pts.push(([a, b], u, base.eval(u)));
            }
        }
    }
    let betas = multi_indices(dim, l);
    let mut poly = base.clone();
    if !betas.is_empty() {
        // θ = b − b²Q: b²Q cancels the low moments of b without cancelling b itself
        let mono = |u: [f64; 2], b: [usize; 2]| u[0].powi(b[0] as i32) * u[1].powi(b[1] as i32);
        let g: Vec<Vec<f64>> = betas
            .iter()
            .map(|&a| betas.iter().map(|&b| pts.iter().map(|(_, u, w)| w * w * mono(*u, a) * mono(*u, b)).sum()).collect())
            .collect();
        let rhs: Vec<f64> = betas.iter().map(|&a| pts.iter().map(|(_, u, w)| w * mono(*u, a)).sum()).collect();
        let Some(coef) = solve_dense(g, rhs) else {
            return domain(format!("window at level {v} has too few samples for {} vanishing moments", betas.len()));
        };
        let mut q = Poly { c: vec![vec![0.0; l as usize + 1]; l as usize + 1] };
        for (b, c) in betas.iter().zip(&coef) {
            q.c[b[0]][b[1]] = -c;
        }
        let mut corr = base.mul(&q);
        corr.c[0][0] += 1.0;
        poly = base.mul(&corr);
    }
    let taps: Vec<([i64; 2], f64)> =
        pts.iter().map(|(o, u, _)| (*o, poly.eval(*u))).filter(|(_, x)| *x != 0.0).collect();
    if taps.iter().all(|(_, x)| x.abs() < 1e-12) {
        return domain(format!("window at level {v} vanishes after enforcing {} moments", betas.len()));
    }
    // sup of the derivative polynomials over the support, on a fine lattice
    let fine = if dim == 1 { 4000 } else { 160 };
    let mut c_theta = 0.0f64;
    for beta in multi_indices(dim, k as i32) {
        let d = poly.derivative(beta);
        for a in -fine..=fine {
            let u0 = r * a as f64 / fine as f64;
            let span = if dim == 1 { 0..=0 } else { -fine..=fine };
            for b in span {
                let u = [u0, r * b as f64 / fine as f64];
                if u[0] * u[0] + u[1] * u[1] <= r * r {
                    c_theta = c_theta.max(d.eval(u).abs());
                }
            }
        }
    }
    // the lattice sup can sit just under the true one
    c_theta *= 1.0 + 1e-6;
    Ok(LevelWindow { v, radius: r, c_theta, taps })
}

/// An atom stored as a rectangular patch of samples (periodically wrapped).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    pub k: u32,
    pub l: i32,
    pub gamma: f64,
    pub cube: DyadicCube,
    /// Sample index of the patch's lower corner along each axis.
    pub origin: [usize; 2],
    /// Patch width in samples along each axis.
    pub width: usize,
    pub samples: Vec<Complex64>,
}

impl AtomSpec {
    pub fn zero(cube: DyadicCube, k: u32, l: i32, gamma: f64) -> Self {
        AtomSpec { k, l, gamma, cube, origin: [0, 0], width: 0, samples: vec![] }
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    fn patch_len(&self, dim: usize) -> usize {
        self.width.pow(dim as u32)
    }

    /// `(flat grid index, value)` for every patch sample.
    pub fn placed(&self, grid: &Grid) -> Vec<(usize, Complex64)> {
        let n = grid.points_per_axis();
        let w = self.width;
        (0..self.patch_len(grid.dim))
            .map(|p| {
                let (a, b) = if grid.dim == 1 { (p, 0) } else { (p / w, p % w) };
                let i = (self.origin[0] + a) % n;
                let j = if grid.dim == 1 { 0 } else { (self.origin[1] + b) % n };
                (grid.ravel([i, j]), self.samples[p])
            })
            .collect()
    }

    pub fn to_grid(&self, grid: &Grid) -> GridFunction {
        let mut g = GridFunction::zeros(grid);
        for (i, z) in self.placed(grid) {
            g.values[i] += z;
        }
        g
    }

    pub fn scaled(&self, c: f64) -> Self {
        AtomSpec { samples: self.samples.iter().map(|z| z * c).collect(), ..self.clone() }
    }

    /// Moment-corrected window centred on the cube and normalized to saturate
    /// the derivative bounds; the reference atom for validation tests.
    pub fn canonical(grid: &Grid, cube: DyadicCube, k: u32, l: i32, gamma: f64) -> Result<Self> {
        cube.check(grid)?;
        let win = level_window(grid, cube.v, k, l, gamma)?;
        let s = 1usize << (grid.jfine as i32 - cube.v) as u32;
        let (origin, width) = gamma_patch(grid, &cube, gamma);
        let n = grid.points_per_axis() as i64;
        let amp = (cube.v as f64 * grid.dim as f64 / 2.0).exp2() / win.c_theta;
        let mut g = GridFunction::zeros(grid);
        let center: Vec<i64> = cube.m.iter().map(|&m| m * s as i64 + s as i64 / 2).collect();
        for (off, val) in &win.taps {
            let i = (center[0] + off[0]).rem_euclid(n) as usize;
            let j = if grid.dim == 1 { 0 } else { (center[1] + off[1]).rem_euclid(n) as usize };
            g.values[grid.ravel([i, j])] += Complex64::new(val * amp, 0.0);
        }
        Ok(from_grid(grid, &g, cube, k, l, gamma, origin, width))
    }
}

/// Patch covering `γQ`: corner and width in samples.
fn gamma_patch(grid: &Grid, cube: &DyadicCube, gamma: f64) -> ([usize; 2], usize) {
    let s = (1usize << (grid.jfine as i32 - cube.v) as u32) as f64;
    let n = grid.points_per_axis() as i64;
    let lo_off = (s / 2.0 - gamma * s / 2.0).ceil() as i64;
    let hi_off = (s / 2.0 + gamma * s / 2.0).ceil() as i64;
    let width = ((hi_off - lo_off) as usize).min(n as usize);
    let mut origin = [0usize; 2];
    for k in 0..grid.dim {
        origin[k] = (cube.m[k] * s as i64 + lo_off).rem_euclid(n) as usize;
    }
    (origin, width)
}

#[allow(clippy::too_many_arguments)]
fn from_grid(grid: &Grid, g: &GridFunction, cube: DyadicCube, k: u32, l: i32, gamma: f64, origin: [usize; 2], width: usize) -> AtomSpec {
    let mut a = AtomSpec { k, l, gamma, cube, origin, width, samples: vec![] };
    let n = grid.points_per_axis();
    a.samples = (0..width.pow(grid.dim as u32))
        .map(|p| {
            let (x, y) = if grid.dim == 1 { (p, 0) } else { (p / width, p % width) };
            let i = (origin[0] + x) % n;
            let j = if grid.dim == 1 { 0 } else { (origin[1] + y) % n };
            g.values[grid.ravel([i, j])]
        })
        .collect();
    a
}

/// Window used by [`atomize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Window {
    /// Compact moment-corrected bump supported in `γQ`.
    Bump { gamma: f64 },
    /// The analysis function `φ_v` itself; reproduces `f` exactly.
    Dual,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Atomization {
    pub window: Window,
    pub k: u32,
    pub l: i32,
    /// `C_θ` per level.
    pub c_theta: Vec<f64>,
    pub atoms: Vec<AtomSpec>,
}

/// `λ_{v,m} = C_θ 2^{−vn/2} sup_{y∈Q_{v,m}} |ψ_v ∗ f(y)|` and
/// `ρ_{v,m} = λ_{v,m}^{−1} 2^{vn} ∫_{Q_{v,m}} θ(2^v(x−y)) ψ_v ∗ f(y) dy`.
pub fn atomize(f: &GridFunction, pair: &TransformPair, window: Window, k: u32, l: i32) -> Result<(SequenceCoeffs, Atomization)> {
    let grid = pair.grid;
    if f.grid != grid {
        return Err(Error::GridMismatch("function and transform pair differ".into()));
    }
    if l < -1 {
        return domain("L must be at least −1");
    }
    let n = grid.points_per_axis();
    let dim = grid.dim;
    let delta = grid.delta();
    let spec = pair.spectral().spectrum(f);
    let mut lambda = SequenceCoeffs::zeros(&grid, pair.v_max())?;
    let mut atoms = Vec::new();
    let mut c_thetas = Vec::new();
    for v in 0..=pair.v_max() {
        let g = pair.spectral().synthesize_from(&spec, pair.multiplier(v, Side::Synthesis)?);
        let weight = (v as f64 * dim as f64).exp2() * delta;
        let lev_l = if v == 0 { -1 } else { l };
        let (win, gamma) = match window {
            Window::Bump { gamma } => (Some(level_window(&grid, v, k, lev_l, gamma)?), gamma),
            // dilation covering the whole torus
            Window::Dual => (None, 2.0 * grid.positions_per_axis(v) as f64),
        };
        let c_theta = win.as_ref().map_or(1.0, |w| w.c_theta);
        c_thetas.push(c_theta);
        let count = grid.positions_per_axis(v).pow(dim as u32);
        for flat in 0..count {
            let m = lambda.position(v, flat);
            let cube = DyadicCube::new(v, &m);
            let idx = cube.sample_indices(&grid);
            let sup = idx.iter().map(|&i| g.values[i].norm()).fold(0.0, f64::max);
            let lam = c_theta * (-(v as f64) * dim as f64 / 2.0).exp2() * sup;
            lambda.level_mut(v)[flat] = Complex64::new(lam, 0.0);
            if lam == 0.0 {
                atoms.push(AtomSpec::zero(cube, k, lev_l, gamma));
                continue;
            }
            match &win {
                Some(w) => {
                    let (origin, width) = gamma_patch(&grid, &cube, gamma);
                    let mut patch = vec![Complex64::new(0.0, 0.0); width.pow(dim as u32)];
                    for &y in &idx {
                        let gy = g.values[y] * (weight / lam);
                        let yij = grid.unravel(y);
                        for (off, val) in &w.taps {
                            // position of y + off relative to the patch corner
                            let a = (yij[0] as i64 + off[0] - origin[0] as i64).rem_euclid(n as i64) as usize;
                            let b = if dim == 1 { 0 } else { (yij[1] as i64 + off[1] - origin[1] as i64).rem_euclid(n as i64) as usize };
                            let p = if dim == 1 { a } else { a * width + b };
                            patch[p] += gy * val;
                        }
                    }
                    atoms.push(AtomSpec { k, l: lev_l, gamma, cube, origin, width, samples: patch });
                }
                None => {
                    let mut piece = GridFunction::zeros(&grid);
                    for &i in &idx {
                        piece.values[i] = g.values[i] / lam;
                    }
                    let rho = pair.band_project(&piece, v)?;
                    atoms.push(AtomSpec { k, l: lev_l, gamma, cube, origin: [0, 0], width: n, samples: rho.values });
                }
            }
        }
    }
    Ok((lambda, Atomization { window, k, l, c_theta: c_thetas, atoms }))
}

/// `Σ λ_{v,m} ρ_{v,m}`; the atom list must follow the coefficient layout.
pub fn synthesize_atoms(lambda: &SequenceCoeffs, atoms: &[AtomSpec]) -> Result<GridFunction> {
    let grid = lambda.grid;
    let mut out = GridFunction::zeros(&grid);
    let mut k = 0;
    for v in 0..=lambda.v_max() {
        for (flat, z) in lambda.level(v).iter().enumerate() {
            let Some(a) = atoms.get(k) else {
                return domain(format!("no atom for coefficient ({v}, {:?})", lambda.position(v, flat)));
            };
            if a.cube.v != v || a.cube.m != lambda.position(v, flat) {
                return domain(format!("atom {:?} does not match coefficient ({v}, {:?})", a.cube, lambda.position(v, flat)));
            }
            k += 1;
            if z.re == 0.0 && z.im == 0.0 {
                continue;
            }
            for (i, x) in a.placed(&grid) {
                out.values[i] += z * x;
            }
        }
    }
    if k != atoms.len() {
        return domain(format!("{} atoms for {k} coefficients", atoms.len()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomReport {
    pub pass: bool,
    /// Largest `|a|` outside `γQ` (must be 0).
    pub support_margin: f64,
    /// Largest ratio of a divided difference to `2^{v(|β|+n/2)}`.
    pub derivative_margin: f64,
    /// Largest `|∫ x^β a|` over the required `β`.
    pub moment_margin: f64,
    pub support_ok: bool,
    pub derivative_ok: bool,
    pub moment_ok: bool,
}

fn in_gamma_cube(grid: &Grid, cube: &DyadicCube, gamma: f64, idx: usize) -> bool {
    let s = (1usize << (grid.jfine as i32 - cube.v) as u32) as f64;
    let n = grid.points_per_axis() as f64;
    let ij = grid.unravel(idx);
    (0..grid.dim).all(|k| {
        let c = cube.m[k] as f64 * s + s / 2.0;
        let d = (ij[k] as f64 - c + n / 2.0).rem_euclid(n) - n / 2.0;
        d >= -gamma * s / 2.0 && d < gamma * s / 2.0
    })
}

/// Forward divided difference `Δ^β a / h^{|β|}` at every sample (periodic).
fn divided_difference(g: &[Complex64], grid: &Grid, beta: [usize; 2]) -> Vec<Complex64> {
    let n = grid.points_per_axis();
    let h = grid.spacing();
    let mut cur = g.to_vec();
    for axis in 0..grid.dim {
        for _ in 0..beta[axis] {
            let prev = cur.clone();
            for idx in 0..grid.len() {
                let mut ij = grid.unravel(idx);
                ij[axis] = (ij[axis] + 1) % n;
                cur[idx] = (prev[grid.ravel(ij)] - prev[idx]) / h;
            }
        }
    }
    cur
}

/// The patch padded by `K` zeros in front of each axis, when it does not wrap
/// onto itself; forward differences of orders `≤ K` vanish outside it.
fn local_patch(grid: &Grid, a: &AtomSpec) -> Option<(Vec<Complex64>, usize)> {
    let pad = a.k as usize;
    let w = a.width + pad;
    if w >= grid.points_per_axis() {
        return None;
    }
    let mut vals = vec![Complex64::new(0.0, 0.0); w.pow(grid.dim as u32)];
    for (p, z) in a.samples.iter().enumerate() {
        let idx = if grid.dim == 1 { p + pad } else { (p / a.width + pad) * w + p % a.width + pad };
        vals[idx] = *z;
    }
    Some((vals, w))
}

fn local_difference_sup(mut cur: Vec<Complex64>, w: usize, grid: &Grid, beta: [usize; 2]) -> f64 {
    let h = grid.spacing();
    let zero = Complex64::new(0.0, 0.0);
    for axis in 0..grid.dim {
        let stride = if grid.dim == 1 || axis == 1 { 1 } else { w };
        for _ in 0..beta[axis] {
            let prev = cur.clone();
            for (idx, c) in cur.iter_mut().enumerate() {
                let along = if stride == 1 { idx % w } else { idx / w };
                let next = if along + 1 < w { prev[idx + stride] } else { zero };
                *c = (next - prev[idx]) / h;
            }
        }
    }
    cur.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Checks support, derivative bounds (divided differences of orders `≤ K`)
/// and moments (orders `≤ L`, only for `v ≥ 1`).
pub fn validate_atom(grid: &Grid, a: &AtomSpec, fd_tol: f64, mom_tol: f64) -> Result<AtomReport> {
    a.cube.check(grid)?;
    let v = a.cube.v;
    let dim = grid.dim as f64;
    let mut support_margin = 0.0f64;
    for (i, z) in a.placed(grid) {
        if !in_gamma_cube(grid, &a.cube, a.gamma, i) {
            support_margin = support_margin.max(z.norm());
        }
    }
    let mut derivative_margin = 0.0f64;
    for beta in multi_indices(grid.dim, a.k as i32) {
        let order = (beta[0] + beta[1]) as f64;
        let bound = (v as f64 * (order + dim / 2.0)).exp2();
        let sup = match local_patch(grid, a) {
            Some((vals, w)) => local_difference_sup(vals, w, grid, beta),
            None => divided_difference(&a.to_grid(grid).values, grid, beta).iter().map(|z| z.norm()).fold(0.0, f64::max),
        };
        derivative_margin = derivative_margin.max(sup / bound);
    }
    let mut moment_margin = 0.0f64;
    if v >= 1 && a.l >= 0 {
        let s = (1usize << (grid.jfine as i32 - v) as u32) as f64;
        let h = grid.spacing();
        let n = grid.points_per_axis() as f64;
        for beta in multi_indices(grid.dim, a.l) {
            let mut m = Complex64::new(0.0, 0.0);
            for (i, z) in a.placed(grid) {
                let ij = grid.unravel(i);
                let mut w = 1.0;
                for k in 0..grid.dim {
                    let c = a.cube.m[k] as f64 * s + s / 2.0;
                    let d = ((ij[k] as f64 - c + n / 2.0).rem_euclid(n) - n / 2.0) * h;
                    w *= d.powi(beta[k] as i32);
                }
                m += z * w;
            }
            moment_margin = moment_margin.max(m.norm() * grid.delta());
        }
    }
    let support_ok = support_margin == 0.0;
    let derivative_ok = derivative_margin <= 1.0 + fd_tol;
    let moment_ok = moment_margin <= mom_tol;
    Ok(AtomReport {
        pass: support_ok && derivative_ok && moment_ok,
        support_margin,
        derivative_margin,
        moment_margin,
        support_ok,
        derivative_ok,
        moment_ok,
    })
}

/// Empirical constant of the decay envelope of `φ_j ∗ ρ_{v,m}` over all `j` and `x`.
pub fn fj_decay_check(grid: &Grid, atom: &AtomSpec, pair: &TransformPair, big_m: f64) -> Result<f64> {
    if atom.is_zero() {
        return Ok(0.0);
    }
    let rho = atom.to_grid(grid);
    let v = atom.cube.v;
    let n = grid.dim as f64;
    let corner = atom.cube.corner_index(grid);
    let (k, l) = (atom.k as f64, atom.l as f64);
    let mut best = 0.0f64;
    for j in 0..=pair.v_max() {
        let conv = pair.band_project(&rho, j)?;
        for (i, z) in conv.values.iter().enumerate() {
            let d = grid.periodic_distance(i, corner);
            let env = if v <= j {
                ((v - j) as f64 * k + v as f64 * n / 2.0).exp2() * (1.0 + (v as f64).exp2() * d).powf(-big_m)
            } else {
                ((j - v) as f64 * (l + n + 1.0) + v as f64 * n / 2.0).exp2() * (1.0 + (j as f64).exp2() * d).powf(-big_m)
            };
            best = best.max(z.norm() / env);
        }
    }
    Ok(best)
}
