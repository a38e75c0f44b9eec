//! Scalar-exponent reference implementations.
//!
//! Nothing here touches the root finder, the region engine or the FFT: norms
//! use closed forms, band projections use a direct separable DFT, and cubes are
//! enumerated by their own index arithmetic. They exist to cross-check the
//! variable-exponent pipeline at constant exponents.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::grid::{Grid, GridFunction};
use crate::phi::Profiles;
use crate::sequence::SequenceCoeffs;

/// Constant exponents `(α, τ, p, q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scalars {
    pub alpha: f64,
    pub tau: f64,
    pub p: f64,
    pub q: f64,
}

pub fn modular(values: &[f64], p: f64, delta: f64) -> f64 {
    values.iter().map(|a| a.abs().powf(p)).sum::<f64>() * delta
}

pub fn luxemburg(values: &[f64], p: f64, delta: f64) -> f64 {
    modular(values, p, delta).powf(1.0 / p)
}

/// `(Σ_v ‖f_v‖_p^q)^{1/q}`.
pub fn mixed(levels: &[Vec<f64>], p: f64, q: f64, delta: f64) -> f64 {
    levels.iter().map(|l| luxemburg(l, p, delta).powf(q)).sum::<f64>().powf(1.0 / q)
}

fn dft_axis(data: &mut [Complex64], n: usize, stride: usize, offset: usize, sign: f64) {
    let input: Vec<Complex64> = (0..n).map(|k| data[offset + k * stride]).collect();
    for k in 0..n {
        let mut s = Complex64::new(0.0, 0.0);
        for (x, z) in input.iter().enumerate() {
            let ang = sign * 2.0 * PI * ((k * x) % n) as f64 / n as f64;
            s += z * Complex64::new(ang.cos(), ang.sin());
        }
        data[offset + k * stride] = s;
    }
}

/// Direct DFT (`inverse` includes the `1/N` factor).
pub fn dft(grid: &Grid, values: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let n = grid.points_per_axis();
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut out = values.to_vec();
    if grid.dim == 1 {
        dft_axis(&mut out, n, 1, 0, sign);
    } else {
        for r in 0..n {
            dft_axis(&mut out, n, 1, r * n, sign);
        }
        for c in 0..n {
            dft_axis(&mut out, n, n, c, sign);
        }
    }
    if inverse {
        let s = 1.0 / out.len() as f64;
        out.iter_mut().for_each(|z| *z *= s);
    }
    out
}

fn radius(grid: &Grid, idx: usize) -> f64 {
    let n = grid.points_per_axis();
    let unit = 2.0 * PI / grid.side();
    let w = |k: usize| if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
    if grid.dim == 1 {
        (w(idx) * unit).abs()
    } else {
        let (a, b) = (w(idx / n) * unit, w(idx % n) * unit);
        (a * a + b * b).sqrt()
    }
}

/// `|φ_v ∗ f|` (`|Φ ∗ f|` at `v = 0`) for `v = 0..=v_max`.
pub fn band_magnitudes(f: &GridFunction, profiles: &Profiles, v_max: i32) -> Vec<Vec<f64>> {
    let grid = f.grid;
    let spec = dft(&grid, &f.values, false);
    (0..=v_max)
        .map(|v| {
            let s = (-(v as f64)).exp2();
            let filtered: Vec<Complex64> = spec
                .iter()
                .enumerate()
                .map(|(i, z)| {
                    let r = radius(&grid, i);
                    z * if v == 0 { profiles.big_phi(r) } else { profiles.phi(r * s) }
                })
                .collect();
            dft(&grid, &filtered, true).iter().map(|z| z.norm()).collect()
        })
        .collect()
}

/// Sample indices of `Q_{v,m}` for every position `m` at level `v`.
fn cubes(grid: &Grid, v: i32) -> Vec<Vec<usize>> {
    let n = grid.points_per_axis();
    let per = (grid.jfine as i32 - v) as u32;
    let side = 1usize << per;
    let count = n / side;
    let mut out = Vec::new();
    if grid.dim == 1 {
        for m in 0..count {
            out.push((m * side..(m + 1) * side).collect());
        }
    } else {
        for a in 0..count {
            for b in 0..count {
                let mut idx = Vec::with_capacity(side * side);
                for i in a * side..(a + 1) * side {
                    for j in b * side..(b + 1) * side {
                        idx.push(i * n + j);
                    }
                }
                out.push(idx);
            }
        }
    }
    out
}

/// `sup_P |P|^{−τ} (Σ_{v ≥ v_P^+} ‖h_v χ_P‖_p^q)^{1/q}` for weighted level magnitudes `h_v`.
fn cube_sup(grid: &Grid, h: &[Vec<f64>], s: Scalars, window: (i32, i32)) -> f64 {
    let delta = grid.delta();
    let n = grid.dim as f64;
    let mut best = 0.0f64;
    for vp in window.0..=window.1 {
        let vol = (-(vp as f64) * n).exp2();
        let start = vp.max(0) as usize;
        if start >= h.len() {
            continue;
        }
        for idx in cubes(grid, vp) {
            let mut sum = 0.0;
            for level in &h[start..] {
                let l: f64 = idx.iter().map(|&i| level[i].powf(s.p)).sum::<f64>() * delta;
                sum += l.powf(s.q / s.p);
            }
            best = best.max(sum.powf(1.0 / s.q) / vol.powf(s.tau));
        }
    }
    best
}

/// `𝔅`-norm at constant exponents.
pub fn besov_norm(f: &GridFunction, profiles: &Profiles, v_max: i32, s: Scalars, window: (i32, i32)) -> f64 {
    let h: Vec<Vec<f64>> = band_magnitudes(f, profiles, v_max)
        .into_iter()
        .enumerate()
        .map(|(v, l)| {
            let w = (v as f64 * s.alpha).exp2();
            l.into_iter().map(|a| a * w).collect()
        })
        .collect();
    cube_sup(&f.grid, &h, s, window)
}

/// Classical `B^α_{p,q}` norm on the torus, `(Σ_v ‖2^{vα} φ_v ∗ f‖_p^q)^{1/q}`.
pub fn classical_besov(f: &GridFunction, profiles: &Profiles, v_max: i32, alpha: f64, p: f64, q: f64) -> f64 {
    let levels: Vec<Vec<f64>> = band_magnitudes(f, profiles, v_max)
        .into_iter()
        .enumerate()
        .map(|(v, l)| l.into_iter().map(|a| a * (v as f64 * alpha).exp2()).collect())
        .collect();
    mixed(&levels, p, q, f.grid.delta())
}

/// `𝔟`-norm at constant exponents, summing `|λ_{v,m}|^p |Q_{v,m}|` over cubes inside `P`.
pub fn b_norm(lambda: &SequenceCoeffs, s: Scalars, window: (i32, i32)) -> f64 {
    let grid = lambda.grid;
    let n = grid.dim as f64;
    let mut best = 0.0f64;
    for vp in window.0..=window.1 {
        let per_axis_p = grid.positions_per_axis(vp);
        let vol = (-(vp as f64) * n).exp2();
        for pm in 0..per_axis_p.pow(grid.dim as u32) {
            let pm_ax = if grid.dim == 1 { [pm, 0] } else { [pm / per_axis_p, pm % per_axis_p] };
            let mut sum = 0.0;
            for v in vp.max(0)..=lambda.v_max() {
                let ratio = 1usize << (v - vp) as u32;
                let per_axis = grid.positions_per_axis(v);
                let qvol = (-(v as f64) * n).exp2();
                let w = (v as f64 * (s.alpha + n / 2.0)).exp2();
                let mut l = 0.0;
                for (flat, z) in lambda.level(v).iter().enumerate() {
                    let ax = if grid.dim == 1 { [flat, 0] } else { [flat / per_axis, flat % per_axis] };
                    let inside = (0..grid.dim).all(|k| ax[k] / ratio == pm_ax[k]);
                    if inside {
                        l += (z.norm() * w).powf(s.p) * qvol;
                    }
                }
                sum += l.powf(s.q / s.p);
            }
            best = best.max(sum.powf(1.0 / s.q) / vol.powf(s.tau));
        }
    }
    best
}
