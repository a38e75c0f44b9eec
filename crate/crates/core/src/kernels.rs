//! `η` kernels, cube averages and the Hardy–Littlewood maximal operator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::grid::{DyadicCube, Grid, GridFunction};

/// `η_{v,m}(x) = 2^{nv} (1 + 2^v |x|)^{−m}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaKernel {
    pub v: i32,
    pub order: f64,
}

impl EtaKernel {
    pub fn new(v: i32, order: f64) -> Self {
        EtaKernel { v, order }
    }

    pub fn scale(&self) -> f64 {
        (self.v as f64).exp2()
    }
}

/// `η` at an arbitrary positive scale `N`: `N^n (1 + N|x|)^{−m}`.
pub fn eta_value(scale: f64, order: f64, dim: usize, dist: f64) -> f64 {
    scale.powi(dim as i32) * (1.0 + scale * dist).powf(-order)
}

pub fn eta_scaled(scale: f64, order: f64, grid: &Grid) -> Result<GridFunction> {
    if order <= grid.dim as f64 {
        return domain(format!("eta order {order} must exceed the dimension {}", grid.dim));
    }
    if scale <= 0.0 {
        return domain("eta scale must be positive");
    }
    let values = (0..grid.len())
        .map(|i| Complex64::new(eta_value(scale, order, grid.dim, grid.norm_of(i)), 0.0))
        .collect();
    Ok(GridFunction { grid: *grid, values })
}

/// Samples of `η_{v,m}` with torus distance to the origin.
pub fn eta_evaluate(k: &EtaKernel, grid: &Grid) -> Result<GridFunction> {
    eta_scaled(k.scale(), k.order, grid)
}

/// `‖η_{v,m}‖₁` on the torus by a Riemann sum on a lattice `2^sub` times finer
/// than the grid, which resolves the cusp at the origin.
pub fn eta_l1_quadrature(k: &EtaKernel, grid: &Grid, sub: u32) -> Result<f64> {
    if k.order <= grid.dim as f64 {
        return domain(format!("eta order {} must exceed the dimension {}", k.order, grid.dim));
    }
    let fine = Grid { jfine: grid.jfine + sub, ..*grid };
    fine.validate()?;
    let n = fine.points_per_axis() as i64;
    let h = fine.spacing();
    let s = k.scale();
    let wrap = |i: i64| if i < n / 2 { i } else { i - n } as f64 * h;
    let mut total = 0.0;
    if grid.dim == 1 {
        for i in 0..n {
            total += eta_value(s, k.order, 1, wrap(i).abs());
        }
    } else {
        for i in 0..n {
            let x = wrap(i);
            for j in 0..n {
                let y = wrap(j);
                total += eta_value(s, k.order, 2, (x * x + y * y).sqrt());
            }
        }
    }
    Ok(total * fine.delta())
}

/// Mean of `|f|` over the samples of `Q`.
pub fn cube_average(f: &GridFunction, q: &DyadicCube) -> Result<f64> {
    q.check(&f.grid)?;
    let idx = q.sample_indices(&f.grid);
    Ok(idx.iter().map(|&i| f.values[i].norm()).sum::<f64>() / idx.len() as f64)
}

/// Periodic prefix sums along one axis: `out[i] = Σ_{k<i} a[k]`, length `n+1`.
fn prefix(a: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + 1);
    out.push(0.0);
    let mut s = 0.0;
    for &x in a {
        s += x;
        out.push(s);
    }
    out
}

/// Sum of `a[c−k .. c+k]` (inclusive, periodic) from a prefix table.
fn window_sum(pre: &[f64], n: usize, c: usize, k: usize) -> f64 {
    let total = pre[n];
    let len = 2 * k + 1;
    if len >= n {
        return total;
    }
    let start = (c + n - k) % n;
    let end = start + len;
    if end <= n {
        pre[end] - pre[start]
    } else {
        total - pre[start] + pre[end - n]
    }
}

/// Half-widths `2^j` in samples for radii `h, 2h, …, 2^{jmax−1}`.
fn half_widths(grid: &Grid) -> Vec<usize> {
    (0..(grid.jmax + grid.jfine)).map(|j| 1usize << j).collect()
}

/// Hardy–Littlewood maximal function over centered cubes.
///
/// Radius `r = 2^j h` averages the closed cube of side `2r` around each sample
/// (offsets `|k| ≤ 2^j`, the whole torus once that covers it). The sample
/// itself stands for the limit `r → 0`, so `ℳf ≥ |f|` holds exactly.
pub fn hl_maximal(f: &GridFunction) -> GridFunction {
    let grid = f.grid;
    let n = grid.points_per_axis();
    let a = f.abs();
    let mut best = a.clone();
    let width = |k: usize| (2 * k + 1).min(n) as f64;
    if grid.dim == 1 {
        let pre = prefix(&a);
        for (c, b) in best.iter_mut().enumerate() {
            for k in half_widths(&grid) {
                *b = b.max(window_sum(&pre, n, c, k) / width(k));
            }
        }
    } else {
        let mut rows = vec![0.0; grid.len()];
        let mut col = vec![0.0; n];
        for k in half_widths(&grid) {
            // separable box sums: rows then columns
            for r in 0..n {
                let pre = prefix(&a[r * n..(r + 1) * n]);
                for c in 0..n {
                    rows[r * n + c] = window_sum(&pre, n, c, k);
                }
            }
            let count = width(k) * width(k);
            for c in 0..n {
                for r in 0..n {
                    col[r] = rows[r * n + c];
                }
                let pre = prefix(&col);
                for r in 0..n {
                    let b = &mut best[r * n + c];
                    *b = b.max(window_sum(&pre, n, r, k) / count);
                }
            }
        }
    }
    GridFunction { grid, values: best.into_iter().map(|x| Complex64::new(x, 0.0)).collect() }
}

/// Brute-force maximal function, kept as an oracle for tests and harness checks.
pub fn hl_maximal_direct(f: &GridFunction) -> GridFunction {
    let grid = f.grid;
    let n = grid.points_per_axis() as i64;
    let a = f.abs();
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (x, o) in out.iter_mut().enumerate() {
        let xi = grid.unravel(x);
        let mut best = a[x];
        for k in half_widths(&grid) {
            let k = k as i64;
            // a window as wide as the torus is the torus, counted once
            let (lo, hi) = if 2 * k + 1 >= n { (0, n - 1) } else { (-k, k) };
            let base = |c: usize| if 2 * k + 1 >= n { 0 } else { c as i64 };
            let ys: Vec<i64> = if grid.dim == 2 { (lo..=hi).collect() } else { vec![0] };
            let (mut s, mut cnt) = (0.0, 0.0);
            for dx in lo..=hi {
                for &dy in &ys {
                    let i = (base(xi[0]) + dx).rem_euclid(n) as usize;
                    let jj = if grid.dim == 2 { (base(xi[1]) + dy).rem_euclid(n) as usize } else { 0 };
                    s += a[grid.ravel([i, jj])];
                    cnt += 1.0;
                }
            }
            best = best.max(s / cnt);
        }
        *o = Complex64::new(best, 0.0);
    }
    GridFunction { grid, values: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::indicator;
    use crate::spectral::Spectral;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(g: &Grid, seed: u64) -> GridFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..g.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        GridFunction::new(g, v).unwrap()
    }

    #[test]
    fn eta_peak_values() {
        let g = Grid::default_for_dim(1);
        assert_eq!(eta_evaluate(&EtaKernel::new(0, 4.0), &g).unwrap().values[0].re, 1.0);
        for v in 0..5 {
            assert_eq!(eta_evaluate(&EtaKernel::new(v, 4.0), &g).unwrap().values[0].re, (v as f64).exp2());
        }
        let g2 = Grid::default_for_dim(2);
        assert_eq!(eta_evaluate(&EtaKernel::new(3, 6.0), &g2).unwrap().values[0].re, 64.0);
        assert!(eta_evaluate(&EtaKernel::new(0, 1.0), &g).is_err());
        assert!(eta_evaluate(&EtaKernel::new(0, 2.0), &g2).is_err());
    }

    #[test]
    fn eta_l1_is_level_independent() {
        for g in [Grid::default_for_dim(1), Grid::default_for_dim(2)] {
            let m = 2.0 * g.dim as f64 + 2.0;
            let norms: Vec<f64> = (0..=g.jfine as i32 - 2)
                .map(|v| eta_l1_quadrature(&EtaKernel::new(v, m), &g, 3).unwrap())
                .collect();
            let max = norms.iter().copied().fold(f64::MIN, f64::max);
            let min = norms.iter().copied().fold(f64::MAX, f64::min);
            assert!((max - min) / max <= 0.05, "dim {}: {norms:?}", g.dim);
        }
    }

    #[test]
    fn plain_riemann_l1_variation_is_cusp_limited() {
        // at-grid sums overshoot by about (2^v h)² |g'(0)| / 6 near the top level
        let g = Grid::default_for_dim(1);
        let norms: Vec<f64> = (0..=5)
            .map(|v| eta_evaluate(&EtaKernel::new(v, 4.0), &g).unwrap().integral().re)
            .collect();
        let rel = (norms[5] - norms[0]) / norms[5];
        assert!(rel > 0.05 && rel < 0.08, "{rel}");
    }

    #[test]
    fn hl_constant_and_domination() {
        for g in [Grid::new(1, 2, 4).unwrap(), Grid::new(2, 1, 3).unwrap()] {
            let c = GridFunction::constant(&g, Complex64::new(-2.5, 0.0));
            assert!(hl_maximal(&c).values.iter().all(|z| (z.re - 2.5).abs() < 1e-12));
            let f = random(&g, 3);
            let m = hl_maximal(&f);
            let slow = hl_maximal_direct(&f);
            for i in 0..g.len() {
                assert!(m.values[i].re >= f.values[i].norm());
                assert!((m.values[i].re - slow.values[i].re).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hl_spike() {
        let g = Grid::new(1, 2, 5).unwrap();
        let mut f = GridFunction::zeros(&g);
        let x0 = 40;
        f.values[x0] = Complex64::new(1.0 / g.delta(), 0.0);
        let m = hl_maximal(&f);
        let slow = hl_maximal_direct(&f);
        for i in 0..g.len() {
            assert!((m.values[i].re - slow.values[i].re).abs() < 1e-9);
            let d = g.periodic_distance(i, x0);
            if d > 0.0 {
                assert!(m.values[i].re >= 0.5 / (2.0 * d) - 1e-12);
            }
        }
    }

    #[test]
    fn cube_average_examples() {
        let g = Grid::new(1, 2, 4).unwrap();
        let one = GridFunction::constant(&g, Complex64::new(1.0, 0.0));
        assert_eq!(cube_average(&one, &DyadicCube::new(1, &[3])).unwrap(), 1.0);
        let child = indicator(&DyadicCube::new(1, &[2]), &g).unwrap();
        assert_eq!(cube_average(&child, &DyadicCube::new(0, &[1])).unwrap(), 0.5);
        let f = random(&g, 8);
        let q = DyadicCube::new(2, &[5]);
        let want: f64 = q.sample_indices(&g).iter().map(|&i| f.values[i].norm()).sum::<f64>() / 4.0;
        assert!((cube_average(&f, &q).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn eta_convolution_is_monotone() {
        let g = Grid::new(1, 2, 4).unwrap();
        let s = Spectral::new(&g);
        let eta = eta_evaluate(&EtaKernel::new(1, 4.0), &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let b: Vec<f64> = a.iter().map(|x| x + rng.gen_range(0.0..1.0)).collect();
        let fa = s.convolve(&GridFunction::from_real(&g, &a).unwrap(), &eta).unwrap();
        let fb = s.convolve(&GridFunction::from_real(&g, &b).unwrap(), &eta).unwrap();
        for i in 0..g.len() {
            assert!(fa.values[i].re <= fb.values[i].re + 1e-12);
        }
    }
}
