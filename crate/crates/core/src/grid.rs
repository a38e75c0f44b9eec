//! Periodic sampling grid, the dyadic cube lattice and sampled functions.
//!
//! The fundamental domain is the torus `[0, 2^jmax)^n` sampled with spacing
//! `2^-jfine`. Cubes are half-open, `m_i <= 2^v x_i < m_i + 1`, so every sample
//! belongs to exactly one cube per level.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Hard cap on the number of samples, to keep everything desk scale.
pub const MAX_SAMPLES: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    pub jmax: u32,
    pub jfine: u32,
}

impl Grid {
    pub fn new(dim: usize, jmax: u32, jfine: u32) -> Result<Self> {
        let grid = Grid { dim, jmax, jfine };
        grid.validate()?;
        Ok(grid)
    }

    /// Default desk-scale grids: `n=1, jmax=3, jfine=7` and `n=2, jmax=2, jfine=5`.
    pub fn default_for_dim(dim: usize) -> Self {
        match dim {
            2 => Grid { dim: 2, jmax: 2, jfine: 5 },
            _ => Grid { dim: 1, jmax: 3, jfine: 7 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return domain(format!("grid dimension must be 1 or 2, got {}", self.dim));
        }
        if self.jfine < 1 {
            return domain("jfine must be at least 1");
        }
        let bits = (self.jmax + self.jfine) as usize * self.dim;
        if bits > MAX_SAMPLES.trailing_zeros() as usize {
            return domain(format!("grid too large: 2^{bits} samples"));
        }
        Ok(())
    }

    /// Refined copy with one more level of sampling.
    pub fn refined(&self) -> Self {
        Grid { jfine: self.jfine + 1, ..*self }
    }

    pub fn points_per_axis(&self) -> usize {
        1usize << (self.jmax + self.jfine)
    }

    pub fn len(&self) -> usize {
        self.points_per_axis().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (-(self.jfine as f64)).exp2()
    }

    pub fn side(&self) -> f64 {
        (self.jmax as f64).exp2()
    }

    /// Quadrature weight of one sample.
    pub fn delta(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn domain_volume(&self) -> f64 {
        self.side().powi(self.dim as i32)
    }

    pub fn unravel(&self, idx: usize) -> [usize; 2] {
        let n = self.points_per_axis();
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / n, idx % n]
        }
    }

    pub fn ravel(&self, ij: [usize; 2]) -> usize {
        if self.dim == 1 {
            ij[0]
        } else {
            ij[0] * self.points_per_axis() + ij[1]
        }
    }

    pub fn coord(&self, idx: usize) -> [f64; 2] {
        let h = self.spacing();
        let ij = self.unravel(idx);
        [ij[0] as f64 * h, ij[1] as f64 * h]
    }

    /// Minimum-image offset, in samples, from `b` to `a` along each axis.
    pub fn periodic_offset(&self, a: usize, b: usize) -> [i64; 2] {
        let n = self.points_per_axis() as i64;
        let ia = self.unravel(a);
        let ib = self.unravel(b);
        let mut out = [0i64; 2];
        for k in 0..self.dim {
            let mut d = (ia[k] as i64 - ib[k] as i64).rem_euclid(n);
            if d > n / 2 {
                d -= n;
            }
            out[k] = d;
        }
        out
    }

    /// Euclidean torus distance between two samples.
    pub fn periodic_distance(&self, a: usize, b: usize) -> f64 {
        let off = self.periodic_offset(a, b);
        let h = self.spacing();
        ((off[0] * off[0] + off[1] * off[1]) as f64).sqrt() * h
    }

    /// Torus distance of a sample to the origin.
    pub fn norm_of(&self, idx: usize) -> f64 {
        self.periodic_distance(idx, 0)
    }

    pub fn min_level(&self) -> i32 {
        -(self.jmax as i32)
    }

    pub fn max_level(&self) -> i32 {
        self.jfine as i32
    }

    /// Number of cube positions per axis at level `v`.
    pub fn positions_per_axis(&self, v: i32) -> usize {
        1usize << (v + self.jmax as i32) as u32
    }

    /// The cube of level `v` containing sample `idx`.
    pub fn cube_containing(&self, idx: usize, v: i32) -> DyadicCube {
        let shift = (self.jfine as i32 - v) as u32;
        let ij = self.unravel(idx);
        let m = (0..self.dim).map(|k| (ij[k] >> shift) as i64).collect();
        DyadicCube { v, m }
    }
}

/// Dyadic cube `Q_{v,m} = 2^-v ([0,1)^n + m)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub v: i32,
    pub m: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubeGeometry {
    pub side: f64,
    pub corner: Vec<f64>,
    pub center: Vec<f64>,
    pub volume: f64,
    pub v_plus: i32,
}

impl DyadicCube {
    pub fn new(v: i32, m: &[i64]) -> Self {
        DyadicCube { v, m: m.to_vec() }
    }

    pub fn side(&self) -> f64 {
        (-(self.v as f64)).exp2()
    }

    pub fn volume(&self, dim: usize) -> f64 {
        (-(self.v as f64) * dim as f64).exp2()
    }

    pub fn v_plus(&self) -> i32 {
        self.v.max(0)
    }

    pub fn check(&self, grid: &Grid) -> Result<()> {
        if self.m.len() != grid.dim {
            return domain(format!(
                "cube position has {} coordinates on a {}-dimensional grid",
                self.m.len(),
                grid.dim
            ));
        }
        if self.v < grid.min_level() || self.v > grid.max_level() {
            return domain(format!(
                "cube level {} outside [{}, {}]",
                self.v,
                grid.min_level(),
                grid.max_level()
            ));
        }
        let count = grid.positions_per_axis(self.v) as i64;
        if self.m.iter().any(|&mi| mi < 0 || mi >= count) {
            return domain(format!("cube {:?} lies outside the fundamental domain", self));
        }
        Ok(())
    }

    /// Sample index range `[start, start+len)` along each axis.
    pub fn sample_ranges(&self, grid: &Grid) -> [(usize, usize); 2] {
        let len = 1usize << (grid.jfine as i32 - self.v) as u32;
        let mut out = [(0, 1); 2];
        for k in 0..grid.dim {
            out[k] = (self.m[k] as usize * len, len);
        }
        out
    }

    /// Flat indices of the samples inside the cube.
    pub fn sample_indices(&self, grid: &Grid) -> Vec<usize> {
        let r = self.sample_ranges(grid);
        let mut out = Vec::with_capacity(r[0].1 * r[1].1);
        for i in r[0].0..r[0].0 + r[0].1 {
            for j in r[1].0..r[1].0 + r[1].1 {
                out.push(grid.ravel([i, j]));
            }
        }
        out
    }

    /// Flat index of the lower-left corner sample.
    pub fn corner_index(&self, grid: &Grid) -> usize {
        let r = self.sample_ranges(grid);
        grid.ravel([r[0].0, r[1].0])
    }

    pub fn contains(&self, grid: &Grid, idx: usize) -> bool {
        grid.cube_containing(idx, self.v) == *self
    }
}

pub fn cube_geometry(q: &DyadicCube, grid: &Grid) -> Result<CubeGeometry> {
    q.check(grid)?;
    let side = q.side();
    let corner: Vec<f64> = q.m.iter().map(|&mi| mi as f64 * side).collect();
    let center = corner.iter().map(|c| c + side / 2.0).collect();
    Ok(CubeGeometry { side, corner, center, volume: q.volume(grid.dim), v_plus: q.v_plus() })
}

/// All cubes with level in `[v_lo, v_hi]` that tile the fundamental domain.
pub fn cubes_in_window(grid: &Grid, v_lo: i32, v_hi: i32) -> Result<Vec<DyadicCube>> {
    if v_lo > v_hi || v_lo < grid.min_level() || v_hi > grid.max_level() {
        return domain(format!(
            "cube window [{v_lo}, {v_hi}] not within [{}, {}]",
            grid.min_level(),
            grid.max_level()
        ));
    }
    let mut out = Vec::new();
    for v in v_lo..=v_hi {
        let count = grid.positions_per_axis(v) as i64;
        if grid.dim == 1 {
            out.extend((0..count).map(|m| DyadicCube { v, m: vec![m] }));
        } else {
            for a in 0..count {
                out.extend((0..count).map(|b| DyadicCube { v, m: vec![a, b] }));
            }
        }
    }
    Ok(out)
}

pub fn indicator(q: &DyadicCube, grid: &Grid) -> Result<GridFunction> {
    q.check(grid)?;
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    for idx in q.sample_indices(grid) {
        values[idx] = Complex64::new(1.0, 0.0);
    }
    Ok(GridFunction { grid: *grid, values })
}

/// `f · χ_Q`.
pub fn restrict(f: &GridFunction, q: &DyadicCube) -> Result<GridFunction> {
    q.check(&f.grid)?;
    let mut values = vec![Complex64::new(0.0, 0.0); f.len()];
    for idx in q.sample_indices(&f.grid) {
        values[idx] = f.values[idx];
    }
    Ok(GridFunction { grid: f.grid, values })
}

/// Complex samples of a function on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

impl GridFunction {
    pub fn zeros(grid: &Grid) -> Self {
        GridFunction { grid: *grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn constant(grid: &Grid, c: Complex64) -> Self {
        GridFunction { grid: *grid, values: vec![c; grid.len()] }
    }

    pub fn new(grid: &Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return domain("grid function has non-finite samples");
        }
        Ok(GridFunction { grid: *grid, values })
    }

    pub fn from_real(grid: &Grid, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Samples `f(x)` at every grid coordinate.
    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.coord(i))).collect();
        GridFunction { grid: *grid, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        GridFunction { grid: self.grid, values: self.values.iter().map(|z| z * c).collect() }
    }

    pub fn scaled_complex(&self, c: Complex64) -> GridFunction {
        GridFunction { grid: self.grid, values: self.values.iter().map(|z| z * c).collect() }
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(GridFunction { grid: self.grid, values })
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(GridFunction { grid: self.grid, values })
    }

    pub fn mul(&self, other: &GridFunction) -> Result<GridFunction> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(GridFunction { grid: self.grid, values })
    }

    /// Pointwise multiplication by real weights.
    pub fn weighted(&self, w: &[f64]) -> GridFunction {
        let values = self.values.iter().zip(w).map(|(a, &b)| a * b).collect();
        GridFunction { grid: self.grid, values }
    }

    /// Quadrature `L²` norm.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.delta()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Quadrature `∫ f`.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.grid.delta()
    }
}
