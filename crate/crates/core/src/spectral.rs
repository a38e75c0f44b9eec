//! FFT plumbing on the periodic grid.
//!
//! Frequencies are angular: sample index `k` on an axis corresponds to
//! `ξ = 2πk/L` with `L = 2^jmax`, wrapped to `k ∈ [−N/2, N/2)`.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::Result;
use crate::grid::{Grid, GridFunction};

#[derive(Clone)]
pub struct Spectral {
    grid: Grid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.points_per_axis();
        Spectral { grid: *grid, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn apply(&self, plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64]) {
        let n = self.grid.points_per_axis();
        plan.process(data);
        if self.grid.dim == 2 {
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
    }

    /// Unnormalized forward DFT in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.apply(&self.fwd, data);
    }

    /// Inverse DFT in place, normalized so that `inverse ∘ forward = id`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.apply(&self.inv, data);
        let scale = 1.0 / data.len() as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }

    pub fn spectrum(&self, f: &GridFunction) -> Vec<Complex64> {
        let mut buf = f.values.clone();
        self.forward(&mut buf);
        buf
    }

    /// `IDFT(m · spec)` for a precomputed spectrum.
    pub fn synthesize_from(&self, spec: &[Complex64], mult: &[f64]) -> GridFunction {
        let mut buf: Vec<Complex64> = spec.iter().zip(mult).map(|(z, &m)| z * m).collect();
        self.inverse(&mut buf);
        GridFunction { grid: self.grid, values: buf }
    }

    /// Fourier multiplier `IDFT(m · DFT f)`.
    pub fn apply_multiplier(&self, f: &GridFunction, mult: &[f64]) -> Result<GridFunction> {
        self.check(f)?;
        Ok(self.synthesize_from(&self.spectrum(f), mult))
    }

    /// Periodic convolution `Δ · Σ_y f(y) g(x−y)`.
    pub fn convolve(&self, f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
        self.check(f)?;
        f.check_same_grid(g)?;
        let mut a = self.spectrum(f);
        let b = self.spectrum(g);
        let delta = self.grid.delta();
        for (x, y) in a.iter_mut().zip(&b) {
            *x *= y * delta;
        }
        self.inverse(&mut a);
        Ok(GridFunction { grid: self.grid, values: a })
    }

    fn check(&self, f: &GridFunction) -> Result<()> {
        if f.grid != self.grid {
            return Err(crate::error::Error::GridMismatch(format!(
                "spectral plan for {:?}, function on {:?}",
                self.grid, f.grid
            )));
        }
        Ok(())
    }
}

/// Signed wrapped index on an axis of length `n`.
pub fn wrapped(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Angular frequency vector at every DFT index.
pub fn frequencies(grid: &Grid) -> Vec<[f64; 2]> {
    let n = grid.points_per_axis();
    let unit = 2.0 * PI / grid.side();
    (0..grid.len())
        .map(|idx| {
            let ij = grid.unravel(idx);
            let mut xi = [0.0; 2];
            for k in 0..grid.dim {
                xi[k] = wrapped(ij[k], n) as f64 * unit;
            }
            xi
        })
        .collect()
}

/// `|ξ|` at every DFT index.
pub fn frequency_magnitudes(grid: &Grid) -> Vec<f64> {
    frequencies(grid).iter().map(|x| (x[0] * x[0] + x[1] * x[1]).sqrt()).collect()
}

/// Naive `O(N²)` periodic convolution, used as an oracle.
pub fn convolve_direct(f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    f.check_same_grid(g)?;
    let grid = f.grid;
    let n = grid.points_per_axis();
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (x, o) in out.iter_mut().enumerate() {
        let xi = grid.unravel(x);
        let mut acc = Complex64::new(0.0, 0.0);
        for y in 0..grid.len() {
            let yi = grid.unravel(y);
            let d = [(xi[0] + n - yi[0]) % n, if grid.dim == 2 { (xi[1] + n - yi[1]) % n } else { 0 }];
            acc += f.values[y] * g.values[grid.ravel(d)];
        }
        *o = acc * grid.delta();
    }
    Ok(GridFunction { grid, values: out })
}
