//! Seeded test corpora.
//!
//! Functions are trigonometric polynomials drawn by integer wavenumber, so the
//! same seed yields the same continuum function on any refinement of the grid.
//! Sequences are indexed by `(v, m)` only and are refinement independent too.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::grid::{Grid, GridFunction};
use crate::phi::Margins;
use crate::sequence::{SequenceCoeffs, SpaceParams};
use crate::spectral::Spectral;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionKind {
    BandLimited,
    Bump,
    SingleBand(i32),
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub seed: u64,
    pub grid: Grid,
    /// Highest band any function reaches.
    pub band_top: i32,
    pub functions: Vec<GridFunction>,
    pub kinds: Vec<FunctionKind>,
    pub sequences: Vec<SequenceCoeffs>,
    pub exponent_sets: Vec<SpaceParams>,
}

/// Wavenumbers `k` (per axis) with `|2πk/L| < limit`, in a grid-independent order.
fn wavenumbers(grid: &Grid, limit: f64) -> Vec<([i64; 2], f64)> {
    let unit = 2.0 * PI / grid.side();
    let kmax = (limit / unit).ceil() as i64;
    let mut out = Vec::new();
    for a in -kmax..=kmax {
        let range = if grid.dim == 1 { 0..=0 } else { -kmax..=kmax };
        for b in range {
            let r = unit * ((a * a + b * b) as f64).sqrt();
            if r < limit {
                out.push(([a, b], r));
            }
        }
    }
    out
}

/// Samples of `Σ c_k e^{iξ_k·x}` on the grid.
fn synthesize(grid: &Grid, coeffs: &[([i64; 2], Complex64)]) -> GridFunction {
    let n = grid.points_per_axis() as i64;
    let mut spec = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (k, c) in coeffs {
        let i = k[0].rem_euclid(n) as usize;
        let j = k[1].rem_euclid(n) as usize;
        spec[grid.ravel([i, j])] += c * grid.len() as f64;
    }
    Spectral::new(grid).inverse(&mut spec);
    GridFunction { grid: *grid, values: spec }
}

fn normalized(coeffs: Vec<([i64; 2], Complex64)>) -> Vec<([i64; 2], Complex64)> {
    let l1: f64 = coeffs.iter().map(|(_, c)| c.norm()).sum();
    let s = if l1 > 0.0 { 1.0 / l1 } else { 0.0 };
    coeffs.into_iter().map(|(k, c)| (k, c * s)).collect()
}

fn uniform(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

impl Corpus {
    /// `functions` band-limited to levels `≤ band_top`, `sequences` supported on
    /// levels `≤ band_top`, and the given exponent sets.
    pub fn generate(
        grid: &Grid,
        seed: u64,
        functions: usize,
        sequences: usize,
        band_top: i32,
        exponent_sets: Vec<SpaceParams>,
    ) -> Result<Corpus> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let margins = Margins::default();
        let profiles = margins.profiles()?;
        let top_scale = (band_top as f64).exp2();
        // the next band starts at 2·phi_zero_lo·2^{band_top}
        let limit = 2.0 * margins.phi_zero_lo * top_scale;
        let cut = margins.big_zero / limit;
        let all = wavenumbers(grid, limit);
        let mut fs = Vec::with_capacity(functions);
        let mut kinds = Vec::with_capacity(functions);
        for i in 0..functions {
            let kind = match i % 5 {
                0 | 1 | 2 => FunctionKind::BandLimited,
                3 => FunctionKind::Bump,
                _ => FunctionKind::SingleBand(rng.gen_range(1..=(band_top - 1).max(1))),
            };
            let coeffs: Vec<([i64; 2], Complex64)> = match kind {
                FunctionKind::BandLimited => all
                    .iter()
                    .map(|(k, r)| (*k, uniform(&mut rng) * profiles.big_phi(r * cut) / (1.0 + r).sqrt()))
                    .collect(),
                FunctionKind::Bump => {
                    let width = rng.gen_range(0.05..0.4) * grid.side();
                    let center = [rng.gen_range(0.0..grid.side()), rng.gen_range(0.0..grid.side())];
                    let unit = 2.0 * PI / grid.side();
                    all.iter()
                        .map(|(k, r)| {
                            let phase = -unit * (k[0] as f64 * center[0] + k[1] as f64 * center[1]);
                            let amp = (-(r * width).powi(2) / 2.0).exp() * profiles.big_phi(r * cut);
                            (*k, Complex64::from_polar(amp, phase))
                        })
                        .collect()
                }
                FunctionKind::SingleBand(v) => {
                    let s = (v as f64).exp2();
                    all.iter()
                        .filter(|(_, r)| *r >= margins.phi_one_lo * s && *r <= margins.phi_one_hi * s)
                        .map(|(k, _)| (*k, uniform(&mut rng)))
                        .collect()
                }
            };
            fs.push(synthesize(grid, &normalized(coeffs)));
            kinds.push(kind);
        }
        let mut seqs = Vec::with_capacity(sequences);
        for i in 0..sequences {
            let mut c = SequenceCoeffs::zeros(grid, band_top)?;
            if i < sequences.min(5) {
                // spikes first: one unit coefficient each
                let v = (i as i32) % (band_top + 1);
                let m = Self::random_position(grid, v, &mut rng);
                c.set(v, &m, Complex64::new(1.0, 0.0))?;
            } else {
                for v in 0..=band_top {
                    if rng.gen_bool(0.3) {
                        continue;
                    }
                    for _ in 0..rng.gen_range(1..=6) {
                        let m = Self::random_position(grid, v, &mut rng);
                        c.set(v, &m, uniform(&mut rng))?;
                    }
                }
                if c.is_zero() {
                    c.set(0, &vec![0; grid.dim], Complex64::new(1.0, 0.0))?;
                }
            }
            seqs.push(c);
        }
        Ok(Corpus { seed, grid: *grid, band_top, functions: fs, kinds, sequences: seqs, exponent_sets })
    }

    fn random_position(grid: &Grid, v: i32, rng: &mut ChaCha8Rng) -> Vec<i64> {
        let count = grid.positions_per_axis(v) as i64;
        (0..grid.dim).map(|_| rng.gen_range(0..count)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(grid: &Grid, seed: u64) -> Corpus {
        Corpus::generate(grid, seed, 10, 12, grid.jfine as i32 - 2, vec![]).unwrap()
    }

    #[test]
    fn reproducible_from_seed() {
        let g = Grid::new(1, 2, 6).unwrap();
        let (a, b) = (corpus(&g, 9), corpus(&g, 9));
        assert_eq!(a.functions, b.functions);
        assert_eq!(a.sequences, b.sequences);
        assert_ne!(a.functions, corpus(&g, 10).functions);
    }

    #[test]
    fn refinement_samples_the_same_functions() {
        let g = Grid::new(1, 2, 6).unwrap();
        let fine = g.refined();
        let a = corpus(&g, 4);
        let b = Corpus::generate(&fine, 4, 10, 12, g.jfine as i32 - 2, vec![]).unwrap();
        for (f, h) in a.functions.iter().zip(&b.functions) {
            for (i, z) in f.values.iter().enumerate() {
                assert!((z - h.values[2 * i]).norm() < 1e-12);
            }
        }
        for (s, t) in a.sequences.iter().zip(&b.sequences) {
            assert_eq!(s.entries(), t.entries());
        }
    }

    #[test]
    fn functions_are_band_limited_and_bounded() {
        for g in [Grid::new(1, 3, 7).unwrap(), Grid::new(2, 1, 4).unwrap()] {
            let c = corpus(&g, 1);
            let pair = crate::phi::TransformPair::new(&g).unwrap();
            for f in &c.functions {
                assert!(f.max_abs() <= 1.0 + 1e-12 && f.max_abs() > 0.0);
                // nothing above the band of level jfine − 2
                let top = pair.band_project(f, pair.v_max()).unwrap();
                assert!(top.max_abs() < 1e-12 * f.max_abs().max(1.0));
            }
        }
    }
}
