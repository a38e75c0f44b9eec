//! Band-limited analysis/synthesis pair and the φ-transform.
//!
//! All profiles are radial and real, so `φ̃ = conj φ(−·)` has the same Fourier
//! profile as `φ`. The dual `ψ` is `φ / S` with the dyadic-invariant sum
//! `S(η) = Σ_k F_φ(2^k η)²`, and `Ψ` is fixed by the reproducing identity.
//! On the grid only levels `0..=jfine−1` exist, so synthesis multipliers are
//! divided by the truncated Calderón sum, which is what makes `T_ψ S_φ = id`
//! exact on every active lattice frequency.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::grid::{Grid, GridFunction};
use crate::sequence::SequenceCoeffs;
use crate::spectral::{frequency_magnitudes, Spectral};

/// Transition radii of the profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    /// `F_φ` vanishes below this radius.
    pub phi_zero_lo: f64,
    /// `F_φ ≡ 1` from here ...
    pub phi_one_lo: f64,
    /// ... up to here.
    pub phi_one_hi: f64,
    /// `F_φ` vanishes above this radius.
    pub phi_zero_hi: f64,
    pub big_one: f64,
    pub big_zero: f64,
}

impl Default for Margins {
    fn default() -> Self {
        Margins {
            phi_zero_lo: 0.55,
            phi_one_lo: 0.6,
            phi_one_hi: 5.0 / 3.0,
            phi_zero_hi: 1.95,
            big_one: 1.7,
            big_zero: 1.98,
        }
    }
}

impl Margins {
    pub fn validate(&self) -> Result<()> {
        let m = self;
        let ordered = 0.5 <= m.phi_zero_lo
            && m.phi_zero_lo < m.phi_one_lo
            && m.phi_one_lo <= 0.6
            && m.phi_one_hi >= 5.0 / 3.0
            && m.phi_one_hi < m.phi_zero_hi
            && m.phi_zero_hi <= 2.0;
        if !ordered {
            return domain(format!("φ margins out of order: {m:?}"));
        }
        if !(m.big_one >= 5.0 / 3.0 && m.big_one < m.big_zero && m.big_zero <= 2.0) {
            return domain(format!("Φ margins out of order: {m:?}"));
        }
        // Ψ is a quotient by F_Φ on the support of the band-0 term
        if m.big_zero <= m.phi_zero_hi {
            return domain("Φ must stay positive on the support of φ");
        }
        // the dilates of the φ support must cover (0, ∞) and overlap only neighbours
        if 2.0 * m.phi_zero_lo >= m.phi_zero_hi || m.phi_zero_hi >= 4.0 * m.phi_zero_lo {
            return domain("φ support must overlap exactly its dyadic neighbours");
        }
        Ok(())
    }

    pub fn profiles(self) -> Result<Profiles> {
        self.validate()?;
        Ok(Profiles { m: self })
    }
}

fn flat(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// C^∞ step: 1 for `t ≤ 0`, 0 for `t ≥ 1`, all derivatives vanishing at both ends.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let a = flat(1.0 - t);
    a / (a + flat(t))
}

/// Radial Fourier profiles `F_Φ, F_φ, F_Ψ, F_ψ` as functions of `r = |ξ|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profiles {
    m: Margins,
}

impl Profiles {
    pub fn margins(&self) -> Margins {
        self.m
    }

    pub fn big_phi(&self, r: f64) -> f64 {
        smooth_step((r - self.m.big_one) / (self.m.big_zero - self.m.big_one))
    }

    pub fn phi(&self, r: f64) -> f64 {
        let m = &self.m;
        if r <= m.phi_zero_lo || r >= m.phi_zero_hi {
            0.0
        } else if r < m.phi_one_lo {
            1.0 - smooth_step((r - m.phi_zero_lo) / (m.phi_one_lo - m.phi_zero_lo))
        } else if r <= m.phi_one_hi {
            1.0
        } else {
            smooth_step((r - m.phi_one_hi) / (m.phi_zero_hi - m.phi_one_hi))
        }
    }

    /// `Σ_k F_φ(2^k r)²`; invariant under `r ↦ 2r`.
    pub fn dyadic_sum(&self, r: f64) -> f64 {
        (-3..=3).map(|k| self.phi(r * (k as f64).exp2()).powi(2)).sum()
    }

    pub fn psi(&self, r: f64) -> f64 {
        let f = self.phi(r);
        if f == 0.0 {
            0.0
        } else {
            f / self.dyadic_sum(r)
        }
    }

    pub fn big_psi(&self, r: f64) -> f64 {
        let b = self.big_phi(r);
        if b == 0.0 {
            return 0.0;
        }
        let mut rest = 1.0;
        let mut s = r / 2.0;
        while s > self.m.phi_zero_lo {
            rest -= self.phi(s) * self.psi(s);
            s /= 2.0;
        }
        rest / b
    }

    /// Continuum Calderón sum `F_Φ F_Ψ(r) + Σ_{j≥1} F_φ F_ψ(2^{−j} r)` (all levels).
    pub fn calderon(&self, r: f64) -> f64 {
        let mut s = self.big_phi(r) * self.big_psi(r);
        let mut x = r / 2.0;
        while x > self.m.phi_zero_lo {
            s += self.phi(x) * self.psi(x);
            x /= 2.0;
        }
        s
    }
}

/// Which member of the pair an element or multiplier belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Analysis,
    Synthesis,
}

/// `(Φ, φ, Ψ, ψ)` sampled on the frequency lattice of one grid.
#[derive(Clone)]
pub struct TransformPair {
    pub grid: Grid,
    pub profiles: Profiles,
    /// `F_Φ(ξ)` on the lattice.
    pub f_big_phi: Vec<f64>,
    /// `F_φ(ξ)` on the lattice.
    pub f_phi: Vec<f64>,
    pub f_big_psi: Vec<f64>,
    pub f_psi: Vec<f64>,
    pub lower_bound_c: f64,
    /// Per-level analysis multipliers `F_Φ(ξ)`, `F_φ(2^{−v}ξ)`.
    analysis: Vec<Vec<f64>>,
    /// Per-level synthesis multipliers divided by the truncated Calderón sum.
    synthesis: Vec<Vec<f64>>,
    /// Truncated Calderón sum before renormalization.
    truncated: Vec<f64>,
    active: Vec<bool>,
    spectral: Spectral,
    radii: Vec<f64>,
}

impl std::fmt::Debug for TransformPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransformPair")
            .field("grid", &self.grid)
            .field("margins", &self.profiles.margins())
            .field("v_max", &self.v_max())
            .finish()
    }
}

pub fn build_pair(grid: &Grid, margins: &Margins) -> Result<TransformPair> {
    grid.validate()?;
    if grid.jfine < 3 {
        return domain(format!("jfine = {} leaves fewer than 3 dyadic bands", grid.jfine));
    }
    let profiles = margins.profiles()?;
    let radii = frequency_magnitudes(grid);
    let v_max = grid.jfine as i32 - 1;
    let f_big_phi: Vec<f64> = radii.iter().map(|&r| profiles.big_phi(r)).collect();
    let f_phi: Vec<f64> = radii.iter().map(|&r| profiles.phi(r)).collect();
    let f_big_psi: Vec<f64> = radii.iter().map(|&r| profiles.big_psi(r)).collect();
    let f_psi: Vec<f64> = radii.iter().map(|&r| profiles.psi(r)).collect();

    let mut analysis = Vec::new();
    let mut dual = Vec::new();
    for v in 0..=v_max {
        if v == 0 {
            analysis.push(f_big_phi.clone());
            dual.push(f_big_psi.clone());
        } else {
            let s = (-(v as f64)).exp2();
            analysis.push(radii.iter().map(|&r| profiles.phi(r * s)).collect());
            dual.push(radii.iter().map(|&r| profiles.psi(r * s)).collect::<Vec<f64>>());
        }
    }
    let truncated: Vec<f64> = (0..grid.len()).map(|i| (0..analysis.len()).map(|v| analysis[v][i] * dual[v][i]).sum()).collect();
    // Above the plateau of the top band the truncated sum decays to 0 and
    // dividing by it would amplify rounding without bound; those frequencies
    // are left out of the reproduced range.
    let top = margins.phi_one_hi * (v_max as f64).exp2();
    let active: Vec<bool> = truncated.iter().zip(&radii).map(|(c, r)| *c > 0.0 && *r <= top).collect();
    let synthesis = dual
        .into_iter()
        .map(|d| d.iter().zip(&truncated).zip(&active).map(|((x, c), a)| if *a { x / c } else { 0.0 }).collect())
        .collect();
    Ok(TransformPair {
        grid: *grid,
        profiles,
        f_big_phi,
        f_phi,
        f_big_psi,
        f_psi,
        lower_bound_c: 1.0,
        analysis,
        synthesis,
        truncated,
        active,
        spectral: Spectral::new(grid),
        radii,
    })
}

impl TransformPair {
    pub fn new(grid: &Grid) -> Result<Self> {
        build_pair(grid, &Margins::default())
    }

    /// Highest usable level, `jfine − 1`.
    pub fn v_max(&self) -> i32 {
        self.analysis.len() as i32 - 1
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn multiplier(&self, v: i32, side: Side) -> Result<&[f64]> {
        if v < 0 || v > self.v_max() {
            return domain(format!("band {v} outside [0, {}]", self.v_max()));
        }
        Ok(match side {
            Side::Analysis => &self.analysis[v as usize],
            Side::Synthesis => &self.synthesis[v as usize],
        })
    }

    /// `F_φ(2^{−v}ξ)` for any integer `v`, or `F_Φ(2^{−v}ξ)` when `low_pass`.
    pub fn dilated(&self, v: i32, low_pass: bool) -> Vec<f64> {
        let s = (-(v as f64)).exp2();
        self.radii
            .iter()
            .map(|&r| if low_pass { self.profiles.big_phi(r * s) } else { self.profiles.phi(r * s) })
            .collect()
    }

    /// `max |Σ_v F_φ̃_v F_ψ_v − 1|` over the active lattice frequencies.
    pub fn calderon_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.grid.len() {
            if !self.active[i] {
                continue;
            }
            let s: f64 = (0..self.analysis.len()).map(|v| self.analysis[v][i] * self.synthesis[v][i]).sum();
            worst = worst.max((s - 1.0).abs());
        }
        worst
    }

    /// Same residual without the final renormalization, on the frequencies
    /// below the first missing band; measures the continuum identity itself.
    pub fn raw_calderon_residual(&self) -> f64 {
        let limit = self.profiles.margins().phi_zero_lo * ((self.v_max() + 1) as f64).exp2();
        self.radii
            .iter()
            .zip(&self.truncated)
            .filter(|(r, _)| **r <= limit)
            .map(|(_, c)| (c - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Lattice frequencies reproduced by `T_ψ S_φ`: some band is nonzero and
    /// `|ξ|` is at most the upper plateau edge of the top band.
    pub fn active(&self) -> &[bool] {
        &self.active
    }

    /// Support and lower-bound conditions at every lattice point; returns the violations.
    pub fn admissibility_violations(&self) -> Vec<String> {
        let m = self.profiles.margins();
        let c = self.lower_bound_c;
        let mut out = Vec::new();
        for (i, &r) in self.radii.iter().enumerate() {
            let (bp, p) = (self.f_big_phi[i], self.f_phi[i]);
            if r > 2.0 && bp != 0.0 {
                out.push(format!("F_Phi({r}) = {bp} outside |ξ| ≤ 2"));
            }
            if r <= 5.0 / 3.0 && bp.abs() < c {
                out.push(format!("|F_Phi({r})| = {bp} < {c}"));
            }
            if (r < 0.5 || r > 2.0) && p != 0.0 {
                out.push(format!("F_phi({r}) = {p} outside 1/2 ≤ |ξ| ≤ 2"));
            }
            if (0.6..=5.0 / 3.0).contains(&r) && p.abs() < c {
                out.push(format!("|F_phi({r})| = {p} < {c}"));
            }
            if r >= m.phi_zero_hi && self.f_psi[i] != 0.0 {
                out.push(format!("F_psi({r}) nonzero outside the φ support"));
            }
        }
        out
    }

    /// `φ_v ∗ f` (`Φ ∗ f` for `v = 0`).
    pub fn band_project(&self, f: &GridFunction, v: i32) -> Result<GridFunction> {
        let m = self.multiplier(v, Side::Analysis)?;
        self.spectral.apply_multiplier(f, m)
    }

    /// All band projections `0..=v_max` from one forward transform.
    pub fn band_projections(&self, f: &GridFunction) -> Result<Vec<GridFunction>> {
        f.check_same_grid(&GridFunction::zeros(&self.grid))?;
        let spec = self.spectral.spectrum(f);
        Ok(self.analysis.iter().map(|m| self.spectral.synthesize_from(&spec, m)).collect())
    }

    fn stride(&self, v: i32) -> usize {
        1usize << (self.grid.jfine as i32 - v) as u32
    }

    fn level_scale(&self, v: i32) -> f64 {
        (-(v as f64) * self.grid.dim as f64 / 2.0).exp2()
    }

    /// Sample index of the lattice point `2^{−v} m`.
    pub fn node_index(&self, v: i32, flat: usize) -> usize {
        let s = self.stride(v);
        let n = self.grid.positions_per_axis(v);
        if self.grid.dim == 1 {
            flat * s
        } else {
            self.grid.ravel([(flat / n) * s, (flat % n) * s])
        }
    }

    /// `(S_φ f)_{v,m} = ⟨f, φ_{v,m}⟩` for `v = 0..=v_max`.
    pub fn analyze(&self, f: &GridFunction) -> Result<SequenceCoeffs> {
        let bands = self.band_projections(f)?;
        let mut levels = Vec::with_capacity(bands.len());
        for (v, b) in bands.iter().enumerate() {
            let v = v as i32;
            let count = self.grid.positions_per_axis(v).pow(self.grid.dim as u32);
            let c = self.level_scale(v);
            levels.push((0..count).map(|k| b.values[self.node_index(v, k)] * c).collect());
        }
        SequenceCoeffs::from_levels(&self.grid, levels)
    }

    /// `T_ψ λ = Σ_m λ_{0,m} Ψ_m + Σ_{v≥1} Σ_m λ_{v,m} ψ_{v,m}`.
    pub fn synthesize(&self, lambda: &SequenceCoeffs) -> Result<GridFunction> {
        if lambda.grid != self.grid {
            return Err(crate::error::Error::GridMismatch("sequence and transform pair differ".into()));
        }
        if lambda.v_max() > self.v_max() {
            return domain(format!("coefficient level {} above the top band {}", lambda.v_max(), self.v_max()));
        }
        let delta = self.grid.delta();
        let mut total = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for v in 0..=lambda.v_max() {
            let level = lambda.level(v);
            if level.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
                continue;
            }
            let c = self.level_scale(v) / delta;
            let mut comb = vec![Complex64::new(0.0, 0.0); self.grid.len()];
            for (k, z) in level.iter().enumerate() {
                comb[self.node_index(v, k)] = z * c;
            }
            self.spectral.forward(&mut comb);
            for ((t, z), m) in total.iter_mut().zip(&comb).zip(&self.synthesis[v as usize]) {
                *t += z * m;
            }
        }
        self.spectral.inverse(&mut total);
        GridFunction::new(&self.grid, total)
    }

    /// Samples of `φ_{v,m}` (analysis) or `ψ_{v,m}` (synthesis) with
    /// `φ_{v,m}(x) = 2^{−vn/2} φ_v(x − 2^{−v}m)`.
    pub fn element(&self, v: i32, m: &[i64], side: Side) -> Result<GridFunction> {
        let mult = self.multiplier(v, side)?;
        let mut k: Vec<Complex64> = mult.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.spectral.inverse(&mut k);
        let flat = SequenceCoeffs::zeros(&self.grid, v)?.flat(v, m)?;
        let origin = self.grid.unravel(self.node_index(v, flat));
        let n = self.grid.points_per_axis();
        let c = self.level_scale(v) / self.grid.delta();
        let values = (0..self.grid.len())
            .map(|idx| {
                let ij = self.grid.unravel(idx);
                let src = [(ij[0] + n - origin[0]) % n, (ij[1] + n - origin[1]) % n];
                k[self.grid.ravel(src)] * c
            })
            .collect();
        GridFunction::new(&self.grid, values)
    }

    /// `Σ_v` of the dual-weighted projections `ψ_v ∗ φ̃_v ∗ f`; reproduces `f`
    /// on active frequencies.
    pub fn reproduce(&self, f: &GridFunction) -> Result<GridFunction> {
        f.check_same_grid(&GridFunction::zeros(&self.grid))?;
        let spec = self.spectral.spectrum(f);
        let total: Vec<f64> = (0..self.grid.len())
            .map(|i| (0..self.analysis.len()).map(|v| self.analysis[v][i] * self.synthesis[v][i]).sum())
            .collect();
        Ok(self.spectral.synthesize_from(&spec, &total))
    }
}

/// Random function whose spectrum lies in `|ξ| < 0.55 · 2^{v_top+1}`, so only
/// bands `0..=v_top` see it.
pub fn band_limited_random<R: Rng>(grid: &Grid, v_top: i32, rng: &mut R) -> GridFunction {
    let limit = Margins::default().phi_zero_lo * ((v_top + 1) as f64).exp2();
    let radii = frequency_magnitudes(grid);
    let mut spec: Vec<Complex64> = radii
        .iter()
        .map(|&r| {
            if r < limit {
                // mild decay so all bands carry comparable weight per octave
                let a = 1.0 / (1.0 + r).sqrt();
                Complex64::new(rng.gen_range(-1.0..1.0) * a, rng.gen_range(-1.0..1.0) * a)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Spectral::new(grid).inverse(&mut spec);
    let scale = 1.0 / spec.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    GridFunction { grid: *grid, values: spec.into_iter().map(|z| z * scale).collect() }
}

/// Function whose spectrum sits on the plateau of band `v` only.
pub fn single_band<R: Rng>(grid: &Grid, v: i32, rng: &mut R) -> GridFunction {
    let p = Margins::default();
    let s = (v as f64).exp2();
    let (lo, hi) = if v == 0 { (0.0, 0.5) } else { (p.phi_one_lo * s * 1.05, p.phi_one_hi * s * 0.95) };
    let radii = frequency_magnitudes(grid);
    let mut spec: Vec<Complex64> = radii
        .iter()
        .map(|&r| {
            if r >= lo && r <= hi {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Spectral::new(grid).inverse(&mut spec);
    let scale = 1.0 / spec.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    GridFunction { grid: *grid, values: spec.into_iter().map(|z| z * scale).collect() }
}
