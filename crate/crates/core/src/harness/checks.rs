//! Lemma-level inequalities measured as empirical constants.

use std::f64::consts::{E, LN_2};
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::report::{CheckClass, CheckReport};
use super::{tau_sequence_norm, Harness};
use crate::atoms::{atomize, fj_decay_check, kl_requirements, synthesize_atoms, validate_atom, AtomSpec, Window};
use crate::atoms::{DEFAULT_FD_TOL, DEFAULT_GAMMA, DEFAULT_MOM_TOL};
use crate::besov::{besov_norm, besov_norm_peetre, besov_norm_sharp, besov_norm_shifted, default_kernel_order};
use crate::error::{Error, Result};
use crate::exponent::{classify, conjugate_exponent, estimate_log_holder, ExponentField, P_CAP};
use crate::grid::{cubes_in_window, DyadicCube, GridFunction};
use crate::io::SpaceSpec;
use crate::kernels::eta_scaled;
use crate::modular::{luxemburg_norm, mixed_norm, modular, tilde_norm};
use crate::oracle::{self, Scalars};
use crate::sequence::{b_norm, coeff_bound_ratio, indicator_norm, lambda_star, smooth_levels, SpaceParams};
use crate::solver::DEFAULT_TOL;

const TILDE_TOL: f64 = DEFAULT_TOL * 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LemmaId {
    Dhr,
    RTrick,
    DhhrEstimate,
    AlmHasto,
    KeyEstimate1,
    KeyLemma,
    KeyLemmaSection3,
    LamdaEqui,
    KeyEstimate,
    /// `‖χ_B‖_p ‖χ_B‖_{p'} ≈ |B|`.
    Duality,
    /// Orderings and ratio bands of the base, sharp, shifted and Peetre norms.
    NormVariants,
    /// Atomization round trip and decay constants.
    Atomic,
    /// Boundedness of `S_φ` and `T_ψ` between the function and sequence spaces.
    PhiTran,
}

impl LemmaId {
    pub const ALL: [LemmaId; 13] = [
        LemmaId::Dhr,
        LemmaId::RTrick,
        LemmaId::DhhrEstimate,
        LemmaId::AlmHasto,
        LemmaId::KeyEstimate1,
        LemmaId::KeyLemma,
        LemmaId::KeyLemmaSection3,
        LemmaId::LamdaEqui,
        LemmaId::KeyEstimate,
        LemmaId::Duality,
        LemmaId::NormVariants,
        LemmaId::Atomic,
        LemmaId::PhiTran,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LemmaId::Dhr => "DHR",
            LemmaId::RTrick => "r_trick",
            LemmaId::DhhrEstimate => "DHHR_estimate",
            LemmaId::AlmHasto => "alm_hasto",
            LemmaId::KeyEstimate1 => "key_estimate1",
            LemmaId::KeyLemma => "key_lemma",
            LemmaId::KeyLemmaSection3 => "key_lemma_section3",
            LemmaId::LamdaEqui => "lamda_equi",
            LemmaId::KeyEstimate => "key_estimate",
            LemmaId::Duality => "duality",
            LemmaId::NormVariants => "norm_variants",
            LemmaId::Atomic => "atomic",
            LemmaId::PhiTran => "phi_tran",
        }
    }
}

fn squash(s: &str) -> String {
    s.chars().filter(|c| *c != '_' && *c != '-').flat_map(char::to_lowercase).collect()
}

impl FromStr for LemmaId {
    type Err = Error;

    /// Case, `_` and `-` are ignored (`KeyLemma` = `key_lemma`).
    fn from_str(s: &str) -> Result<Self> {
        let k = squash(s);
        LemmaId::ALL
            .into_iter()
            .find(|id| squash(id.as_str()) == k)
            .ok_or_else(|| Error::Config(format!("unknown check id {s:?}")))
    }
}

impl std::fmt::Display for LemmaId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn run_lemma_check(h: &Harness, id: LemmaId) -> Result<CheckReport> {
    if h.corpus.functions.is_empty() && h.corpus.sequences.is_empty() {
        return Err(Error::Config("empty corpus".into()));
    }
    match id {
        LemmaId::Dhr => dhr(h),
        LemmaId::RTrick => r_trick(h),
        LemmaId::DhhrEstimate => dhhr_estimate(h),
        LemmaId::AlmHasto => alm_hasto(h),
        LemmaId::KeyEstimate1 => key_estimate1(h),
        LemmaId::KeyLemma => key_lemma(h),
        LemmaId::KeyLemmaSection3 => key_lemma_section3(h),
        LemmaId::LamdaEqui => lamda_equi(h),
        LemmaId::KeyEstimate => key_estimate(h),
        LemmaId::Duality => duality(h),
        LemmaId::NormVariants => norm_variants(h),
        LemmaId::Atomic => atomic(h),
        LemmaId::PhiTran => phi_tran(h),
    }
}

/// Exponent sets meeting `ok`, with their corpus index; skipped ones are noted.
fn eligible<'a>(
    h: &'a Harness,
    report: &mut CheckReport,
    what: &str,
    ok: impl Fn(&SpaceParams) -> bool,
) -> Result<Vec<(usize, &'a SpaceParams)>> {
    let mut out = Vec::new();
    for (k, sp) in h.corpus.exponent_sets.iter().enumerate() {
        if ok(sp) {
            out.push((k, sp));
        } else {
            report.note(format!("set{k} skipped: needs {what}"));
        }
    }
    if out.is_empty() {
        return Err(Error::Hypothesis(format!("no exponent set satisfies {what}")));
    }
    Ok(out)
}

fn finite_q(sp: &SpaceParams) -> bool {
    sp.q.sup() < P_CAP
}

/// `ω_N` multiplier: `F_Φ(2ξ/N)`, supported in `|ξ| ≤ 0.99 N`.
fn omega_multiplier(h: &Harness, scale: f64) -> Vec<f64> {
    h.pair.radii().iter().map(|&r| h.pair.profiles.big_phi(2.0 * r / scale)).collect()
}

/// `θ_R` multiplier: Gaussian `exp(−|ξ/R|²/2)`.
fn theta_multiplier(h: &Harness, scale: f64) -> Vec<f64> {
    h.pair.radii().iter().map(|&r| (-(r / scale).powi(2) / 2.0).exp()).collect()
}

fn product(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

fn real(values: Vec<f64>, like: &GridFunction) -> GridFunction {
    GridFunction { grid: like.grid, values: values.into_iter().map(|x| Complex64::new(x, 0.0)).collect() }
}

fn band_magnitudes(h: &Harness, f: &GridFunction) -> Result<Vec<GridFunction>> {
    Ok(h.pair.band_projections(f)?.into_iter().map(|b| real(b.abs(), f)).collect())
}

/// Per-level maxima of cases tagged `v<k>`; the top level must not exceed the
/// lower ones by more than `slack`.
fn level_growth(rep: &mut CheckReport, slack: f64) {
    let mut per: std::collections::BTreeMap<i32, f64> = std::collections::BTreeMap::new();
    for c in &rep.ratios {
        if let Some(v) = c.case.split('/').find_map(|s| s.strip_prefix('v').and_then(|x| x.parse::<i32>().ok())) {
            let e = per.entry(v).or_insert(0.0);
            *e = e.max(c.ratio);
        }
    }
    for (v, c) in &per {
        rep.push_sweep(format!("level/v{v}"), *c);
    }
    if let Some((&top, &c_top)) = per.iter().next_back() {
        let below = per.range(..top).map(|(_, c)| *c).fold(0.0, f64::max);
        if below > 0.0 {
            rep.condition(format!("no growth in v: top level {c_top:.4e} vs lower {below:.4e}"), c_top <= below * (1.0 + slack));
        }
    }
}

fn dhr(h: &Harness) -> Result<CheckReport> {
    let tol = h.tol().clone();
    let report = CheckReport::new(
        LemmaId::Dhr.as_str(),
        CheckClass::Banded,
        "sup_{x,y} 2^{vα(x)} η_{v,m+R}(x−y) / (2^{vα(y)} η_{v,m}(x−y)) ≤ c, R = c_log(α)",
        tol.band,
    );
    h.banded(report, tol.refinement, |h, r| {
        let grid = h.config.grid;
        // at most 64 points per axis in the pair scan
        let stride = (grid.points_per_axis() / if grid.dim == 1 { 1024 } else { 64 }).max(1);
        let pts: Vec<usize> =
            (0..grid.len()).filter(|&i| grid.unravel(i).iter().take(grid.dim).all(|c| c % stride == 0)).collect();
        for (k, sp) in h.corpus.exponent_sets.iter().enumerate() {
            let big_r = estimate_log_holder(&sp.alpha, &grid)?.local_constant;
            let mut per_v = Vec::new();
            for v in 0..=(grid.jfine as i32 - 2) {
                let s = (v as f64).exp2();
                let mut c = 0.0f64;
                for &x in &pts {
                    for &y in &pts {
                        let d = grid.periodic_distance(x, y);
                        let e = v as f64 * (sp.alpha.at(x) - sp.alpha.at(y)) * LN_2 - big_r * (1.0 + s * d).ln();
                        c = c.max(e);
                    }
                }
                let c = c.exp();
                r.push(format!("set{k}/v{v}"), c);
                per_v.push(c);
            }
            let lo = per_v.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = per_v.iter().cloned().fold(0.0, f64::max);
            r.push_sweep(format!("set{k}/R"), big_r);
            r.condition(format!("set{k}: per-level spread {:.4} ≤ {}", hi / lo - 1.0, tol.level_spread), hi / lo - 1.0 <= tol.level_spread);
        }
        if stride > 1 {
            r.note(format!("pair scan on every {stride}th sample per axis"));
        }
        Ok(())
    })
}

fn r_trick(h: &Harness) -> Result<CheckReport> {
    let tol = h.tol().clone();
    let report = CheckReport::new(
        LemmaId::RTrick.as_str(),
        CheckClass::Banded,
        "|θ_R ∗ ω_N ∗ g| ≤ c A (η_{N,m} ∗ |ω_N ∗ g|^r)^{1/r}, A = max(1, (N/R)^m)",
        tol.band,
    );
    h.banded(report, tol.refinement, |h, rep| {
        let grid = h.config.grid;
        let m = default_kernel_order(grid.dim);
        let spec = h.pair.spectral();
        let mut skipped = 0;
        for v in 1..=(grid.jfine as i32 - 2) {
            let big_n = (v as f64).exp2();
            let om = omega_multiplier(h, big_n);
            let eta = eta_scaled(big_n, m, &grid)?;
            for (fi, g) in h.corpus.functions.iter().enumerate() {
                let ghat = spec.spectrum(g);
                let wg = spec.synthesize_from(&ghat, &om);
                if wg.max_abs() < 1e-12 {
                    skipped += 1;
                    continue;
                }
                for r in [0.5, 1.0] {
                    let powered = real(wg.abs().iter().map(|x| x.powf(r)).collect(), g);
                    let rhs_base: Vec<f64> = spec.convolve(&eta, &powered)?.values.iter().map(|z| z.re.max(0.0).powf(1.0 / r)).collect();
                    for rf in [0.5, 1.0, 2.0] {
                        let big_r = big_n * rf;
                        let a = (big_n / big_r).powf(m).max(1.0);
                        let lhs = spec.synthesize_from(&ghat, &product(&theta_multiplier(h, big_r), &om));
                        let c = lhs.abs().iter().zip(&rhs_base).map(|(l, b)| l / (a * b)).fold(0.0, f64::max);
                        rep.push(format!("f{fi}/v{v}/r{r}/R{rf}N"), c);
                    }
                }
            }
        }
        level_growth(rep, tol.refinement);
        if skipped > 0 {
            rep.note(format!("{skipped} cases with ω_N ∗ g = 0 skipped"));
        }
        Ok(())
    })
}

fn dhhr_estimate(h: &Harness) -> Result<CheckReport> {
    let tol = h.tol().clone();
    let report = CheckReport::new(
        LemmaId::DhhrEstimate.as_str(),
        CheckClass::Banded,
        "1/β with (β M_Q|f|)^{p(x)} ≤ M_Q|f|^{p(·)} + min(|Q|^m, 1) M_Q((e+|x|)^{−m} + (e+|·|)^{−m}), ‖f‖_p ≤ 1",
        tol.band,
    );
    h.banded(report, tol.refinement, |h, rep| {
        let grid = h.config.grid;
        let n = grid.dim as f64;
        let m = default_kernel_order(grid.dim);
        let decay: Vec<f64> = (0..grid.len()).map(|i| (E + grid.norm_of(i)).powf(-m)).collect();
        let sets = eligible(h, rep, "p in P^log", |sp| classify(&sp.p).map(|c| c.in_plog).unwrap_or(false))?;
        let mut beta = f64::INFINITY;
        for (k, sp) in sets {
            for (fi, f) in h.corpus.functions.iter().enumerate() {
                let norm = luxemburg_norm(f, &sp.p, DEFAULT_TOL)?.value;
                if norm == 0.0 {
                    continue;
                }
                let a: Vec<f64> = f.abs().iter().map(|x| x / norm).collect();
                for v in sp.window.0..=sp.window.1.min(grid.jfine as i32 - 1) {
                    let qvol = (-(v as f64) * n).exp2();
                    let small = qvol.powf(m).min(1.0);
                    let mut worst = 0.0f64;
                    for q in cubes_in_window(&grid, v, v)? {
                        let idx = q.sample_indices(&grid);
                        let cnt = idx.len() as f64;
                        let mean = idx.iter().map(|&i| a[i]).sum::<f64>() / cnt;
                        if mean == 0.0 {
                            continue;
                        }
                        let modular = idx.iter().map(|&i| a[i].powf(sp.p.at(i))).sum::<f64>() / cnt;
                        let tail = idx.iter().map(|&i| decay[i]).sum::<f64>() / cnt;
                        for &x in &idx {
                            let rhs = modular + small * (decay[x] + tail);
                            worst = worst.max(mean / rhs.powf(1.0 / sp.p.at(x)));
                        }
                    }
                    rep.push(format!("set{k}/f{fi}/v{v}"), worst);
                    beta = beta.min(1.0 / worst);
                }
            }
        }
        level_growth(rep, tol.refinement);
        rep.push_sweep("beta", beta.min(1.0));
        rep.note(format!("β = {:.6} (largest admissible, closed form)", beta.min(1.0)));
        Ok(())
    })
}

fn alm_hasto(h: &Harness) -> Result<CheckReport> {
    let tol = h.tol().clone();
    let n = h.config.grid.dim;
    let report = CheckReport::new(
        LemmaId::AlmHasto.as_str(),
        CheckClass::Banded,
        "‖(η_{v,m} ∗ f_v)‖_{ℓ^q(L^τ_p)} ≤ c ‖(f_v)‖_{ℓ^q(L^τ_p)}, m = 2n+2, sweep m ∈ {n+1, 2n+2, 4n}",
        tol.band,
    );
    let mut sweep: Vec<f64> = vec![n as f64 + 1.0, 2.0 * n as f64 + 2.0, 4.0 * n as f64];
    sweep.dedup();
    let mut out = h.banded(report, tol.refinement, |h, rep| {
        let grid = h.config.grid;
        let sets = eligible(h, rep, "τ⁻ > 0, τ⁺ < (τp)⁻, q⁺ < ∞", |sp| {
            sp.tau.inf() > 0.0 && sp.tau.sup() < sp.tau_p_inf() && finite_q(sp)
        })?;
        let primary = default_kernel_order(grid.dim);
        for &m in &sweep {
            if m <= grid.dim as f64 {
                rep.note(format!("m = {m} skipped: η needs m > n"));
                continue;
            }
            let etas: Vec<GridFunction> =
                (0..=h.pair.v_max()).map(|v| eta_scaled((v as f64).exp2(), m, &grid)).collect::<Result<_>>()?;
            let mut c = 0.0f64;
            for &(k, sp) in &sets {
                for (fi, f) in h.corpus.functions.iter().enumerate() {
                    let fs = band_magnitudes(h, f)?;
                    let den = tau_sequence_norm(&fs, sp)?;
                    if den == 0.0 {
                        continue;
                    }
                    let gs: Vec<GridFunction> = fs
                        .iter()
                        .zip(&etas)
                        .map(|(fv, e)| h.pair.spectral().convolve(e, fv).map(|g| real(g.abs(), f)))
                        .collect::<Result<_>>()?;
                    let ratio = tau_sequence_norm(&gs, sp)? / den;
                    c = c.max(ratio);
                    if m == primary {
                        rep.push(format!("set{k}/f{fi}"), ratio);
                    }
                }
            }
            rep.push_sweep(format!("m{m}"), c);
        }
        Ok(())
    })?;
    let best = out.sweep.iter().find(|s| s.ratio.is_finite() && s.ratio <= out.bound).map(|s| s.case.clone());
    out.note(format!("smallest m with a bounded constant: {}", best.unwrap_or_else(|| "none".into())));
    Ok(out)
}

/// `θ_v ∗ ω_v ∗ f` and `ω_v ∗ f`.
fn smoothed_pair(h: &Harness, f: &GridFunction, v: i32) -> (GridFunction, GridFunction) {
    let s = (v as f64).exp2();
    let om = omega_multiplier(h, s);
    let spec = h.pair.spectral();
    let fhat = spec.spectrum(f);
    (spec.synthesize_from(&fhat, &product(&theta_multiplier(h, s), &om)), spec.synthesize_from(&fhat, &om))
}

fn key_estimate1(h: &Harness) -> Result<CheckReport> {
    let tol = h.tol().clone();
    let report = CheckReport::new(
        LemmaId::KeyEstimate1.as_str(),
        CheckClass::Banded,
        "sup_{|P|≥1} ‖θ_v ∗ ω_v ∗ f |P|^{−τ} χ_P‖_p ≤ c ‖ω_v ∗ f‖_{L̃^p_τ}",
        tol.band,
    );
    h.banded(report, tol.refinement, |h, rep| {
        let sets = eligible(h, rep, "τ⁻ > 0", |sp| sp.tau.inf() > 0.0)?;
        for (k, sp) in sets {
            for (fi, f) in h.corpus.functions.iter().enumerate() {
                for v in 0..=(h.config.grid.jfine as i32 - 2) {
                    let (tw, w) = smoothed_pair(h, f, v);
                    let den = tilde_norm(&w, &sp.p, &sp.tau, TILDE_TOL)?.value;
                    if den <= 1e-12 {
                        continue;
                    }
                    rep.push(format!("set{k}/f{fi}/v{v}"), tilde_norm(&tw, &sp.p, &sp.tau, TILDE_TOL)?.value / den);
                }
            }
        }
        level_growth(rep, tol.refinement);
        Ok(())
    })
}

fn key_estimate(h: &Harness) -> Result<CheckReport> {
    let tol = h.tol().clone();
    let report = CheckReport::new(
        LemmaId::KeyEstimate.as_str(),
        CheckClass::Banded,
        "2^{−vn/r} |ω_v ∗ f(x)| ≤ c ‖ω_v ∗ f‖_{L̃^p_τ}, r = p⁻/2",
        tol.band,
    );
    h.banded(report, tol.refinement, |h, rep| {
        let n = h.config.grid.dim as f64;
        let sets = eligible(h, rep, "τ⁻ ≥ 0", |sp| sp.tau.inf() >= 0.0)?;
        for (k, sp) in sets {
            let r = sp.p.inf() / 2.0;
            for (fi, f) in h.corpus.functions.iter().enumerate() {
                for v in 0..=(h.config.grid.jfine as i32 - 2) {
                    let (_, w) = smoothed_pair(h, f, v);
                    let den = tilde_norm(&w, &sp.p, &sp.tau, TILDE_TOL)?.value;
                    if den <= 1e-12 {
                        continue;
                    }
                    let lhs = (-(v as f64) * n / r).exp2() * w.max_abs();
                    rep.push(format!("set{k}/f{fi}/v{v}"), lhs / den);
                }
            }
        }
        level_growth(rep, tol.refinement);
        Ok(())
    })
}

fn key_lemma(h: &Harness) -> Result<CheckReport> {
    let tol = h.tol().clone();
    let report = CheckReport::new(
        LemmaId::KeyLemma.as_str(),
        CheckClass::Banded,
        "‖(Σ_k 2^{−|k−v|δ} f_k)_v‖_{ℓ^q(L^τ_p)} ≤ c ‖(f_v)‖_{ℓ^q(L^τ_p)}, δ = 1, sweep δ = 1/2",
        tol.band,
    );
    h.banded(report, tol.refinement, |h, rep| {
        let sets = eligible(h, rep, "τ⁻ ≥ 0, q⁺ < ∞", |sp| sp.tau.inf() >= 0.0 && finite_q(sp))?;
        for delta in [1.0, 0.5] {
            let mut c = 0.0f64;
            for &(k, sp) in &sets {
                for (fi, f) in h.corpus.functions.iter().enumerate() {
                    let fs = band_magnitudes(h, f)?;
                    let den = tau_sequence_norm(&fs, sp)?;
                    if den == 0.0 {
                        continue;
                    }
                    let ratio = tau_sequence_norm(&smooth_levels(&fs, delta)?, sp)? / den;
                    c = c.max(ratio);
                    if delta == 1.0 {
                        rep.push(format!("set{k}/f{fi}"), ratio);
                    }
                }
            }
            rep.push_sweep(format!("delta{delta}"), c);
        }
        Ok(())
    })
}

fn key_lemma_section3(h: &Harness) -> Result<CheckReport> {
    let tol = h.tol().clone();
    let report = CheckReport::new(
        LemmaId::KeyLemmaSection3.as_str(),
        CheckClass::Banded,
        "|λ_{v,m}| 2^{v(α(x)+n/2)} |Q_{v,m}|^{−τ(x)} ‖χ_{v,m}‖_p ≤ c ‖λ‖_𝔟",
        tol.band,
    );
    h.banded(report, tol.refinement, |h, rep| {
        let sets = eligible(h, rep, "τ⁻ ≥ 0, q⁺ < ∞", |sp| sp.tau.inf() >= 0.0 && finite_q(sp))?;
        for (k, sp) in sets {
            for (si, lam) in h.corpus.sequences.iter().enumerate() {
                rep.push(format!("set{k}/s{si}"), coeff_bound_ratio(lam, sp, &h.config.grid)?);
            }
        }
        Ok(())
    })
}

fn lamda_equi(h: &Harness) -> Result<CheckReport> {
    let tol = h.tol().clone();
    let report = CheckReport::new(
        LemmaId::LamdaEqui.as_str(),
        CheckClass::Banded,
        "‖λ‖_𝔟 ≤ ‖λ*_{r,d}‖_𝔟 ≤ c ‖λ‖_𝔟, r = min(1, (τp)⁻/(2τ⁺)), d = n + a + L + 1",
        tol.band,
    );
    h.banded(report, tol.refinement, |h, rep| {
        let grid = h.config.grid;
        let n = grid.dim as f64;
        let sets = eligible(h, rep, "τ⁻ > 0, q⁺ < ∞", |sp| sp.tau.inf() > 0.0 && finite_q(sp))?;
        for (k, sp) in sets {
            let r = (sp.tau_p_inf() / sp.tau.sup() / 2.0).min(1.0);
            let a = r * estimate_log_holder(&sp.alpha, &grid)?.local_constant;
            let big_l = default_kernel_order(grid.dim);
            let d = n + a + big_l + 1.0;
            rep.push_sweep(format!("set{k}/r"), r);
            rep.push_sweep(format!("set{k}/d"), d);
            let (mut lower_ok, mut c1, mut c2) = (true, 0.0f64, 0.0f64);
            for (si, lam) in h.corpus.sequences.iter().enumerate() {
                let base = b_norm(lam, sp, &grid)?.value;
                let star = b_norm(&lambda_star(lam, r, d)?, sp, &grid)?.value;
                let star2 = b_norm(&lambda_star(lam, r, 2.0 * d)?, sp, &grid)?.value;
                lower_ok &= star >= base * (1.0 - tol.exact);
                rep.push(format!("set{k}/s{si}"), star / base);
                c1 = c1.max(star / base);
                c2 = c2.max(star2 / base);
            }
            rep.push_sweep(format!("set{k}/doubled_d"), c2);
            rep.condition(format!("set{k}: ‖λ‖ ≤ ‖λ*‖ on every case"), lower_ok);
            rep.condition(format!("set{k}: band at 2d ({c2:.6}) ≤ band at d ({c1:.6})"), c2 <= c1 * (1.0 + tol.exact));
        }
        Ok(())
    })
}

fn duality(h: &Harness) -> Result<CheckReport> {
    let tol = h.tol().clone();
    let report = CheckReport::new(
        LemmaId::Duality.as_str(),
        CheckClass::Banded,
        "max(t, 1/t) with t = ‖χ_B‖_p ‖χ_B‖_{p'} / |B|",
        tol.band,
    );
    h.banded(report, tol.level_spread, |h, rep| {
        let grid = h.config.grid;
        let n = grid.dim as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(h.config.corpus.seed ^ 0xD0A1);
        let (lo, hi) = (grid.min_level(), h.corpus.band_top + 1);
        for (k, sp) in h.corpus.exponent_sets.iter().enumerate() {
            let pc = conjugate_exponent(&sp.p)?;
            for case in 0..100 {
                let v = rng.gen_range(lo..=hi);
                let per = grid.positions_per_axis(v) as i64;
                let m: Vec<i64> = (0..grid.dim).map(|_| rng.gen_range(0..per)).collect();
                let q = DyadicCube::new(v, &m);
                let t = indicator_norm(&q, &sp.p)? * indicator_norm(&q, &pc)? / (-(v as f64) * n).exp2();
                rep.push(format!("set{k}/B{case}"), t.max(1.0 / t));
            }
        }
        Ok(())
    })
}

fn norm_variants(h: &Harness) -> Result<CheckReport> {
    let tol = h.tol().clone();
    let report = CheckReport::new(
        LemmaId::NormVariants.as_str(),
        CheckClass::Banded,
        "sharp ≤ base ≤ peetre exactly; base/sharp, peetre/base, shifted(1)/base, base/shifted(1) bounded",
        tol.band,
    );
    h.banded(report, tol.refinement, |h, rep| {
        let sets = eligible(h, rep, "q⁺ < ∞", finite_q)?;
        for (k, sp) in sets {
            let (mut sharp_ok, mut peetre_ok) = (true, true);
            for (fi, f) in h.corpus.functions.iter().enumerate() {
                let base = besov_norm(f, sp, &h.pair)?.value;
                if base == 0.0 {
                    continue;
                }
                let sharp = besov_norm_sharp(f, sp, &h.pair)?.value;
                let peetre = besov_norm_peetre(f, sp, &h.pair, None)?.result.value;
                let shifted = besov_norm_shifted(f, sp, &h.pair, 1)?.value;
                sharp_ok &= sharp <= base * (1.0 + tol.exact);
                peetre_ok &= base <= peetre * (1.0 + tol.exact);
                rep.push(format!("set{k}/f{fi}/base_over_sharp"), base / sharp);
                rep.push(format!("set{k}/f{fi}/peetre_over_base"), peetre / base);
                rep.push(format!("set{k}/f{fi}/shifted_over_base"), shifted / base);
                rep.push(format!("set{k}/f{fi}/base_over_shifted"), base / shifted);
            }
            rep.condition(format!("set{k}: sharp ≤ base"), sharp_ok);
            rep.condition(format!("set{k}: base ≤ peetre"), peetre_ok);
        }
        Ok(())
    })
}

fn atomic(h: &Harness) -> Result<CheckReport> {
    let tol = h.tol().clone();
    let report = CheckReport::new(
        LemmaId::Atomic.as_str(),
        CheckClass::Banded,
        "‖λ‖_𝔟 / ‖f‖_𝔅 and ‖Σλρ‖_𝔅 / ‖λ‖_𝔟 bounded; every atom valid; decay constants finite",
        tol.band,
    );
    h.banded(report, tol.refinement, |h, rep| {
        let grid = h.config.grid;
        let n = grid.dim;
        let sets = eligible(h, rep, "τ⁻ > 0, q⁺ < ∞", |sp| sp.tau.inf() > 0.0 && finite_q(sp))?;
        for (k, sp) in sets {
            let (big_k, big_l) = kl_requirements(sp, n)?;
            rep.push_sweep(format!("set{k}/K"), big_k as f64);
            rep.push_sweep(format!("set{k}/L"), big_l as f64);
            let mut invalid = 0usize;
            let mut worst = 0.0f64;
            for (fi, f) in h.corpus.functions.iter().enumerate() {
                let fnorm = besov_norm(f, sp, &h.pair)?.value;
                if fnorm == 0.0 {
                    continue;
                }
                let (lam, at) = atomize(f, &h.pair, Window::Bump { gamma: DEFAULT_GAMMA }, big_k, big_l)?;
                for a in &at.atoms {
                    let v = validate_atom(&grid, a, DEFAULT_FD_TOL, DEFAULT_MOM_TOL)?;
                    worst = worst.max(v.derivative_margin);
                    invalid += usize::from(!v.pass);
                }
                let lnorm = b_norm(&lam, sp, &grid)?.value;
                let back = synthesize_atoms(&lam, &at.atoms)?;
                rep.push(format!("set{k}/f{fi}/b_over_B"), lnorm / fnorm);
                rep.push(format!("set{k}/f{fi}/synth_over_b"), besov_norm(&back, sp, &h.pair)?.value / lnorm);
            }
            rep.push_sweep(format!("set{k}/worst_derivative_margin"), worst);
            rep.condition(format!("set{k}: every atom valid ({invalid} invalid)"), invalid == 0);
            let m_decay = n as f64 + 1.0;
            let mut finite = true;
            for v in 1..=(grid.jfine as i32 - 2) {
                let a = AtomSpec::canonical(&grid, DyadicCube::new(v, &vec![1; n]), big_k, big_l, DEFAULT_GAMMA)?;
                let c = fj_decay_check(&grid, &a, &h.pair, m_decay)?;
                finite &= c.is_finite() && c > 0.0;
                rep.push_sweep(format!("set{k}/decay_v{v}"), c);
            }
            rep.condition(format!("set{k}: decay constants finite for M = n + 1"), finite);
        }
        Ok(())
    })
}

fn phi_tran(h: &Harness) -> Result<CheckReport> {
    let tol = h.tol().clone();
    let report = CheckReport::new(
        LemmaId::PhiTran.as_str(),
        CheckClass::Banded,
        "‖S_φ f‖_𝔟 / ‖f‖_𝔅 and ‖T_ψ λ‖_𝔅 / ‖λ‖_𝔟 bounded",
        tol.band,
    );
    h.banded(report, tol.refinement, |h, rep| {
        let grid = h.config.grid;
        let sets = eligible(h, rep, "q⁺ < ∞", finite_q)?;
        for (k, sp) in sets {
            for (fi, f) in h.corpus.functions.iter().enumerate() {
                let fnorm = besov_norm(f, sp, &h.pair)?.value;
                if fnorm == 0.0 {
                    continue;
                }
                let lam = h.pair.analyze(f)?;
                rep.push(format!("set{k}/f{fi}/analysis"), b_norm(&lam, sp, &grid)?.value / fnorm);
            }
            for (si, lam) in h.corpus.sequences.iter().enumerate() {
                let lnorm = b_norm(lam, sp, &grid)?.value;
                if lnorm == 0.0 {
                    continue;
                }
                let back = h.pair.synthesize(lam)?;
                rep.push(format!("set{k}/s{si}/synthesis"), besov_norm(&back, sp, &h.pair)?.value / lnorm);
            }
        }
        Ok(())
    })
}

/// Constant-exponent sets of the config, or a default pair when it has none.
fn constant_sets(h: &Harness) -> Result<Vec<(Scalars, SpaceParams)>> {
    let mut specs: Vec<SpaceSpec> = h
        .config
        .exponents
        .iter()
        .filter(|s| [&s.alpha, &s.tau, &s.p, &s.q].iter().all(|e| matches!(e.kind, crate::exponent::ExponentKind::Constant { .. })))
        .cloned()
        .collect();
    if specs.is_empty() {
        specs = vec![SpaceSpec::constant(0.7, 0.2, 2.0, 1.5), SpaceSpec::constant(0.3, 0.0, 1.5, 3.0)];
    }
    let spaces = h.spaces(&specs)?;
    Ok(spaces
        .into_iter()
        .map(|sp| {
            let c = |e: &ExponentField| e.constant_value().expect("constant exponent");
            (Scalars { alpha: c(&sp.alpha), tau: c(&sp.tau), p: c(&sp.p), q: c(&sp.q) }, sp)
        })
        .collect())
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Variable-exponent pipeline against the scalar oracles at constant exponents.
pub fn run_oracle_reduction(h: &Harness) -> Result<CheckReport> {
    let tol = h.tol().clone();
    let mut rep = CheckReport::new(
        "oracle_reduction",
        CheckClass::Exact,
        "relative deviation between variable-exponent and scalar computations",
        tol.oracle,
    );
    let grid = h.config.grid;
    let delta = grid.delta();
    for (k, (s, sp)) in constant_sets(h)?.into_iter().enumerate() {
        for (fi, f) in h.corpus.functions.iter().enumerate() {
            let a = f.abs();
            rep.push(format!("set{k}/f{fi}/modular"), rel(modular(f, &sp.p)?, oracle::modular(&a, s.p, delta)));
            rep.push(
                format!("set{k}/f{fi}/luxemburg"),
                rel(luxemburg_norm(f, &sp.p, DEFAULT_TOL * 1e-2)?.value, oracle::luxemburg(&a, s.p, delta)),
            );
            let bands = band_magnitudes(h, f)?;
            let levels: Vec<Vec<f64>> = bands.iter().map(|b| b.abs()).collect();
            rep.push(
                format!("set{k}/f{fi}/mixed"),
                rel(mixed_norm(&bands, &sp.p, &sp.q, DEFAULT_TOL * 1e-2)?.value, oracle::mixed(&levels, s.p, s.q, delta)),
            );
            rep.push(
                format!("set{k}/f{fi}/besov"),
                rel(besov_norm(f, &sp, &h.pair)?.value, oracle::besov_norm(f, &h.pair.profiles, h.pair.v_max(), s, sp.window)),
            );
        }
        for (si, lam) in h.corpus.sequences.iter().enumerate() {
            rep.push(format!("set{k}/s{si}/b"), rel(b_norm(lam, &sp, &grid)?.value, oracle::b_norm(lam, s, sp.window)));
        }
        let zero = GridFunction::zeros(&grid);
        rep.push(format!("set{k}/zero"), rel(besov_norm(&zero, &sp, &h.pair)?.value, 0.0));
    }
    rep.params = json!({ "echo": h.echo() });
    Ok(rep.finish())
}
