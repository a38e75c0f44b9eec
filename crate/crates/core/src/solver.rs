//! Unit-level root finding for modulars.
//!
//! Every norm here is `inf{λ > 0 : F(λ) ≤ 1}` for a strictly decreasing `F`.
//! Working in `t = ln λ`, `ln F` has slope between `−s_max` and `−s_min`,
//! which pins the root inside `[g0/s_max, g0/s_min]` with `g0 = ln F(1)`. A
//! safeguarded Newton iteration then shrinks that bracket.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;

/// Largest exponent of `λ` we accept before reporting an overflow.
const LN_LAMBDA_MAX: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    pub tolerance: f64,
    pub iterations: usize,
    pub bracketing: (f64, f64),
}

impl NormResult {
    pub fn zero(tol: f64) -> Self {
        NormResult { value: 0.0, tolerance: tol, iterations: 0, bracketing: (0.0, 0.0) }
    }

    pub fn exact(value: f64, tol: f64) -> Self {
        NormResult { value, tolerance: tol, iterations: 0, bracketing: (value, value) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOpts {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOpts {
    fn default() -> Self {
        SolveOpts { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER }
    }
}

impl SolveOpts {
    pub fn with_tol(tol: f64) -> Self {
        SolveOpts { tol, ..Default::default() }
    }
}

/// `ln Σ_i exp(c_i − r_i t)`, the log of a modular in `t = ln λ`.
#[derive(Debug, Clone)]
pub struct LogSum {
    c: Vec<f64>,
    r: Vec<f64>,
    rmin: f64,
    rmax: f64,
}

impl LogSum {
    /// Terms with `c = −∞` (zero samples) are dropped.
    pub fn new(c: Vec<f64>, r: Vec<f64>) -> Self {
        let (c, r): (Vec<f64>, Vec<f64>) =
            c.into_iter().zip(r).filter(|(ci, _)| *ci > f64::NEG_INFINITY).unzip();
        let rmin = r.iter().copied().fold(f64::INFINITY, f64::min);
        let rmax = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        LogSum { c, r, rmin, rmax }
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn slope_bounds(&self) -> (f64, f64) {
        (self.rmin, self.rmax)
    }

    /// Value and derivative at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let m = self.c.iter().zip(&self.r).map(|(c, r)| c - r * t).fold(f64::NEG_INFINITY, f64::max);
        let mut s = 0.0;
        let mut d = 0.0;
        for (c, r) in self.c.iter().zip(&self.r) {
            let e = (c - r * t - m).exp();
            s += e;
            d += r * e;
        }
        (m + s.ln(), -d / s)
    }

    /// Value plus `Σ r_i T_i` and `Σ T_i` with shifted weights, as needed for
    /// implicit derivatives of nested solves.
    pub fn weighted(&self, t: f64, extra: &[f64]) -> (f64, f64, f64) {
        let m = self.c.iter().zip(&self.r).map(|(c, r)| c - r * t).fold(f64::NEG_INFINITY, f64::max);
        let mut s = 0.0;
        let mut d = 0.0;
        let mut x = 0.0;
        for ((c, r), w) in self.c.iter().zip(&self.r).zip(extra) {
            let e = (c - r * t - m).exp();
            s += e;
            d += r * e;
            x += w * e;
        }
        (d / s, x / s, m + s.ln())
    }
}

/// Root of a decreasing `g(t)` with `s_min ≤ −g′ ≤ s_max`, returned as `λ = e^t`.
///
/// The returned value is the upper end of the final bracket, so `g(ln value) ≤ 0`
/// and the unit-ball test `value ≤ 1 ⇔ g(0) ≤ 0` holds exactly.
pub fn solve_unit_level(
    mut g: impl FnMut(f64) -> Result<(f64, f64)>,
    s_min: f64,
    s_max: f64,
    opts: SolveOpts,
) -> Result<NormResult> {
    let (g0, d0) = g(0.0)?;
    if g0 == 0.0 {
        return Ok(NormResult::exact(1.0, opts.tol));
    }
    let (a, b) = (g0 / s_max, g0 / s_min);
    let (mut lo, mut hi) = if g0 > 0.0 { (a, b) } else { (b, a) };
    if g0 > 0.0 {
        lo = 0.0f64.max(lo);
    } else {
        hi = hi.min(0.0);
    }
    // widen slightly against rounding in the slope bounds, keeping the side of 0
    let pad = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    let (mut glo, mut dlo, ghi);
    let mut doublings = 0u32;
    loop {
        let l = g(lo)?;
        if l.0 >= 0.0 || lo == 0.0 && g0 > 0.0 {
            glo = l.0;
            dlo = l.1;
            break;
        }
        lo -= pad.max((hi - lo).abs());
        doublings += 1;
        if doublings > 64 || lo < -LN_LAMBDA_MAX {
            return Err(Error::Overflow { doublings });
        }
    }
    loop {
        let h = g(hi)?;
        if h.0 <= 0.0 || hi == 0.0 && g0 < 0.0 {
            ghi = h.0;
            break;
        }
        hi += pad.max((hi - lo).abs());
        doublings += 1;
        if doublings > 64 || hi > LN_LAMBDA_MAX {
            return Err(Error::Overflow { doublings });
        }
    }
    if lo == 0.0 && g0 > 0.0 {
        glo = g0;
        dlo = d0;
    }
    if ghi == 0.0 {
        lo = hi;
    }
    if lo.abs() > LN_LAMBDA_MAX || hi.abs() > LN_LAMBDA_MAX {
        return Err(Error::Overflow { doublings });
    }

    let (mut t, mut gt, mut dt) = (lo, glo, dlo);
    let mut iterations = 0;
    // far from t = 0 the bracket cannot shrink below a few ulps of t
    let resolution = |lo: f64, hi: f64| opts.tol.max(8.0 * f64::EPSILON * lo.abs().max(hi.abs()));
    while hi - lo > resolution(lo, hi) {
        iterations += 1;
        if iterations > opts.max_iter {
            return Err(Error::NoConvergence { iterations: opts.max_iter, lo: lo.exp(), hi: hi.exp() });
        }
        let mut cand = if dt < 0.0 { t - gt / dt } else { f64::NAN };
        if !(cand > lo && cand < hi) {
            cand = 0.5 * (lo + hi);
        }
        // closing probe: step past the root so the far side of the bracket moves too
        if (cand - t).abs() < 0.25 * opts.tol {
            let push = if gt > 0.0 { 0.5 * opts.tol } else { -0.5 * opts.tol };
            let probe = cand + push;
            cand = if probe > lo && probe < hi { probe } else { 0.5 * (lo + hi) };
        }
        let (gc, dc) = g(cand)?;
        if gc > 0.0 {
            lo = cand;
        } else {
            hi = cand;
            if gc == 0.0 {
                lo = cand;
            }
        }
        t = cand;
        gt = gc;
        dt = dc;
    }
    Ok(NormResult { value: hi.exp(), tolerance: opts.tol, iterations, bracketing: (lo.exp(), hi.exp()) })
}

/// Luxemburg-type solve for a [`LogSum`].
pub fn solve_logsum(terms: &LogSum, opts: SolveOpts) -> Result<NormResult> {
    if terms.is_empty() {
        return Ok(NormResult::zero(opts.tol));
    }
    let (rmin, rmax) = terms.slope_bounds();
    solve_unit_level(|t| Ok(terms.eval(t)), rmin, rmax, opts)
}

/// Plain bisection on `λ`, doubling from 1 to bracket; kept as an independent oracle.
pub fn bisect_unit_level(mut modular: impl FnMut(f64) -> f64, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (1.0, 1.0);
    let mut n = 0;
    if modular(1.0) > 1.0 {
        while modular(hi) > 1.0 {
            lo = hi;
            hi *= 2.0;
            n += 1;
            if n > 64 {
                return Err(Error::Overflow { doublings: n });
            }
        }
    } else {
        while modular(lo) <= 1.0 {
            hi = lo;
            lo /= 2.0;
            n += 1;
            if n > 64 {
                return Ok(0.0);
            }
        }
    }
    for _ in 0..400 {
        if hi - lo <= tol * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if modular(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_exponent_is_exact_from_bracket() {
        // 3 · λ^-2 = 1 → λ = √3
        let ls = LogSum::new(vec![3f64.ln()], vec![2.0]);
        let r = solve_logsum(&ls, SolveOpts::default()).unwrap();
        assert!((r.value - 3f64.sqrt()).abs() < 1e-12);
        assert!(r.bracketing.0 <= r.value && r.value <= r.bracketing.1);
    }

    #[test]
    fn mixed_exponents_match_bisection() {
        let c = vec![0.3f64.ln(), 2.5f64.ln(), 0.01f64.ln()];
        let r = vec![1.2, 3.5, 7.0];
        let ls = LogSum::new(c.clone(), r.clone());
        let res = solve_logsum(&ls, SolveOpts::with_tol(1e-13)).unwrap();
        let modular = |lam: f64| c.iter().zip(&r).map(|(c, r)| (c - r * lam.ln()).exp()).sum::<f64>();
        let b = bisect_unit_level(modular, 1e-14).unwrap();
        assert!((res.value - b).abs() < 1e-11 * b);
        assert!(res.bracketing.1 - res.bracketing.0 <= 1e-13 * res.value.max(1.0) * 1.01);
    }

    #[test]
    fn empty_sum_is_zero() {
        let ls = LogSum::new(vec![f64::NEG_INFINITY], vec![2.0]);
        assert_eq!(solve_logsum(&ls, SolveOpts::default()).unwrap().value, 0.0);
    }

    #[test]
    fn unit_level_exactness() {
        let ls = LogSum::new(vec![0.0], vec![2.0]);
        assert_eq!(solve_logsum(&ls, SolveOpts::default()).unwrap().value, 1.0);
    }

    #[test]
    fn huge_values_overflow() {
        let ls = LogSum::new(vec![2000.0], vec![1.0]);
        assert!(matches!(solve_logsum(&ls, SolveOpts::default()), Err(Error::Overflow { .. })));
    }

    #[test]
    fn tiny_and_large_scales() {
        for scale in [1e-30f64, 1e-6, 1.0, 1e6, 1e30] {
            let c = vec![(2.0 * scale).ln() * 1.5, (scale).ln() * 4.0];
            let ls = LogSum::new(c.clone(), vec![1.5, 4.0]);
            let res = solve_logsum(&ls, SolveOpts::with_tol(1e-12)).unwrap();
            let (g, _) = ls.eval(res.value.ln());
            assert!(g.abs() < 1e-9, "scale {scale}: residual {g}");
        }
    }
}
