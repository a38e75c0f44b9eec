//! Variable exponents sampled on a grid, with their regularity metadata.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::grid::Grid;

/// Finite stand-in for an infinite exponent.
pub const P_CAP: f64 = 100.0;

/// Lower bound for integrability/summability exponents (class `P0`).
pub const DEFAULT_FLOOR: f64 = 1e-2;

/// Largest `c_log(1/p)` still accepted as log-Hölder on a grid.
///
/// Calibrated in the tests below: smooth corpus fields stay under 0.5 at the
/// default grid, a jump of 1/p by 0.25 already sits above 1.2.
pub const DEFAULT_LOG_THRESHOLD: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Integrability,
    Summability,
    Smoothness,
    Tau,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentField {
    pub role: Role,
    pub grid: Grid,
    samples: Vec<f64>,
    inf: f64,
    sup: f64,
    decay_limit: Option<f64>,
}

impl ExponentField {
    pub fn new(grid: &Grid, role: Role, samples: Vec<f64>, decay_limit: Option<f64>) -> Result<Self> {
        Self::with_floor(grid, role, samples, decay_limit, DEFAULT_FLOOR)
    }

    pub fn with_floor(
        grid: &Grid,
        role: Role,
        samples: Vec<f64>,
        decay_limit: Option<f64>,
        floor: f64,
    ) -> Result<Self> {
        if samples.len() != grid.len() {
            return domain(format!(
                "exponent has {} samples on a grid of {}",
                samples.len(),
                grid.len()
            ));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return domain("exponent samples must be finite");
        }
        if let Some(d) = decay_limit {
            if !d.is_finite() {
                return domain("decay limit must be finite");
            }
        }
        let inf = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let sup = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if matches!(role, Role::Integrability | Role::Summability) && inf < floor {
            return domain(format!("exponent infimum {inf} below floor {floor}"));
        }
        Ok(ExponentField { role, grid: *grid, samples, inf, sup, decay_limit })
    }

    pub fn constant(grid: &Grid, role: Role, value: f64) -> Result<Self> {
        Self::new(grid, role, vec![value; grid.len()], Some(value))
    }

    pub fn from_spec(grid: &Grid, role: Role, spec: &ExponentSpec) -> Result<Self> {
        let samples = (0..grid.len()).map(|i| spec.kind.eval(grid, i)).collect::<Vec<_>>();
        let decay = match (&spec.kind, spec.decay_limit) {
            (_, Some(d)) => Some(d),
            (ExponentKind::Constant { value }, None) => Some(*value),
            _ => None,
        };
        Self::new(grid, role, samples, decay)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn at(&self, idx: usize) -> f64 {
        self.samples[idx]
    }

    pub fn inf(&self) -> f64 {
        self.inf
    }

    pub fn sup(&self) -> f64 {
        self.sup
    }

    pub fn decay_limit(&self) -> Option<f64> {
        self.decay_limit
    }

    pub fn is_constant(&self) -> bool {
        self.inf == self.sup
    }

    pub fn constant_value(&self) -> Option<f64> {
        self.is_constant().then_some(self.inf)
    }

    /// Samples with the infinity sentinel applied.
    pub fn capped(&self) -> Vec<f64> {
        self.samples.iter().map(|&p| p.min(P_CAP)).collect()
    }

    /// Pointwise image under `f`, keeping role and grid; the decay limit is mapped too.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<ExponentField> {
        let samples = self.samples.iter().map(|&s| f(s)).collect();
        Self::with_floor(&self.grid, self.role, samples, self.decay_limit.map(&f), 0.0)
    }

    pub fn require_positive_inf(&self, what: &str) -> Result<()> {
        if self.inf <= 0.0 {
            return domain(format!("{what} requires a positive infimum, got {}", self.inf));
        }
        Ok(())
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.grid != *grid {
            return Err(crate::error::Error::GridMismatch(format!(
                "exponent on {:?}, function on {:?}",
                self.grid, grid
            )));
        }
        Ok(())
    }
}

/// Config form of an exponent: `{"kind": .., "params": {..}, "decay_limit": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentSpec {
    #[serde(flatten)]
    pub kind: ExponentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_limit: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum ExponentKind {
    Constant { value: f64 },
    /// `c0 + c1 · bump(|x − x0| / w)` with the standard `exp(1 − 1/(1−t²))` bump.
    Bump { c0: f64, c1: f64, #[serde(default)] x0: f64, w: f64 },
    /// `c0 + c1 / log(e + 1/|x − x0|)`, equal to `c0` at `x0`.
    Ramp { c0: f64, c1: f64, #[serde(default)] x0: f64 },
}

impl ExponentSpec {
    pub fn constant(value: f64) -> Self {
        ExponentSpec { kind: ExponentKind::Constant { value }, decay_limit: Some(value) }
    }

    pub fn bump(c0: f64, c1: f64, x0: f64, w: f64) -> Self {
        ExponentSpec { kind: ExponentKind::Bump { c0, c1, x0, w }, decay_limit: Some(c0) }
    }

    pub fn ramp(c0: f64, c1: f64, x0: f64) -> Self {
        ExponentSpec { kind: ExponentKind::Ramp { c0, c1, x0 }, decay_limit: None }
    }
}

fn distance_to_point(grid: &Grid, idx: usize, x0: f64) -> f64 {
    let x = grid.coord(idx);
    let side = grid.side();
    let mut s = 0.0;
    for &xk in x.iter().take(grid.dim) {
        let d = (xk - x0).rem_euclid(side);
        let d = d.min(side - d);
        s += d * d;
    }
    s.sqrt()
}

pub fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

impl ExponentKind {
    pub fn eval(&self, grid: &Grid, idx: usize) -> f64 {
        match *self {
            ExponentKind::Constant { value } => value,
            ExponentKind::Bump { c0, c1, x0, w } => {
                c0 + c1 * bump(distance_to_point(grid, idx, x0) / w)
            }
            ExponentKind::Ramp { c0, c1, x0 } => {
                let d = distance_to_point(grid, idx, x0);
                if d == 0.0 {
                    c0
                } else {
                    c0 + c1 / (std::f64::consts::E + 1.0 / d).ln()
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogHolderReport {
    pub local_constant: f64,
    pub decay_constant: Option<f64>,
    pub witness_pairs: Vec<(usize, usize)>,
}

const MAX_WITNESSES: usize = 8;

/// Exhaustive pair scan of `|g(x)−g(y)| · log(e + 1/|x−y|)` on a periodic
/// lattice with `n_axis` points per axis and the given spacing.
pub fn log_holder_scan(samples: &[f64], dim: usize, n_axis: usize, spacing: f64) -> Result<LogHolderReport> {
    let total = n_axis.pow(dim as u32);
    if total < 2 || samples.len() != total {
        return domain("log-Hölder scan needs at least two samples matching the lattice");
    }
    let half = n_axis / 2;
    // offsets with minimum image; each unordered pair visited at least once
    let offsets: Vec<(i64, i64)> = if dim == 1 {
        (1..=half as i64).map(|a| (a, 0)).collect()
    } else {
        let mut v = Vec::new();
        for a in 0..=half as i64 {
            for b in -(half as i64) + 1..=half as i64 {
                if (a, b) > (0, 0) && !(a == 0 && b <= 0) {
                    v.push((a, b));
                }
            }
        }
        v
    };
    let mut best = 0.0f64;
    let mut witnesses: Vec<(usize, usize)> = Vec::new();
    for &(a, b) in &offsets {
        let dist = ((a * a + b * b) as f64).sqrt() * spacing;
        let w = (std::f64::consts::E + 1.0 / dist).ln();
        for i in 0..total {
            let j = if dim == 1 {
                (i + a as usize) % n_axis
            } else {
                let (r, c) = (i / n_axis, i % n_axis);
                let r2 = (r + a as usize) % n_axis;
                let c2 = (c as i64 + b).rem_euclid(n_axis as i64) as usize;
                r2 * n_axis + c2
            };
            let val = (samples[i] - samples[j]).abs() * w;
            if val > best * (1.0 + 1e-12) {
                best = val;
                witnesses.clear();
                witnesses.push((i, j));
            } else if val > 0.0 && val >= best * (1.0 - 1e-12) && witnesses.len() < MAX_WITNESSES {
                witnesses.push((i, j));
            }
        }
    }
    Ok(LogHolderReport { local_constant: best, decay_constant: None, witness_pairs: witnesses })
}

pub fn estimate_log_holder(g: &ExponentField, grid: &Grid) -> Result<LogHolderReport> {
    g.check_grid(grid)?;
    let mut report = log_holder_scan(g.samples(), grid.dim, grid.points_per_axis(), grid.spacing())?;
    if let Some(limit) = g.decay_limit() {
        let decay = (0..grid.len())
            .map(|i| (g.at(i) - limit).abs() * (std::f64::consts::E + grid.norm_of(i)).ln())
            .fold(0.0, f64::max);
        report.decay_constant = Some(decay);
    }
    Ok(report)
}

pub fn conjugate_exponent(p: &ExponentField) -> Result<ExponentField> {
    if p.inf() < 1.0 {
        return domain(format!("conjugate exponent needs p >= 1, got infimum {}", p.inf()));
    }
    let conj = |x: f64| {
        if x >= P_CAP {
            1.0
        } else if x == 1.0 {
            P_CAP
        } else {
            (x / (x - 1.0)).min(P_CAP)
        }
    };
    let samples = p.samples().iter().map(|&x| conj(x)).collect();
    ExponentField::new(&p.grid, Role::Integrability, samples, p.decay_limit().map(conj))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassFlags {
    pub in_p0: bool,
    pub in_p: bool,
    pub in_plog: bool,
    pub local_constant: f64,
}

pub fn classify(p: &ExponentField) -> Result<ClassFlags> {
    classify_with(p, DEFAULT_FLOOR, DEFAULT_LOG_THRESHOLD)
}

pub fn classify_with(p: &ExponentField, floor: f64, threshold: f64) -> Result<ClassFlags> {
    let in_p0 = p.inf() >= floor;
    let in_p = p.inf() >= 1.0;
    let recip = p.map(|x| 1.0 / x.min(P_CAP).max(f64::MIN_POSITIVE))?;
    let report = estimate_log_holder(&recip, &p.grid)?;
    let in_plog = in_p && p.decay_limit().is_some() && report.local_constant <= threshold;
    Ok(ClassFlags { in_p0, in_p, in_plog, local_constant: report.local_constant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g() -> Grid {
        Grid::default_for_dim(1)
    }

    #[test]
    fn constant_field_has_zero_log_constant() {
        let grid = g();
        let p = ExponentField::constant(&grid, Role::Integrability, 2.0).unwrap();
        let r = estimate_log_holder(&p, &grid).unwrap();
        assert_eq!(r.local_constant, 0.0);
        assert_eq!(r.decay_constant, Some(0.0));
        assert!(r.witness_pairs.is_empty());
    }

    #[test]
    fn two_point_lattice() {
        let r = log_holder_scan(&[1.0, 2.0], 1, 2, 1.0).unwrap();
        assert!((r.local_constant - (std::f64::consts::E + 1.0).ln()).abs() < 1e-15);
        assert!(r.witness_pairs.iter().all(|(a, b)| a != b));
    }

    #[test]
    fn sine_field_matches_naive_pairs() {
        let grid = Grid::new(1, 1, 7).unwrap();
        assert_eq!(grid.len(), 256);
        let l = grid.side();
        let samples: Vec<f64> = (0..grid.len())
            .map(|i| 2.0 + (2.0 * std::f64::consts::PI * grid.coord(i)[0] / l).sin())
            .collect();
        let p = ExponentField::new(&grid, Role::Smoothness, samples.clone(), None).unwrap();
        let fast = estimate_log_holder(&p, &grid).unwrap().local_constant;
        let mut naive = 0.0f64;
        for i in 0..grid.len() {
            for j in 0..grid.len() {
                if i != j {
                    let d = grid.periodic_distance(i, j);
                    naive = naive.max((samples[i] - samples[j]).abs() * (std::f64::consts::E + 1.0 / d).ln());
                }
            }
        }
        assert!((fast - naive).abs() <= 1e-12 * naive);
    }

    #[test]
    fn two_dim_scan_matches_naive() {
        let grid = Grid::new(2, 1, 2).unwrap();
        let samples: Vec<f64> = (0..grid.len()).map(|i| 1.5 + ((i * 37) % 11) as f64 / 10.0).collect();
        let r = log_holder_scan(&samples, 2, grid.points_per_axis(), grid.spacing()).unwrap();
        let mut naive = 0.0f64;
        for i in 0..grid.len() {
            for j in 0..grid.len() {
                if i != j {
                    let d = grid.periodic_distance(i, j);
                    naive = naive.max((samples[i] - samples[j]).abs() * (std::f64::consts::E + 1.0 / d).ln());
                }
            }
        }
        assert!((r.local_constant - naive).abs() <= 1e-12 * naive);
    }

    #[test]
    fn conjugate_examples() {
        let grid = g();
        let p2 = ExponentField::constant(&grid, Role::Integrability, 2.0).unwrap();
        assert!(conjugate_exponent(&p2).unwrap().samples().iter().all(|&x| x == 2.0));
        let p1 = ExponentField::constant(&grid, Role::Integrability, 1.0).unwrap();
        assert!(conjugate_exponent(&p1).unwrap().samples().iter().all(|&x| x == P_CAP));
        let two = (0..grid.len()).map(|i| if i % 2 == 0 { 4.0 / 3.0 } else { 4.0 }).collect();
        let p = ExponentField::new(&grid, Role::Integrability, two, None).unwrap();
        let c = conjugate_exponent(&p).unwrap();
        for i in 0..grid.len() {
            let want = if i % 2 == 0 { 4.0 } else { 4.0 / 3.0 };
            assert!((c.at(i) - want).abs() < 1e-12);
        }
        let half = ExponentField::constant(&grid, Role::Integrability, 0.5).unwrap();
        assert!(conjugate_exponent(&half).is_err());
    }

    #[test]
    fn classify_examples() {
        let grid = g();
        let p = ExponentField::constant(&grid, Role::Integrability, 2.0).unwrap();
        let f = classify(&p).unwrap();
        assert!(f.in_p0 && f.in_p && f.in_plog);
        let low = ExponentField::constant(&grid, Role::Integrability, 0.5).unwrap();
        let f = classify(&low).unwrap();
        assert!(f.in_p0 && !f.in_p);
        let nodecay = ExponentField::new(&grid, Role::Integrability, vec![2.0; grid.len()], None).unwrap();
        assert!(!classify(&nodecay).unwrap().in_plog);
    }

    #[test]
    fn threshold_separates_smooth_from_step() {
        // calibration corpus for DEFAULT_LOG_THRESHOLD
        let grid = g();
        let smooth = [
            ExponentSpec::bump(2.0, 1.0, 4.0, 2.0),
            ExponentSpec::bump(1.5, 1.5, 1.0, 3.0),
            ExponentSpec { decay_limit: Some(2.0), ..ExponentSpec::ramp(2.0, 1.0, 0.0) },
        ];
        for s in &smooth {
            let p = ExponentField::from_spec(&grid, Role::Integrability, s).unwrap();
            let f = classify(&p).unwrap();
            assert!(f.local_constant < 0.5, "{s:?} gave {}", f.local_constant);
            assert!(f.in_plog);
        }
        for (lo, hi) in [(2.0, 4.0), (1.5, 6.0), (1.0, 2.0)] {
            let samples = (0..grid.len()).map(|i| if i < grid.len() / 2 { lo } else { hi }).collect();
            let p = ExponentField::new(&grid, Role::Integrability, samples, Some(lo)).unwrap();
            let f = classify(&p).unwrap();
            assert!(f.local_constant > 1.2, "step {lo}->{hi} gave {}", f.local_constant);
            assert!(!f.in_plog);
            // refining the step makes it worse
            let fine = grid.refined();
            let samples = (0..fine.len()).map(|i| if i < fine.len() / 2 { lo } else { hi }).collect();
            let pf = ExponentField::new(&fine, Role::Integrability, samples, Some(lo)).unwrap();
            assert!(classify(&pf).unwrap().local_constant > f.local_constant);
        }
    }

    #[test]
    fn spec_round_trip() {
        let json = r#"{"kind":"bump","params":{"c0":2.0,"c1":0.5,"x0":1.0,"w":2.0},"decay_limit":2.0}"#;
        let s: ExponentSpec = serde_json::from_str(json).unwrap();
        assert_eq!(s, ExponentSpec::bump(2.0, 0.5, 1.0, 2.0));
        let back: ExponentSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        let c: ExponentSpec = serde_json::from_str(r#"{"kind":"constant","params":{"value":3}}"#).unwrap();
        assert_eq!(c.kind, ExponentKind::Constant { value: 3.0 });
    }

    #[test]
    fn floor_and_finiteness_enforced() {
        let grid = g();
        assert!(ExponentField::constant(&grid, Role::Integrability, 0.001).is_err());
        assert!(ExponentField::constant(&grid, Role::Smoothness, -3.0).is_ok());
        let mut s = vec![2.0; grid.len()];
        s[3] = f64::NAN;
        assert!(ExponentField::new(&grid, Role::Tau, s, None).is_err());
        assert!(ExponentField::new(&grid, Role::Tau, vec![1.0; 3], None).is_err());
    }

    #[test]
    fn bounds_are_exact_extremes() {
        let grid = g();
        let p = ExponentField::from_spec(&grid, Role::Integrability, &ExponentSpec::bump(2.0, 1.0, 4.0, 2.0)).unwrap();
        let max = p.samples().iter().copied().fold(f64::MIN, f64::max);
        assert_eq!(p.sup(), max);
        assert_eq!(p.sup(), 3.0); // x = 4 is a sample
        assert_eq!(p.inf(), 2.0);
    }

    proptest! {
        #[test]
        fn conjugate_is_involution(vals in proptest::collection::vec(1.01f64..90.0, 16)) {
            let grid = Grid::new(1, 1, 3).unwrap();
            let p = ExponentField::new(&grid, Role::Integrability, vals.clone(), None).unwrap();
            let back = conjugate_exponent(&conjugate_exponent(&p).unwrap()).unwrap();
            for (a, b) in vals.iter().zip(back.samples()) {
                prop_assert!((a - b).abs() <= 1e-12 * a);
            }
        }

        #[test]
        fn refinement_never_decreases_estimate(c1 in 0.1f64..3.0, x0 in 0.0f64..8.0) {
            let grid = Grid::new(1, 3, 5).unwrap();
            let spec = ExponentSpec::ramp(1.5, c1, x0);
            let coarse = ExponentField::from_spec(&grid, Role::Integrability, &spec).unwrap();
            let fine = ExponentField::from_spec(&grid.refined(), Role::Integrability, &spec).unwrap();
            let a = estimate_log_holder(&coarse, &grid).unwrap().local_constant;
            let b = estimate_log_holder(&fine, &grid.refined()).unwrap().local_constant;
            prop_assert!(b >= a - 1e-12);
        }

        #[test]
        fn constant_fields_estimate_zero(c in -5.0f64..50.0) {
            let grid = Grid::new(1, 2, 4).unwrap();
            let p = ExponentField::constant(&grid, Role::Smoothness, c).unwrap();
            prop_assert_eq!(estimate_log_holder(&p, &grid).unwrap().local_constant, 0.0);
        }
    }
}
