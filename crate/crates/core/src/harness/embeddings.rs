//! Embedding experiments: `‖f‖_target / ‖f‖_source` over the corpus.

use std::str::FromStr;

use super::config::EmbeddingSpec;
use super::report::{CheckClass, CheckReport};
use super::Harness;
use crate::besov::{besov_norm, holder_growth_check};
use crate::error::{Error, Result};
use crate::exponent::{ExponentKind, ExponentSpec, P_CAP};
use crate::io::SpaceSpec;
use crate::sequence::{b_norm, SpaceParams};

/// Pointwise slack for exponent identities.
const EQ_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingId {
    ElemQ,
    ElemAlpha,
    Sobolev,
    Further,
    SandwichEmd,
}

impl EmbeddingId {
    pub const ALL: [EmbeddingId; 5] =
        [EmbeddingId::ElemQ, EmbeddingId::ElemAlpha, EmbeddingId::Sobolev, EmbeddingId::Further, EmbeddingId::SandwichEmd];

    pub fn as_str(self) -> &'static str {
        match self {
            EmbeddingId::ElemQ => "elem_q",
            EmbeddingId::ElemAlpha => "elem_alpha",
            EmbeddingId::Sobolev => "sobolev",
            EmbeddingId::Further => "further",
            EmbeddingId::SandwichEmd => "sandwich_emd",
        }
    }
}

fn squash(s: &str) -> String {
    s.chars().filter(|c| *c != '_' && *c != '-').flat_map(char::to_lowercase).collect()
}

impl FromStr for EmbeddingId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let k = squash(s);
        EmbeddingId::ALL
            .into_iter()
            .find(|id| squash(id.as_str()) == k)
            .ok_or_else(|| Error::Config(format!("unknown embedding id {s:?}")))
    }
}

impl std::fmt::Display for EmbeddingId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Built-in source and target exponents in dimension `n`; `base` is the
/// first configured set, reused by `elem_q` and `sandwich_emd`.
pub fn default_embedding(id: EmbeddingId, n: usize, base: &SpaceSpec) -> EmbeddingSpec {
    let n = n as f64;
    let with_q = |q: f64| SpaceSpec { q: ExponentSpec::constant(q), ..base.clone() };
    match id {
        EmbeddingId::ElemQ => EmbeddingSpec { source: with_q(1.0), target: with_q(2.0) },
        EmbeddingId::ElemAlpha => EmbeddingSpec {
            source: SpaceSpec::constant(1.5, 0.1, 2.0, 2.0),
            target: SpaceSpec::constant(0.5, 0.1, 2.0, 2.0),
        },
        EmbeddingId::Sobolev => EmbeddingSpec {
            source: SpaceSpec::constant(0.5 + n / 1.0 - n / 2.0, 0.1, 1.0, 2.0),
            target: SpaceSpec::constant(0.5, 0.1, 2.0, 2.0),
        },
        EmbeddingId::Further => EmbeddingSpec {
            source: SpaceSpec::constant(0.5 + n * 0.1 + n / 1.0 - n / 2.0, 0.0, 1.0, 2.0),
            target: SpaceSpec::constant(0.5, 0.1, 2.0, 2.0),
        },
        EmbeddingId::SandwichEmd => EmbeddingSpec { source: base.clone(), target: base.clone() },
    }
}

fn hyp<T>(id: EmbeddingId, msg: String) -> Result<T> {
    Err(Error::Hypothesis(format!("{id}: {msg}")))
}

/// First sample where `ok` fails, as an error naming the condition.
fn pointwise(id: EmbeddingId, what: &str, len: usize, ok: impl Fn(usize) -> bool) -> Result<()> {
    match (0..len).find(|&i| !ok(i)) {
        Some(i) => hyp(id, format!("{what} fails at sample {i}")),
        None => Ok(()),
    }
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= EQ_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Checks the embedding's exponent hypotheses at every sample.
pub fn validate_embedding(id: EmbeddingId, source: &SpaceParams, target: &SpaceParams) -> Result<()> {
    let grid = source.grid();
    if target.grid() != grid {
        return Err(Error::GridMismatch("source and target exponents live on different grids".into()));
    }
    let n = grid.dim as f64;
    let len = grid.len();
    let (s, t) = (source, target);
    match id {
        EmbeddingId::ElemQ => {
            pointwise(id, "α₀ = α₁", len, |i| same(s.alpha.at(i), t.alpha.at(i)))?;
            pointwise(id, "τ₀ = τ₁", len, |i| same(s.tau.at(i), t.tau.at(i)))?;
            pointwise(id, "p₀ = p₁", len, |i| same(s.p.at(i), t.p.at(i)))?;
            pointwise(id, "q₀ ≤ q₁", len, |i| s.q.at(i) <= t.q.at(i))?;
            positive_tau(id, t)?;
            finite_q(id, s)?;
            finite_q(id, t)
        }
        EmbeddingId::ElemAlpha => {
            pointwise(id, "τ₀ = τ₁", len, |i| same(s.tau.at(i), t.tau.at(i)))?;
            pointwise(id, "p₀ = p₁", len, |i| same(s.p.at(i), t.p.at(i)))?;
            let gap = (0..len).map(|i| s.alpha.at(i) - t.alpha.at(i)).fold(f64::INFINITY, f64::min);
            if !(gap > 0.0) {
                return hyp(id, format!("(α₀ − α₁)⁻ = {gap} is not positive"));
            }
            positive_tau(id, t)?;
            finite_q(id, s)?;
            finite_q(id, t)
        }
        EmbeddingId::Sobolev => {
            pointwise(id, "α₀ > α₁", len, |i| s.alpha.at(i) > t.alpha.at(i))?;
            pointwise(id, "α₀ − n/p₀ = α₁ − n/p₁", len, |i| {
                same(s.alpha.at(i) - n / s.p.at(i), t.alpha.at(i) - n / t.p.at(i))
            })?;
            let ratio = (0..len).map(|i| s.p.at(i) / t.p.at(i)).fold(0.0, f64::max);
            if !(ratio < 1.0) {
                return hyp(id, format!("sup p₀/p₁ = {ratio} is not below 1"));
            }
            pointwise(id, "τ₀ = τ₁", len, |i| same(s.tau.at(i), t.tau.at(i)))?;
            pointwise(id, "q₀ = q₁", len, |i| same(s.q.at(i), t.q.at(i)))?;
            positive_tau(id, t)?;
            finite_q(id, t)
        }
        EmbeddingId::Further => {
            pointwise(id, "τ₀ = 0", len, |i| s.tau.at(i) == 0.0)?;
            pointwise(id, "p₂ ≤ p₁", len, |i| s.p.at(i) <= t.p.at(i))?;
            pointwise(id, "α₀ = α + nτ + n/p₂ − n/p₁", len, |i| {
                same(s.alpha.at(i), t.alpha.at(i) + n * t.tau.at(i) + n / s.p.at(i) - n / t.p.at(i))
            })?;
            pointwise(id, "q₀ = q₁", len, |i| same(s.q.at(i), t.q.at(i)))?;
            positive_tau(id, t)?;
            finite_q(id, t)
        }
        EmbeddingId::SandwichEmd => {
            if s != t {
                return hyp(id, "source and target must coincide".into());
            }
            if s.tau.inf() < 0.0 {
                return hyp(id, "τ⁻ must be non-negative".into());
            }
            Ok(())
        }
    }
}

fn positive_tau(id: EmbeddingId, sp: &SpaceParams) -> Result<()> {
    if sp.tau.inf() > 0.0 {
        Ok(())
    } else {
        hyp(id, format!("τ⁻ = {} is not positive", sp.tau.inf()))
    }
}

fn finite_q(id: EmbeddingId, sp: &SpaceParams) -> Result<()> {
    if sp.q.sup() < P_CAP {
        Ok(())
    } else {
        hyp(id, "q⁺ must be finite".into())
    }
}

fn is_constant(s: &SpaceSpec) -> bool {
    [&s.alpha, &s.tau, &s.p, &s.q].iter().all(|e| matches!(e.kind, ExponentKind::Constant { .. }))
}

/// Spec in force for `id`: a config override or the built-in default.
pub fn embedding_spec(h: &Harness, id: EmbeddingId) -> Result<EmbeddingSpec> {
    for (k, e) in &h.config.embeddings {
        if k.parse::<EmbeddingId>()? == id {
            return Ok(e.clone());
        }
    }
    let base = h.config.exponents.first().ok_or_else(|| Error::Config("no exponent sets".into()))?;
    Ok(default_embedding(id, h.config.grid.dim, base))
}

pub fn run_embedding(h: &Harness, id: EmbeddingId) -> Result<CheckReport> {
    let tol = h.tol().clone();
    let spec = embedding_spec(h, id)?;
    let exact = id == EmbeddingId::ElemQ && is_constant_q(&spec);
    let (class, bound) = if exact { (CheckClass::Exact, 1.0 + tol.exact) } else { (CheckClass::Banded, tol.band) };
    let direction = match id {
        EmbeddingId::SandwichEmd => "2^{v(α+n(τ−1/p))} |φ_v ∗ f(x)| ≤ c ‖f‖_𝔅",
        _ => "‖f‖_target ≤ c ‖f‖_source",
    };
    let report = CheckReport::new(id.as_str(), class, direction, bound);
    let mut out = h.banded(report, tol.refinement, |h, rep| {
        let sp = h.spaces(&[spec.source.clone(), spec.target.clone()])?;
        let (s, t) = (&sp[0], &sp[1]);
        validate_embedding(id, s, t)?;
        for (fi, f) in h.corpus.functions.iter().enumerate() {
            if id == EmbeddingId::SandwichEmd {
                if besov_norm(f, s, &h.pair)?.value > 0.0 {
                    rep.push(format!("f{fi}"), holder_growth_check(f, s, &h.pair)?);
                }
                continue;
            }
            let den = besov_norm(f, s, &h.pair)?.value;
            if den > 0.0 {
                rep.push(format!("f{fi}"), besov_norm(f, t, &h.pair)?.value / den);
            }
        }
        if id == EmbeddingId::ElemQ {
            let grid = h.config.grid;
            for (si, lam) in h.corpus.sequences.iter().enumerate() {
                let den = b_norm(lam, s, &grid)?.value;
                if den > 0.0 {
                    rep.push(format!("s{si}"), b_norm(lam, t, &grid)?.value / den);
                }
            }
        }
        Ok(())
    })?;
    out.params["embedding"] = serde_json::to_value(&spec)?;
    if id == EmbeddingId::ElemQ && !exact {
        out.note("variable q: constant 1 is not asserted, the band is reported");
    }
    if !is_constant(&spec.source) || !is_constant(&spec.target) {
        out.note("variable exponents validated pointwise");
    }
    Ok(out)
}

fn is_constant_q(spec: &EmbeddingSpec) -> bool {
    matches!(spec.source.q.kind, ExponentKind::Constant { .. }) && matches!(spec.target.q.kind, ExponentKind::Constant { .. })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::harness::Config;

    fn grid() -> Grid {
        Grid::new(1, 2, 5).unwrap()
    }

    fn build(s: &SpaceSpec) -> SpaceParams {
        s.build(&grid()).unwrap()
    }

    #[test]
    fn ids_parse() {
        for id in EmbeddingId::ALL {
            assert_eq!(id.as_str().parse::<EmbeddingId>().unwrap(), id);
        }
        assert_eq!("SandwichEmd".parse::<EmbeddingId>().unwrap(), EmbeddingId::SandwichEmd);
        assert!("x".parse::<EmbeddingId>().is_err());
    }

    #[test]
    fn defaults_satisfy_their_hypotheses() {
        let base = crate::harness::config::default_exponents(1)[0].clone();
        for n in [1, 2] {
            let g = Grid::new(n, 1, 4).unwrap();
            for id in EmbeddingId::ALL {
                let e = default_embedding(id, n, &base);
                validate_embedding(id, &e.source.build(&g).unwrap(), &e.target.build(&g).unwrap()).unwrap();
            }
        }
    }

    #[test]
    fn sobolev_mismatch_at_one_sample_errors() {
        let e = default_embedding(EmbeddingId::Sobolev, 1, &SpaceSpec::constant(0.5, 0.1, 2.0, 2.0));
        let s = build(&e.source);
        let t = build(&e.target);
        let mut alpha = s.alpha.samples().to_vec();
        alpha[7] += 1e-6;
        let bent = SpaceParams {
            alpha: crate::exponent::ExponentField::new(&grid(), crate::exponent::Role::Smoothness, alpha, None).unwrap(),
            ..s.clone()
        };
        match validate_embedding(EmbeddingId::Sobolev, &bent, &t) {
            Err(Error::Hypothesis(m)) => assert!(m.contains("sample 7"), "{m}"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(validate_embedding(EmbeddingId::Sobolev, &t, &s), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn elem_q_is_exact_and_at_most_one() {
        let mut c = Config::new(grid());
        c.corpus.size = 4;
        c.corpus.sequences = 8;
        let h = Harness::new(c).unwrap();
        let r = run_embedding(&h, EmbeddingId::ElemQ).unwrap();
        assert_eq!(r.class, CheckClass::Exact);
        assert!(r.ratios.iter().all(|x| x.ratio <= 1.0 + 1e-9), "{:?}", r.ratios);
        assert!(r.pass);
    }

    #[test]
    fn bad_override_is_a_hypothesis_error() {
        let mut c = Config::new(grid());
        c.corpus.size = 2;
        c.corpus.sequences = 2;
        c.embeddings.insert(
            "elem_q".into(),
            EmbeddingSpec { source: SpaceSpec::constant(0.5, 0.1, 2.0, 3.0), target: SpaceSpec::constant(0.5, 0.1, 2.0, 2.0) },
        );
        let h = Harness::new(c).unwrap();
        assert!(matches!(run_embedding(&h, EmbeddingId::ElemQ), Err(Error::Hypothesis(_))));
    }
}
