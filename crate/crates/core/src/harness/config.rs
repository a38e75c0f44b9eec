use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::ExponentSpec;
use crate::grid::Grid;
use crate::io::SpaceSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    pub seed: u64,
    /// Number of functions.
    #[serde(default = "default_functions")]
    pub size: usize,
    #[serde(default = "default_sequences")]
    pub sequences: usize,
}

fn default_functions() -> usize {
    20
}

fn default_sequences() -> usize {
    50
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec { seed: 20240917, size: default_functions(), sequences: default_sequences() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Upper bound declared for every corpus-banded ratio.
    pub band: f64,
    /// Allowed relative change of an empirical constant under `jfine → jfine + 1`.
    pub refinement: f64,
    /// Allowed relative spread of per-level constants.
    pub level_spread: f64,
    /// Slack on inequalities whose constant is exactly 1.
    pub exact: f64,
    /// Relative deviation allowed against the constant-exponent oracles.
    pub oracle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { band: 1e3, refinement: 0.2, level_spread: 0.1, exact: 1e-9, oracle: 1e-8 }
    }
}

/// Source and target exponents of an embedding experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSpec {
    pub source: SpaceSpec,
    pub target: SpaceSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub grid: Grid,
    #[serde(default)]
    pub exponents: Vec<SpaceSpec>,
    #[serde(default)]
    pub corpus: CorpusSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Overrides of the built-in embedding exponents, keyed by embedding id.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub embeddings: BTreeMap<String, EmbeddingSpec>,
    /// Repeat banded checks on the refined grid.
    #[serde(default = "yes")]
    pub refine: bool,
}

fn yes() -> bool {
    true
}

/// Smooth variable exponents used when a config lists none.
pub fn default_exponents(dim: usize) -> Vec<SpaceSpec> {
    let x0 = if dim == 1 { 4.0 } else { 2.0 };
    vec![
        SpaceSpec {
            alpha: ExponentSpec::bump(0.8, 0.4, x0, 1.5),
            tau: ExponentSpec::bump(0.1, 0.05, x0, 1.5),
            p: ExponentSpec::bump(2.0, 1.0, x0, 1.5),
            q: ExponentSpec::bump(2.0, -0.5, x0, 1.5),
            window: None,
        },
        SpaceSpec::constant(0.7, 0.2, 2.0, 1.5),
    ]
}

impl Config {
    pub fn new(grid: Grid) -> Self {
        Config {
            grid,
            exponents: default_exponents(grid.dim),
            corpus: CorpusSpec::default(),
            tolerances: Tolerances::default(),
            embeddings: BTreeMap::new(),
            refine: true,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut c: Config = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if c.exponents.is_empty() {
            c.exponents = default_exponents(c.grid.dim);
        }
        c.validate()?;
        Ok(c)
    }

    /// Every problem reported as [`Error::Config`].
    pub fn validate(&self) -> Result<()> {
        let cfg = |e: Error| Error::Config(e.to_string());
        self.grid.validate().map_err(cfg)?;
        if self.grid.jfine < 3 {
            return Err(Error::Config("harness needs jfine >= 3".into()));
        }
        if self.corpus.size == 0 && self.corpus.sequences == 0 {
            return Err(Error::Config("corpus is empty".into()));
        }
        for s in &self.exponents {
            s.build(&self.grid).map_err(cfg)?;
        }
        let t = &self.tolerances;
        if [t.band, t.refinement, t.level_spread, t.exact, t.oracle].iter().any(|x| !(*x > 0.0)) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        for (k, e) in &self.embeddings {
            k.parse::<super::EmbeddingId>().map_err(cfg)?;
            e.source.build(&self.grid).map_err(cfg)?;
            e.target.build(&self.grid).map_err(cfg)?;
        }
        Ok(())
    }

    pub fn refined(&self) -> Self {
        let mut c = self.clone();
        c.grid = self.grid.refined();
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = Config::parse(r#"{"grid":{"dim":1,"jmax":3,"jfine":7},"corpus":{"seed":3}}"#).unwrap();
        assert_eq!(c.corpus.size, 20);
        assert_eq!(c.corpus.sequences, 50);
        assert_eq!(c.exponents.len(), 2);
        assert!(c.refine);
    }

    #[test]
    fn bad_configs_are_config_errors() {
        for text in [
            r#"{"grid":{"dim":3,"jmax":1,"jfine":3}}"#,
            r#"{"grid":{"dim":1,"jmax":1,"jfine":2}}"#,
            r#"{"grid":{"dim":1,"jmax":1,"jfine":4},"bogus":1}"#,
            r#"{"grid":{"dim":1,"jmax":1,"jfine":4},"tolerances":{"band":-1}}"#,
            r#"{"grid":{"dim":1,"jmax":1,"jfine":4},"embeddings":{"nope":{}}}"#,
            "not json",
        ] {
            assert!(matches!(Config::parse(text), Err(Error::Config(_))), "{text}");
        }
    }
}
