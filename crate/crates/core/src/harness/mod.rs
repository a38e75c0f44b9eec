//! Verification campaigns over a seeded corpus.
//!
//! Every banded check runs on the configured grid and, unless disabled, again
//! on the grid refined once; the relative change of the empirical constant is
//! part of the verdict.

pub mod checks;
pub mod config;
pub mod corpus;
pub mod embeddings;
pub mod report;

pub use checks::{run_lemma_check, run_oracle_reduction, LemmaId};
pub use config::{Config, CorpusSpec, EmbeddingSpec, Tolerances};
pub use corpus::{Corpus, FunctionKind};
pub use embeddings::{run_embedding, validate_embedding, EmbeddingId};
pub use report::{emit_report, CaseRatio, CheckClass, CheckReport, Refinement};

use serde_json::json;

use crate::error::Result;
use crate::grid::GridFunction;
use crate::io::SpaceSpec;
use crate::phi::TransformPair;
use crate::sequence::{cube_regions, region_sup, LevelStack, SpaceParams, StartRule};
use crate::solver::SolveOpts;

/// Corpus, transform pair and exponent sets on one grid.
#[derive(Debug)]
pub struct Harness {
    pub config: Config,
    pub corpus: Corpus,
    pub pair: TransformPair,
    /// The same campaign on the refined grid.
    pub fine: Option<Box<Harness>>,
}

fn build_spaces(specs: &[SpaceSpec], config: &Config, window: Option<(i32, i32)>) -> Result<Vec<SpaceParams>> {
    specs
        .iter()
        .map(|s| {
            let mut s = s.clone();
            if s.window.is_none() {
                s.window = window;
            }
            s.build(&config.grid)
        })
        .collect()
}

impl Harness {
    pub fn new(config: Config) -> Result<Self> {
        config.validate()?;
        let band_top = config.grid.jfine as i32 - 2;
        let coarse_window = (config.grid.min_level(), config.grid.max_level());
        let fine = if config.refine {
            let mut fc = config.refined();
            fc.refine = false;
            Some(Box::new(Self::on_grid(fc, band_top, Some(coarse_window))?))
        } else {
            None
        };
        let mut h = Self::on_grid(config, band_top, None)?;
        h.fine = fine;
        Ok(h)
    }

    fn on_grid(config: Config, band_top: i32, window: Option<(i32, i32)>) -> Result<Self> {
        let spaces = build_spaces(&config.exponents, &config, window)?;
        let c = &config.corpus;
        let corpus = Corpus::generate(&config.grid, c.seed, c.size, c.sequences, band_top, spaces)?;
        let pair = TransformPair::new(&config.grid)?;
        Ok(Harness { config, corpus, pair, fine: None })
    }

    /// Exponent sets of `specs` on this harness' grid, windows pinned to the coarse grid.
    pub fn spaces(&self, specs: &[SpaceSpec]) -> Result<Vec<SpaceParams>> {
        let window = self.corpus.exponent_sets.first().map(|s| s.window);
        build_spaces(specs, &self.config, window)
    }

    pub fn tol(&self) -> &Tolerances {
        &self.config.tolerances
    }

    /// Config echo stored with every report.
    pub fn echo(&self) -> serde_json::Value {
        json!({
            "grid": self.config.grid,
            "seed": self.config.corpus.seed,
            "functions": self.corpus.functions.len(),
            "sequences": self.corpus.sequences.len(),
            "band_top": self.corpus.band_top,
            "windows": self.corpus.exponent_sets.iter().map(|s| s.window).collect::<Vec<_>>(),
            "exponents": self.config.exponents,
            "tolerances": self.config.tolerances,
        })
    }

    /// Runs `body` here and on the refined grid, recording the refinement change.
    pub(crate) fn banded(
        &self,
        mut report: CheckReport,
        limit: f64,
        body: impl Fn(&Harness, &mut CheckReport) -> Result<()>,
    ) -> Result<CheckReport> {
        body(self, &mut report)?;
        report.params = self.echo();
        if let Some(fine) = &self.fine {
            let mut r = CheckReport::new(&report.check_id, report.class, &report.direction, report.bound);
            body(fine, &mut r)?;
            report.refinement = Some(Refinement::new(report.max_ratio(), r.max_ratio(), limit));
            for (what, ok) in r.conditions {
                report.condition(format!("refined: {what}"), ok);
            }
        }
        Ok(report.finish())
    }
}

/// `sup_P ‖(|P|^{−τ} f_v χ_P)_{v ≥ v_P^+}‖_{ℓ^q(L^p)}` for a finite family `f_0, f_1, …`.
pub fn tau_sequence_norm(fs: &[GridFunction], sp: &SpaceParams) -> Result<f64> {
    let Some(first) = fs.first() else {
        return Ok(0.0);
    };
    let levels = fs.iter().map(|f| f.values.iter().map(|z| z.norm().ln()).collect()).collect();
    let stack = LevelStack { first: 0, levels };
    let regions = cube_regions(&first.grid, sp.window, StartRule::VPlus)?;
    Ok(region_sup(&stack, &regions, &sp.p, &sp.q, &sp.tau, SolveOpts::with_tol(crate::besov::BESOV_TOL))?.result.value)
}
