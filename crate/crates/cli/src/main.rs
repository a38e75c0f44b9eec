use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use varbesov::atoms::{atomize, kl_requirements, synthesize_atoms, validate_atom, Atomization, Window};
use varbesov::atoms::{DEFAULT_FD_TOL, DEFAULT_GAMMA, DEFAULT_MOM_TOL};
use varbesov::besov::{besov_norm, besov_norm_peetre, besov_norm_sharp, besov_norm_shifted};
use varbesov::grid::{Grid, GridFunction};
use varbesov::harness::report::payload_json;
use varbesov::harness::{emit_report, run_embedding, run_lemma_check, run_oracle_reduction, CheckReport, Config};
use varbesov::harness::{EmbeddingId, Harness, LemmaId};
use varbesov::io::{load_function, read_json, save_function, write_json, Format, SequenceDoc, SpaceSpec};
use varbesov::modular::{luxemburg_norm, mixed_norm, tilde_norm};
use varbesov::phi::TransformPair;
use varbesov::solver::DEFAULT_TOL;
use varbesov::Error;

#[derive(Parser)]
#[command(name = "varbesov", version, about = "Variable-exponent Besov-type norms, transforms, atoms and verification checks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run lemma checks (`all`, an id, or a comma-separated list; `oracle_reduction` included).
    Check(CampaignArgs),
    /// Run embedding experiments.
    Embed(CampaignArgs),
    /// Compute one norm of a function file.
    Norm(NormArgs),
    /// Atomic decomposition: decompose, synthesize, validate.
    #[command(subcommand)]
    Atoms(AtomsCmd),
    /// φ-transform analysis and synthesis.
    #[command(subcommand)]
    Phitransform(PhiCmd),
}

#[derive(Args)]
struct CampaignArgs {
    #[arg(long)]
    id: String,
    /// Harness config; defaults to the one-dimensional desk grid.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for report.json and ratios.csv; without it the payload goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip the refined-grid rerun.
    #[arg(long)]
    no_refine: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormKind {
    Lp,
    Mixed,
    Tilde,
    Besov,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Base,
    Sharp,
    Shifted,
    Peetre,
}

/// Grid given inline (`{"dim":1,...}`) or as a JSON file.
fn parse_grid(s: &str) -> Result<Grid, Error> {
    let g: Grid = if s.trim_start().starts_with('{') {
        serde_json::from_str(s).map_err(|e| Error::Config(format!("grid: {e}")))?
    } else {
        read_json(Path::new(s)).map_err(|e| Error::Config(format!("grid {s}: {e}")))?
    };
    g.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(g)
}

fn parse_space(s: &str) -> Result<SpaceSpec, Error> {
    if s.trim_start().starts_with('{') {
        serde_json::from_str(s).map_err(|e| Error::Config(format!("exponents: {e}")))
    } else {
        read_json(Path::new(s)).map_err(|e| Error::Config(format!("exponents {s}: {e}")))
    }
}

#[derive(Args)]
struct NormArgs {
    #[arg(long, value_enum)]
    kind: NormKind,
    #[arg(long, value_enum, default_value = "base")]
    variant: Variant,
    /// Grid JSON (inline or path).
    #[arg(long)]
    grid: String,
    /// Exponent set JSON `{alpha, tau, p, q}` (inline or path).
    #[arg(long)]
    exponents: String,
    /// Function file; repeat for the levels of a mixed norm.
    #[arg(long, required = true)]
    input: Vec<PathBuf>,
    /// json, csv or bin; inferred from the extension by default.
    #[arg(long)]
    format: Option<String>,
    #[arg(long, default_value_t = 1)]
    gamma: i32,
    /// Peetre parameter `a`; the library default otherwise.
    #[arg(long)]
    a: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Subcommand)]
enum AtomsCmd {
    /// Atomize a function; writes atoms and coefficients to one JSON file.
    Decompose {
        #[arg(long)]
        grid: String,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        format: Option<String>,
        /// Exponent set from which K and L are derived.
        #[arg(long, conflicts_with_all = ["k", "l"])]
        exponents: Option<String>,
        #[arg(long, requires = "l")]
        k: Option<u32>,
        #[arg(long, requires = "k", allow_negative_numbers = true)]
        l: Option<i32>,
        #[arg(long, value_enum, default_value = "bump")]
        window: WindowKind,
        #[arg(long, default_value_t = DEFAULT_GAMMA)]
        gamma: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// `Σ λ_Q a_Q` from a decomposition file.
    Synthesize {
        #[arg(long)]
        atoms: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        format: Option<String>,
    },
    /// Support, derivative and moment conditions of every atom; exit 1 if any fails.
    Validate {
        #[arg(long)]
        atoms: PathBuf,
        #[arg(long, default_value_t = DEFAULT_FD_TOL)]
        fd_tol: f64,
        #[arg(long, default_value_t = DEFAULT_MOM_TOL)]
        mom_tol: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum WindowKind {
    Bump,
    Dual,
}

#[derive(Subcommand)]
enum PhiCmd {
    /// `S_φ f` as a sequence JSON file.
    Analyze {
        #[arg(long)]
        grid: String,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// `T_ψ λ` from a sequence JSON file.
    Synthesize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        format: Option<String>,
    },
}

/// Decomposition file written by `atoms decompose`.
#[derive(Serialize, Deserialize)]
struct AtomsDoc {
    grid: Grid,
    atomization: Atomization,
    coefficients: SequenceDoc,
}

enum Outcome {
    Pass,
    Fail,
}

fn format_of(flag: &Option<String>, path: &Path) -> Result<Format, Error> {
    match flag {
        Some(s) => s.parse(),
        None => Ok(Format::from_path(path)),
    }
}

/// Missing or unreadable inputs are configuration problems.
fn input_err(e: Error) -> Error {
    match e {
        Error::Io(e) => Error::Config(e.to_string()),
        Error::Json(e) => Error::Config(e.to_string()),
        other => other,
    }
}

fn load(path: &Path, grid: &Grid, format: &Option<String>) -> Result<GridFunction, Error> {
    load_function(path, grid, format_of(format, path)?).map_err(input_err)
}

fn harness(args: &CampaignArgs) -> Result<Harness, Error> {
    let mut config = match &args.config {
        Some(p) => Config::load(p)?,
        None => Config::new(Grid::default_for_dim(1)),
    };
    if args.no_refine {
        config.refine = false;
    }
    Harness::new(config)
}

enum Job {
    Lemma(LemmaId),
    Oracle,
    Embedding(EmbeddingId),
}

fn jobs(id: &str, embed: bool) -> Result<Vec<Job>, Error> {
    if id == "all" {
        return Ok(if embed {
            EmbeddingId::ALL.into_iter().map(Job::Embedding).collect()
        } else {
            LemmaId::ALL.into_iter().map(Job::Lemma).chain([Job::Oracle]).collect()
        });
    }
    id.split(',')
        .map(|s| {
            let s = s.trim();
            if embed {
                s.parse().map(Job::Embedding)
            } else if s.replace(['_', '-'], "").eq_ignore_ascii_case("oraclereduction") {
                Ok(Job::Oracle)
            } else {
                s.parse().map(Job::Lemma)
            }
        })
        .collect()
}

fn campaign(args: &CampaignArgs, embed: bool) -> Result<Outcome, Error> {
    let jobs = jobs(&args.id, embed)?;
    let h = harness(args)?;
    let mut reports: Vec<CheckReport> = Vec::new();
    for job in jobs {
        let r = match job {
            Job::Lemma(id) => run_lemma_check(&h, id),
            Job::Oracle => run_oracle_reduction(&h),
            Job::Embedding(id) => run_embedding(&h, id),
        };
        let r = r.map_err(|e| match e {
            Error::Hypothesis(m) => Error::Config(format!("hypothesis violated: {m}")),
            other => other,
        })?;
        eprintln!(
            "{} {} c = {:.6e} (bound {:.3e}, {} cases)",
            if r.pass { "PASS" } else { "FAIL" },
            r.check_id,
            r.empirical_constant,
            r.bound,
            r.ratios.len()
        );
        reports.push(r);
    }
    match &args.out {
        Some(dir) => {
            let (j, c) = emit_report(&reports, dir)?;
            eprintln!("wrote {} and {}", j.display(), c.display());
        }
        None => println!("{}", payload_json(&reports)?),
    }
    Ok(if reports.iter().all(|r| r.pass) { Outcome::Pass } else { Outcome::Fail })
}

fn norm(args: &NormArgs) -> Result<Outcome, Error> {
    let grid = parse_grid(&args.grid)?;
    let sp = parse_space(&args.exponents)?.build(&grid).map_err(|e| Error::Config(e.to_string()))?;
    let fs: Vec<GridFunction> = args.input.iter().map(|p| load(p, &grid, &args.format)).collect::<Result<_, _>>()?;
    let single = || -> Result<&GridFunction, Error> {
        match fs.as_slice() {
            [f] => Ok(f),
            _ => Err(Error::Config("this norm takes exactly one --input".into())),
        }
    };
    let out = match args.kind {
        NormKind::Lp => json!({ "kind": "lp", "result": luxemburg_norm(single()?, &sp.p, args.tol)? }),
        NormKind::Mixed => json!({ "kind": "mixed", "result": mixed_norm(&fs, &sp.p, &sp.q, args.tol)? }),
        NormKind::Tilde => json!({ "kind": "tilde", "result": tilde_norm(single()?, &sp.p, &sp.tau, args.tol)? }),
        NormKind::Besov => {
            let f = single()?;
            let pair = TransformPair::new(&grid)?;
            match args.variant {
                Variant::Base => json!({ "kind": "besov", "variant": "base", "result": besov_norm(f, &sp, &pair)? }),
                Variant::Sharp => json!({ "kind": "besov", "variant": "sharp", "result": besov_norm_sharp(f, &sp, &pair)? }),
                Variant::Shifted => json!({
                    "kind": "besov", "variant": "shifted", "gamma": args.gamma,
                    "result": besov_norm_shifted(f, &sp, &pair, args.gamma)?,
                }),
                Variant::Peetre => {
                    let p = besov_norm_peetre(f, &sp, &pair, args.a)?;
                    json!({ "kind": "besov", "variant": "peetre", "result": p.result, "a": p.a,
                            "threshold": p.threshold, "below_threshold": p.below_threshold })
                }
            }
        }
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(Outcome::Pass)
}

fn atoms(cmd: &AtomsCmd) -> Result<Outcome, Error> {
    match cmd {
        AtomsCmd::Decompose { grid, input, format, exponents, k, l, window, gamma, out } => {
            let grid = parse_grid(grid)?;
            let f = load(input, &grid, format)?;
            let (k, l) = match (exponents, k, l) {
                (Some(e), _, _) => {
                    let sp = parse_space(e)?.build(&grid).map_err(|e| Error::Config(e.to_string()))?;
                    kl_requirements(&sp, grid.dim)?
                }
                (None, Some(k), Some(l)) => (*k, *l),
                _ => return Err(Error::Config("give --exponents or both --k and --l".into())),
            };
            let window = match window {
                WindowKind::Bump => Window::Bump { gamma: *gamma },
                WindowKind::Dual => Window::Dual,
            };
            let pair = TransformPair::new(&grid)?;
            let (lambda, atomization) = atomize(&f, &pair, window, k, l)?;
            eprintln!("{} atoms, K = {k}, L = {l}", atomization.atoms.len());
            write_json(out, &AtomsDoc { grid, atomization, coefficients: SequenceDoc::from_coeffs(&lambda) })?;
            Ok(Outcome::Pass)
        }
        AtomsCmd::Synthesize { atoms, out, format } => {
            let doc: AtomsDoc = read_json(atoms).map_err(input_err)?;
            let lambda = doc.coefficients.to_coeffs()?;
            let f = synthesize_atoms(&lambda, &doc.atomization.atoms)?;
            save_function(out, &f, format_of(format, out)?)?;
            Ok(Outcome::Pass)
        }
        AtomsCmd::Validate { atoms, fd_tol, mom_tol } => {
            let doc: AtomsDoc = read_json(atoms).map_err(input_err)?;
            let mut reports = Vec::with_capacity(doc.atomization.atoms.len());
            for a in &doc.atomization.atoms {
                let r = validate_atom(&doc.grid, a, *fd_tol, *mom_tol)?;
                reports.push(json!({ "cube": a.cube, "report": r }));
            }
            let failed = reports.iter().filter(|r| r["report"]["pass"] == false).count();
            println!("{}", serde_json::to_string_pretty(&json!({ "atoms": reports.len(), "failed": failed, "reports": reports }))?);
            Ok(if failed == 0 { Outcome::Pass } else { Outcome::Fail })
        }
    }
}

fn phitransform(cmd: &PhiCmd) -> Result<Outcome, Error> {
    match cmd {
        PhiCmd::Analyze { grid, input, format, out } => {
            let grid = parse_grid(grid)?;
            let f = load(input, &grid, format)?;
            let lambda = TransformPair::new(&grid)?.analyze(&f)?;
            write_json(out, &SequenceDoc::from_coeffs(&lambda))?;
            Ok(Outcome::Pass)
        }
        PhiCmd::Synthesize { input, out, format } => {
            let doc: SequenceDoc = read_json(input).map_err(input_err)?;
            let lambda = doc.to_coeffs()?;
            let f = TransformPair::new(&doc.grid)?.synthesize(&lambda)?;
            save_function(out, &f, format_of(format, out)?)?;
            Ok(Outcome::Pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Check(a) => campaign(a, false),
        Cmd::Embed(a) => campaign(a, true),
        Cmd::Norm(a) => norm(a),
        Cmd::Atoms(c) => atoms(c),
        Cmd::Phitransform(c) => phitransform(c),
    };
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
