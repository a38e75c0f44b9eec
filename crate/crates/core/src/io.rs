//! File formats: grid functions as flat binary, CSV or JSON complex pairs in
//! row-major order; sequences as entry lists; atoms and parameters as JSON.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::{ExponentField, ExponentSpec, Role};
use crate::grid::{Grid, GridFunction};
use crate::sequence::{CoeffEntry, SequenceCoeffs, SpaceParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Binary,
    Csv,
}

impl Format {
    /// `.json`, `.csv`; anything else is binary.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            Some("csv") => Format::Csv,
            _ => Format::Binary,
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "bin" | "binary" => Ok(Format::Binary),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::Config(format!("unknown format {s:?}"))),
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::Config(format!("csv: {other:?}")),
    }
}

#[derive(Serialize, Deserialize)]
struct Pair {
    re: f64,
    im: f64,
}

pub fn write_values(w: impl Write, values: &[Complex64], format: Format) -> Result<()> {
    let mut w = BufWriter::new(w);
    match format {
        Format::Binary => {
            for z in values {
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        Format::Csv => {
            let mut c = csv::Writer::from_writer(&mut w);
            for z in values {
                c.serialize(Pair { re: z.re, im: z.im }).map_err(csv_error)?;
            }
            c.flush()?;
        }
        Format::Json => {
            let pairs: Vec<[f64; 2]> = values.iter().map(|z| [z.re, z.im]).collect();
            serde_json::to_writer(&mut w, &pairs)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_values(r: impl Read, format: Format) -> Result<Vec<Complex64>> {
    let mut r = BufReader::new(r);
    match format {
        Format::Binary => {
            let mut bytes = Vec::new();
            r.read_to_end(&mut bytes)?;
            if bytes.len() % 16 != 0 {
                return Err(Error::Config(format!("binary payload of {} bytes is not a list of complex pairs", bytes.len())));
            }
            Ok(bytes
                .chunks_exact(16)
                .map(|c| {
                    let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                    let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                    Complex64::new(re, im)
                })
                .collect())
        }
        Format::Csv => {
            let mut c = csv::Reader::from_reader(r);
            c.deserialize::<Pair>().map(|p| p.map(|p| Complex64::new(p.re, p.im)).map_err(csv_error)).collect()
        }
        Format::Json => {
            let pairs: Vec<[f64; 2]> = serde_json::from_reader(r)?;
            Ok(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
        }
    }
}

pub fn save_function(path: &Path, f: &GridFunction, format: Format) -> Result<()> {
    write_values(File::create(path)?, &f.values, format)
}

pub fn load_function(path: &Path, grid: &Grid, format: Format) -> Result<GridFunction> {
    let values = read_values(File::open(path)?, format)?;
    if values.len() != grid.len() {
        return Err(Error::GridMismatch(format!("{} holds {} samples, grid has {}", path.display(), values.len(), grid.len())));
    }
    GridFunction::new(grid, values)
}

/// Sequence file: grid plus nonzero entries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceDoc {
    pub grid: Grid,
    #[serde(default)]
    pub v_max: Option<i32>,
    pub entries: Vec<CoeffEntry>,
}

impl SequenceDoc {
    pub fn from_coeffs(c: &SequenceCoeffs) -> Self {
        SequenceDoc { grid: c.grid, v_max: Some(c.v_max()), entries: c.entries() }
    }

    pub fn to_coeffs(&self) -> Result<SequenceCoeffs> {
        let c = SequenceCoeffs::from_entries(&self.grid, &self.entries)?;
        match self.v_max {
            Some(v) if v > c.v_max() => {
                let mut levels: Vec<Vec<Complex64>> = (0..=c.v_max()).map(|l| c.level(l).to_vec()).collect();
                for l in c.v_max() + 1..=v {
                    levels.push(vec![Complex64::new(0.0, 0.0); self.grid.positions_per_axis(l).pow(self.grid.dim as u32)]);
                }
                SequenceCoeffs::from_levels(&self.grid, levels)
            }
            _ => Ok(c),
        }
    }
}

/// Exponent quadruple as stored in configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub alpha: ExponentSpec,
    pub tau: ExponentSpec,
    pub p: ExponentSpec,
    pub q: ExponentSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(i32, i32)>,
}

impl SpaceSpec {
    pub fn constant(alpha: f64, tau: f64, p: f64, q: f64) -> Self {
        SpaceSpec {
            alpha: ExponentSpec::constant(alpha),
            tau: ExponentSpec::constant(tau),
            p: ExponentSpec::constant(p),
            q: ExponentSpec::constant(q),
            window: None,
        }
    }

    pub fn build(&self, grid: &Grid) -> Result<SpaceParams> {
        let sp = SpaceParams::new(
            ExponentField::from_spec(grid, Role::Smoothness, &self.alpha)?,
            ExponentField::from_spec(grid, Role::Tau, &self.tau)?,
            ExponentField::from_spec(grid, Role::Integrability, &self.p)?,
            ExponentField::from_spec(grid, Role::Summability, &self.q)?,
        )?;
        match self.window {
            Some((lo, hi)) => sp.with_window(lo, hi),
            None => Ok(sp),
        }
    }
}
