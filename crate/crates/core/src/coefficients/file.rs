//! JSON coefficient files.
//!
//! Arov gauge: `{"grid": [ℓ1, …], "m": […], "a": [[re, im], …], "tail": "constant"}`.
//! General gauge: `{"grid": […], "n": […], "P": [[[re, im], …] × 2] per interval, "Q": …}`.
//! The grid lists the knots after the origin; `tail` defaults to `constant`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ArovParameters, CheckedGeneral, GeneralCoefficients, Grid, TailPolicy};
use crate::error::CoefficientError;
use crate::mat2::Mat2;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed coefficient file at `{key}` (line {line}, column {column}): {message}")]
    Parse { key: String, line: usize, column: usize, message: String },
    #[error("invalid coefficients: {0}")]
    Invalid(#[from] CoefficientError),
}

type Pair = [f64; 2];

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArovFile {
    grid: Vec<f64>,
    m: Vec<f64>,
    a: Vec<Pair>,
    #[serde(default)]
    tail: TailPolicy,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneralFile {
    grid: Vec<f64>,
    n: Vec<f64>,
    #[serde(rename = "P")]
    p: Vec<[[Pair; 2]; 2]>,
    #[serde(rename = "Q")]
    q: Vec<[[Pair; 2]; 2]>,
    #[serde(default)]
    tail: TailPolicy,
}

/// Contents of a coefficient file of either kind.
#[derive(Clone, Debug, PartialEq)]
pub enum Coefficients {
    Arov(ArovParameters),
    General(CheckedGeneral),
}

fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, FileError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        let inner = e.into_inner();
        FileError::Parse { key, line: inner.line(), column: inner.column(), message: inner.to_string() }
    })
}

fn complex(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn mat(m: [[Pair; 2]; 2]) -> Mat2 {
    Mat2::new(complex(m[0][0]), complex(m[0][1]), complex(m[1][0]), complex(m[1][1]))
}

fn pair(c: Complex64) -> Pair {
    [c.re, c.im]
}

pub fn parse_arov(text: &str) -> Result<ArovParameters, FileError> {
    let f: ArovFile = parse(text)?;
    let grid = Grid::from_breaks(&f.grid, f.tail)?;
    Ok(ArovParameters::new(grid, f.m, f.a.into_iter().map(complex).collect())?)
}

pub fn parse_general(text: &str) -> Result<CheckedGeneral, FileError> {
    let f: GeneralFile = parse(text)?;
    let grid = Grid::from_breaks(&f.grid, f.tail)?;
    let c = GeneralCoefficients {
        grid,
        density: f.n,
        p: f.p.into_iter().map(mat).collect(),
        q: f.q.into_iter().map(mat).collect(),
    };
    Ok(super::validate_general(c)?)
}

/// Parses either file kind; the presence of a `P` key selects the general gauge.
pub fn parse_coefficients(text: &str) -> Result<Coefficients, FileError> {
    let general = serde_json::from_str::<serde_json::Value>(text)
        .map(|v| v.get("P").is_some())
        .unwrap_or(false);
    if general {
        parse_general(text).map(Coefficients::General)
    } else {
        parse_arov(text).map(Coefficients::Arov)
    }
}

fn read(path: &Path) -> Result<String, FileError> {
    std::fs::read_to_string(path)
        .map_err(|e| FileError::Io { path: path.display().to_string(), message: e.to_string() })
}

pub fn read_arov(path: impl AsRef<Path>) -> Result<ArovParameters, FileError> {
    parse_arov(&read(path.as_ref())?)
}

pub fn read_coefficients(path: impl AsRef<Path>) -> Result<Coefficients, FileError> {
    parse_coefficients(&read(path.as_ref())?)
}

pub fn arov_to_json(p: &ArovParameters) -> String {
    let f = ArovFile {
        grid: p.grid().knots()[1..].to_vec(),
        m: p.densities().to_vec(),
        a: p.coefficients().iter().map(|&a| pair(a)).collect(),
        tail: p.grid().tail(),
    };
    serde_json::to_string_pretty(&f).expect("coefficient file serializes")
}

pub fn general_to_json(c: &GeneralCoefficients) -> String {
    let m = |x: &Mat2| [[pair(x.a11), pair(x.a12)], [pair(x.a21), pair(x.a22)]];
    let f = GeneralFile {
        grid: c.grid.knots()[1..].to_vec(),
        n: c.density.clone(),
        p: c.p.iter().map(m).collect(),
        q: c.q.iter().map(m).collect(),
        tail: c.grid.tail(),
    };
    serde_json::to_string_pretty(&f).expect("coefficient file serializes")
}
