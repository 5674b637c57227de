//! JSON wire formats. Real matrices are row-major nested arrays, complex numbers are
//! `[re, im]` pairs.

use std::fs;

use anyhow::{bail, Context, Result};
use jrgauss_core::quadrature::{COrbResult, OrbResult};
use jrgauss_core::slie::{Invariant, NormalForm, SElement};
use jrgauss_core::{DMatrix, C64};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SElementJson {
    pub n: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct InvariantJson {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub d: f64,
}

pub type ComplexMatrixJson = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbJson {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: u64,
    pub vanishes: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct COrbJson {
    pub value: [f64; 2],
    pub error_estimate: f64,
    pub evaluations: u64,
    pub vanishes: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormalFormJson {
    pub g: Vec<Vec<f64>>,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub y: SElementJson,
}

/// Chart list for the assembled group-side Gaussian.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChartsJson {
    pub xis: Vec<[f64; 2]>,
    pub margin: f64,
}

pub fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || rows.iter().any(|row| row.len() != c) {
        bail!("matrix rows must be non-empty and of equal length");
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

pub fn complex_rows(m: &DMatrix<C64>) -> ComplexMatrixJson {
    (0..m.nrows()).map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect()).collect()
}

pub fn from_complex_rows(rows: &ComplexMatrixJson) -> Result<DMatrix<C64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || rows.iter().any(|row| row.len() != c) {
        bail!("matrix rows must be non-empty and of equal length");
    }
    Ok(DMatrix::from_fn(r, c, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

impl From<&SElement> for SElementJson {
    fn from(y: &SElement) -> Self {
        Self { n: y.n(), a: rows(y.a()) }
    }
}

impl SElementJson {
    pub fn to_element(&self) -> Result<SElement> {
        let y = SElement::new(from_rows(&self.a)?)?;
        if y.n() != self.n {
            bail!("\"n\" is {} but A is {}x{}", self.n, y.n() + 1, y.n() + 1);
        }
        Ok(y)
    }
}

impl From<&Invariant> for InvariantJson {
    fn from(inv: &Invariant) -> Self {
        Self { a: inv.a.clone(), b: inv.b.clone(), d: inv.d }
    }
}

impl From<InvariantJson> for Invariant {
    fn from(j: InvariantJson) -> Self {
        Invariant { a: j.a, b: j.b, d: j.d }
    }
}

impl From<&OrbResult> for OrbJson {
    fn from(o: &OrbResult) -> Self {
        Self { value: o.value, error_estimate: o.error_estimate, evaluations: o.evaluations, vanishes: o.vanishes }
    }
}

impl From<&COrbResult> for COrbJson {
    fn from(o: &COrbResult) -> Self {
        Self { value: [o.value.re, o.value.im], error_estimate: o.error_estimate, evaluations: o.evaluations, vanishes: o.vanishes }
    }
}

impl From<&NormalForm> for NormalFormJson {
    fn from(nf: &NormalForm) -> Self {
        Self { g: rows(&nf.g), lambda: nf.lambda.clone(), mu: nf.mu.clone(), y: (&nf.y).into() }
    }
}

/// Parses `arg` as inline JSON when it starts with `{` or `[`, otherwise reads it as a path.
pub fn read_json<T: DeserializeOwned>(arg: &str) -> Result<T> {
    let t = arg.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        return serde_json::from_str(t).context("parsing inline JSON");
    }
    let text = fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {arg}"))
}

pub fn read_selement(arg: &str) -> Result<SElement> {
    read_json::<SElementJson>(arg)?.to_element()
}

pub fn read_complex(arg: &str) -> Result<DMatrix<C64>> {
    from_complex_rows(&read_json(arg)?)
}

/// `"re,im"` or a bare real number.
pub fn parse_complex(s: &str) -> Result<C64> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<f64>().with_context(|| format!("not a number: {p:?}"));
    match parts[..] {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => bail!("expected re,im, got {s:?}"),
    }
}

/// `"p,q"`.
pub fn parse_signature(s: &str) -> Result<(usize, usize)> {
    let (p, q) = s.split_once(',').with_context(|| format!("expected p,q, got {s:?}"))?;
    Ok((p.trim().parse()?, q.trim().parse()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selement_round_trip() {
        let text = r#"{"n": 1, "A": [[0.5, 1.0], [2.0, -0.25]]}"#;
        let y = read_selement(text).unwrap();
        assert_eq!(y.a()[(1, 0)], 2.0);
        let back: SElementJson = (&y).into();
        assert_eq!(serde_json::to_string(&back).unwrap(), r#"{"n":1,"A":[[0.5,1.0],[2.0,-0.25]]}"#);
    }

    #[test]
    fn size_mismatch_is_rejected() {
        assert!(read_selement(r#"{"n": 2, "A": [[0.5, 1.0], [2.0, -0.25]]}"#).is_err());
        assert!(read_selement(r#"{"n": 1, "A": [[0.5, 1.0], [2.0]]}"#).is_err());
    }

    #[test]
    fn scalars() {
        assert_eq!(parse_complex("0.6,-0.8").unwrap(), C64::new(0.6, -0.8));
        assert_eq!(parse_complex("-1").unwrap(), C64::new(-1.0, 0.0));
        assert!(parse_complex("1,2,3").is_err());
        assert_eq!(parse_signature("2, 1").unwrap(), (2, 1));
    }
}
