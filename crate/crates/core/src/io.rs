//! JSON formats for algebras, subspaces, splits, complex structures and
//! float matrices, plus the deterministic report writer.
//!
//! Rationals are written as `"p/q"` strings (integers as `"p"`); integer
//! JSON numbers are accepted on input.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::lie::{LieAlgebra, RawBracketTable, Subspace};
use crate::linalg::{QMatrix, Rational};
use crate::reductive::{ComplexStructure, ReductiveSplit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalJson {
    Text(String),
    Int(i64),
}

impl RationalJson {
    pub fn parse(&self) -> Result<Rational> {
        match self {
            RationalJson::Int(n) => Ok(Rational::from_integer((*n).into())),
            RationalJson::Text(s) => parse_rational(s),
        }
    }
}

impl From<&Rational> for RationalJson {
    fn from(q: &Rational) -> Self {
        RationalJson::Text(q.to_string())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: num_bigint::BigInt = num.parse().map_err(|_| bad())?;
    let d: num_bigint::BigInt = den.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

fn parse_rows(rows: &[Vec<RationalJson>]) -> Result<Vec<Vec<Rational>>> {
    rows.iter()
        .map(|r| r.iter().map(RationalJson::parse).collect())
        .collect()
}

fn rows_json(m: &QMatrix) -> Vec<Vec<RationalJson>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(RationalJson::from).collect())
        .collect()
}

fn qmatrix_from_rows(rows: Vec<Vec<Rational>>, what: &str) -> Result<QMatrix> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse(format!("{what}: rows have different lengths")));
    }
    Ok(QMatrix::from_rows(rows))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketJson {
    pub i: usize,
    pub j: usize,
    pub coeffs: Vec<RationalJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraJson {
    pub name: String,
    pub dim: usize,
    pub basis: Vec<String>,
    #[serde(default)]
    pub brackets: Vec<BracketJson>,
}

impl AlgebraJson {
    pub fn from_algebra(a: &LieAlgebra) -> Self {
        let n = a.dim();
        let mut brackets = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let coeffs: Vec<Rational> = (0..n)
                    .map(|m| a.structure_constant(i, j, m).clone())
                    .collect();
                if coeffs.iter().any(|c| !c.is_zero()) {
                    brackets.push(BracketJson {
                        i,
                        j,
                        coeffs: coeffs.iter().map(RationalJson::from).collect(),
                    });
                }
            }
        }
        AlgebraJson {
            name: a.name().to_string(),
            dim: n,
            basis: a.basis_labels().to_vec(),
            brackets,
        }
    }

    pub fn to_algebra(&self) -> Result<LieAlgebra> {
        let n = self.dim;
        if self.basis.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.basis.len(),
            });
        }
        let labels: Vec<&str> = self.basis.iter().map(String::as_str).collect();
        let mut raw = RawBracketTable::zero(&self.name, &labels);
        let mut seen = std::collections::BTreeSet::new();
        for b in &self.brackets {
            if b.i >= b.j || b.j >= n {
                return Err(Error::Parse(format!(
                    "bracket entry ({}, {}) must satisfy i < j < dim",
                    b.i, b.j
                )));
            }
            if !seen.insert((b.i, b.j)) {
                return Err(Error::Parse(format!(
                    "bracket ({}, {}) given twice",
                    b.i, b.j
                )));
            }
            if b.coeffs.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: b.coeffs.len(),
                });
            }
            let coeffs: Vec<Rational> = b
                .coeffs
                .iter()
                .map(RationalJson::parse)
                .collect::<Result<_>>()?;
            raw.set(b.i, b.j, &coeffs);
        }
        LieAlgebra::from_table(raw)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceJson {
    /// One inner list per basis vector.
    pub basis: Vec<Vec<RationalJson>>,
}

impl SubspaceJson {
    pub fn from_subspace(s: &Subspace) -> Self {
        SubspaceJson {
            basis: s
                .basis()
                .iter()
                .map(|v| v.iter().map(RationalJson::from).collect())
                .collect(),
        }
    }

    pub fn to_subspace(&self, ambient_dim: usize) -> Result<Subspace> {
        Subspace::new(ambient_dim, parse_rows(&self.basis)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexStructureJson {
    /// Row-major, in s-coordinates.
    #[serde(rename = "J")]
    pub j: Vec<Vec<RationalJson>>,
}

impl ComplexStructureJson {
    pub fn from_matrix(j: &QMatrix) -> Self {
        ComplexStructureJson { j: rows_json(j) }
    }

    pub fn to_matrix(&self) -> Result<QMatrix> {
        qmatrix_from_rows(parse_rows(&self.j)?, "J")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectorsJson {
    pub proj_h: Vec<Vec<RationalJson>>,
    pub proj_s: Vec<Vec<RationalJson>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitJson {
    pub algebra: AlgebraJson,
    pub isotropy: SubspaceJson,
    pub complement: SubspaceJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projectors: Option<ProjectorsJson>,
}

impl SplitJson {
    pub fn from_split(split: &ReductiveSplit) -> Self {
        SplitJson {
            algebra: AlgebraJson::from_algebra(split.algebra()),
            isotropy: SubspaceJson::from_subspace(split.isotropy()),
            complement: SubspaceJson::from_subspace(split.complement()),
            projectors: Some(ProjectorsJson {
                proj_h: rows_json(split.proj_h()),
                proj_s: rows_json(split.proj_s()),
            }),
        }
    }

    /// Rebuilds the split; supplied projectors must agree with the ones
    /// computed from the subspaces.
    pub fn to_split(&self) -> Result<ReductiveSplit> {
        let a = self.algebra.to_algebra()?;
        let n = a.dim();
        let h = self.isotropy.to_subspace(n)?;
        let s = self.complement.to_subspace(n)?;
        let split = ReductiveSplit::new(a, h, s)?;
        if let Some(p) = &self.projectors {
            let ph = qmatrix_from_rows(parse_rows(&p.proj_h)?, "proj_h")?;
            let ps = qmatrix_from_rows(parse_rows(&p.proj_s)?, "proj_s")?;
            if &ph != split.proj_h() || &ps != split.proj_s() {
                return Err(Error::SplitMismatch(
                    "projectors disagree with the isotropy and complement bases".into(),
                ));
            }
        }
        Ok(split)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    /// Row-major; rows indexed by the k-basis.
    pub matrix: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        MatrixJson {
            matrix: m.row_iter().map(|r| r.iter().copied().collect()).collect(),
        }
    }

    /// An empty list is accepted for any shape with no columns.
    pub fn to_matrix(&self, nrows: usize, ncols: usize) -> Result<DMatrix<f64>> {
        if ncols == 0 && self.matrix.iter().all(Vec::is_empty) {
            return Ok(DMatrix::zeros(nrows, 0));
        }
        if self.matrix.len() != nrows || self.matrix.iter().any(|r| r.len() != ncols) {
            return Err(Error::ShapeMismatch {
                what: "matrix".into(),
                expected: (nrows, ncols),
                found: (self.matrix.len(), self.matrix.first().map_or(0, Vec::len)),
            });
        }
        Ok(DMatrix::from_fn(nrows, ncols, |i, j| self.matrix[i][j]))
    }
}

fn from_str<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

pub fn parse_algebra(text: &str) -> Result<LieAlgebra> {
    from_str::<AlgebraJson>(text, "algebra")?.to_algebra()
}

pub fn parse_subspace(text: &str, ambient_dim: usize) -> Result<Subspace> {
    from_str::<SubspaceJson>(text, "subspace")?.to_subspace(ambient_dim)
}

pub fn parse_split(text: &str) -> Result<ReductiveSplit> {
    from_str::<SplitJson>(text, "split")?.to_split()
}

pub fn parse_complex_structure(text: &str, split: ReductiveSplit) -> Result<ComplexStructure> {
    let j = from_str::<ComplexStructureJson>(text, "J")?.to_matrix()?;
    ComplexStructure::new(split, j)
}

pub fn parse_matrix(text: &str, nrows: usize, ncols: usize) -> Result<DMatrix<f64>> {
    from_str::<MatrixJson>(text, "matrix")?.to_matrix(nrows, ncols)
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

pub fn rational_value(q: &Rational) -> Value {
    Value::String(q.to_string())
}

pub fn qmatrix_value(m: &QMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array(m.row(i).iter().map(rational_value).collect()))
            .collect(),
    )
}

/// Non-finite floats become `null`.
pub fn float_value(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn float_vec_value(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| float_value(x)).collect())
}

pub fn matrix_value(m: &DMatrix<f64>) -> Value {
    Value::Array(
        m.row_iter()
            .map(|r| Value::Array(r.iter().map(|&x| float_value(x)).collect()))
            .collect(),
    )
}

fn write_float(out: &mut String, x: f64) {
    if x == 0.0 {
        // drop the sign of negative zero
        out.push_str("0.0000000000000000e0");
    } else {
        write!(out, "{x:.16e}").expect("write to string");
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', n));
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => {
            out.push_str(&serde_json::to_string(v).expect("scalar"));
        }
        Value::Number(n) => {
            if n.is_f64() {
                write_float(out, n.as_f64().expect("f64"));
            } else {
                write!(out, "{n}").expect("write to string");
            }
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            let flat = items.iter().all(|x| !x.is_array() && !x.is_object());
            if flat {
                out.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, x, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                pad(out, indent + 2);
                write_value(out, x, indent + 2);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                pad(out, indent + 2);
                out.push_str(&serde_json::to_string(k).expect("key"));
                out.push_str(": ");
                write_value(out, &map[k.as_str()], indent + 2);
                if i + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// Pretty JSON with sorted keys and floats in `{:.16e}` form (17
/// significant digits, enough to round-trip).
pub fn to_canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

/// Flat `path = value` listing of a report, sorted by path.
pub fn to_table(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
        match v {
            Value::Object(map) => {
                let mut keys: Vec<&String> = map.keys().collect();
                keys.sort();
                for k in keys {
                    let p = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&p, &map[k.as_str()], rows);
                }
            }
            Value::Array(items) if items.iter().any(|x| x.is_object()) => {
                for (i, x) in items.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), x, rows);
                }
            }
            _ => {
                let mut s = String::new();
                write_value(&mut s, v, 0);
                // strings never hold raw newlines, so trimming lines only drops layout
                let compact: String = s.lines().map(str::trim).collect();
                rows.push((prefix.to_string(), compact));
            }
        }
    }
    let mut rows = Vec::new();
    walk("", v, &mut rows);
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, val) in rows {
        writeln!(out, "{k:<width$}  {val}").expect("write to string");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{q, q_frac};
    use crate::presets;

    #[test]
    fn rationals_parse() {
        assert_eq!(parse_rational("3/4").unwrap(), q_frac(3, 4));
        assert_eq!(parse_rational(" -2 ").unwrap(), q(-2));
        assert_eq!(parse_rational("6/-4").unwrap(), q_frac(-3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("0.5").is_err());
    }

    #[test]
    fn presets_round_trip() {
        for a in [
            presets::sl2r(),
            presets::su2(),
            presets::aff1(),
            presets::su3(),
            presets::sl2r_squared(),
        ] {
            let text = serde_json::to_string(&AlgebraJson::from_algebra(&a)).unwrap();
            let b = parse_algebra(&text).unwrap();
            assert!(a.same_table(&b));
            assert_eq!(a.name(), b.name());
            assert_eq!(a.basis_labels(), b.basis_labels());
            assert_eq!(
                serde_json::to_string(&AlgebraJson::from_algebra(&b)).unwrap(),
                text
            );
        }
        let split = presets::product_halfplane_split();
        let text = serde_json::to_string(&SplitJson::from_split(&split)).unwrap();
        let back = parse_split(&text).unwrap();
        assert_eq!(back.complement(), split.complement());
        assert_eq!(back.proj_h(), split.proj_h());
    }

    #[test]
    fn unknown_keys_and_bad_brackets_rejected() {
        let bad = r#"{"name":"x","dim":1,"basis":["a"],"brackets":[],"extra":1}"#;
        assert!(matches!(parse_algebra(bad), Err(Error::Parse(_))));
        let rev = r#"{"name":"x","dim":2,"basis":["a","b"],"brackets":[{"i":1,"j":0,"coeffs":["0","1"]}]}"#;
        assert!(matches!(parse_algebra(rev), Err(Error::Parse(_))));
        let short =
            r#"{"name":"x","dim":2,"basis":["a","b"],"brackets":[{"i":0,"j":1,"coeffs":["1"]}]}"#;
        assert!(matches!(
            parse_algebra(short),
            Err(Error::DimensionMismatch { .. })
        ));
        let aff = r#"{"name":"aff","dim":2,"basis":["f1","f2"],"brackets":[{"i":0,"j":1,"coeffs":[0,1]}]}"#;
        assert!(parse_algebra(aff).unwrap().same_table(&presets::aff1()));
    }

    #[test]
    fn tampered_projectors_rejected() {
        let mut sj = SplitJson::from_split(&presets::halfplane_split());
        sj.projectors.as_mut().unwrap().proj_h[0][1] = RationalJson::Int(1);
        assert!(matches!(sj.to_split(), Err(Error::SplitMismatch(_))));
    }

    #[test]
    fn matrices_and_j() {
        let m = parse_matrix(r#"{"matrix": [[1.5, 0], [2, -1]]}"#, 2, 2).unwrap();
        assert_eq!(m[(1, 0)], 2.0);
        assert!(parse_matrix(r#"{"matrix": [[1.5, 0]]}"#, 2, 2).is_err());
        assert_eq!(
            parse_matrix(r#"{"matrix": []}"#, 3, 0).unwrap().shape(),
            (3, 0)
        );
        let cs = parse_complex_structure(
            r#"{"J": [["0","-1"],["1","0"]]}"#,
            presets::halfplane_split(),
        )
        .unwrap();
        assert_eq!(cs.j(), presets::halfplane_complex_structure().j());
    }

    #[test]
    fn canonical_writer() {
        let v = serde_json::json!({"b": [1, 2.5, -0.0], "a": {"z": "s", "y": null}, "c": []});
        let text = to_canonical_json(&v);
        assert_eq!(
            text,
            "{\n  \"a\": {\n    \"y\": null,\n    \"z\": \"s\"\n  },\n  \"b\": [1, 2.5000000000000000e0, 0.0000000000000000e0],\n  \"c\": []\n}\n"
        );
        let x = 0.1f64 + 0.2;
        let back: Value =
            serde_json::from_str(&to_canonical_json(&serde_json::json!([x]))).unwrap();
        assert_eq!(back[0].as_f64().unwrap(), x);
    }
}
