//! JSON documents for distributions, cumulant families, `σ` data and
//! certificates.
//!
//! Floats are written with 17 significant digits (`{:.16e}`) so a write/read
//! cycle reproduces every bit. Complex entries are `[re, im]`; matrices are
//! row-major nested arrays.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{json, Map, Value};

use crate::algebra::{AlgebraPair, CMatrix};
use crate::certify::{Certificate, Witness};
use crate::cumulants::{CumulantFamily, CumulantKind};
use crate::distribution::Functional;
use crate::error::{Error, Result};
use crate::fock::full::LevyData;
use crate::linear::LinearFunctional;

struct FixedFormatter;

impl Formatter for FixedFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Compact serialization with fixed float formatting. Field order is insertion order.
pub fn to_string(value: &Value) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFormatter);
    value.serialize(&mut ser).expect("writing to a Vec cannot fail");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

pub fn parse(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

pub fn complex_value(z: Complex64) -> Value {
    Value::Array(vec![number(z.re), number(z.im)])
}

pub fn matrix_value(m: &CMatrix) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| complex_value(m[(i, j)])).collect())).collect())
}

fn bad(what: &str) -> Error {
    Error::Parse(what.to_string())
}

fn as_f64(v: &Value, what: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| bad(&format!("{what}: expected a number")))
}

pub fn complex_from(v: &Value) -> Result<Complex64> {
    match v {
        Value::Array(parts) if parts.len() == 2 => Ok(Complex64::new(as_f64(&parts[0], "re")?, as_f64(&parts[1], "im")?)),
        Value::Number(_) => Ok(Complex64::new(as_f64(v, "entry")?, 0.0)),
        _ => Err(bad("complex entries are [re, im]")),
    }
}

pub fn matrix_from(v: &Value, rows: usize, cols: usize) -> Result<CMatrix> {
    let rs = v.as_array().ok_or_else(|| bad("matrix must be an array of rows"))?;
    if rs.len() != rows {
        return Err(Error::DimensionMismatch { expected: format!("{rows} rows"), found: format!("{}", rs.len()) });
    }
    let mut m = CMatrix::zeros(rows, cols);
    for (i, row) in rs.iter().enumerate() {
        let entries = row.as_array().ok_or_else(|| bad("matrix rows must be arrays"))?;
        if entries.len() != cols {
            return Err(Error::DimensionMismatch { expected: format!("{cols} columns"), found: format!("{}", entries.len()) });
        }
        for (j, e) in entries.iter().enumerate() {
            m[(i, j)] = complex_from(e)?;
        }
    }
    Ok(m)
}

fn usize_field(obj: &Map<String, Value>, key: &str) -> Result<usize> {
    obj.get(key)
        .and_then(Value::as_u64)
        .map(|x| x as usize)
        .ok_or_else(|| bad(&format!("missing or invalid \"{key}\"")))
}

fn object(v: &Value) -> Result<&Map<String, Value>> {
    v.as_object().ok_or_else(|| bad("expected a JSON object"))
}

fn pair_fields(pair: &AlgebraPair, out: &mut Map<String, Value>) {
    out.insert("k".into(), json!(pair.k()));
    out.insert("d".into(), json!(pair.d()));
    out.insert("embed".into(), matrix_value(pair.embed_matrix()));
}

pub fn pair_from(obj: &Map<String, Value>) -> Result<AlgebraPair> {
    let k = usize_field(obj, "k")?;
    let d = usize_field(obj, "d")?;
    let embed = match obj.get("embed") {
        Some(e) => matrix_from(e, d * d, k * k)?,
        None if k == d => return Ok(AlgebraPair::identity(k)),
        None => return Err(bad("missing \"embed\"")),
    };
    AlgebraPair::new(k, d, embed)
}

fn level_value(level: &[CMatrix], plain: bool) -> Value {
    if plain {
        matrix_value(&level[0])
    } else {
        Value::Array(level.iter().map(matrix_value).collect())
    }
}

fn level_from(v: &Value, count: usize, d: usize) -> Result<Vec<CMatrix>> {
    // A single matrix is accepted wherever one block is expected.
    if count == 1 && matrix_from(v, d, d).is_ok() {
        return Ok(vec![matrix_from(v, d, d)?]);
    }
    let blocks = v.as_array().ok_or_else(|| bad("level must be an array of matrices"))?;
    if blocks.len() != count {
        return Err(Error::DimensionMismatch { expected: format!("{count} blocks"), found: format!("{}", blocks.len()) });
    }
    blocks.iter().map(|b| matrix_from(b, d, d)).collect()
}

/// `{k, d, embed, truncation, moments}`; `"0"` is written only when `φ(1) ≠ 1`.
pub fn functional_value(phi: &Functional) -> Value {
    let mut out = Map::new();
    pair_fields(phi.pair(), &mut out);
    out.insert("truncation".into(), json!(phi.truncation()));
    out.insert("moments".into(), Value::Object(levels_map(phi)));
    Value::Object(out)
}

fn levels_map(phi: &Functional) -> Map<String, Value> {
    let mut levels = Map::new();
    if *phi.value_at_one() != phi.pair().identity_d() {
        levels.insert("0".into(), matrix_value(phi.value_at_one()));
    }
    for n in 1..=phi.truncation() {
        levels.insert(n.to_string(), level_value(phi.level(n), n == 1));
    }
    levels
}

fn functional_from_parts(pair: AlgebraPair, truncation: usize, levels: &Map<String, Value>) -> Result<Functional> {
    let d = pair.d();
    let base = pair.units_len();
    let mut out = vec![match levels.get("0") {
        Some(v) => vec![matrix_from(v, d, d)?],
        None => vec![pair.identity_d()],
    }];
    for n in 1..=truncation {
        let v = levels.get(&n.to_string()).ok_or_else(|| bad(&format!("missing level \"{n}\"")))?;
        out.push(level_from(v, base.pow(n as u32 - 1), d)?);
    }
    Functional::new(pair, out)
}

pub fn functional_from(v: &Value) -> Result<Functional> {
    let obj = object(v)?;
    let pair = pair_from(obj)?;
    let truncation = usize_field(obj, "truncation")?;
    let levels = obj.get("moments").and_then(Value::as_object).ok_or_else(|| bad("missing \"moments\""))?;
    functional_from_parts(pair, truncation, levels)
}

/// Like a distribution file, with `"kind"` and the levels under `"cumulants"`.
pub fn cumulants_value(family: &CumulantFamily) -> Value {
    let phi = family.values();
    let mut out = Map::new();
    out.insert("kind".into(), json!(family.kind().name()));
    pair_fields(phi.pair(), &mut out);
    out.insert("truncation".into(), json!(phi.truncation()));
    out.insert("cumulants".into(), Value::Object(levels_map(phi)));
    Value::Object(out)
}

pub fn cumulants_from(v: &Value) -> Result<CumulantFamily> {
    let obj = object(v)?;
    let kind = obj
        .get("kind")
        .and_then(Value::as_str)
        .and_then(CumulantKind::parse)
        .ok_or_else(|| bad("missing or unknown \"kind\""))?;
    let pair = pair_from(obj)?;
    let truncation = usize_field(obj, "truncation")?;
    let levels = obj.get("cumulants").and_then(Value::as_object).ok_or_else(|| bad("missing \"cumulants\""))?;
    Ok(CumulantFamily::new(kind, functional_from_parts(pair, truncation, levels)?))
}

/// `{"mu": …, "nu": …}` for a c-free pair.
pub fn pair_value(mu: &Functional, nu: &Functional) -> Value {
    json!({ "mu": functional_value(mu), "nu": functional_value(nu) })
}

/// A single distribution, or a `{"mu", "nu"}` pair document.
pub fn distributions_from(v: &Value) -> Result<(Functional, Option<Functional>)> {
    let obj = object(v)?;
    match (obj.get("mu"), obj.get("nu")) {
        (Some(mu), Some(nu)) => Ok((functional_from(mu)?, Some(functional_from(nu)?))),
        _ => Ok((functional_from(v)?, None)),
    }
}

/// `σ` level `j` is keyed by `j` and holds `(k²)^{j+1}` blocks.
pub fn linear_value(sigma: &LinearFunctional) -> Value {
    let mut out = Map::new();
    pair_fields(sigma.pair(), &mut out);
    out.insert("truncation".into(), json!(sigma.truncation()));
    let mut levels = Map::new();
    for (j, level) in sigma.levels().iter().enumerate() {
        levels.insert(j.to_string(), level_value(level, false));
    }
    out.insert("values".into(), Value::Object(levels));
    Value::Object(out)
}

pub fn linear_from(v: &Value) -> Result<LinearFunctional> {
    let obj = object(v)?;
    let pair = pair_from(obj)?;
    let truncation = usize_field(obj, "truncation")?;
    let levels = obj.get("values").and_then(Value::as_object).ok_or_else(|| bad("missing \"values\""))?;
    let base = pair.units_len();
    let d = pair.d();
    let out = (0..=truncation)
        .map(|j| {
            let v = levels.get(&j.to_string()).ok_or_else(|| bad(&format!("missing level \"{j}\"")))?;
            let blocks = v.as_array().ok_or_else(|| bad("level must be an array of matrices"))?;
            blocks.iter().map(|b| matrix_from(b, d, d)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    if out.iter().enumerate().any(|(j, l)| l.len() != base.pow(j as u32 + 1)) {
        return Err(bad("σ level sizes do not match k"));
    }
    LinearFunctional::new(pair, out)
}

pub fn levy_value(kind: CumulantKind, data: &LevyData) -> Value {
    json!({ "kind": kind.name(), "alpha": matrix_value(&data.alpha), "sigma": linear_value(&data.sigma) })
}

pub fn levy_from(v: &Value) -> Result<LevyData> {
    let obj = object(v)?;
    let sigma = linear_from(obj.get("sigma").ok_or_else(|| bad("missing \"sigma\""))?)?;
    let d = sigma.pair().d();
    let alpha = matrix_from(obj.get("alpha").ok_or_else(|| bad("missing \"alpha\""))?, d, d)?;
    Ok(LevyData { alpha, sigma })
}

pub fn witness_value(w: &Witness) -> Value {
    let coeffs = w
        .terms
        .iter()
        .map(|t| json!({ "word": t.word, "row": t.row, "coeff": complex_value(t.coeff) }))
        .collect();
    json!({ "coeffs": Value::Array(coeffs), "quadratic_form": number(w.quadratic_form) })
}

pub fn certificate_value(c: &Certificate) -> Value {
    let mut out = Map::new();
    out.insert("kind".into(), json!(c.kind.name()));
    out.insert("degree".into(), json!(c.degree));
    out.insert("min_eig".into(), number(c.min_eig));
    out.insert("tol".into(), number(c.tol));
    out.insert("pass".into(), json!(c.pass));
    if let Some(w) = &c.witness {
        out.insert("witness".into(), witness_value(w));
    }
    Value::Object(out)
}

/// `{"error": kind, "message": text}`.
pub fn error_value(e: &Error) -> Value {
    let kind = format!("{e:?}");
    let kind = kind.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string();
    json!({ "error": kind, "message": e.to_string() })
}
