//! JSON documents.
//!
//! Matrices are `{"field": "gf:5", "rows": [[...], ...]}`. Entries are
//! strings for `rational` and `gf:4` and numbers for `gf:p` and `f64`.
//! Any field also accepts string literals, rationals accept integers, and
//! `gf:p` values are reduced.
//! Every document written here carries `"blocktri_schema": 1`.

use serde_json::{json, Map, Number, Value};

use crate::couplingio::CouplingNetwork;
use crate::error::{Error, Result};
use crate::factor::{BlockLayer, Factorization, FactorizationKind};
use crate::fields::{Elem, Field};
use crate::matkit::Matrix;

pub const SCHEMA_VERSION: u64 = 1;
const SCHEMA_KEY: &str = "blocktri_schema";

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

/// Adds the schema marker to a JSON object.
pub fn with_schema(v: Value) -> Value {
    match v {
        Value::Object(mut map) => {
            let mut out = Map::new();
            out.insert(SCHEMA_KEY.into(), json!(SCHEMA_VERSION));
            out.append(&mut map);
            Value::Object(out)
        }
        other => other,
    }
}

fn check_schema(obj: &Map<String, Value>) -> Result<()> {
    match obj.get(SCHEMA_KEY) {
        None => Ok(()),
        Some(v) if v.as_u64() == Some(SCHEMA_VERSION) => Ok(()),
        Some(v) => Err(parse_err(format!("unsupported {SCHEMA_KEY} {v}"))),
    }
}

fn object(v: &Value) -> Result<&Map<String, Value>> {
    let obj = v
        .as_object()
        .ok_or_else(|| parse_err("expected a JSON object"))?;
    check_schema(obj)?;
    Ok(obj)
}

fn field_of(obj: &Map<String, Value>) -> Result<Field> {
    obj.get("field")
        .and_then(Value::as_str)
        .ok_or_else(|| parse_err("missing string \"field\""))?
        .parse()
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))
}

pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

pub fn entry_to_json(field: Field, e: &Elem) -> Value {
    match e {
        Elem::Residue(v) => json!(v),
        Elem::Float(x) => Number::from_f64(*x).map_or(Value::Null, Value::Number),
        _ => Value::String(field.format_elem(e)),
    }
}

pub fn entry_from_json(field: Field, v: &Value) -> Result<Elem> {
    let bad = || Error::InvalidLiteral {
        field,
        literal: v.to_string(),
    };
    match (field, v) {
        (Field::Prime(p), Value::Number(x)) => {
            if let Some(u) = x.as_u64() {
                Ok(Elem::Residue(u % p))
            } else if let Some(i) = x.as_i64() {
                Ok(Elem::Residue(i.rem_euclid(p as i64) as u64))
            } else {
                Err(bad())
            }
        }
        (Field::F64, Value::Number(x)) => x.as_f64().map(Elem::Float).ok_or_else(bad),
        (Field::Rational | Field::Gf4, Value::Number(x)) => {
            let literal = if let Some(u) = x.as_u64() {
                u.to_string()
            } else if let Some(i) = x.as_i64() {
                i.to_string()
            } else {
                return Err(bad());
            };
            if field == Field::Gf4 && literal != "0" && literal != "1" {
                return Err(bad());
            }
            field.parse_elem(&literal)
        }
        (_, Value::String(s)) => field.parse_elem(s),
        _ => Err(bad()),
    }
}

fn rows_to_json(m: &Matrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| {
                Value::Array(
                    m.row(i)
                        .iter()
                        .map(|e| entry_to_json(m.field(), e))
                        .collect(),
                )
            })
            .collect(),
    )
}

fn rows_from_json(field: Field, v: &Value, what: &str) -> Result<Matrix> {
    let rows = v
        .as_array()
        .ok_or_else(|| parse_err(format!("\"{what}\" must be an array of rows")))?;
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let row = row
            .as_array()
            .ok_or_else(|| parse_err(format!("rows of \"{what}\" must be arrays")))?;
        out.push(
            row.iter()
                .map(|e| entry_from_json(field, e))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Matrix::from_rows(field, out)
}

fn elems_to_json(field: Field, es: &[Elem]) -> Value {
    Value::Array(es.iter().map(|e| entry_to_json(field, e)).collect())
}

fn elems_from_json(field: Field, v: &Value, what: &str) -> Result<Vec<Elem>> {
    v.as_array()
        .ok_or_else(|| parse_err(format!("\"{what}\" must be an array")))?
        .iter()
        .map(|e| entry_from_json(field, e))
        .collect()
}

/// `{"field", "rows"}` without the schema marker, for embedding.
pub fn matrix_body(m: &Matrix) -> Value {
    json!({ "field": m.field().to_string(), "rows": rows_to_json(m) })
}

pub fn matrix_to_json(m: &Matrix) -> Value {
    with_schema(matrix_body(m))
}

pub fn matrix_from_json(v: &Value) -> Result<Matrix> {
    let obj = object(v)?;
    let field = field_of(obj)?;
    rows_from_json(
        field,
        obj.get("rows")
            .ok_or_else(|| parse_err("missing \"rows\""))?,
        "rows",
    )
}

pub fn parse_matrix(text: &str) -> Result<Matrix> {
    matrix_from_json(&parse_json(text)?)
}

/// `{"field", "diag": [...]}`.
pub fn diag_to_json(field: Field, d: &[Elem]) -> Value {
    with_schema(json!({ "field": field.to_string(), "diag": elems_to_json(field, d) }))
}

pub fn parse_diag(text: &str) -> Result<(Field, Vec<Elem>)> {
    let v = parse_json(text)?;
    let obj = object(&v)?;
    let field = field_of(obj)?;
    let d = elems_from_json(
        field,
        obj.get("diag")
            .ok_or_else(|| parse_err("missing \"diag\""))?,
        "diag",
    )?;
    Ok((field, d))
}

pub fn factorization_to_json(f: &Factorization) -> Value {
    let layers: Vec<Value> = f
        .layers
        .iter()
        .map(|layer| match layer {
            BlockLayer::Lower(a) => json!({ "type": "lower", "A": rows_to_json(a) }),
            BlockLayer::Upper(a) => json!({ "type": "upper", "A": rows_to_json(a) }),
            BlockLayer::UpperDiag { d, a } => json!({
                "type": "upper_diag",
                "A": rows_to_json(a),
                "D": elems_to_json(f.field, d),
            }),
        })
        .collect();
    with_schema(json!({
        "kind": f.kind,
        "m": f.m,
        "n": f.n,
        "field": f.field.to_string(),
        "layers": layers,
    }))
}

fn dim(obj: &Map<String, Value>, key: &str) -> Result<usize> {
    obj.get(key)
        .and_then(Value::as_u64)
        .and_then(|x| usize::try_from(x).ok())
        .ok_or_else(|| parse_err(format!("\"{key}\" must be a nonnegative integer")))
}

/// Parses and structurally validates a factorization document.
pub fn factorization_from_json(v: &Value) -> Result<Factorization> {
    let obj = object(v)?;
    let field = field_of(obj)?;
    let kind: FactorizationKind = serde_json::from_value(
        obj.get("kind")
            .cloned()
            .ok_or_else(|| parse_err("missing \"kind\""))?,
    )
    .map_err(|e| parse_err(format!("kind: {e}")))?;
    let (m, n) = (dim(obj, "m")?, dim(obj, "n")?);
    let raw = obj
        .get("layers")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("\"layers\" must be an array"))?;
    let mut layers = Vec::with_capacity(raw.len());
    for (i, layer) in raw.iter().enumerate() {
        let lobj = layer
            .as_object()
            .ok_or_else(|| parse_err(format!("layer {i} is not an object")))?;
        let a = rows_from_json(
            field,
            lobj.get("A")
                .ok_or_else(|| parse_err(format!("layer {i} has no \"A\"")))?,
            "A",
        )?;
        let ty = lobj.get("type").and_then(Value::as_str);
        layers.push(match ty {
            Some("lower") => BlockLayer::Lower(a),
            Some("upper") => BlockLayer::Upper(a),
            Some("upper_diag") => {
                let d = lobj
                    .get("D")
                    .ok_or_else(|| parse_err(format!("layer {i} has no \"D\"")))?;
                BlockLayer::UpperDiag {
                    d: elems_from_json(field, d, "D")?,
                    a,
                }
            }
            other => return Err(parse_err(format!("layer {i} has unknown type {other:?}"))),
        });
    }
    let f = Factorization {
        kind,
        m,
        n,
        field,
        layers,
    };
    f.validate()?;
    Ok(f)
}

pub fn parse_factorization(text: &str) -> Result<Factorization> {
    factorization_from_json(&parse_json(text)?)
}

pub fn network_to_json(net: &CouplingNetwork) -> Value {
    with_schema(serde_json::to_value(net).expect("networks serialize"))
}

/// Parses a network and checks that every layer fits the split.
pub fn parse_network(text: &str) -> Result<CouplingNetwork> {
    let v = parse_json(text)?;
    object(&v)?;
    let net: CouplingNetwork = serde_json::from_value(v).map_err(|e| parse_err(e.to_string()))?;
    let (m, n) = net.split;
    for layer in &net.layers {
        layer.to_matrix(m, n)?;
    }
    net.validate()?;
    Ok(net)
}

/// Any serializable report, with the schema marker.
pub fn report_to_json<T: serde::Serialize>(report: &T) -> Value {
    with_schema(serde_json::to_value(report).expect("reports serialize"))
}
