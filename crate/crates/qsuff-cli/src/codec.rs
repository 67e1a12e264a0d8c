//! JSON codec for the model file format and report payloads. Complex
//! matrices are nested row-major arrays of `[re, im]` pairs.

use qsuff::matcore::{c, CMat};
use qsuff::model::{ElementKind, Model, ModelElement};
use serde_json::{json, Value};

#[derive(Debug)]
pub enum InputError {
    Malformed(String),
    Invalid(String),
}

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InputError::Malformed(m) => write!(f, "malformed input: {m}"),
            InputError::Invalid(m) => write!(f, "invalid input: {m}"),
        }
    }
}

pub fn matrix_to_json(m: &CMat) -> Value {
    let rows: Vec<Value> = (0..m.nrows())
        .map(|i| {
            let row: Vec<Value> = (0..m.ncols())
                .map(|j| json!([m[(i, j)].re, m[(i, j)].im]))
                .collect();
            Value::Array(row)
        })
        .collect();
    Value::Array(rows)
}

pub fn matrix_from_json(v: &Value, dim: usize, what: &str) -> Result<CMat, InputError> {
    let rows = v
        .as_array()
        .ok_or_else(|| InputError::Malformed(format!("{what}: matrix must be an array of rows")))?;
    if rows.len() != dim {
        return Err(InputError::Invalid(format!(
            "{what}: expected {dim} rows, found {}",
            rows.len()
        )));
    }
    let mut out = CMat::zeros(dim, dim);
    for (i, row) in rows.iter().enumerate() {
        let cells = row.as_array().ok_or_else(|| {
            InputError::Malformed(format!("{what}: row {i} must be an array"))
        })?;
        if cells.len() != dim {
            return Err(InputError::Invalid(format!(
                "{what}: row {i} has {} entries, expected {dim}",
                cells.len()
            )));
        }
        for (j, cell) in cells.iter().enumerate() {
            let pair = cell.as_array().ok_or_else(|| {
                InputError::Malformed(format!("{what}: entry ({i},{j}) must be [re, im]"))
            })?;
            if pair.len() != 2 {
                return Err(InputError::Malformed(format!(
                    "{what}: entry ({i},{j}) must have exactly two components"
                )));
            }
            let re = pair[0].as_f64().ok_or_else(|| {
                InputError::Malformed(format!("{what}: entry ({i},{j}) re is not a number"))
            })?;
            let im = pair[1].as_f64().ok_or_else(|| {
                InputError::Malformed(format!("{what}: entry ({i},{j}) im is not a number"))
            })?;
            if !re.is_finite() || !im.is_finite() {
                return Err(InputError::Invalid(format!(
                    "{what}: entry ({i},{j}) is not finite"
                )));
            }
            out[(i, j)] = c(re, im);
        }
    }
    Ok(out)
}

/// Parses and validates a model file. Rejections carry distinct
/// diagnostics: malformed JSON, dimension mismatch, non-Hermitian
/// element, and a non-PSD reference.
pub fn parse_model(text: &str) -> Result<Model, InputError> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| InputError::Malformed(format!("not valid JSON: {e}")))?;
    let dim = v["dim"]
        .as_u64()
        .ok_or_else(|| InputError::Malformed("missing integer field 'dim'".into()))?
        as usize;
    if dim == 0 || dim > 64 {
        return Err(InputError::Invalid(format!(
            "dimension {dim} outside the supported range 1..=64"
        )));
    }
    let reference = matrix_from_json(&v["reference"], dim, "reference")?;
    qsuff::matcore::ensure_hermitian(&reference)
        .map_err(|e| InputError::Invalid(format!("reference not Hermitian: {e}")))?;
    let reference = qsuff::matcore::hermitize(&reference);
    qsuff::matcore::ensure_psd(&reference)
        .map_err(|_| InputError::Invalid("reference not PSD".into()))?;
    let mut elements = Vec::new();
    if let Some(arr) = v.get("elements") {
        let arr = arr
            .as_array()
            .ok_or_else(|| InputError::Malformed("'elements' must be an array".into()))?;
        for (k, e) in arr.iter().enumerate() {
            let kind = match e["kind"].as_str() {
                Some("state") => ElementKind::State,
                Some("derivative") => ElementKind::Derivative,
                other => {
                    return Err(InputError::Malformed(format!(
                        "element {k}: kind must be 'state' or 'derivative', found {other:?}"
                    )))
                }
            };
            let label = e["label"].as_str().unwrap_or(&format!("elem{k}")).to_string();
            let op = matrix_from_json(&e["matrix"], dim, &format!("element {label}"))?;
            qsuff::matcore::ensure_hermitian(&op)
                .map_err(|e| InputError::Invalid(format!("element {label} not Hermitian: {e}")))?;
            let op = qsuff::matcore::hermitize(&op);
            elements.push(ModelElement { kind, label, op });
        }
    }
    Model::new(reference, elements).map_err(|e| InputError::Invalid(e.to_string()))
}

/// Parses a POVM file `{"elements": [matrix, ...]}` on dimension `dim`.
pub fn parse_povm(text: &str, dim: usize) -> Result<Vec<CMat>, InputError> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| InputError::Malformed(format!("not valid JSON: {e}")))?;
    let arr = v["elements"]
        .as_array()
        .ok_or_else(|| InputError::Malformed("missing 'elements' array".into()))?;
    arr.iter()
        .enumerate()
        .map(|(k, m)| matrix_from_json(m, dim, &format!("povm element {k}")))
        .collect()
}

pub fn subspace_to_json(v: &qsuff::algebra::RealSubspace) -> Value {
    json!({
        "dim_ambient": v.dim_ambient,
        "dim": v.dim(),
        "basis": v.basis().iter().map(matrix_to_json).collect::<Vec<_>>(),
        "flags": {
            "contains_identity": v.flags.contains_identity,
            "star_closed": v.flags.star_closed,
            "mult_closed": v.flags.mult_closed,
            "jordan_closed": v.flags.jordan_closed,
            "complex_closed": v.flags.complex_closed,
        },
    })
}

pub fn blocks_to_json(blocks: &[qsuff::structure::BlockDescriptor]) -> Value {
    Value::Array(
        blocks
            .iter()
            .map(|b| {
                json!({
                    "kind": format!("{:?}", b.kind),
                    "n": b.n,
                    "m": b.m,
                    "conj": b.conj,
                })
            })
            .collect(),
    )
}
