//! Operator-spec files, JSON encodings of matrices and reports, and atomic
//! output.
//!
//! A spec is a JSON object with
//! - `"J"`: a matrix, `{"signature": [1, -1, ...]}` or `{"flip_blocks": k}`;
//! - exactly one of `"T"` (matrix), `"factors"` (`{"A": .., "B": ..}`) or
//!   `"family"` (`{"kind": .., "params": {..}, "seed": ..}`);
//! - optionally `"oracle"`, a matrix the command's main result must match.
//!
//! Matrix entries are numbers or `[re, im]` pairs. `"J"` is required with
//! `"T"` and optional otherwise.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::family::{BlockFamily, ExampleOneParams, FamilyKind, GradedParams, ProductParams};
use crate::krein::{FundamentalSymmetry, KreinOperator};
use crate::numerics::{c64, ComplexMatrix};
use crate::products::FactorPair;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Operator(ComplexMatrix),
    Factors { a: ComplexMatrix, b: ComplexMatrix },
    Family(BlockFamily),
}

impl Payload {
    pub fn name(&self) -> &'static str {
        match self {
            Payload::Operator(_) => "T",
            Payload::Factors { .. } => "factors",
            Payload::Family(_) => "family",
        }
    }
}

/// A validated operator spec.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    pub j: Option<FundamentalSymmetry>,
    pub payload: Payload,
    pub oracle: Option<ComplexMatrix>,
    normalized: Value,
}

pub fn complex_to_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn matrix_to_json(m: &ComplexMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_to_json(m[(i, j)])).collect()))
            .collect(),
    )
}

fn number(v: &Value, key: &str) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::validation(key, "expected a finite number"))
}

pub fn complex_from_json(v: &Value, key: &str) -> Result<Complex64> {
    match v {
        Value::Number(_) => Ok(c64(number(v, key)?, 0.0)),
        Value::Array(pair) if pair.len() == 2 => Ok(c64(number(&pair[0], key)?, number(&pair[1], key)?)),
        _ => Err(Error::validation(key, "expected a number or an [re, im] pair")),
    }
}

pub fn matrix_from_json(v: &Value, key: &str) -> Result<ComplexMatrix> {
    let rows = v
        .as_array()
        .filter(|r| !r.is_empty())
        .ok_or_else(|| Error::validation(key, "expected a nonempty array of rows"))?;
    let mut parsed: Vec<Vec<Complex64>> = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let entries = row
            .as_array()
            .filter(|r| !r.is_empty())
            .ok_or_else(|| Error::validation(format!("{key}[{i}]"), "expected a nonempty row"))?;
        parsed.push(
            entries
                .iter()
                .enumerate()
                .map(|(j, e)| complex_from_json(e, &format!("{key}[{i}][{j}]")))
                .collect::<Result<_>>()?,
        );
    }
    let cols = parsed[0].len();
    if let Some(i) = parsed.iter().position(|r| r.len() != cols) {
        return Err(Error::validation(format!("{key}[{i}]"), format!("row length differs from {cols}")));
    }
    Ok(ComplexMatrix::from_fn(parsed.len(), cols, |i, j| parsed[i][j]))
}

fn symmetry_from_json(v: &Value, key: &str) -> Result<FundamentalSymmetry> {
    let invalid = |e: Error| match e {
        Error::InvalidSymmetry(m) => Error::validation(key, m),
        other => other,
    };
    match v {
        Value::Object(o) if o.len() == 1 && o.contains_key("signature") => {
            let signs = o["signature"]
                .as_array()
                .ok_or_else(|| Error::validation(format!("{key}.signature"), "expected an array of +1/-1"))?
                .iter()
                .map(|s| {
                    s.as_i64()
                        .map(|x| x as i32)
                        .ok_or_else(|| Error::validation(format!("{key}.signature"), "entries must be +1 or -1"))
                })
                .collect::<Result<Vec<i32>>>()?;
            FundamentalSymmetry::from_signature(&signs).map_err(invalid)
        }
        Value::Object(o) if o.len() == 1 && o.contains_key("flip_blocks") => {
            let k = o["flip_blocks"]
                .as_u64()
                .filter(|&k| k > 0)
                .ok_or_else(|| Error::validation(format!("{key}.flip_blocks"), "expected a positive integer"))?;
            FundamentalSymmetry::flip_blocks(k as usize).map_err(invalid)
        }
        Value::Object(_) => Err(Error::validation(key, "expected a matrix, {\"signature\"} or {\"flip_blocks\"}")),
        _ => FundamentalSymmetry::new(matrix_from_json(v, key)?).map_err(invalid),
    }
}

fn params_from<T: serde::de::DeserializeOwned + Default>(params: Option<&Value>) -> Result<T> {
    match params {
        None | Some(Value::Null) => Ok(T::default()),
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| Error::validation("family.params", e.to_string())),
    }
}

fn family_from_json(v: &Value, default_seed: u64) -> Result<(BlockFamily, Value)> {
    let o = v
        .as_object()
        .ok_or_else(|| Error::validation("family", "expected an object"))?;
    if let Some(k) = o.keys().find(|k| !matches!(k.as_str(), "kind" | "params" | "seed")) {
        return Err(Error::validation(format!("family.{k}"), "unknown key"));
    }
    let kind = o
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::validation("family.kind", "expected a string"))?;
    let seed = match o.get("seed") {
        None => default_seed,
        Some(s) => s
            .as_u64()
            .ok_or_else(|| Error::validation("family.seed", "expected a nonnegative integer"))?,
    };
    let params = o.get("params");
    let (kind, normalized_params) = match kind {
        "ExampleOne" => {
            let p: ExampleOneParams = params_from(params)?;
            let n = serde_json::to_value(&p).expect("params serialize");
            (FamilyKind::ExampleOne(p), n)
        }
        "GradedNeutrality" => {
            let p: GradedParams = params_from(params)?;
            let n = serde_json::to_value(&p).expect("params serialize");
            (FamilyKind::GradedNeutrality(p), n)
        }
        "ProductOfBlocks" => {
            let p: ProductParams = params_from(params)?;
            let n = serde_json::to_value(&p).expect("params serialize");
            (FamilyKind::ProductOfBlocks(p), n)
        }
        "ExplicitList" => {
            let blocks = params
                .and_then(|p| p.get("blocks"))
                .and_then(Value::as_array)
                .ok_or_else(|| Error::validation("family.params.blocks", "expected an array of {T, J}"))?;
            let mut parsed = Vec::new();
            let mut normalized = Vec::new();
            for (i, b) in blocks.iter().enumerate() {
                let key = format!("family.params.blocks[{i}]");
                let t = matrix_from_json(
                    b.get("T").ok_or_else(|| Error::validation(format!("{key}.T"), "missing"))?,
                    &format!("{key}.T"),
                )?;
                let j = symmetry_from_json(
                    b.get("J").ok_or_else(|| Error::validation(format!("{key}.J"), "missing"))?,
                    &format!("{key}.J"),
                )?;
                normalized.push(json!({"T": matrix_to_json(&t), "J": matrix_to_json(j.matrix())}));
                parsed.push((t, j));
            }
            (FamilyKind::ExplicitList(parsed), json!({ "blocks": normalized }))
        }
        other => return Err(Error::validation("family.kind", format!("unknown family kind `{other}`"))),
    };
    let family = BlockFamily::new(kind, seed)?;
    let normalized = json!({"kind": family.kind().name(), "params": normalized_params, "seed": seed});
    Ok((family, normalized))
}

/// Parses and validates a spec. `default_seed` is used for families
/// without an explicit seed.
pub fn parse_spec(text: &str, default_seed: u64) -> Result<OperatorSpec> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let o = root
        .as_object()
        .ok_or_else(|| Error::validation("<root>", "expected a JSON object"))?;
    if let Some(k) = o.keys().find(|k| !matches!(k.as_str(), "J" | "T" | "factors" | "family" | "oracle")) {
        return Err(Error::validation(k.clone(), "unknown key"));
    }
    let present: Vec<&str> = ["T", "factors", "family"].into_iter().filter(|k| o.contains_key(*k)).collect();
    if present.len() != 1 {
        return Err(Error::validation(
            "T|factors|family",
            format!("exactly one operator payload is required, found {}", present.len()),
        ));
    }
    let j = o.get("J").map(|v| symmetry_from_json(v, "J")).transpose()?;
    let mut normalized = Map::new();
    if let Some(j) = &j {
        normalized.insert("J".into(), matrix_to_json(j.matrix()));
    }
    let payload = match present[0] {
        "T" => {
            let t = matrix_from_json(&o["T"], "T")?;
            let j = j.as_ref().ok_or_else(|| Error::validation("J", "required when \"T\" is given"))?;
            if t.nrows() != t.ncols() {
                return Err(Error::DimensionMismatch(format!("T is {}x{}, expected square", t.nrows(), t.ncols())));
            }
            if t.nrows() != j.dim() {
                return Err(Error::DimensionMismatch(format!("T is {0}x{0} but J is {1}x{1}", t.nrows(), j.dim())));
            }
            normalized.insert("T".into(), matrix_to_json(&t));
            Payload::Operator(t)
        }
        "factors" => {
            let f = &o["factors"];
            let get = |k: &str| {
                f.get(k)
                    .ok_or_else(|| Error::validation(format!("factors.{k}"), "missing"))
                    .and_then(|v| matrix_from_json(v, &format!("factors.{k}")))
            };
            if let Some(k) = f.as_object().and_then(|m| m.keys().find(|k| !matches!(k.as_str(), "A" | "B")).cloned()) {
                return Err(Error::validation(format!("factors.{k}"), "unknown key"));
            }
            let (a, b) = (get("A")?, get("B")?);
            FactorPair::new(a.clone(), b.clone())?;
            normalized.insert("factors".into(), json!({"A": matrix_to_json(&a), "B": matrix_to_json(&b)}));
            Payload::Factors { a, b }
        }
        _ => {
            let (family, n) = family_from_json(&o["family"], default_seed)?;
            normalized.insert("family".into(), n);
            Payload::Family(family)
        }
    };
    let oracle = o.get("oracle").map(|v| matrix_from_json(v, "oracle")).transpose()?;
    if let Some(m) = &oracle {
        normalized.insert("oracle".into(), matrix_to_json(m));
    }
    Ok(OperatorSpec {
        j,
        payload,
        oracle,
        normalized: Value::Object(normalized),
    })
}

pub fn load_spec(path: &Path, default_seed: u64) -> Result<OperatorSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_spec(&text, default_seed)
}

impl OperatorSpec {
    /// The spec with `J` expanded to a matrix, complex entries as pairs and
    /// family parameters completed with their defaults.
    pub fn normalized(&self) -> &Value {
        &self.normalized
    }

    /// SHA-256 of the compact normalized spec.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.normalized.to_string().as_bytes()))
    }

    /// The operator for `"T"` specs, or the size-`n` truncation for families.
    pub fn operator(&self, n: Option<usize>) -> Result<KreinOperator> {
        match &self.payload {
            Payload::Operator(t) => KreinOperator::new(t.clone(), self.j.clone().expect("validated")),
            Payload::Family(f) => {
                let n = n.ok_or_else(|| Error::validation("--n", "family specs need a truncation size"))?;
                crate::family::truncate(f, n)
            }
            Payload::Factors { .. } => Err(Error::validation("T", "this command needs \"T\" or \"family\", not \"factors\"")),
        }
    }

    /// `(A, B)` for factor specs, `(T, T[*])` otherwise.
    pub fn factor_pair(&self, n: Option<usize>) -> Result<FactorPair> {
        match &self.payload {
            Payload::Factors { a, b } => FactorPair::new(a.clone(), b.clone()),
            _ => Ok(FactorPair::from_operator(&self.operator(n)?)),
        }
    }

    pub fn family(&self) -> Result<&BlockFamily> {
        match &self.payload {
            Payload::Family(f) => Ok(f),
            _ => Err(Error::validation("family", "this command needs a \"family\" payload")),
        }
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// CSV text with a header row and one line per record.
pub fn csv(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        let line: Vec<String> = r.iter().map(|x| format!("{x:e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}
