//! JSON descriptors: parsing with strict field checking and canonical,
//! byte-deterministic serialization.
//!
//! The dialect: rationals are strings (`"2/3"`, `"-1"`; bare JSON integers
//! are also accepted on input), degrees and multiplicities are integers
//! (numbers or numeric strings), graded vectors are objects keyed by the
//! degree. Unknown fields are rejected everywhere. Partial descriptors mark
//! missing content explicitly: `"delta": "unknown"` and
//! `{"at": ..., "unknown": true}` per point.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::model::{
    rational_from_str, rational_to_string, AggregateData, BlockSet, Flags, GradedVector,
    JordanBlock, LocalData, ModuleData, PointId, Rational, Residue,
};

fn err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

/// Parse a module descriptor from JSON text.
pub fn parse_module(input: &str) -> Result<ModuleData> {
    let value: Value =
        serde_json::from_str(input).map_err(|e| err(format!("invalid JSON: {e}")))?;
    module_from_value(&value)
}

/// Serialize a module descriptor to canonical JSON text.
///
/// The output is normalized: points sorted (finite ascending, infinity last),
/// blocks merged and sorted for display, zero entries dropped. Round-tripping
/// a normalized document reproduces it byte for byte.
pub fn serialize_module(m: &ModuleData) -> String {
    let mut text = serde_json::to_string_pretty(&module_to_value(m))
        .expect("module serialization cannot fail");
    text.push('\n');
    text
}

fn as_object<'v>(v: &'v Value, what: &str) -> Result<&'v Map<String, Value>> {
    v.as_object().ok_or_else(|| err(format!("{what} must be a JSON object")))
}

fn check_fields(obj: &Map<String, Value>, allowed: &[&str], what: &str) -> Result<()> {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(err(format!("unknown field '{key}' in {what}")));
        }
    }
    Ok(())
}

fn parse_integer(v: &Value, what: &str) -> Result<i64> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .ok_or_else(|| err(format!("{what} must be an integer, got {n}"))),
        Value::String(s) => s
            .trim()
            .parse::<i64>()
            .map_err(|_| err(format!("{what} must be an integer, got '{s}'"))),
        other => Err(err(format!("{what} must be an integer, got {other}"))),
    }
}

fn parse_mult(v: &Value, what: &str) -> Result<u64> {
    let n = parse_integer(v, what)?;
    u64::try_from(n).map_err(|_| err(format!("{what} must be nonnegative, got {n}")))
}

fn parse_rational_value(v: &Value, what: &str) -> Result<Rational> {
    match v {
        Value::String(s) => rational_from_str(s),
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(Rational::from_integer(i.into())),
            None => Err(err(format!(
                "{what} must be an exact rational string, got {n}"
            ))),
        },
        other => Err(err(format!(
            "{what} must be a rational string, got {other}"
        ))),
    }
}

fn parse_residue_value(v: &Value, what: &str) -> Result<Residue> {
    Residue::new(parse_rational_value(v, what)?)
}

fn parse_graded(v: &Value, what: &str) -> Result<GradedVector> {
    let obj = as_object(v, what)?;
    let mut out = GradedVector::new();
    for (key, val) in obj {
        let p = key
            .trim()
            .parse::<i64>()
            .map_err(|_| err(format!("degree key '{key}' in {what} must be an integer")))?;
        let n = parse_integer(val, &format!("{what}[{key}]"))?;
        if out.get(p) != 0 {
            return Err(err(format!("duplicate degree {p} in {what}")));
        }
        out.set(p, n);
    }
    Ok(out)
}

fn parse_blocks(v: &Value) -> Result<BlockSet> {
    let arr = v
        .as_array()
        .ok_or_else(|| err("'blocks' must be an array"))?;
    let mut set = BlockSet::new();
    for item in arr {
        let obj = as_object(item, "block")?;
        check_fields(obj, &["p", "a", "l", "mult"], "block")?;
        let p = parse_integer(obj.get("p").ok_or_else(|| err("block missing 'p'"))?, "block 'p'")?;
        let a = parse_residue_value(obj.get("a").ok_or_else(|| err("block missing 'a'"))?, "block 'a'")?;
        let l = parse_mult(obj.get("l").ok_or_else(|| err("block missing 'l'"))?, "block 'l'")?;
        if l == 0 {
            return Err(err("block size 'l' must be at least 1"));
        }
        let mult = match obj.get("mult") {
            Some(m) => parse_mult(m, "block 'mult'")?,
            None => 1,
        };
        set.insert(p, a, l, mult)?;
    }
    Ok(set)
}

fn parse_aggregate(v: &Value) -> Result<AggregateData> {
    let obj = as_object(v, "'aggregate'")?;
    check_fields(obj, &["nu_nonzero", "mu_zero"], "'aggregate'")?;
    let mut agg = AggregateData::default();
    if let Some(nu) = obj.get("nu_nonzero") {
        let arr = nu
            .as_array()
            .ok_or_else(|| err("'nu_nonzero' must be an array"))?;
        for item in arr {
            let o = as_object(item, "nu_nonzero entry")?;
            check_fields(o, &["p", "a", "mult"], "nu_nonzero entry")?;
            let p = parse_integer(o.get("p").ok_or_else(|| err("nu entry missing 'p'"))?, "'p'")?;
            let a = parse_residue_value(o.get("a").ok_or_else(|| err("nu entry missing 'a'"))?, "'a'")?;
            if a.is_zero() {
                return Err(err("nu_nonzero entry with residue 0"));
            }
            let mult = parse_mult(o.get("mult").ok_or_else(|| err("nu entry missing 'mult'"))?, "'mult'")?;
            agg.add_nu(p, a, mult)?;
        }
    }
    if let Some(mu) = obj.get("mu_zero") {
        let arr = mu
            .as_array()
            .ok_or_else(|| err("'mu_zero' must be an array"))?;
        for item in arr {
            let o = as_object(item, "mu_zero entry")?;
            check_fields(o, &["p", "mult"], "mu_zero entry")?;
            let p = parse_integer(o.get("p").ok_or_else(|| err("mu entry missing 'p'"))?, "'p'")?;
            let mult = parse_mult(o.get("mult").ok_or_else(|| err("mu entry missing 'mult'"))?, "'mult'")?;
            agg.add_mu(p, mult)?;
        }
    }
    Ok(agg)
}

fn parse_point_id(v: &Value) -> Result<PointId> {
    if let Value::String(s) = v {
        if s.trim() == "inf" {
            return Ok(PointId::Infinity);
        }
    }
    Ok(PointId::Finite(parse_rational_value(v, "point coordinate 'at'")?))
}

fn parse_points(v: &Value) -> Result<BTreeMap<PointId, LocalData>> {
    let arr = v
        .as_array()
        .ok_or_else(|| err("'points' must be an array"))?;
    let mut out = BTreeMap::new();
    for item in arr {
        let obj = as_object(item, "point entry")?;
        check_fields(obj, &["at", "blocks", "aggregate", "unknown"], "point entry")?;
        let at = parse_point_id(obj.get("at").ok_or_else(|| err("point entry missing 'at'"))?)?;
        let data = match (obj.get("blocks"), obj.get("aggregate"), obj.get("unknown")) {
            (Some(b), None, None) => LocalData::Blocks(parse_blocks(b)?),
            (None, Some(a), None) => LocalData::Aggregate(parse_aggregate(a)?),
            (None, None, Some(u)) => {
                if u.as_bool() != Some(true) {
                    return Err(err("point field 'unknown' must be true when present"));
                }
                LocalData::Unknown
            }
            _ => {
                return Err(err(format!(
                    "point {at} must carry exactly one of 'blocks', 'aggregate', 'unknown'"
                )))
            }
        };
        if out.insert(at.clone(), data).is_some() {
            return Err(Error::DuplicatePoint(at.to_string()));
        }
    }
    Ok(out)
}

fn parse_flags(v: &Value) -> Result<Flags> {
    let obj = as_object(v, "'flags'")?;
    check_fields(
        obj,
        &["irreducible", "nonconstant", "minimal_extension"],
        "'flags'",
    )?;
    let get = |key: &str| -> Result<bool> {
        match obj.get(key) {
            None => Ok(false),
            Some(Value::Bool(b)) => Ok(*b),
            Some(other) => Err(err(format!("flag '{key}' must be a boolean, got {other}"))),
        }
    };
    Ok(Flags {
        irreducible: get("irreducible")?,
        nonconstant: get("nonconstant")?,
        minimal_extension: get("minimal_extension")?,
    })
}

/// Build a module from an in-memory JSON value.
pub fn module_from_value(value: &Value) -> Result<ModuleData> {
    let obj = as_object(value, "module descriptor")?;
    check_fields(
        obj,
        &["name", "h", "delta", "points", "h1par", "flags", "annotations"],
        "module descriptor",
    )?;
    let name = obj
        .get("name")
        .and_then(Value::as_str)
        .ok_or_else(|| err("'name' must be a string"))?
        .to_string();
    let h = parse_graded(obj.get("h").ok_or_else(|| err("missing field 'h'"))?, "'h'")?;
    let delta = match obj.get("delta").ok_or_else(|| err("missing field 'delta'"))? {
        Value::String(s) if s == "unknown" => None,
        v => Some(parse_graded(v, "'delta'")?),
    };
    let points = parse_points(obj.get("points").ok_or_else(|| err("missing field 'points'"))?)?;
    let h1par = match obj.get("h1par") {
        None => None,
        Some(v) => Some(parse_graded(v, "'h1par'")?),
    };
    let flags = parse_flags(obj.get("flags").ok_or_else(|| err("missing field 'flags'"))?)?;
    let mut annotations = BTreeMap::new();
    if let Some(v) = obj.get("annotations") {
        let o = as_object(v, "'annotations'")?;
        for (k, val) in o {
            let s = val
                .as_str()
                .ok_or_else(|| err(format!("annotation '{k}' must be a string")))?;
            annotations.insert(k.clone(), s.to_string());
        }
    }
    Ok(ModuleData {
        name,
        h,
        delta,
        points,
        h1par,
        flags,
        annotations,
    })
}

fn graded_to_value(g: &GradedVector) -> Value {
    let mut map = Map::new();
    for (p, n) in g.iter() {
        map.insert(p.to_string(), json!(n));
    }
    Value::Object(map)
}

fn point_id_to_value(p: &PointId) -> Value {
    match p {
        PointId::Infinity => json!("inf"),
        PointId::Finite(v) => json!(rational_to_string(v)),
    }
}

fn block_to_value(b: &JordanBlock) -> Value {
    json!({
        "p": b.degree,
        "a": b.residue.to_string(),
        "l": b.size,
        "mult": b.mult,
    })
}

fn blocks_to_value(set: &BlockSet) -> Value {
    Value::Array(set.sorted_for_display().iter().map(block_to_value).collect())
}

fn aggregate_to_value(agg: &AggregateData) -> Value {
    let nu: Vec<Value> = agg
        .nu_nonzero
        .iter()
        .map(|((p, a), m)| json!({"p": p, "a": a.to_string(), "mult": m}))
        .collect();
    let mu: Vec<Value> = agg
        .mu_zero
        .iter()
        .map(|(p, m)| json!({"p": p, "mult": m}))
        .collect();
    json!({"nu_nonzero": nu, "mu_zero": mu})
}

/// Serialize a module to an in-memory JSON value in canonical shape.
pub fn module_to_value(m: &ModuleData) -> Value {
    let points: Vec<Value> = m
        .points
        .iter()
        .map(|(at, data)| {
            let mut obj = Map::new();
            obj.insert("at".into(), point_id_to_value(at));
            match data {
                LocalData::Blocks(b) => {
                    obj.insert("blocks".into(), blocks_to_value(b));
                }
                LocalData::Aggregate(a) => {
                    obj.insert("aggregate".into(), aggregate_to_value(a));
                }
                LocalData::Unknown => {
                    obj.insert("unknown".into(), json!(true));
                }
            }
            Value::Object(obj)
        })
        .collect();
    let mut obj = Map::new();
    obj.insert("name".into(), json!(m.name));
    obj.insert("h".into(), graded_to_value(&m.h));
    obj.insert(
        "delta".into(),
        match &m.delta {
            Some(d) => graded_to_value(d),
            None => json!("unknown"),
        },
    );
    obj.insert("points".into(), Value::Array(points));
    if let Some(h1par) = &m.h1par {
        obj.insert("h1par".into(), graded_to_value(h1par));
    }
    obj.insert(
        "flags".into(),
        json!({
            "irreducible": m.flags.irreducible,
            "nonconstant": m.flags.nonconstant,
            "minimal_extension": m.flags.minimal_extension,
        }),
    );
    if !m.annotations.is_empty() {
        let mut ann = Map::new();
        for (k, v) in &m.annotations {
            ann.insert(k.clone(), json!(v));
        }
        obj.insert("annotations".into(), Value::Object(ann));
    }
    Value::Object(obj)
}
