//! Bridging between JSON field maps and typed [`Record`]s.
//!
//! Numbers must fit the declared field exactly (no silent truncation);
//! BYTES travel as standard base64 strings.

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use serde_json::{Map, Number, Value as Json};

use crate::descriptor::{FieldDescriptor, FormatDescriptor, Kind};
use crate::error::CodecError;
use crate::value::{sint_fits, uint_fits, Record, Value};
use crate::Result;

pub type JsonRecord = Map<String, Json>;

/// Builds a record for `desc` from a field map. Every declared field must be
/// present and no other keys are allowed.
pub fn record_from_json(desc: &FormatDescriptor, map: &JsonRecord) -> Result<Record> {
    if let Some(extra) = map.keys().find(|k| desc.field(k).is_none()) {
        return Err(CodecError::nonconforming(&desc.name, format!("unexpected field `{extra}`")));
    }
    project_json(desc, map)
}

/// Like [`record_from_json`] but ignores keys that `desc` does not declare.
pub fn project_json(desc: &FormatDescriptor, map: &JsonRecord) -> Result<Record> {
    desc.fields
        .iter()
        .map(|field| {
            let json = map
                .get(&field.name)
                .ok_or_else(|| CodecError::nonconforming(&desc.name, format!("missing field `{}`", field.name)))?;
            Ok((field.name.clone(), value_from_json(desc, field, json)?))
        })
        .collect()
}

fn value_from_json(desc: &FormatDescriptor, field: &FieldDescriptor, json: &Json) -> Result<Value> {
    let bad = || {
        CodecError::nonconforming(
            &desc.name,
            format!("field `{}` ({}) cannot hold {json}", field.name, field.field_type()),
        )
    };
    match field.kind {
        Kind::SInt => {
            let v = json.as_i64().ok_or_else(bad)?;
            sint_fits(v as i128, field.size).then_some(Value::Int(v)).ok_or_else(bad)
        }
        Kind::UInt => {
            let v = json.as_u64().ok_or_else(bad)?;
            uint_fits(v as i128, field.size).then_some(Value::UInt(v)).ok_or_else(bad)
        }
        Kind::Float => {
            let v = json.as_f64().ok_or_else(bad)?;
            if field.size == 8 {
                return Ok(Value::F64(v));
            }
            let narrowed = v as f32;
            if narrowed.is_infinite() {
                return Err(bad());
            }
            Ok(Value::F32(narrowed))
        }
        Kind::String => json.as_str().map(|s| Value::Str(s.to_owned())).ok_or_else(bad),
        Kind::Bytes => {
            let s = json.as_str().ok_or_else(bad)?;
            STANDARD.decode(s).map(Value::Bytes).map_err(|_| bad())
        }
    }
}

/// Inverse of [`record_from_json`]. Non-finite floats become `null`.
pub fn record_to_json(rec: &Record) -> JsonRecord {
    rec.iter()
        .map(|(name, value)| {
            let json = match value {
                Value::Int(v) => Json::from(*v),
                Value::UInt(v) => Json::from(*v),
                Value::F32(v) => Number::from_f64(*v as f64).map_or(Json::Null, Json::Number),
                Value::F64(v) => Number::from_f64(*v).map_or(Json::Null, Json::Number),
                Value::Str(s) => Json::String(s.clone()),
                Value::Bytes(b) => Json::String(STANDARD.encode(b)),
            };
            (name.to_owned(), json)
        })
        .collect()
}
