use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::descriptor::{FieldType, FormatDescriptor, Kind};
use crate::error::CodecError;
use crate::value::{sint_fits, uint_fits, Record, Value};
use crate::wire::decode;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conversion {
    pub field: String,
    pub from: FieldType,
    pub to: FieldType,
}

/// What a receiver had to do to match an incoming record to its own layout.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeReport {
    /// Present in the source only.
    pub dropped: Vec<String>,
    /// Present in the target only; filled with zero values.
    pub defaulted: Vec<String>,
    pub converted: Vec<Conversion>,
}

impl DecodeReport {
    pub fn is_empty(&self) -> bool {
        self.dropped.is_empty() && self.defaulted.is_empty() && self.converted.is_empty()
    }
}

/// Re-shapes `rec` (laid out per `src`) into the layout of `dst`.
///
/// Fields are paired by exact name. Integer conversions must be lossless;
/// integer to float rounds to nearest-even; float to integer and any
/// STRING/BYTES cross-kind pairing are type errors.
pub fn convert(rec: &Record, src: &FormatDescriptor, dst: &FormatDescriptor) -> Result<(Record, DecodeReport)> {
    src.validate()?;
    dst.validate()?;
    rec.check_conforms(src)?;

    let by_name: HashMap<&str, (&Value, FieldType)> =
        rec.iter().zip(&src.fields).map(|((name, value), field)| (name, (value, field.field_type()))).collect();

    let mut out = Record::new();
    let mut report = DecodeReport::default();
    for field in &dst.fields {
        let to = field.field_type();
        match by_name.get(field.name.as_str()) {
            None => {
                out.push(field.name.clone(), Value::default_for(field));
                report.defaulted.push(field.name.clone());
            }
            Some(&(value, from)) => {
                out.push(field.name.clone(), convert_value(&field.name, value, from, to)?);
                if from != to {
                    report.converted.push(Conversion { field: field.name.clone(), from, to });
                }
            }
        }
    }
    for field in &src.fields {
        if dst.field(&field.name).is_none() {
            report.dropped.push(field.name.clone());
        }
    }
    Ok((out, report))
}

fn convert_value(name: &str, value: &Value, from: FieldType, to: FieldType) -> Result<Value> {
    if from == to {
        return Ok(value.clone());
    }
    let overflow = || CodecError::OverflowingNarrow(name.to_owned());
    let mismatch = || CodecError::TypeMismatch(name.to_owned());

    match (from.kind, to.kind) {
        (Kind::SInt | Kind::UInt, Kind::SInt) => {
            let v = value.as_integer().ok_or_else(mismatch)?;
            if sint_fits(v, to.size) {
                Ok(Value::Int(v as i64))
            } else {
                Err(overflow())
            }
        }
        (Kind::SInt | Kind::UInt, Kind::UInt) => {
            let v = value.as_integer().ok_or_else(mismatch)?;
            if uint_fits(v, to.size) {
                Ok(Value::UInt(v as u64))
            } else {
                Err(overflow())
            }
        }
        (Kind::SInt | Kind::UInt, Kind::Float) => Ok(match (value, to.size) {
            (Value::Int(v), 4) => Value::F32(*v as f32),
            (Value::Int(v), _) => Value::F64(*v as f64),
            (Value::UInt(v), 4) => Value::F32(*v as f32),
            (Value::UInt(v), _) => Value::F64(*v as f64),
            _ => return Err(mismatch()),
        }),
        (Kind::Float, Kind::Float) => match *value {
            Value::F32(v) => Ok(Value::F64(v as f64)),
            Value::F64(v) => {
                let narrowed = v as f32;
                if v.is_finite() && narrowed.is_infinite() {
                    Err(overflow())
                } else {
                    Ok(Value::F32(narrowed))
                }
            }
            _ => Err(mismatch()),
        },
        _ => Err(mismatch()),
    }
}

/// [`decode`] followed by [`convert`] toward the receiver's layout.
pub fn decode_as(bytes: &[u8], dst: &FormatDescriptor) -> Result<(Record, DecodeReport)> {
    let (src, rec) = decode(bytes)?;
    convert(&rec, &src, dst)
}
