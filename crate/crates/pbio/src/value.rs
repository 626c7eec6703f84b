use std::fmt;

use crate::descriptor::{FieldDescriptor, FormatDescriptor, Kind};
use crate::error::CodecError;
use crate::Result;

/// A single field value.
///
/// Floats compare by bit pattern, so `NaN == NaN` when the payloads match and
/// `0.0 != -0.0`. Round-trips are therefore checked bit-exactly.
#[derive(Clone)]
pub enum Value {
    Int(i64),
    UInt(u64),
    F32(f32),
    F64(f64),
    Str(String),
    Bytes(Vec<u8>),
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::UInt(a), Value::UInt(b)) => a == b,
            (Value::F32(a), Value::F32(b)) => a.to_bits() == b.to_bits(),
            (Value::F64(a), Value::F64(b)) => a.to_bits() == b.to_bits(),
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::Bytes(a), Value::Bytes(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Value {}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "Int({v})"),
            Value::UInt(v) => write!(f, "UInt({v})"),
            Value::F32(v) => write!(f, "F32({v:?})"),
            Value::F64(v) => write!(f, "F64({v:?})"),
            Value::Str(v) => write!(f, "Str({v:?})"),
            Value::Bytes(v) => write!(f, "Bytes({} bytes)", v.len()),
        }
    }
}

impl Value {
    /// The zero value a receiver substitutes for a field the sender lacks.
    pub fn default_for(field: &FieldDescriptor) -> Value {
        match (field.kind, field.size) {
            (Kind::SInt, _) => Value::Int(0),
            (Kind::UInt, _) => Value::UInt(0),
            (Kind::Float, 4) => Value::F32(0.0),
            (Kind::Float, _) => Value::F64(0.0),
            (Kind::String, _) => Value::Str(String::new()),
            (Kind::Bytes, _) => Value::Bytes(Vec::new()),
        }
    }

    pub(crate) fn as_integer(&self) -> Option<i128> {
        match *self {
            Value::Int(v) => Some(v as i128),
            Value::UInt(v) => Some(v as i128),
            _ => None,
        }
    }

    /// Whether the value is the in-memory form of `field` and fits its size.
    pub fn fits(&self, field: &FieldDescriptor) -> bool {
        match (self, field.kind, field.size) {
            (Value::Int(v), Kind::SInt, size) => sint_fits(*v as i128, size),
            (Value::UInt(v), Kind::UInt, size) => uint_fits(*v as i128, size),
            (Value::F32(_), Kind::Float, 4) => true,
            (Value::F64(_), Kind::Float, 8) => true,
            (Value::Str(s), Kind::String, _) => s.len() <= u32::MAX as usize,
            (Value::Bytes(b), Kind::Bytes, _) => b.len() <= u32::MAX as usize,
            _ => false,
        }
    }
}

pub(crate) fn sint_fits(v: i128, size: u8) -> bool {
    let bits = size as u32 * 8;
    let min = -(1i128 << (bits - 1));
    let max = (1i128 << (bits - 1)) - 1;
    (min..=max).contains(&v)
}

pub(crate) fn uint_fits(v: i128, size: u8) -> bool {
    let bits = size as u32 * 8;
    (0..(1i128 << bits)).contains(&v)
}

/// Ordered list of named values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Record {
    fields: Vec<(String, Value)>,
}

impl Record {
    pub fn new() -> Self {
        Record::default()
    }

    pub fn with(mut self, name: impl Into<String>, value: Value) -> Self {
        self.push(name, value);
        self
    }

    pub fn push(&mut self, name: impl Into<String>, value: Value) {
        self.fields.push((name.into(), value));
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.fields.iter().map(|(n, v)| (n.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// Checks field order, kinds and value ranges against `desc`.
    pub fn check_conforms(&self, desc: &FormatDescriptor) -> Result<()> {
        if self.fields.len() != desc.fields.len() {
            return Err(CodecError::nonconforming(
                &desc.name,
                format!("expected {} fields, record has {}", desc.fields.len(), self.fields.len()),
            ));
        }
        for ((name, value), field) in self.fields.iter().zip(&desc.fields) {
            if *name != field.name {
                return Err(CodecError::nonconforming(
                    &desc.name,
                    format!("expected field `{}`, found `{name}`", field.name),
                ));
            }
            if !value.fits(field) {
                return Err(CodecError::nonconforming(
                    &desc.name,
                    format!("value {value:?} does not fit field `{name}` ({})", field.field_type()),
                ));
            }
        }
        Ok(())
    }
}

impl FromIterator<(String, Value)> for Record {
    fn from_iter<I: IntoIterator<Item = (String, Value)>>(iter: I) -> Self {
        Record { fields: iter.into_iter().collect() }
    }
}
