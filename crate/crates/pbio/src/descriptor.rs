use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::CodecError;
use crate::Result;

pub const MAX_NAME_LEN: usize = 255;
pub const MAX_FIELDS: usize = u16::MAX as usize;

/// Value kind of a field. The discriminant is the on-wire kind byte.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[repr(u8)]
pub enum Kind {
    #[serde(rename = "sint")]
    SInt = 0x01,
    #[serde(rename = "uint")]
    UInt = 0x02,
    Float = 0x03,
    String = 0x04,
    Bytes = 0x05,
}

impl Kind {
    pub fn from_byte(b: u8) -> Option<Kind> {
        Some(match b {
            0x01 => Kind::SInt,
            0x02 => Kind::UInt,
            0x03 => Kind::Float,
            0x04 => Kind::String,
            0x05 => Kind::Bytes,
            _ => return None,
        })
    }

    pub fn is_integer(self) -> bool {
        matches!(self, Kind::SInt | Kind::UInt)
    }

    /// Whether `size` is a legal declared size for this kind.
    pub fn accepts_size(self, size: u8) -> bool {
        match self {
            Kind::SInt | Kind::UInt => matches!(size, 1 | 2 | 4 | 8),
            Kind::Float => matches!(size, 4 | 8),
            Kind::String | Kind::Bytes => size == 0,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::SInt => "sint",
            Kind::UInt => "uint",
            Kind::Float => "float",
            Kind::String => "string",
            Kind::Bytes => "bytes",
        })
    }
}

/// A kind together with its declared size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldType {
    pub kind: Kind,
    pub size: u8,
}

impl fmt::Display for FieldType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.size == 0 {
            write!(f, "{}", self.kind)
        } else {
            write!(f, "{}{}", self.kind, self.size)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDescriptor {
    pub name: String,
    pub kind: Kind,
    /// Width in bytes for numerics; 0 for length-prefixed STRING/BYTES.
    pub size: u8,
}

impl FieldDescriptor {
    pub fn new(name: impl Into<String>, kind: Kind, size: u8) -> Self {
        FieldDescriptor { name: name.into(), kind, size }
    }

    pub fn field_type(&self) -> FieldType {
        FieldType { kind: self.kind, size: self.size }
    }
}

/// Registered layout of a flat binary record.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormatDescriptor {
    pub name: String,
    pub fields: Vec<FieldDescriptor>,
}

impl FormatDescriptor {
    pub fn new(name: impl Into<String>, fields: Vec<FieldDescriptor>) -> Self {
        FormatDescriptor { name: name.into(), fields }
    }

    pub fn field(&self, name: &str) -> Option<&FieldDescriptor> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn validate(&self) -> Result<()> {
        check_name("format name", &self.name).map_err(CodecError::InvalidDescriptor)?;
        if self.fields.len() > MAX_FIELDS {
            return Err(CodecError::InvalidDescriptor(format!(
                "{} fields exceeds the limit of {MAX_FIELDS}",
                self.fields.len()
            )));
        }
        let mut seen = HashSet::with_capacity(self.fields.len());
        for field in &self.fields {
            check_name("field name", &field.name).map_err(CodecError::InvalidDescriptor)?;
            if !field.kind.accepts_size(field.size) {
                return Err(CodecError::InvalidDescriptor(format!(
                    "field `{}`: size {} is not allowed for kind {}",
                    field.name, field.size, field.kind
                )));
            }
            if !seen.insert(field.name.as_str()) {
                return Err(CodecError::InvalidDescriptor(format!("duplicate field name `{}`", field.name)));
            }
        }
        Ok(())
    }

    /// Canonical metadata bytes: NameLen Name FieldCount Field*, exactly as
    /// they appear on the wire after the Flags byte.
    pub fn canonical_bytes(&self) -> Result<Vec<u8>> {
        self.validate()?;
        let mut out = Vec::with_capacity(3 + self.name.len() + self.fields.len() * 8);
        write_metadata(&mut out, self);
        Ok(out)
    }
}

pub(crate) fn check_name(what: &str, name: &str) -> std::result::Result<(), String> {
    if name.is_empty() {
        return Err(format!("{what} is empty"));
    }
    if name.len() > MAX_NAME_LEN {
        return Err(format!("{what} is {} bytes, limit is {MAX_NAME_LEN}", name.len()));
    }
    Ok(())
}

/// Caller guarantees `desc` is valid, so every length fits its prefix.
pub(crate) fn write_metadata(out: &mut Vec<u8>, desc: &FormatDescriptor) {
    out.push(desc.name.len() as u8);
    out.extend_from_slice(desc.name.as_bytes());
    out.extend_from_slice(&(desc.fields.len() as u16).to_le_bytes());
    for field in &desc.fields {
        out.push(field.name.len() as u8);
        out.extend_from_slice(field.name.as_bytes());
        out.push(field.kind as u8);
        out.push(field.size);
    }
}

/// First eight bytes of the SHA-256 digest of a descriptor's canonical bytes.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FormatId(pub [u8; 8]);

impl FormatId {
    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_hex(s: &str) -> Option<FormatId> {
        if s.len() != 16 || !s.is_ascii() {
            return None;
        }
        let mut id = [0u8; 8];
        for (i, byte) in id.iter_mut().enumerate() {
            *byte = u8::from_str_radix(&s[2 * i..2 * i + 2], 16).ok()?;
        }
        Some(FormatId(id))
    }
}

impl fmt::Debug for FormatId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FormatId({})", self.to_hex())
    }
}

impl fmt::Display for FormatId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for FormatId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for FormatId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        FormatId::from_hex(&s).ok_or_else(|| serde::de::Error::custom("expected 16 hex digits"))
    }
}

pub fn format_id(desc: &FormatDescriptor) -> Result<FormatId> {
    let digest = Sha256::digest(desc.canonical_bytes()?);
    let mut id = [0u8; 8];
    id.copy_from_slice(&digest[..8]);
    Ok(FormatId(id))
}
