use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::descriptor::{write_metadata, FieldDescriptor, FormatDescriptor, Kind};
use crate::error::CodecError;
use crate::value::{Record, Value};
use crate::Result;

/// "PBO1"
pub const MAGIC: [u8; 4] = [0x50, 0x42, 0x4F, 0x31];
pub const VERSION: u8 = 0x01;

const FLAG_BIG_ENDIAN: u8 = 0x01;

/// Byte order of payload numerics. Metadata is always little-endian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ByteOrder {
    #[default]
    Little,
    Big,
}

pub fn encode(desc: &FormatDescriptor, rec: &Record, order: ByteOrder) -> Result<Vec<u8>> {
    desc.validate()?;
    rec.check_conforms(desc)?;

    let mut out = Vec::with_capacity(64);
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(match order {
        ByteOrder::Little => 0,
        ByteOrder::Big => FLAG_BIG_ENDIAN,
    });
    write_metadata(&mut out, desc);

    let mut w = PayloadWriter { out, order };
    for ((_, value), field) in rec.iter().zip(&desc.fields) {
        w.value(value, field);
    }
    Ok(w.out)
}

struct PayloadWriter {
    out: Vec<u8>,
    order: ByteOrder,
}

impl PayloadWriter {
    /// Writes the low `size` bytes of `bits` in payload order.
    fn uint(&mut self, bits: u64, size: u8) {
        let le = bits.to_le_bytes();
        let width = &le[..size as usize];
        match self.order {
            ByteOrder::Little => self.out.extend_from_slice(width),
            ByteOrder::Big => self.out.extend(width.iter().rev()),
        }
    }

    fn value(&mut self, value: &Value, field: &FieldDescriptor) {
        match value {
            Value::Int(v) => self.uint(*v as u64, field.size),
            Value::UInt(v) => self.uint(*v, field.size),
            Value::F32(v) => self.uint(v.to_bits() as u64, 4),
            Value::F64(v) => self.uint(v.to_bits(), 8),
            Value::Str(s) => {
                self.uint(s.len() as u64, 4);
                self.out.extend_from_slice(s.as_bytes());
            }
            Value::Bytes(b) => {
                self.uint(b.len() as u64, 4);
                self.out.extend_from_slice(b);
            }
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).ok_or(CodecError::TruncatedMessage)?;
        let bytes = self.buf.get(self.pos..end).ok_or(CodecError::TruncatedMessage)?;
        self.pos = end;
        Ok(bytes)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn text(&mut self, n: usize, what: &str) -> Result<String> {
        let bytes = self.take(n)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| CodecError::InvalidUtf8(what.to_owned()))
    }

    fn uint(&mut self, size: u8, order: ByteOrder) -> Result<u64> {
        let bytes = self.take(size as usize)?;
        let mut le = [0u8; 8];
        match order {
            ByteOrder::Little => le[..bytes.len()].copy_from_slice(bytes),
            ByteOrder::Big => {
                for (dst, src) in le.iter_mut().zip(bytes.iter().rev()) {
                    *dst = *src;
                }
            }
        }
        Ok(u64::from_le_bytes(le))
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
}

fn sign_extend(bits: u64, size: u8) -> i64 {
    let shift = 64 - size as u32 * 8;
    ((bits << shift) as i64) >> shift
}

pub fn decode(bytes: &[u8]) -> Result<(FormatDescriptor, Record)> {
    let mut r = Reader { buf: bytes, pos: 0 };

    if r.take(4)? != MAGIC {
        return Err(CodecError::BadMagic);
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(CodecError::UnsupportedVersion(version));
    }
    let flags = r.u8()?;
    if flags & !FLAG_BIG_ENDIAN != 0 {
        return Err(CodecError::MalformedDescriptor(format!("reserved flag bits set: {flags:#04x}")));
    }
    let order = if flags & FLAG_BIG_ENDIAN != 0 { ByteOrder::Big } else { ByteOrder::Little };

    let name_len = r.u8()? as usize;
    if name_len == 0 {
        return Err(CodecError::MalformedDescriptor("empty format name".into()));
    }
    let name = r.text(name_len, "format name")?;
    let count = u16::from_le_bytes([r.u8()?, r.u8()?]) as usize;

    let mut fields = Vec::with_capacity(count.min(r.remaining() / 4));
    let mut seen = HashSet::new();
    for _ in 0..count {
        let len = r.u8()? as usize;
        if len == 0 {
            return Err(CodecError::MalformedDescriptor("empty field name".into()));
        }
        let fname = r.text(len, "field name")?;
        let kind_byte = r.u8()?;
        let kind = Kind::from_byte(kind_byte)
            .ok_or_else(|| CodecError::MalformedDescriptor(format!("unknown kind byte {kind_byte:#04x}")))?;
        let size = r.u8()?;
        if !kind.accepts_size(size) {
            return Err(CodecError::MalformedDescriptor(format!(
                "field `{fname}`: size {size} not allowed for kind {kind}"
            )));
        }
        if !seen.insert(fname.clone()) {
            return Err(CodecError::MalformedDescriptor(format!("duplicate field name `{fname}`")));
        }
        fields.push(FieldDescriptor { name: fname, kind, size });
    }
    let desc = FormatDescriptor { name, fields };

    let mut rec = Record::new();
    for field in &desc.fields {
        let value = match field.kind {
            Kind::SInt => Value::Int(sign_extend(r.uint(field.size, order)?, field.size)),
            Kind::UInt => Value::UInt(r.uint(field.size, order)?),
            Kind::Float if field.size == 4 => Value::F32(f32::from_bits(r.uint(4, order)? as u32)),
            Kind::Float => Value::F64(f64::from_bits(r.uint(8, order)?)),
            Kind::String => {
                let len = r.uint(4, order)? as usize;
                Value::Str(r.text(len, &format!("field `{}`", field.name))?)
            }
            Kind::Bytes => {
                let len = r.uint(4, order)? as usize;
                Value::Bytes(r.take(len)?.to_vec())
            }
        };
        rec.push(field.name.clone(), value);
    }

    match r.remaining() {
        0 => Ok((desc, rec)),
        n => Err(CodecError::TrailingBytes(n)),
    }
}

/// Byte order recorded in a message header, without decoding the rest.
pub fn payload_order(bytes: &[u8]) -> Result<ByteOrder> {
    match bytes.get(5) {
        Some(flags) if flags & FLAG_BIG_ENDIAN != 0 => Ok(ByteOrder::Big),
        Some(_) => Ok(ByteOrder::Little),
        None => Err(CodecError::TruncatedMessage),
    }
}
