//! Portable binary records that carry their own layout.
//!
//! A [`FormatDescriptor`] names a flat list of typed fields. [`encode`] writes
//! the descriptor followed by a packed payload in either byte order; [`decode`]
//! recovers both without any out-of-band schema. Receivers that expect a
//! different layout use [`decode_as`] (or [`convert`]) to match fields by name,
//! widening, narrowing or defaulting them under strict, loss-checked rules.
//!
//! ```
//! use pbio::{decode, encode, ByteOrder, FieldDescriptor, FormatDescriptor, Kind, Record, Value};
//!
//! let desc = FormatDescriptor::new("P", vec![FieldDescriptor::new("x", Kind::SInt, 4)]);
//! let rec = Record::new().with("x", Value::Int(7));
//! let bytes = encode(&desc, &rec, ByteOrder::Little).unwrap();
//! assert_eq!(bytes.len(), 18);
//! assert_eq!(decode(&bytes).unwrap(), (desc, rec));
//! ```

mod convert;
mod descriptor;
mod error;
pub mod json;
mod registry;
mod value;
mod wire;

pub use convert::{convert, decode_as, Conversion, DecodeReport};
pub use descriptor::{format_id, FieldDescriptor, FieldType, FormatDescriptor, FormatId, Kind};
pub use error::CodecError;
pub use registry::FormatRegistry;
pub use value::{Record, Value};
pub use wire::{decode, encode, payload_order, ByteOrder, MAGIC, VERSION};

pub type Result<T, E = CodecError> = std::result::Result<T, E>;
