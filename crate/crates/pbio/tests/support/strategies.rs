// Shared proptest generators for descriptors and conforming records.
// Also pulled into the workspace acceptance suite via #[path].

use std::collections::BTreeSet;

use pbio::{ByteOrder, FieldDescriptor, FormatDescriptor, Kind, Record, Value};
use proptest::prelude::*;

pub fn arb_field_type() -> impl Strategy<Value = (Kind, u8)> {
    prop_oneof![
        prop::sample::select(vec![1u8, 2, 4, 8]).prop_map(|s| (Kind::SInt, s)),
        prop::sample::select(vec![1u8, 2, 4, 8]).prop_map(|s| (Kind::UInt, s)),
        prop::sample::select(vec![4u8, 8]).prop_map(|s| (Kind::Float, s)),
        Just((Kind::String, 0)),
        Just((Kind::Bytes, 0)),
    ]
}

pub fn arb_name() -> impl Strategy<Value = String> {
    "[a-zA-Zé_][a-zA-Z0-9_µ]{0,10}"
}

pub fn arb_descriptor(max_fields: usize) -> impl Strategy<Value = FormatDescriptor> {
    (arb_name(), prop::collection::btree_set(arb_name(), 0..=max_fields))
        .prop_flat_map(|(name, names): (String, BTreeSet<String>)| {
            let n = names.len();
            (
                Just(name),
                Just(names.into_iter().collect::<Vec<_>>()).prop_shuffle(),
                prop::collection::vec(arb_field_type(), n),
            )
        })
        .prop_map(|(name, names, types)| {
            FormatDescriptor::new(
                name,
                names.into_iter().zip(types).map(|(n, (k, s))| FieldDescriptor::new(n, k, s)).collect(),
            )
        })
}

pub fn arb_value(kind: Kind, size: u8) -> BoxedStrategy<Value> {
    match kind {
        Kind::SInt => {
            let bits = size as u32 * 8;
            let min = if bits == 64 { i64::MIN } else { -(1i64 << (bits - 1)) };
            let max = if bits == 64 { i64::MAX } else { (1i64 << (bits - 1)) - 1 };
            prop_oneof![Just(min), Just(max), Just(0), min..=max].prop_map(Value::Int).boxed()
        }
        Kind::UInt => {
            let max = if size == 8 { u64::MAX } else { (1u64 << (size as u32 * 8)) - 1 };
            prop_oneof![Just(max), Just(0), 0..=max].prop_map(Value::UInt).boxed()
        }
        Kind::Float if size == 4 => any::<u32>().prop_map(|b| Value::F32(f32::from_bits(b))).boxed(),
        Kind::Float => any::<u64>().prop_map(|b| Value::F64(f64::from_bits(b))).boxed(),
        Kind::String => "\\PC{0,12}".prop_map(Value::Str).boxed(),
        Kind::Bytes => prop::collection::vec(any::<u8>(), 0..24).prop_map(Value::Bytes).boxed(),
    }
}

pub fn arb_record(desc: &FormatDescriptor) -> BoxedStrategy<Record> {
    let names: Vec<String> = desc.fields.iter().map(|f| f.name.clone()).collect();
    let values: Vec<BoxedStrategy<Value>> = desc.fields.iter().map(|f| arb_value(f.kind, f.size)).collect();
    values.prop_map(move |vals| names.iter().cloned().zip(vals).collect::<Record>()).boxed()
}

pub fn arb_order() -> impl Strategy<Value = ByteOrder> {
    prop_oneof![Just(ByteOrder::Little), Just(ByteOrder::Big)]
}

pub fn arb_triple(max_fields: usize) -> impl Strategy<Value = (FormatDescriptor, Record, ByteOrder)> {
    arb_descriptor(max_fields).prop_flat_map(|d| {
        let rec = arb_record(&d);
        (Just(d), rec, arb_order())
    })
}
