// One property per conversion rule, runnable from a #[test] or from a
// harness-less binary. Also pulled into the workspace acceptance suite.

#![allow(dead_code)]

use std::collections::HashSet;
use std::fmt::Debug;

use pbio::{convert, decode, encode, CodecError, FieldDescriptor, FormatDescriptor, Kind, Record, Value};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use super::strategies::*;

pub type Outcome = Result<(), String>;

fn check<S>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Outcome
where
    S: Strategy,
    S::Value: Debug,
{
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn one(name: &str, kind: Kind, size: u8) -> FormatDescriptor {
    FormatDescriptor::new("F", vec![FieldDescriptor::new(name, kind, size)])
}

fn single(v: Value) -> Record {
    Record::new().with("a", v)
}

fn sint_range(size: u8) -> (i128, i128) {
    let bits = size as u32 * 8;
    (-(1i128 << (bits - 1)), (1i128 << (bits - 1)) - 1)
}

fn uint_max(size: u8) -> i128 {
    (1i128 << (size as u32 * 8)) - 1
}

/// Nearest-even check for an f64 narrowed to f32, independent of `as`.
fn is_nearest_f32(src: f64, got: f32) -> bool {
    if src.is_nan() {
        return got.is_nan();
    }
    if got.is_infinite() {
        return src.is_infinite() && src.signum() == got.signum() as f64;
    }
    let d = |c: f32| (c as f64 - src).abs();
    let (up, down) = (got.next_up(), got.next_down());
    let here = d(got);
    let better_up = up.is_finite() && d(up) < here;
    let better_down = down.is_finite() && d(down) < here;
    let tie = (up.is_finite() && d(up) == here && up != got) || (down.is_finite() && d(down) == here && down != got);
    !better_up && !better_down && (!tie || got.to_bits() & 1 == 0)
}

fn all_types() -> Vec<(Kind, u8)> {
    let mut v = Vec::new();
    for s in [1, 2, 4, 8] {
        v.push((Kind::SInt, s));
        v.push((Kind::UInt, s));
    }
    v.extend([(Kind::Float, 4), (Kind::Float, 8), (Kind::String, 0), (Kind::Bytes, 0)]);
    v
}

/// Every (from, to) pair that C4/C5 declare a type error.
fn mismatched_pairs() -> Vec<((Kind, u8), (Kind, u8))> {
    let textual = |k: Kind| matches!(k, Kind::String | Kind::Bytes);
    let mut pairs = Vec::new();
    for a in all_types() {
        for b in all_types() {
            if a.0 != b.0 && (textual(a.0) || textual(b.0) || (a.0 == Kind::Float && b.0.is_integer())) {
                pairs.push((a, b));
            }
        }
    }
    pairs
}

/// decode(encode(d, r, o)) == (d, r), bit for bit.
pub fn round_trip(cases: u32) -> Outcome {
    check(cases, arb_triple(16), |(d, r, o)| {
        let bytes = encode(&d, &r, o).unwrap();
        let (d2, r2) = decode(&bytes).unwrap();
        prop_assert_eq!(&d2, &d);
        // Bit-exact: NaN payloads and signed zeros must survive.
        prop_assert_eq!(encode(&d2, &r2, o).unwrap(), bytes);
        prop_assert_eq!(r2, r);
        Ok(())
    })
}

pub fn c1_widening(cases: u32) -> Outcome {
    let input = (
        prop_oneof![
            (Just(Kind::SInt), prop::sample::select(vec![1u8, 2, 4]), prop::sample::select(vec![2u8, 4, 8])),
            (Just(Kind::UInt), prop::sample::select(vec![1u8, 2, 4]), prop::sample::select(vec![2u8, 4, 8])),
            (Just(Kind::Float), Just(4u8), Just(8u8)),
        ]
        .prop_filter("strictly wider", |(_, f, t)| t > f),
        any::<u64>(),
    );
    check(cases, input, |((kind, from, to), seed)| {
        let v = match kind {
            Kind::SInt => {
                let (lo, hi) = sint_range(from);
                Value::Int((lo + (seed as i128).rem_euclid(hi - lo + 1)) as i64)
            }
            Kind::UInt => Value::UInt((seed as i128 % (uint_max(from) + 1)) as u64),
            _ => Value::F32(f32::from_bits(seed as u32)),
        };
        let (out, report) = convert(&single(v.clone()), &one("a", kind, from), &one("a", kind, to)).unwrap();
        let got = out.get("a").unwrap().clone();
        match (v, got) {
            (Value::Int(a), Value::Int(b)) => prop_assert_eq!(a, b),
            (Value::UInt(a), Value::UInt(b)) => prop_assert_eq!(a, b),
            (Value::F32(a), Value::F64(b)) => {
                prop_assert!((a.is_nan() && b.is_nan()) || a as f64 == b && (b as f32).to_bits() == a.to_bits())
            }
            other => prop_assert!(false, "unexpected {:?}", other),
        }
        prop_assert_eq!(report.converted.len(), 1);
        prop_assert_eq!(&report.converted[0].field, "a");
        Ok(())
    })
}

pub fn c2_integer_narrowing(cases: u32) -> Outcome {
    check(cases, (any::<i64>(), prop::sample::select(vec![1u8, 2, 4])), |(v, size)| {
        let res = convert(&single(Value::Int(v)), &one("a", Kind::SInt, 8), &one("a", Kind::SInt, size));
        let (lo, hi) = sint_range(size);
        if (lo..=hi).contains(&(v as i128)) {
            let (out, report) = res.unwrap();
            prop_assert_eq!(out.get("a"), Some(&Value::Int(v)));
            prop_assert_eq!(report.converted.len(), 1);
        } else {
            prop_assert_eq!(res.unwrap_err(), CodecError::OverflowingNarrow("a".into()));
        }
        Ok(())
    })
}

pub fn c2_float_narrowing(cases: u32) -> Outcome {
    check(cases, any::<u64>(), |bits| {
        let v = f64::from_bits(bits);
        let res = convert(&single(Value::F64(v)), &one("a", Kind::Float, 8), &one("a", Kind::Float, 4));
        // (2^24 - 1/2) * 2^104: first magnitude that rounds past f32::MAX.
        let overflow_at = (16_777_216.0f64 - 0.5) * 2f64.powi(104);
        if v.is_finite() && v.abs() >= overflow_at {
            prop_assert_eq!(res.unwrap_err(), CodecError::OverflowingNarrow("a".into()));
        } else {
            let (out, report) = res.unwrap();
            match out.get("a") {
                Some(Value::F32(got)) => prop_assert!(is_nearest_f32(v, *got), "{} -> {}", v, got),
                other => prop_assert!(false, "{:?}", other),
            }
            prop_assert_eq!(report.converted.len(), 1);
        }
        Ok(())
    })
}

pub fn c3_signedness(cases: u32) -> Outcome {
    check(cases, (any::<i64>(), any::<u64>(), prop::sample::select(vec![1u8, 2, 4, 8])), |(v, u, size)| {
        let to_u = convert(&single(Value::Int(v)), &one("a", Kind::SInt, 8), &one("a", Kind::UInt, size));
        if v >= 0 && (v as i128) <= uint_max(size) {
            prop_assert_eq!(to_u.unwrap().0.get("a").cloned(), Some(Value::UInt(v as u64)));
        } else {
            prop_assert_eq!(to_u.unwrap_err(), CodecError::OverflowingNarrow("a".into()));
        }
        let to_s = convert(&single(Value::UInt(u)), &one("a", Kind::UInt, 8), &one("a", Kind::SInt, size));
        if (u as i128) <= sint_range(size).1 {
            prop_assert_eq!(to_s.unwrap().0.get("a").cloned(), Some(Value::Int(u as i64)));
        } else {
            prop_assert_eq!(to_s.unwrap_err(), CodecError::OverflowingNarrow("a".into()));
        }
        Ok(())
    })
}

pub fn c4_integer_float(cases: u32) -> Outcome {
    check(cases, (any::<i64>(), any::<u64>(), prop::sample::select(vec![1u8, 2, 4, 8])), |(v, f, size)| {
        let (out, report) =
            convert(&single(Value::Int(v)), &one("a", Kind::SInt, 8), &one("a", Kind::Float, 8)).unwrap();
        let Some(Value::F64(got)) = out.get("a").cloned() else { panic!("expected F64") };
        let err = |x: f64| (x as i128 - v as i128).abs();
        prop_assert!(err(got) <= err(got.next_up()) && err(got) <= err(got.next_down()));
        if err(got) == err(got.next_up()) || err(got) == err(got.next_down()) {
            prop_assert_eq!(got.to_bits() & 1, 0);
        }
        prop_assert_eq!(report.converted.len(), 1);

        let back =
            convert(&single(Value::F64(f64::from_bits(f))), &one("a", Kind::Float, 8), &one("a", Kind::SInt, size));
        prop_assert_eq!(back.unwrap_err(), CodecError::TypeMismatch("a".into()));
        Ok(())
    })
}

pub fn c5_cross_kind(cases: u32) -> Outcome {
    check(cases, (prop::sample::select(mismatched_pairs()), any::<u64>()), |(((fk, fs), (tk, ts)), seed)| {
        let v = match fk {
            Kind::SInt => Value::Int((seed % 100) as i64),
            Kind::UInt => Value::UInt(seed % 100),
            Kind::Float if fs == 4 => Value::F32(seed as f32),
            Kind::Float => Value::F64(seed as f64),
            Kind::String => Value::Str(seed.to_string()),
            Kind::Bytes => Value::Bytes(seed.to_le_bytes().to_vec()),
        };
        let res = convert(&single(v), &one("a", fk, fs), &one("a", tk, ts));
        prop_assert_eq!(res.unwrap_err(), CodecError::TypeMismatch("a".into()));
        Ok(())
    })
}

/// Target = source plus fields of `extra` the source lacks.
pub fn c6_defaults(cases: u32) -> Outcome {
    check(cases, (arb_triple(8), arb_descriptor(8)), |((src, rec, _), extra)| {
        let src_names: HashSet<_> = src.fields.iter().map(|f| f.name.clone()).collect();
        let mut fields = src.fields.clone();
        fields.extend(extra.fields.iter().filter(|f| !src_names.contains(&f.name)).cloned());
        let dst = FormatDescriptor::new("D", fields);

        let (out, report) = convert(&rec, &src, &dst).unwrap();
        prop_assert_eq!(out.len(), dst.fields.len());
        let mut expected_defaulted = Vec::new();
        for field in &dst.fields {
            if src_names.contains(&field.name) {
                prop_assert_eq!(out.get(&field.name), rec.get(&field.name));
            } else {
                let got = out.get(&field.name).unwrap();
                let want = match field.kind {
                    Kind::SInt => Value::Int(0),
                    Kind::UInt => Value::UInt(0),
                    Kind::Float if field.size == 4 => Value::F32(0.0),
                    Kind::Float => Value::F64(0.0),
                    Kind::String => Value::Str(String::new()),
                    Kind::Bytes => Value::Bytes(Vec::new()),
                };
                prop_assert_eq!(got, &want);
                if let Value::F32(x) = got {
                    prop_assert!(x.is_sign_positive());
                }
                if let Value::F64(x) = got {
                    prop_assert!(x.is_sign_positive());
                }
                expected_defaulted.push(field.name.clone());
            }
        }
        prop_assert_eq!(report.defaulted, expected_defaulted);
        prop_assert!(report.dropped.is_empty() && report.converted.is_empty());
        Ok(())
    })
}

/// Target keeps every other source field.
pub fn c7_dropped(cases: u32) -> Outcome {
    check(cases, (arb_triple(8), 1usize..4), |((src, rec, _), stride)| {
        let dst = FormatDescriptor::new("D", src.fields.iter().step_by(stride).cloned().collect());
        let (out, report) = convert(&rec, &src, &dst).unwrap();
        let dropped: Vec<String> =
            src.fields.iter().filter(|f| dst.field(&f.name).is_none()).map(|f| f.name.clone()).collect();
        prop_assert_eq!(&report.dropped, &dropped);
        for name in &dropped {
            prop_assert!(out.get(name).is_none());
        }
        for field in &dst.fields {
            prop_assert_eq!(out.get(&field.name), rec.get(&field.name));
        }
        prop_assert_eq!(out.len(), dst.fields.len());
        prop_assert!(report.defaulted.is_empty() && report.converted.is_empty());
        Ok(())
    })
}

pub type Rule = (&'static str, fn(u32) -> Outcome);

pub const RULES: [Rule; 8] = [
    ("C1 widening is exact", c1_widening),
    ("C2 integer narrowing", c2_integer_narrowing),
    ("C2 float narrowing", c2_float_narrowing),
    ("C3 signedness change", c3_signedness),
    ("C4 integer/float", c4_integer_float),
    ("C5 cross-kind mismatch", c5_cross_kind),
    ("C6 target-only defaults", c6_defaults),
    ("C7 source-only dropped", c7_dropped),
];
