//! Float formatting shared by every text output.

use serde::Serializer;

/// 17 significant digits, which round-trips any `f64` exactly.
pub fn sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Serde adapter writing a float as a JSON number with 17 significant
/// digits; non-finite values become `null`.
pub fn serialize_sig17<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    use serde::Serialize;
    if x.is_finite() {
        let raw = serde_json::value::RawValue::from_string(sig17(*x)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    } else {
        s.serialize_none()
    }
}

pub fn serialize_sig17_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => serialize_sig17(v, s),
        None => s.serialize_none(),
    }
}
