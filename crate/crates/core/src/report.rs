//! Byte-stable JSON output: floats rounded to 12 significant digits, object
//! keys in sorted order.

use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::{Error, Result};

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to [`SIGNIFICANT_DIGITS`] significant decimal digits.
pub fn round_significant(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Copy of `v` with every non-integer number rounded; non-finite floats become strings.
pub fn canonicalize(v: &Value) -> Value {
    match v {
        Value::Number(num) if num.is_f64() => {
            let x = num.as_f64().unwrap_or(f64::NAN);
            match Number::from_f64(round_significant(x)) {
                Some(r) => Value::Number(r),
                None => Value::String(x.to_string()),
            }
        }
        Value::Array(xs) => Value::Array(xs.iter().map(canonicalize).collect()),
        Value::Object(m) => Value::Object(m.iter().map(|(k, x)| (k.clone(), canonicalize(x))).collect::<Map<_, _>>()),
        other => other.clone(),
    }
}

/// Canonical JSON value of any serializable result.
pub fn to_canonical_value<T: Serialize>(x: &T) -> Result<Value> {
    let v = serde_json::to_value(x).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(canonicalize(&v))
}

/// Pretty-printed canonical JSON, newline terminated.
pub fn to_canonical_string<T: Serialize>(x: &T) -> Result<String> {
    let v = to_canonical_value(x)?;
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rounds_to_twelve_digits() {
        assert_eq!(round_significant(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_significant(2.0 / 3.0 * 1e-7), 6.66666666667e-8);
        assert_eq!(round_significant(123456789012345.0), 123456789012000.0);
        assert_eq!(round_significant(0.0), 0.0);
    }

    #[test]
    fn keys_sorted_and_integers_kept() {
        let v = json!({"b": 0.1 + 0.2, "a": [u64::MAX, 1.0 / 7.0], "c": f64::NAN.to_string()});
        let s = to_canonical_string(&v).unwrap();
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.contains("0.3"));
        assert!(!s.contains("0.30000000000000004"));
        assert!(s.contains(&u64::MAX.to_string()));
        assert!(s.contains("0.142857142857"));
    }
}
