//! Extended reals at the serialization boundary.
//!
//! JSON has no infinity literal, so `+∞` travels as the string `"+inf"`
//! (and `-∞`, which only certificates' margins can produce, as `"-inf"`).

use serde::de::{self, Deserializer, Unexpected, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// An `f64` that may be ±∞ but never NaN.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ExtReal(pub f64);

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        ExtReal(v)
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            ser.serialize_str("+inf")
        } else if self.0 == f64::NEG_INFINITY {
            ser.serialize_str("-inf")
        } else {
            ser.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = ExtReal;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a finite number or the string \"+inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtReal, E> {
                if v.is_nan() {
                    Err(E::invalid_value(Unexpected::Float(v), &self))
                } else {
                    Ok(ExtReal(v))
                }
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtReal, E> {
                Ok(ExtReal(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtReal, E> {
                Ok(ExtReal(v as f64))
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<ExtReal, E> {
                match s {
                    "+inf" => Ok(ExtReal(f64::INFINITY)),
                    "-inf" => Ok(ExtReal(f64::NEG_INFINITY)),
                    _ => Err(E::invalid_value(Unexpected::Str(s), &self)),
                }
            }
        }
        de.deserialize_any(V)
    }
}

/// `a - b` with `∞ - ∞ = 0`, for margins of claims `x ≤ y` where both
/// sides may be `+∞` (the comparison holds with nothing to spare).
pub fn ext_sub(a: f64, b: f64) -> f64 {
    if a.is_infinite() && b.is_infinite() && a == b {
        0.0
    } else {
        a - b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        for v in [1.5, 0.0, f64::INFINITY] {
            let s = serde_json::to_string(&ExtReal(v)).unwrap();
            let back: ExtReal = serde_json::from_str(&s).unwrap();
            assert_eq!(back.0, v);
        }
        assert_eq!(serde_json::to_string(&ExtReal(f64::INFINITY)).unwrap(), "\"+inf\"");
        assert!(serde_json::from_str::<ExtReal>("\"nope\"").is_err());
    }

    #[test]
    fn ext_sub_handles_infinities() {
        assert_eq!(ext_sub(f64::INFINITY, f64::INFINITY), 0.0);
        assert_eq!(ext_sub(f64::INFINITY, 1.0), f64::INFINITY);
        assert_eq!(ext_sub(3.0, 1.0), 2.0);
    }
}
