//! Round-trip-safe number text: 17 significant digits in exponent form.

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

pub fn sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "NaN".to_string()
    }
}

/// Serializes an f64 as a JSON number with 17 significant digits, or `null`
/// when non-finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sig17(pub f64);

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(sig17(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            let t = sig17(x);
            assert_eq!(t.parse::<f64>().unwrap(), x);
            let mant = t.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mant.len(), 17);
        }
    }

    #[test]
    fn json_number_text() {
        let s = serde_json::to_string(&Sig17(0.5)).unwrap();
        assert_eq!(s, "5.0000000000000000e-1");
        let v: f64 = serde_json::from_str(&s).unwrap();
        assert_eq!(v, 0.5);
        assert_eq!(serde_json::to_string(&Sig17(f64::NAN)).unwrap(), "null");
    }
}
