//! Serde adapter writing `f64` as exact hexadecimal strings.
//! Use with `#[serde(with = "crate::algebra::hexf")]`.

use serde::{Deserialize, Deserializer, Serializer};

use super::interval::{hex_f64, parse_hex_f64};

pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&hex_f64(*x))
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    let s = String::deserialize(d)?;
    parse_hex_f64(&s).map_err(serde::de::Error::custom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_forms() {
        assert_eq!(hex_f64(3.0), "0x1.8p+1");
        assert_eq!(hex_f64(-0.0), "-0x0p+0");
        assert_eq!(hex_f64(f64::MIN_POSITIVE / 2.0), "0x0.8p-1022");
        assert!(parse_hex_f64("nan").unwrap().is_nan());
    }

    proptest! {
        #[test]
        fn bit_exact_roundtrip(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            let y = parse_hex_f64(&hex_f64(x)).unwrap();
            prop_assert!(y.to_bits() == bits || (x.is_nan() && y.is_nan()));
        }
    }
}
