//! JSON forms: polynomials as coefficient arrays (lowest degree first),
//! rational functions as `{"num": [...], "den": [...]}`.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::field::{Field, Ring};
use super::poly::Poly;
use super::ratfunc::RatFunc;

impl<R: Ring + Serialize> Serialize for Poly<R> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.coeffs().serialize(s)
    }
}

impl<'de, R: Ring + DeserializeOwned> Deserialize<'de> for Poly<R> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Poly::new(Vec::<R>::deserialize(d)?))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "F: Serialize", deserialize = "F: DeserializeOwned"))]
struct RfRepr<F: Field> {
    num: Poly<F>,
    den: Poly<F>,
}

impl<F: Field + Serialize> Serialize for RatFunc<F> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RfRepr { num: self.num().clone(), den: self.den().clone() }.serialize(s)
    }
}

impl<'de, F: Field + DeserializeOwned> Deserialize<'de> for RatFunc<F> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = RfRepr::<F>::deserialize(d)?;
        RatFunc::new(r.num, r.den).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use crate::algebra::*;

    #[test]
    fn ratfunc_json_roundtrip() {
        let f = rf_i(&[12, 12, 1], &[28]);
        let s = serde_json::to_string(&f).unwrap();
        let g: RatFuncL = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
        let b: BiRatFunc = zvar().add(&kconst(f.clone())).inv();
        let s = serde_json::to_string(&b).unwrap();
        let c: BiRatFunc = serde_json::from_str(&s).unwrap();
        assert_eq!(b, c);
    }
}
