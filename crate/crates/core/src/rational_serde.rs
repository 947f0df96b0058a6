//! `delta` travels as a string rational such as `"2/3"` so the critical
//! exponent stays exact.

use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

use crate::Rational;

pub fn parse(text: &str) -> Result<Rational, String> {
    let text = text.trim();
    let r: Rational = text
        .parse()
        .map_err(|e| format!("{text:?} is not a rational like \"2/3\": {e}"))?;
    Ok(r)
}

pub fn serialize<S: Serializer>(r: &Rational, ser: S) -> Result<S::Ok, S::Error> {
    ser.collect_str(&format_args!("{}/{}", r.numer(), r.denom()))
}

pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Rational, D::Error> {
    let text = String::deserialize(de)?;
    parse(&text).map_err(D::Error::custom)
}

pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Option<Rational>, ser: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => super::serialize(r, ser),
            None => ser.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(de)?
            .map(|t| parse(&t).map_err(D::Error::custom))
            .transpose()
    }
}
