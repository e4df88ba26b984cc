//! Exact rationals in reports and scenario files: written as `"p/q"`,
//! read from such strings or from numbers with a small exact denominator.

use num_rational::BigRational;
use serde::{Deserialize, Deserializer, Serializer};

use crate::error::{Error, Result};
use crate::invariants::newton::rational_to_string;
use crate::invariants::rational_from_f64;

pub fn parse(s: &str) -> Result<BigRational> {
    let t = s.trim();
    if let Ok(r) = t.parse::<BigRational>() {
        return Ok(r);
    }
    t.parse::<f64>()
        .ok()
        .and_then(rational_from_f64)
        .ok_or_else(|| Error::InvalidInput(format!("not a rational number: `{s}`")))
}

pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rational_to_string(r))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Repr {
    Str(String),
    Num(f64),
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
    let r = match Repr::deserialize(d)? {
        Repr::Str(s) => parse(&s),
        Repr::Num(x) => rational_from_f64(x).ok_or_else(|| Error::InvalidInput(format!("{x} has no small exact denominator"))),
    };
    r.map_err(serde::de::Error::custom)
}
