//! Serde helpers for arbitrary-precision integers in JSON: always written
//! as decimal strings, accepted as either strings or plain numbers.

use num_bigint::BigInt;
use serde::de::{self, Deserializer, Unexpected};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

#[derive(Serialize)]
#[serde(untagged)]
enum Out<'a> {
    Str(&'a str),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum In {
    Num(i64),
    Str(String),
}

fn from_in<'de, D: Deserializer<'de>>(v: In) -> Result<BigInt, D::Error> {
    match v {
        In::Num(n) => Ok(BigInt::from(n)),
        In::Str(s) => s.trim().parse().map_err(|_| {
            de::Error::invalid_value(Unexpected::Str(&s), &"a decimal integer string")
        }),
    }
}

pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    Out::Str(&x.to_string()).serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
    from_in::<D>(In::deserialize(d)?)
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let strings: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
        strings.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let raw: Vec<In> = Vec::deserialize(d)?;
        raw.into_iter().map(from_in::<D>).collect()
    }
}

pub mod vec2 {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[Vec<BigInt>], s: S) -> Result<S::Ok, S::Error> {
        let strings: Vec<Vec<String>> = xs
            .iter()
            .map(|row| row.iter().map(|x| x.to_string()).collect())
            .collect();
        strings.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<BigInt>>, D::Error> {
        let raw: Vec<Vec<In>> = Vec::deserialize(d)?;
        raw.into_iter()
            .map(|row| row.into_iter().map(from_in::<D>).collect())
            .collect()
    }
}

pub mod opt {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&v.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigInt>, D::Error> {
        let raw: Option<In> = Option::deserialize(d)?;
        raw.map(from_in::<D>).transpose()
    }
}

pub mod pairs {
    use super::*;

    pub fn serialize<S: Serializer, T: Serialize>(
        xs: &[(BigInt, T)],
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let shadow: Vec<(String, &T)> = xs.iter().map(|(c, t)| (c.to_string(), t)).collect();
        shadow.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>, T: Deserialize<'de>>(
        d: D,
    ) -> Result<Vec<(BigInt, T)>, D::Error> {
        let raw: Vec<(In, T)> = Vec::deserialize(d)?;
        raw.into_iter()
            .map(|(c, t)| Ok((from_in::<D>(c)?, t)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Wrap {
        #[serde(with = "super")]
        x: BigInt,
    }

    #[test]
    fn round_trip_and_number_input() {
        let w: Wrap = serde_json::from_str(r#"{"x":"123456789012345678901234567890"}"#).unwrap();
        assert_eq!(
            w.x.to_string(),
            "123456789012345678901234567890"
        );
        let w2: Wrap = serde_json::from_str(r#"{"x":-42}"#).unwrap();
        assert_eq!(w2.x, BigInt::from(-42));
        assert_eq!(
            serde_json::to_string(&w2).unwrap(),
            r#"{"x":"-42"}"#
        );
    }
}
