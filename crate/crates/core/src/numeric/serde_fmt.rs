//! Serde adapters: big integers as decimal strings, rationals as `"a/q"`,
//! balls as `{mid_hex, rad_hex, prec}`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{parse_rational, BigInt, Rational, RealBall};
use crate::error::Error;

pub fn rational_to_string(q: &Rational) -> String {
    q.to_string()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallRepr {
    pub mid_hex: String,
    pub rad_hex: String,
    pub prec: u32,
}

impl From<&RealBall> for BallRepr {
    fn from(b: &RealBall) -> Self {
        let (mid_hex, rad_hex, prec) = b.to_parts();
        BallRepr {
            mid_hex,
            rad_hex,
            prec,
        }
    }
}

impl TryFrom<BallRepr> for RealBall {
    type Error = Error;
    fn try_from(r: BallRepr) -> Result<Self, Error> {
        RealBall::from_parts(&r.mid_hex, &r.rad_hex, r.prec)
    }
}

pub mod bigint {
    use super::*;

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub mod bigint_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

pub mod rational {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&rational_to_string(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

pub mod rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(rational_to_string))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

pub mod ball {
    use super::*;

    pub fn serialize<S: Serializer>(v: &RealBall, s: S) -> Result<S::Ok, S::Error> {
        BallRepr::from(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<RealBall, D::Error> {
        let r = BallRepr::deserialize(d)?;
        RealBall::try_from(r).map_err(serde::de::Error::custom)
    }
}

pub mod ball_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[RealBall], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(BallRepr::from)
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<RealBall>, D::Error> {
        Vec::<BallRepr>::deserialize(d)?
            .into_iter()
            .map(|r| RealBall::try_from(r).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Sample {
        #[serde(with = "bigint")]
        n: BigInt,
        #[serde(with = "rational")]
        q: Rational,
        #[serde(with = "ball")]
        b: RealBall,
    }

    #[test]
    fn round_trip() {
        let s = Sample {
            n: "123456789012345678901234567890".parse().unwrap(),
            q: rat(-3, 7),
            b: RealBall::from_rational(&rat(1, 3), 128),
        };
        let j = serde_json::to_string(&s).unwrap();
        assert!(j.contains("\"-3/7\""));
        assert!(j.contains("\"123456789012345678901234567890\""));
        let back: Sample = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
    }
}
