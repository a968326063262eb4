//! Exact rationals for valuations and slopes.

use num_integer::Integer;
use num_rational::Ratio;

pub type Q = Ratio<i64>;

/// "num/den" rendering used in every report.
pub fn q_str(q: Q) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().ok()?;
            let d: i64 = d.trim().parse().ok()?;
            (d != 0).then(|| Q::new(n, d))
        }
        None => Some(Q::from_integer(s.parse().ok()?)),
    }
}

/// ceil(q * e): the first exponent numerator over `e` that is not below `q`.
pub fn ceil_units(q: Q, e: u32) -> i64 {
    let x = q * Q::from_integer(e as i64);
    x.numer().div_ceil(x.denom())
}

/// floor(q * e).
pub fn floor_units(q: Q, e: u32) -> i64 {
    let x = q * Q::from_integer(e as i64);
    x.numer().div_floor(x.denom())
}

pub mod serde_q {
    //! Serialize a rational as a "num/den" string.
    use super::{parse_q, q_str, Q};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&q_str(*q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).ok_or_else(|| D::Error::custom(format!("bad rational {s:?}")))
    }
}

pub mod serde_q_vec {
    use super::{parse_q, q_str, Q};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Q], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|q| q_str(*q)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_q(s).ok_or_else(|| D::Error::custom(format!("bad rational {s:?}"))))
            .collect()
    }
}

pub mod serde_q_opt {
    use super::{parse_q, q_str, Q};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Option<Q>, s: S) -> Result<S::Ok, S::Error> {
        match q {
            Some(q) => s.serialize_some(&q_str(*q)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Q>, D::Error> {
        let v = Option::<String>::deserialize(d)?;
        v.map(|s| parse_q(&s).ok_or_else(|| D::Error::custom(format!("bad rational {s:?}"))))
            .transpose()
    }
}
