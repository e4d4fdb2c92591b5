//! Serde adapters for Lebesgue exponents, which may be `∞` (written as `"inf"`).

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// An exponent in `[1, ∞]` that serialises `∞` as the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent(pub f64);

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Exponent;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a number or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Exponent, E> {
                Ok(Exponent(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Exponent, E> {
                Ok(Exponent(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Exponent, E> {
                Ok(Exponent(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Exponent, E> {
                match v {
                    "inf" | "∞" | "infinity" => Ok(Exponent(f64::INFINITY)),
                    other => other
                        .parse()
                        .map(Exponent)
                        .map_err(|_| E::custom(format!("invalid exponent {other:?}"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// `#[serde(with = "exponent")]` for plain `f64` fields.
pub mod exponent {
    use super::*;

    pub fn serialize<S: Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
        Exponent(*p).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Exponent::deserialize(d).map(|e| e.0)
    }
}

/// `#[serde(with = "exponent_list")]` for `Vec<f64>` fields.
pub mod exponent_list {
    use super::*;

    pub fn serialize<S: Serializer>(ps: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(ps.iter().map(|p| Exponent(*p)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Exponent>::deserialize(d).map(|v| v.into_iter().map(|e| e.0).collect())
    }
}

/// Renders an exponent for CSV and labels.
pub fn format_exponent(p: f64) -> String {
    if p.is_infinite() {
        "inf".to_string()
    } else {
        format!("{p}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_round_trips_as_string() {
        let json = serde_json::to_string(&vec![Exponent(2.0), Exponent(f64::INFINITY)]).unwrap();
        assert_eq!(json, r#"[2.0,"inf"]"#);
        let back: Vec<Exponent> = serde_json::from_str(&json).unwrap();
        assert_eq!(back[1].0, f64::INFINITY);
        let int: Exponent = serde_json::from_str("4").unwrap();
        assert_eq!(int.0, 4.0);
    }
}
