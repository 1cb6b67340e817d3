//! Scalar values shared by the evaluator, the fuzzer and the case files.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::ast::ScalarType;

/// A runtime value of one of the three CUT-lang scalar types.
///
/// Floats are ordered with `f64::total_cmp` so scalars can live in ordered
/// sets (literal sets, value pools).
#[derive(Debug, Clone, Copy)]
pub enum Scalar {
    Int(i64),
    Bool(bool),
    Float(f64),
}

impl Scalar {
    pub fn ty(&self) -> ScalarType {
        match self {
            Scalar::Int(_) => ScalarType::Int,
            Scalar::Bool(_) => ScalarType::Bool,
            Scalar::Float(_) => ScalarType::Float,
        }
    }

    pub fn default_for(ty: ScalarType) -> Scalar {
        match ty {
            ScalarType::Int => Scalar::Int(0),
            ScalarType::Bool => Scalar::Bool(false),
            ScalarType::Float => Scalar::Float(0.0),
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Scalar::Bool(b) => Some(*b),
            _ => None,
        }
    }

    /// Numeric view used for int/float promotion.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Scalar::Int(i) => Some(*i as f64),
            Scalar::Float(f) => Some(*f),
            Scalar::Bool(_) => None,
        }
    }

    /// Converts the value to `ty` where CUT-lang allows it (int widens to
    /// float). Returns `None` for any other mismatch.
    pub fn coerce(self, ty: ScalarType) -> Option<Scalar> {
        match (self, ty) {
            (Scalar::Int(i), ScalarType::Float) => Some(Scalar::Float(i as f64)),
            (v, t) if v.ty() == t => Some(v),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Scalar::Bool(_) => 0,
            Scalar::Int(_) => 1,
            Scalar::Float(_) => 2,
        }
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scalar {}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Scalar::Int(a), Scalar::Int(b)) => a.cmp(b),
            (Scalar::Bool(a), Scalar::Bool(b)) => a.cmp(b),
            (Scalar::Float(a), Scalar::Float(b)) => a.total_cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl std::hash::Hash for Scalar {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            Scalar::Int(i) => i.hash(state),
            Scalar::Bool(b) => b.hash(state),
            Scalar::Float(f) => f.to_bits().hash(state),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Int(i) => write!(f, "{i}"),
            Scalar::Bool(b) => write!(f, "{b}"),
            Scalar::Float(x) if x.is_infinite() => {
                write!(f, "{}", if *x > 0.0 { "inf" } else { "-inf" })
            }
            Scalar::Float(x) => write!(f, "{x:?}"),
        }
    }
}

// JSON encoding: ints and bools map to their JSON counterparts, finite floats
// to JSON numbers (always carrying a fraction or exponent), infinities and NaN
// to the strings "inf", "-inf" and "nan".
impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Scalar::Int(i) => s.serialize_i64(*i),
            Scalar::Bool(b) => s.serialize_bool(*b),
            Scalar::Float(x) if x.is_nan() => s.serialize_str("nan"),
            Scalar::Float(x) if x.is_infinite() => {
                s.serialize_str(if *x > 0.0 { "inf" } else { "-inf" })
            }
            Scalar::Float(x) => s.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct ScalarVisitor;

        impl Visitor<'_> for ScalarVisitor {
            type Value = Scalar;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an integer, a float, a boolean or one of \"inf\", \"-inf\", \"nan\"")
            }

            fn visit_bool<E: de::Error>(self, v: bool) -> Result<Scalar, E> {
                Ok(Scalar::Bool(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Scalar, E> {
                Ok(Scalar::Int(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Scalar, E> {
                i64::try_from(v)
                    .map(Scalar::Int)
                    .map_err(|_| E::custom(format!("integer {v} out of 64-bit signed range")))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Scalar, E> {
                Ok(Scalar::Float(v))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Scalar, E> {
                match v {
                    "inf" => Ok(Scalar::Float(f64::INFINITY)),
                    "-inf" => Ok(Scalar::Float(f64::NEG_INFINITY)),
                    "nan" => Ok(Scalar::Float(f64::NAN)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }

        d.deserialize_any(ScalarVisitor)
    }
}
