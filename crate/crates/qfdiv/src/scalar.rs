//! Scalar abstraction and extended-real arithmetic.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

/// Real scalar the whole crate is generic over.
///
/// `f32` and `f64` satisfy it. `RealField` supplies the transcendental
/// functions, `FromPrimitive`/`ToPrimitive` the literal conversions.
pub trait Real:
    nalgebra::RealField + Copy + num_traits::FromPrimitive + num_traits::ToPrimitive
{
}

impl<T> Real for T where
    T: nalgebra::RealField + Copy + num_traits::FromPrimitive + num_traits::ToPrimitive
{
}

/// Shorthand for lifting an `f64` literal into a generic scalar.
#[inline]
pub fn r<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("literal conversion")
}

#[inline]
pub(crate) fn to_f64<R: Real>(x: R) -> f64 {
    x.to_f64().expect("scalar to f64")
}

/// Extended real with the conventions `0 * (±inf) = 0`, `log 0 = -inf`,
/// `log +inf = +inf`. The sum `(+inf) + (-inf)` is an error, never a
/// silent value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal<R> {
    Finite(R),
    PosInf,
    NegInf,
}

impl<R: Real> ExtReal<R> {
    pub fn zero() -> Self {
        ExtReal::Finite(R::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// Finite value, or `None` for the infinities.
    pub fn finite(&self) -> Option<R> {
        match self {
            ExtReal::Finite(x) => Some(*x),
            _ => None,
        }
    }

    /// Finite value, panicking on infinities. Test helper.
    pub fn unwrap_finite(&self) -> R {
        self.finite().expect("expected finite extended real")
    }

    /// `f64` view with IEEE infinities.
    pub fn to_f64_lossy(&self) -> f64 {
        match self {
            ExtReal::Finite(x) => to_f64(*x),
            ExtReal::PosInf => f64::INFINITY,
            ExtReal::NegInf => f64::NEG_INFINITY,
        }
    }

    /// Checked addition; `(+inf) + (-inf)` is an indeterminate form.
    pub fn checked_add(self, other: Self) -> Result<Self> {
        use ExtReal::*;
        Ok(match (self, other) {
            (Finite(a), Finite(b)) => Finite(a + b),
            (PosInf, NegInf) | (NegInf, PosInf) => return Err(Error::IndeterminateForm),
            (PosInf, _) | (_, PosInf) => PosInf,
            (NegInf, _) | (_, NegInf) => NegInf,
        })
    }

    /// Multiplication by a finite weight with the `0 * (±inf) = 0` rule.
    pub fn scale(self, w: R) -> Self {
        use ExtReal::*;
        if w == R::zero() {
            return Finite(R::zero());
        }
        match self {
            Finite(x) => Finite(w * x),
            PosInf => {
                if w > R::zero() {
                    PosInf
                } else {
                    NegInf
                }
            }
            NegInf => {
                if w > R::zero() {
                    NegInf
                } else {
                    PosInf
                }
            }
        }
    }

    /// Natural log with `log 0 = -inf` and `log +inf = +inf`.
    /// Negative arguments are an evaluation error.
    pub fn ln_of(value: Self) -> Result<Self> {
        use ExtReal::*;
        match value {
            PosInf => Ok(PosInf),
            NegInf => Err(Error::Evaluation(f64::NEG_INFINITY)),
            Finite(x) => {
                if x < R::zero() {
                    Err(Error::Evaluation(to_f64(x)))
                } else if x == R::zero() {
                    Ok(NegInf)
                } else {
                    Ok(Finite(x.ln()))
                }
            }
        }
    }

    /// Checked sum over an iterator.
    pub fn sum<I: IntoIterator<Item = Self>>(items: I) -> Result<Self> {
        let mut acc = ExtReal::zero();
        for it in items {
            acc = acc.checked_add(it)?;
        }
        Ok(acc)
    }
}

impl<R: Real> PartialOrd for ExtReal<R> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use ExtReal::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.partial_cmp(b),
            (PosInf, PosInf) | (NegInf, NegInf) => Some(Ordering::Equal),
            (PosInf, _) | (_, NegInf) => Some(Ordering::Greater),
            (NegInf, _) | (_, PosInf) => Some(Ordering::Less),
        }
    }
}

impl<R: Real> fmt::Display for ExtReal<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{}", to_f64(*x)),
            ExtReal::PosInf => write!(f, "+inf"),
            ExtReal::NegInf => write!(f, "-inf"),
        }
    }
}

// Serialized as a number when finite and as the strings "+inf"/"-inf"
// otherwise, keeping reports standard JSON.
impl<R: Real> Serialize for ExtReal<R> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => s.serialize_f64(to_f64(*x)),
            ExtReal::PosInf => s.serialize_str("+inf"),
            ExtReal::NegInf => s.serialize_str("-inf"),
        }
    }
}

impl<'de, R: Real> Deserialize<'de> for ExtReal<R> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::Number(n) => {
                let x = n.as_f64().ok_or_else(|| DeError::custom("bad number"))?;
                Ok(ExtReal::Finite(
                    R::from_f64(x).ok_or_else(|| DeError::custom("unrepresentable"))?,
                ))
            }
            serde_json::Value::String(s) => match s.as_str() {
                "+inf" | "inf" => Ok(ExtReal::PosInf),
                "-inf" => Ok(ExtReal::NegInf),
                _ => Err(DeError::custom("expected number, \"+inf\" or \"-inf\"")),
            },
            _ => Err(DeError::custom("expected number or string")),
        }
    }
}
