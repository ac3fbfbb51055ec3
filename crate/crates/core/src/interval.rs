//! Closed real intervals with the two operations the greedy machinery needs:
//! endpoint addition and scaling by a positive constant.

use std::fmt;
use std::ops::Add;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeTuple, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::IntervalError;

/// A closed interval `[lo, hi]` of reals.
///
/// Construction rejects `lo > hi` and non-finite endpoints, so every value of
/// this type satisfies `lo <= hi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(IntervalError::NotFinite { lo, hi });
        }
        if lo > hi {
            return Err(IntervalError::Reversed { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    /// The degenerate interval `[value, value]`.
    pub fn point(value: f64) -> Self {
        Interval {
            lo: value,
            hi: value,
        }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    #[inline]
    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    #[inline]
    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// Multiplies both endpoints by `c`, which must be strictly positive.
    pub fn scale(&self, c: f64) -> Result<Self, IntervalError> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(IntervalError::NonPositiveScale(c));
        }
        Ok(Interval {
            lo: c * self.lo,
            hi: c * self.hi,
        })
    }

    /// Divides both endpoints by a strictly positive `d`.
    ///
    /// Kept separate from [`Interval::scale`] so that `w / d` is computed with
    /// a single rounding, matching how scenario values are divided.
    pub fn divide(&self, d: f64) -> Result<Self, IntervalError> {
        if !(d > 0.0) || !d.is_finite() {
            return Err(IntervalError::NonPositiveScale(d));
        }
        Ok(Interval {
            lo: self.lo / d,
            hi: self.hi / d,
        })
    }

    /// Same interval with the lower endpoint raised to `lo`, clamped to `hi`.
    pub(crate) fn with_floor(&self, lo: f64) -> Self {
        if lo <= self.lo {
            *self
        } else {
            Interval {
                lo: lo.min(self.hi),
                hi: self.hi,
            }
        }
    }

    /// Same interval with the upper endpoint lowered to `hi`, clamped to `lo`.
    pub(crate) fn with_cap(&self, hi: f64) -> Self {
        if hi >= self.hi {
            *self
        } else {
            Interval {
                lo: self.lo,
                hi: hi.max(self.lo),
            }
        }
    }
}

impl Add for Interval {
    type Output = Interval;

    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: self.lo + rhs.lo,
            hi: self.hi + rhs.hi,
        }
    }
}

impl std::iter::Sum for Interval {
    fn sum<I: Iterator<Item = Interval>>(iter: I) -> Interval {
        iter.fold(Interval::point(0.0), |acc, x| acc + x)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut tup = serializer.serialize_tuple(2)?;
        tup.serialize_element(&self.lo)?;
        tup.serialize_element(&self.hi)?;
        tup.end()
    }
}

// Accepts `[lo, hi]` or a bare number for the degenerate interval.
impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct IntervalVisitor;

        impl<'de> Visitor<'de> for IntervalVisitor {
            type Value = Interval;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a two-element array [lo, hi]")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Interval, E> {
                Interval::new(v, v).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Interval, E> {
                self.visit_f64(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Interval, E> {
                self.visit_f64(v as f64)
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Interval, A::Error> {
                let lo: f64 = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let hi: f64 = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<f64>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                Interval::new(lo, hi).map_err(de::Error::custom)
            }
        }

        deserializer.deserialize_any(IntervalVisitor)
    }
}
