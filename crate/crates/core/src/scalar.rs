//! Sign plus natural-log magnitude representation for weight products.
//!
//! Products of pseudo-shift weights grow or shrink geometrically in the
//! number of factors, so they are carried as `(sign, ln|value|)` and only
//! converted back to plain floats at the last moment.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Div, Mul};

use serde::{Deserialize, Serialize};

/// Ratios above `e^700` are treated as `+inf` when leaving log-space.
pub const LOG_CLAMP: f64 = 700.0;

/// A real number stored as a sign in `{-1, 0, +1}` and `ln|value|`.
///
/// Multiplication and division are exact in log-space: log-magnitudes add
/// or subtract and signs multiply. `log_abs` is meaningless when `sign == 0`
/// and is kept at `-inf` in that case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedLogScalar {
    sign: i8,
    log_abs: f64,
}

impl SignedLogScalar {
    pub const ZERO: Self = Self {
        sign: 0,
        log_abs: f64::NEG_INFINITY,
    };
    pub const ONE: Self = Self {
        sign: 1,
        log_abs: 0.0,
    };

    pub fn from_parts(sign: i8, log_abs: f64) -> Self {
        if sign == 0 || log_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self {
                sign: sign.signum(),
                log_abs,
            }
        }
    }

    pub fn from_f64(value: f64) -> Self {
        if value == 0.0 {
            Self::ZERO
        } else {
            Self {
                sign: if value > 0.0 { 1 } else { -1 },
                log_abs: value.abs().ln(),
            }
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn log_abs(&self) -> f64 {
        self.log_abs
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// Plain value; overflows to `±inf` and underflows to `±0`.
    pub fn to_f64(&self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log_abs.exp(),
        }
    }

    /// Plain value with magnitudes above `e^LOG_CLAMP` sent to `±inf`.
    pub fn to_f64_clamped(&self) -> f64 {
        if self.sign != 0 && self.log_abs > LOG_CLAMP {
            f64::from(self.sign) * f64::INFINITY
        } else {
            self.to_f64()
        }
    }

    pub fn abs(&self) -> Self {
        Self {
            sign: self.sign.abs(),
            log_abs: self.log_abs,
        }
    }

    pub fn recip(&self) -> Self {
        assert!(self.sign != 0, "reciprocal of zero");
        Self {
            sign: self.sign,
            log_abs: -self.log_abs,
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        *self * Self::from_f64(factor)
    }

    /// Orders by absolute value.
    pub fn cmp_abs(&self, other: &Self) -> Ordering {
        match (self.sign == 0, other.sign == 0) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (false, false) => self.log_abs.total_cmp(&other.log_abs),
        }
    }

    /// `|self| < bound` for a nonnegative plain bound, decided in log-space.
    pub fn abs_lt(&self, bound: f64) -> bool {
        if bound <= 0.0 {
            return false;
        }
        self.sign == 0 || self.log_abs < bound.ln()
    }

    /// `|self| > bound` for a nonnegative plain bound, decided in log-space.
    pub fn abs_gt(&self, bound: f64) -> bool {
        if self.sign == 0 {
            return false;
        }
        bound <= 0.0 || self.log_abs > bound.ln()
    }
}

impl Default for SignedLogScalar {
    fn default() -> Self {
        Self::ONE
    }
}

impl Mul for SignedLogScalar {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        if self.sign == 0 || rhs.sign == 0 {
            return Self::ZERO;
        }
        Self {
            sign: self.sign * rhs.sign,
            log_abs: self.log_abs + rhs.log_abs,
        }
    }
}

impl Div for SignedLogScalar {
    type Output = Self;

    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl From<f64> for SignedLogScalar {
    fn from(value: f64) -> Self {
        Self::from_f64(value)
    }
}

impl fmt::Display for SignedLogScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            s => write!(f, "{}exp({})", if s > 0 { "+" } else { "-" }, self.log_abs),
        }
    }
}
