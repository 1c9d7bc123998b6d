//! Nonnegative reals stored by their natural logarithm.
//!
//! Supercritical hitting times grow like `e^{Θ(n)}` and binomial tails shrink
//! at the same rate, so the quantities that combine them are kept on the log
//! scale throughout.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul};

/// Above this log-magnitude the linear value is not materialized.
pub const MAX_LINEAR_LN: f64 = 700.0;

/// A value in `[0, ∞)` represented as `ln(value)`; zero is `-∞`.
#[derive(Clone, Copy, PartialEq)]
pub struct LogNonNegative(f64);

/// `ln(e^a + e^b)` without overflow.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ e^{x_k}` with Neumaier-compensated accumulation of the scaled terms.
pub fn log_sum_exp(logs: &[f64]) -> f64 {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    if max == f64::INFINITY {
        return max;
    }
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &x in logs {
        let t = (x - max).exp();
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    max + (sum + comp).ln()
}

impl LogNonNegative {
    pub const ZERO: Self = Self(f64::NEG_INFINITY);
    pub const ONE: Self = Self(0.0);

    /// Wrap a log-magnitude. `NaN` and `+∞` are rejected.
    pub fn from_ln(ln: f64) -> Self {
        assert!(
            !ln.is_nan() && ln != f64::INFINITY,
            "log-magnitude must be finite or -inf, got {ln}"
        );
        Self(ln)
    }

    /// Wrap a linear value `x ≥ 0`.
    pub fn from_value(x: f64) -> Self {
        assert!(x >= 0.0 && x.is_finite(), "expected finite x >= 0, got {x}");
        Self(x.ln())
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// The linear value, or `None` when it is too large to be meaningful in `f64`.
    pub fn to_linear(self) -> Option<f64> {
        (self.0 <= MAX_LINEAR_LN).then(|| self.0.exp())
    }

    /// The linear value, saturating to `+∞`.
    pub fn value(self) -> f64 {
        self.to_linear().unwrap_or(f64::INFINITY)
    }

    /// `self - rhs`, or `None` when the difference would be negative.
    pub fn checked_sub(self, rhs: Self) -> Option<Self> {
        match self.0.partial_cmp(&rhs.0)? {
            Ordering::Less => None,
            Ordering::Equal => Some(Self::ZERO),
            Ordering::Greater if rhs.is_zero() => Some(self),
            Ordering::Greater => Some(Self(self.0 + (-(rhs.0 - self.0).exp()).ln_1p())),
        }
    }

    pub fn powi(self, k: i32) -> Self {
        if self.is_zero() {
            return if k == 0 { Self::ONE } else { Self::ZERO };
        }
        Self(self.0 * k as f64)
    }

    pub fn recip(self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Self(-self.0)
    }

    /// Relative difference `|a - b| / max(a, b)` computed on the log scale.
    pub fn relative_difference(self, other: Self) -> f64 {
        if self.is_zero() && other.is_zero() {
            return 0.0;
        }
        let d = (self.0 - other.0).abs();
        -(-d).exp_m1()
    }
}

impl fmt::Debug for LogNonNegative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LogNonNegative(ln={})", self.0)
    }
}

impl fmt::Display for LogNonNegative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_linear() {
            Some(v) => write!(f, "{v}"),
            None => write!(f, "exp({})", self.0),
        }
    }
}

impl PartialOrd for LogNonNegative {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl Add for LogNonNegative {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(log_add_exp(self.0, rhs.0))
    }
}

impl Mul for LogNonNegative {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        Self(self.0 + rhs.0)
    }
}

impl Div for LogNonNegative {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        assert!(!rhs.is_zero(), "division by zero");
        if self.is_zero() {
            return Self::ZERO;
        }
        Self(self.0 - rhs.0)
    }
}

impl Sum for LogNonNegative {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        let logs: Vec<f64> = iter.map(|x| x.0).collect();
        Self(log_sum_exp(&logs))
    }
}

impl<'a> Sum<&'a LogNonNegative> for LogNonNegative {
    fn sum<I: Iterator<Item = &'a Self>>(iter: I) -> Self {
        iter.copied().sum()
    }
}
