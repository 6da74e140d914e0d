//! Nonnegative path costs with a distinguished infinite value.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::Add;

/// A nonnegative cost, or [`Cost::INFINITY`] for "unreachable / the machine stops".
///
/// Finite costs are always `>= 0` and never NaN, so `Cost` is totally ordered.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Cost(f64);

impl Cost {
    pub const ZERO: Cost = Cost(0.0);
    pub const INFINITY: Cost = Cost(f64::INFINITY);

    /// Returns `None` for negative or NaN values. `f64::INFINITY` maps to [`Cost::INFINITY`].
    pub fn new(value: f64) -> Option<Cost> {
        if value.is_nan() || value < 0.0 {
            None
        } else {
            Some(Cost(value))
        }
    }

    /// Wraps a value already known to be a valid cost (validated machine data).
    pub(crate) fn from_valid(value: f64) -> Cost {
        debug_assert!(value >= 0.0, "invalid cost {value}");
        Cost(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn is_infinite(self) -> bool {
        !self.is_finite()
    }

    /// Multiplies a cost by a positive factor; infinity stays infinite.
    pub fn scale(self, factor: f64) -> Cost {
        assert!(factor > 0.0, "scale factor must be positive");
        Cost(self.0 * factor)
    }
}

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Add for Cost {
    type Output = Cost;

    fn add(self, rhs: Cost) -> Cost {
        Cost(self.0 + rhs.0)
    }
}

impl Add<f64> for Cost {
    type Output = Cost;

    fn add(self, rhs: f64) -> Cost {
        Cost(self.0 + rhs)
    }
}

impl Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::ZERO, Add::add)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_finite() {
            write!(f, "{}", self.0)
        } else {
            f.write_str("inf")
        }
    }
}
