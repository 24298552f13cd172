//! Real enclosures `[lo, hi]` tagged with the method that produced them.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EnclosureMethod {
    GridLipschitz,
    ExactFormula,
    Gelfand,
    SamplingLower,
}

impl EnclosureMethod {
    // Ordering used when two enclosures are combined: the result is only as
    // strong as its weakest input.
    fn weakness(self) -> u8 {
        match self {
            EnclosureMethod::ExactFormula => 0,
            EnclosureMethod::GridLipschitz => 1,
            EnclosureMethod::Gelfand => 2,
            EnclosureMethod::SamplingLower => 3,
        }
    }

    fn weaker(self, other: Self) -> Self {
        if other.weakness() > self.weakness() {
            other
        } else {
            self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub method: EnclosureMethod,
}

impl Interval {
    /// Panics if `lo > hi` or either endpoint is not finite.
    pub fn new(lo: f64, hi: f64, method: EnclosureMethod) -> Self {
        assert!(
            lo.is_finite() && hi.is_finite() && lo <= hi,
            "invalid interval [{lo}, {hi}]"
        );
        Self { lo, hi, method }
    }

    pub fn point(x: f64) -> Self {
        Self::new(x, x, EnclosureMethod::ExactFormula)
    }

    /// `[x - r, x + r]` with method `ExactFormula`.
    pub fn around(x: f64, radius: f64) -> Self {
        let r = radius.abs();
        Self::new(x - r, x + r, EnclosureMethod::ExactFormula)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_with(&self, x: f64, tol: f64) -> bool {
        self.lo - tol <= x && x <= self.hi + tol
    }

    pub fn overlaps(&self, other: &Interval, tol: f64) -> bool {
        self.lo <= other.hi + tol && other.lo <= self.hi + tol
    }

    pub fn with_method(mut self, method: EnclosureMethod) -> Self {
        self.method = method;
        self
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval::new(
            self.lo + other.lo,
            self.hi + other.hi,
            self.method.weaker(other.method),
        )
    }

    /// `self - other`, cross-combining endpoints.
    pub fn sub(&self, other: &Interval) -> Interval {
        Interval::new(
            self.lo - other.hi,
            self.hi - other.lo,
            self.method.weaker(other.method),
        )
    }

    pub fn scale(&self, c: f64) -> Interval {
        if c >= 0.0 {
            Interval::new(c * self.lo, c * self.hi, self.method)
        } else {
            Interval::new(c * self.hi, c * self.lo, self.method)
        }
    }

    /// Endpoint-wise `x^e` for `e ≥ 0`; negative endpoints are clamped to 0
    /// first (all powered quantities here are nonnegative by construction).
    pub fn powf(&self, e: f64) -> Interval {
        assert!(e >= 0.0, "negative exponent on interval");
        let lo = self.lo.max(0.0);
        let hi = self.hi.max(0.0);
        Interval::new(pow0(lo, e), pow0(hi, e), self.method)
    }

    /// Product of two intervals with nonnegative endpoints.
    pub fn mul_nonneg(&self, other: &Interval) -> Interval {
        let a = self.clamp_nonneg();
        let b = other.clamp_nonneg();
        Interval::new(a.lo * b.lo, a.hi * b.hi, self.method.weaker(other.method))
    }

    pub fn clamp_nonneg(&self) -> Interval {
        Interval::new(self.lo.max(0.0), self.hi.max(0.0), self.method)
    }

    /// Widens the interval outward by `r` on each side.
    pub fn inflate(&self, r: f64) -> Interval {
        Interval::new(self.lo - r.abs(), self.hi + r.abs(), self.method)
    }
}

/// `x^e` with the convention `0^0 = 1` and `0^e = 0` for `e > 0`.
#[inline]
pub fn pow0(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if x <= 0.0 {
        0.0
    } else if e == 1.0 {
        x
    } else if e == 0.5 {
        x.sqrt()
    } else if e == 2.0 {
        x * x
    } else {
        x.powf(e)
    }
}
