//! Outward-rounded interval arithmetic over binary64.
//!
//! Every operation returns an interval containing the exact real result set.
//! Rounding is done per operation (see [`round`]) so there is no global FPU
//! state and values can be shared freely across threads.

mod matrix;
pub mod round;
mod vector;

pub use matrix::{gershgorin_bounds, IntervalMatrix, SpectrumBounds};
pub use vector::IntervalVector;

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use round::*;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntervalError {
    #[error("division by an interval containing zero: {0}")]
    DivisionByZeroInterval(Interval),
    #[error("square root of an entirely negative interval {0}")]
    EntirelyNegative(Interval),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("invalid endpoints [{0}, {1}]")]
    InvalidEndpoints(f64, f64),
}

/// A closed real interval `[lo, hi]` with `lo <= hi`.
///
/// The empty set is never represented by this type; operations that can
/// produce it (intersection) return `Option<Interval>`.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const ENTIRE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    /// Panics on NaN endpoints or `lo > hi`; use [`Interval::try_new`] for
    /// untrusted input.
    #[inline]
    pub fn new(lo: f64, hi: f64) -> Self {
        match Self::try_new(lo, hi) {
            Ok(v) => v,
            Err(e) => panic!("{e}"),
        }
    }

    pub fn try_new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(IntervalError::InvalidEndpoints(lo, hi));
        }
        Ok(Interval { lo, hi })
    }

    #[inline]
    pub const fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// `center ± radius`, rounded outward.
    pub fn around(center: f64, radius: f64) -> Self {
        let r = radius.abs();
        Interval {
            lo: sub_down(center, r),
            hi: add_up(center, r),
        }
    }

    /// Enclosure of the exact rational `num / den`.
    pub fn ratio(num: f64, den: f64) -> Self {
        Interval::point(num)
            .div(Interval::point(den))
            .expect("nonzero denominator")
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn is_point(self) -> bool {
        self.lo == self.hi
    }

    pub fn is_finite(self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// A point inside the interval (never outside, even after rounding).
    pub fn mid(self) -> f64 {
        if self.lo == f64::NEG_INFINITY {
            return if self.hi == f64::INFINITY { 0.0 } else { f64::MIN };
        }
        if self.hi == f64::INFINITY {
            return f64::MAX;
        }
        let m = 0.5 * self.lo + 0.5 * self.hi;
        m.clamp(self.lo, self.hi)
    }

    /// Upper bound on the distance from [`Interval::mid`] to either endpoint.
    pub fn rad(self) -> f64 {
        let m = self.mid();
        sub_up(m, self.lo).max(sub_up(self.hi, m))
    }

    /// Upper bound on `hi - lo`.
    pub fn width(self) -> f64 {
        sub_up(self.hi, self.lo)
    }

    /// Largest absolute value.
    pub fn mag(self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Smallest absolute value.
    pub fn mig(self) -> f64 {
        if self.contains(0.0) {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn abs(self) -> Self {
        Interval {
            lo: self.mig(),
            hi: self.mag(),
        }
    }

    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `other ⊆ self`.
    pub fn contains_interval(self, other: Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// `other ⊂ int(self)`.
    pub fn interior_contains(self, other: Interval) -> bool {
        self.lo < other.lo && other.hi < self.hi
    }

    pub fn hull(self, other: Interval) -> Self {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn intersect(self, other: Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn overlaps(self, other: Interval) -> bool {
        self.intersect(other).is_some()
    }

    /// Symmetric widening by `r` on both sides.
    pub fn inflate(self, r: f64) -> Self {
        Interval {
            lo: sub_down(self.lo, r),
            hi: add_up(self.hi, r),
        }
    }

    pub fn div(self, rhs: Interval) -> Result<Interval, IntervalError> {
        if rhs.contains(0.0) {
            return Err(IntervalError::DivisionByZeroInterval(rhs));
        }
        let (a, b) = (self, rhs);
        let lo = div_down(a.lo, b.lo)
            .min(div_down(a.lo, b.hi))
            .min(div_down(a.hi, b.lo))
            .min(div_down(a.hi, b.hi));
        let hi = div_up(a.lo, b.lo)
            .max(div_up(a.lo, b.hi))
            .max(div_up(a.hi, b.lo))
            .max(div_up(a.hi, b.hi));
        Ok(Interval { lo, hi })
    }

    pub fn recip(self) -> Result<Interval, IntervalError> {
        Interval::ONE.div(self)
    }

    /// Multiplication by an exactly known scalar.
    pub fn scale(self, c: f64) -> Interval {
        self * Interval::point(c)
    }

    pub fn sqr(self) -> Interval {
        self.powi(2)
    }

    /// `self^n`, tight for even powers (uses the magnitude, not repeated
    /// multiplication of a sign-straddling interval).
    pub fn powi(self, n: u32) -> Interval {
        if n == 0 {
            return Interval::ONE;
        }
        if n == 1 {
            return self;
        }
        if n % 2 == 0 {
            let a = self.abs();
            Interval {
                lo: pow_nonneg_down(a.lo, n),
                hi: pow_nonneg_up(a.hi, n),
            }
        } else {
            Interval {
                lo: pow_odd_down(self.lo, n),
                hi: pow_odd_up(self.hi, n),
            }
        }
    }

    /// Enclosure of `sqrt(self ∩ [0, ∞))`.
    pub fn sqrt_clamped(self) -> Result<Interval, IntervalError> {
        if self.hi < 0.0 {
            return Err(IntervalError::EntirelyNegative(self));
        }
        Ok(Interval {
            lo: sqrt_down(self.lo.max(0.0)),
            hi: sqrt_up(self.hi),
        })
    }

    /// `sqrt` without clamping; errors if any part is negative.
    pub fn sqrt(self) -> Result<Interval, IntervalError> {
        if self.lo < 0.0 {
            return Err(IntervalError::DomainError(format!(
                "sqrt of interval with negative part {self}"
            )));
        }
        self.sqrt_clamped()
    }

    /// Enclosure of `self^(p/q)` for `q >= 1`.
    ///
    /// Requires `self ⊆ [0, ∞)` when `q` is even, and `0 ∉ self` when `p < 0`.
    pub fn rational_pow(self, p: i32, q: u32) -> Result<Interval, IntervalError> {
        if q == 0 {
            return Err(IntervalError::DomainError("zero root index".into()));
        }
        if q % 2 == 0 && self.lo < 0.0 {
            return Err(IntervalError::DomainError(format!(
                "even root of interval with negative part {self}"
            )));
        }
        if p < 0 && self.contains(0.0) {
            return Err(IntervalError::DomainError(format!(
                "negative power of interval containing zero {self}"
            )));
        }
        let root = self.nth_root(q);
        let pos = root.powi(p.unsigned_abs());
        if p < 0 {
            pos.recip()
        } else {
            Ok(pos)
        }
    }

    /// Real q-th root (odd q accepts negative arguments).
    fn nth_root(self, q: u32) -> Interval {
        if q == 1 {
            return self;
        }
        if q == 2 {
            return Interval {
                lo: sqrt_down(self.lo.max(0.0)),
                hi: sqrt_up(self.hi),
            };
        }
        let lo = if self.lo >= 0.0 {
            root_nonneg_down(self.lo, q)
        } else {
            -root_nonneg_up(-self.lo, q)
        };
        let hi = if self.hi >= 0.0 {
            root_nonneg_up(self.hi, q)
        } else {
            -root_nonneg_down(-self.hi, q)
        };
        Interval { lo, hi }
    }
}

fn pow_nonneg_down(x: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..n {
        acc = mul_down(acc, x);
    }
    acc.max(0.0)
}

fn pow_nonneg_up(x: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..n {
        acc = mul_up(acc, x);
    }
    acc
}

fn pow_odd_down(x: f64, n: u32) -> f64 {
    if x >= 0.0 {
        pow_nonneg_down(x, n)
    } else {
        -pow_nonneg_up(-x, n)
    }
}

fn pow_odd_up(x: f64, n: u32) -> f64 {
    if x >= 0.0 {
        pow_nonneg_up(x, n)
    } else {
        -pow_nonneg_down(-x, n)
    }
}

/// Largest float r with r^q <= x (verified with upward-rounded powers).
fn root_nonneg_down(x: f64, q: u32) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return f64::MAX;
    }
    let mut r = x.powf(1.0 / q as f64);
    while r > 0.0 && pow_nonneg_up(r, q) > x {
        r = r.next_down();
    }
    r.max(0.0)
}

/// Smallest float r with r^q >= x (verified with downward-rounded powers).
fn root_nonneg_up(x: f64, q: u32) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return f64::INFINITY;
    }
    let mut r = x.powf(1.0 / q as f64);
    while pow_nonneg_down(r, q) < x {
        r = r.next_up();
    }
    r
}

impl Default for Interval {
    fn default() -> Self {
        Interval::ZERO
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Self {
        Interval::point(x)
    }
}

impl From<i32> for Interval {
    fn from(x: i32) -> Self {
        Interval::point(x as f64)
    }
}

impl Interval {
    /// Product rounded outward by one ulp per endpoint instead of exactly.
    /// Cheaper than `*` and still an enclosure.
    #[inline]
    pub fn mul_loose(self, rhs: Interval) -> Interval {
        let (a, b) = (self, rhs);
        let (lo, hi) = if a.lo >= 0.0 {
            if b.lo >= 0.0 {
                (a.lo * b.lo, a.hi * b.hi)
            } else if b.hi <= 0.0 {
                (a.hi * b.lo, a.lo * b.hi)
            } else {
                (a.hi * b.lo, a.hi * b.hi)
            }
        } else if a.hi <= 0.0 {
            if b.lo >= 0.0 {
                (a.lo * b.hi, a.hi * b.lo)
            } else if b.hi <= 0.0 {
                (a.hi * b.hi, a.lo * b.lo)
            } else {
                (a.lo * b.hi, a.lo * b.lo)
            }
        } else if b.lo >= 0.0 {
            (a.lo * b.hi, a.hi * b.hi)
        } else if b.hi <= 0.0 {
            (a.hi * b.lo, a.lo * b.lo)
        } else {
            ((a.lo * b.hi).min(a.hi * b.lo), (a.lo * b.lo).max(a.hi * b.hi))
        };
        if lo.is_nan() || hi.is_nan() {
            return a * b;
        }
        Interval { lo: lo.next_down(), hi: hi.next_up() }
    }

    /// Sum rounded outward by one ulp per endpoint.
    #[inline]
    pub fn add_loose(self, rhs: Interval) -> Interval {
        let (lo, hi) = (self.lo + rhs.lo, self.hi + rhs.hi);
        if lo.is_nan() || hi.is_nan() {
            return self + rhs;
        }
        Interval { lo: lo.next_down(), hi: hi.next_up() }
    }
}

impl Add for Interval {
    type Output = Interval;
    #[inline]
    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: add_down(self.lo, rhs.lo),
            hi: add_up(self.hi, rhs.hi),
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    #[inline]
    fn sub(self, rhs: Interval) -> Interval {
        Interval {
            lo: sub_down(self.lo, rhs.hi),
            hi: sub_up(self.hi, rhs.lo),
        }
    }
}

impl Neg for Interval {
    type Output = Interval;
    #[inline]
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Mul for Interval {
    type Output = Interval;
    #[inline]
    fn mul(self, rhs: Interval) -> Interval {
        let (a, b) = (self, rhs);
        let (lo, hi) = if a.lo >= 0.0 {
            if b.lo >= 0.0 {
                (mul_down(a.lo, b.lo), mul_up(a.hi, b.hi))
            } else if b.hi <= 0.0 {
                (mul_down(a.hi, b.lo), mul_up(a.lo, b.hi))
            } else {
                (mul_down(a.hi, b.lo), mul_up(a.hi, b.hi))
            }
        } else if a.hi <= 0.0 {
            if b.lo >= 0.0 {
                (mul_down(a.lo, b.hi), mul_up(a.hi, b.lo))
            } else if b.hi <= 0.0 {
                (mul_down(a.hi, b.hi), mul_up(a.lo, b.lo))
            } else {
                (mul_down(a.lo, b.hi), mul_up(a.lo, b.lo))
            }
        } else if b.lo >= 0.0 {
            (mul_down(a.lo, b.hi), mul_up(a.hi, b.hi))
        } else if b.hi <= 0.0 {
            (mul_down(a.hi, b.lo), mul_up(a.lo, b.lo))
        } else {
            (
                mul_down(a.lo, b.hi).min(mul_down(a.hi, b.lo)),
                mul_up(a.lo, b.lo).max(mul_up(a.hi, b.hi)),
            )
        };
        Interval { lo, hi }
    }
}

impl AddAssign for Interval {
    #[inline]
    fn add_assign(&mut self, rhs: Interval) {
        *self = *self + rhs;
    }
}

impl SubAssign for Interval {
    #[inline]
    fn sub_assign(&mut self, rhs: Interval) {
        *self = *self - rhs;
    }
}

impl MulAssign for Interval {
    #[inline]
    fn mul_assign(&mut self, rhs: Interval) {
        *self = *self * rhs;
    }
}

impl std::iter::Sum for Interval {
    fn sum<I: Iterator<Item = Interval>>(iter: I) -> Self {
        iter.fold(Interval::ZERO, |a, b| a + b)
    }
}

/// Debug and Display print with 17 significant digits; each printed endpoint
/// is moved one ulp outward first, so the printed interval contains the
/// stored one.
impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}]",
            crate::decimal::format_down(self.lo),
            crate::decimal::format_up(self.hi)
        )
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
