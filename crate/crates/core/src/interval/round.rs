//! Directed rounding of binary64 operations without touching the FPU mode.
//!
//! Each operation is computed in round-to-nearest, then the exact error is
//! recovered with an error-free transformation (TwoSum / FMA residual). The
//! result is moved one ulp outward only when the error points that way, so
//! exactly representable results stay exact.

/// Below this magnitude FMA residuals may be inexact (gradual underflow).
const TINY: f64 = 1.0e-290;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// `a·b − c` with the correct sign whenever `c` is within a factor two of
/// `fl(a·b)`, which covers every residual used here.
#[inline]
fn residual(a: f64, b: f64, c: f64) -> f64 {
    if cfg!(target_feature = "fma") || a.abs() > SPLIT_MAX || b.abs() > SPLIT_MAX {
        return a.mul_add(b, -c);
    }
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    (p - c) + e
}

const SPLIT_MAX: f64 = 1.0e290;

#[inline]
fn split(a: f64) -> (f64, f64) {
    let t = 134_217_729.0 * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

#[inline]
fn overflow_down(s: f64, a: f64, b: f64) -> Option<f64> {
    if s.is_finite() {
        return None;
    }
    if s.is_nan() {
        return Some(f64::NEG_INFINITY);
    }
    if s == f64::INFINITY && a.is_finite() && b.is_finite() {
        return Some(f64::MAX);
    }
    Some(s)
}

#[inline]
fn overflow_up(s: f64, a: f64, b: f64) -> Option<f64> {
    if s.is_finite() {
        return None;
    }
    if s.is_nan() {
        return Some(f64::INFINITY);
    }
    if s == f64::NEG_INFINITY && a.is_finite() && b.is_finite() {
        return Some(f64::MIN);
    }
    Some(s)
}

#[inline]
pub fn add_down(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if let Some(v) = overflow_down(s, a, b) {
        return v;
    }
    if e < 0.0 {
        s.next_down()
    } else {
        s
    }
}

#[inline]
pub fn add_up(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if let Some(v) = overflow_up(s, a, b) {
        return v;
    }
    if e > 0.0 {
        s.next_up()
    } else {
        s
    }
}

#[inline]
pub fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

#[inline]
pub fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

#[inline]
pub fn mul_down(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if let Some(v) = overflow_down(p, a, b) {
        return v;
    }
    if p.abs() < TINY {
        return p.next_down();
    }
    if residual(a, b, p) < 0.0 {
        p.next_down()
    } else {
        p
    }
}

#[inline]
pub fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if let Some(v) = overflow_up(p, a, b) {
        return v;
    }
    if p.abs() < TINY {
        return p.next_up();
    }
    if residual(a, b, p) > 0.0 {
        p.next_up()
    } else {
        p
    }
}

/// Sign of (exact a/b) - q, given q = fl(a/b).
#[inline]
fn div_residual_sign(a: f64, b: f64, q: f64) -> f64 {
    let r = -residual(q, b, a);
    if r == 0.0 {
        0.0
    } else if (r > 0.0) == (b > 0.0) {
        1.0
    } else {
        -1.0
    }
}

#[inline]
pub fn div_down(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if !q.is_finite() {
        return if q.is_nan() { f64::NEG_INFINITY } else if q > 0.0 && a.is_finite() && b != 0.0 { f64::MAX } else { q };
    }
    if q.abs() < TINY || b.is_infinite() {
        return q.next_down();
    }
    if div_residual_sign(a, b, q) < 0.0 {
        q.next_down()
    } else {
        q
    }
}

#[inline]
pub fn div_up(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if !q.is_finite() {
        return if q.is_nan() { f64::INFINITY } else if q < 0.0 && a.is_finite() && b != 0.0 { f64::MIN } else { q };
    }
    if q.abs() < TINY || b.is_infinite() {
        return q.next_up();
    }
    if div_residual_sign(a, b, q) > 0.0 {
        q.next_up()
    } else {
        q
    }
}

/// Lower bound of sqrt(a) for a >= 0.
#[inline]
pub fn sqrt_down(a: f64) -> f64 {
    if a <= 0.0 {
        return 0.0;
    }
    let r = a.sqrt();
    if !r.is_finite() {
        return r;
    }
    if a < TINY {
        return r.next_down().max(0.0);
    }
    if residual(r, r, a) > 0.0 {
        r.next_down()
    } else {
        r
    }
}

/// Upper bound of sqrt(a) for a >= 0.
#[inline]
pub fn sqrt_up(a: f64) -> f64 {
    if a <= 0.0 {
        return 0.0;
    }
    let r = a.sqrt();
    if !r.is_finite() {
        return r;
    }
    if a < TINY {
        return r.next_up();
    }
    if residual(r, r, a) < 0.0 {
        r.next_up()
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_results_are_not_widened() {
        assert_eq!(add_down(1.0, 3.0), 4.0);
        assert_eq!(add_up(2.0, 4.0), 6.0);
        assert_eq!(mul_down(1.5, 2.0), 3.0);
        assert_eq!(div_up(1.0, 4.0), 0.25);
        assert_eq!(sqrt_down(9.0), 3.0);
        assert_eq!(sqrt_up(4.0), 2.0);
    }

    #[test]
    fn inexact_results_bracket() {
        assert!(add_down(0.1, 0.2) < add_up(0.1, 0.2));
        let lo = div_down(1.0, 3.0);
        let hi = div_up(1.0, 3.0);
        assert!(lo < hi);
        assert!(mul_down(lo, 3.0) <= 1.0 && mul_up(hi, 3.0) >= 1.0);
        let r_lo = sqrt_down(2.0);
        let r_hi = sqrt_up(2.0);
        assert!(mul_down(r_lo, r_lo) <= 2.0);
        assert!(mul_up(r_hi, r_hi) >= 2.0);
    }

    #[test]
    fn overflow_goes_to_max_not_infinity_on_the_safe_side() {
        assert_eq!(add_down(f64::MAX, f64::MAX), f64::MAX);
        assert_eq!(add_up(f64::MAX, f64::MAX), f64::INFINITY);
    }
}
