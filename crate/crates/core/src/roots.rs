//! Sign-based bracketing used by every scalar solve in the crate.

/// Final state of a bisection: an interval whose endpoints carry opposite
/// signs (or an exact root at one of them).
#[derive(Debug, Clone, Copy)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Bracket {
    /// The endpoint with the smaller residual, ignoring non-finite ones.
    pub fn best(&self) -> f64 {
        match (self.f_lo.is_finite(), self.f_hi.is_finite()) {
            (true, true) if self.f_lo.abs() <= self.f_hi.abs() => self.lo,
            (true, true) => self.hi,
            (true, false) => self.lo,
            (false, true) => self.hi,
            (false, false) => 0.5 * (self.lo + self.hi),
        }
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo).abs()
    }
}

/// Bisect `f` on `[lo, hi]` where `f(lo)` and `f(hi)` have opposite signs.
///
/// Stops when the bracket is narrower than `rel_tol * max(|lo|, |hi|)` (plus
/// `abs_tol`), when the midpoint is no longer strictly inside the interval,
/// or when `f` is exactly zero. Infinite values of `f` are fine: only the
/// sign is used.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, f_lo: f64, f_hi: f64, rel_tol: f64, abs_tol: f64) -> Bracket
where
    F: FnMut(f64) -> f64,
{
    debug_assert!(f_lo.signum() != f_hi.signum() || f_lo == 0.0 || f_hi == 0.0);
    let mut b = Bracket { lo, hi, f_lo, f_hi };
    if f_lo == 0.0 {
        b.hi = lo;
        b.f_hi = f_lo;
        return b;
    }
    if f_hi == 0.0 {
        b.lo = hi;
        b.f_lo = f_hi;
        return b;
    }
    loop {
        let scale = b.lo.abs().max(b.hi.abs());
        if b.width() <= rel_tol * scale + abs_tol {
            return b;
        }
        let mid = 0.5 * (b.lo + b.hi);
        if mid <= b.lo.min(b.hi) || mid >= b.lo.max(b.hi) {
            return b;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Bracket { lo: mid, hi: mid, f_lo: fm, f_hi: fm };
        }
        if (fm > 0.0) == (b.f_lo > 0.0) {
            b.lo = mid;
            b.f_lo = fm;
        } else {
            b.hi = mid;
            b.f_hi = fm;
        }
    }
}
