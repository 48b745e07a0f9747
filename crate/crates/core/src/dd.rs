//! Double-double arithmetic: a value is the unevaluated sum `hi + lo` of
//! two non-overlapping f64, giving about 32 significant digits.

use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Dd {
    hi: f64,
    lo: f64,
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
}

fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd { hi: p, lo: a.mul_add(b, -p) }
}

const LN_2: Dd = Dd { hi: std::f64::consts::LN_2, lo: 2.319_046_813_846_299_6e-17 };

impl Dd {
    pub fn new(hi: f64, lo: f64) -> Self {
        two_sum(hi, lo)
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::from(0.0);
        }
        let x = self.hi.sqrt();
        let r = self - two_prod(x, x);
        Dd::from(x) + r.hi / (2.0 * x)
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.0 {
            return Dd::from(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::from(0.0);
        }
        let k = (self.hi / LN_2.hi).round();
        // |r| <= ln2/2 / 512 after the scaling
        let r = (self - LN_2 * k) * (1.0 / 512.0);
        let mut term = r;
        let mut sum = r;
        for j in 2..=12 {
            term = term * r / j as f64;
            sum += term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        // (1 + s)^2 - 1 = s (s + 2), nine times
        for _ in 0..9 {
            sum = sum * (sum + 2.0);
        }
        let scale = 2f64.powi(k as i32);
        Dd { hi: (sum + 1.0).hi * scale, lo: (sum + 1.0).lo * scale }
    }

    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::from(f64::NAN);
        }
        let mut x = Dd::from(self.hi.ln());
        for _ in 0..2 {
            x = x + self * (-x).exp() - 1.0;
        }
        x
    }

    pub fn powi(self, n: i32) -> Self {
        let mut base = self;
        let mut e = n.unsigned_abs();
        let mut acc = Dd::from(1.0);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        if n < 0 {
            Dd::from(1.0) / acc
        } else {
            acc
        }
    }

    pub fn powf(self, q: f64) -> Self {
        (self.ln() * q).exp()
    }

    #[cfg(test)]
    pub fn cosh(self) -> Self {
        let e = self.exp();
        (e + Dd::from(1.0) / e) * 0.5
    }

    #[cfg(test)]
    pub fn tanh(self) -> Self {
        let e2 = (self * 2.0).exp();
        (e2 - 1.0) / (e2 + 1.0)
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let s = two_sum(self.hi, b.hi);
        let t = two_sum(self.lo, b.lo);
        let s = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(s.hi, s.lo + t.lo)
    }
}

impl Add<f64> for Dd {
    type Output = Dd;
    fn add(self, b: f64) -> Dd {
        let s = two_sum(self.hi, b);
        quick_two_sum(s.hi, s.lo + self.lo)
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Sub<f64> for Dd {
    type Output = Dd;
    fn sub(self, b: f64) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let p = two_prod(self.hi, b.hi);
        quick_two_sum(p.hi, p.lo + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    fn mul(self, b: f64) -> Dd {
        let p = two_prod(self.hi, b);
        quick_two_sum(p.hi, p.lo + self.lo * b)
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * q1;
        let q2 = r.hi / b.hi;
        let r = r - b * q2;
        let q3 = r.hi / b.hi;
        quick_two_sum(q1, q2) + q3
    }
}

impl Div<f64> for Dd {
    type Output = Dd;
    fn div(self, b: f64) -> Dd {
        self / Dd::from(b)
    }
}

impl AddAssign for Dd {
    fn add_assign(&mut self, b: Dd) {
        *self = *self + b;
    }
}

impl SubAssign for Dd {
    fn sub_assign(&mut self, b: Dd) {
        *self = *self - b;
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, b: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&b.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&b.lo),
            o => o,
        }
    }
}

impl PartialEq<f64> for Dd {
    fn eq(&self, b: &f64) -> bool {
        self.hi == *b && self.lo == 0.0
    }
}

impl PartialOrd<f64> for Dd {
    fn partial_cmp(&self, b: &f64) -> Option<Ordering> {
        self.partial_cmp(&Dd::from(*b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Dd, b: Dd, tol: f64) -> bool {
        ((a - b) / b).abs().hi < tol
    }

    #[test]
    fn division_is_full_precision() {
        let third = Dd::from(1.0) / 3.0;
        assert!((third * 3.0 - 1.0).abs().hi < 1e-31);
        let x = Dd::new(1.234_567_890_123_456_7, 3.2e-17);
        let y = Dd::new(-0.987_654_321, 1.1e-18);
        assert!(close((x / y) * y, x, 1e-31));
    }

    #[test]
    fn exp_ln_round_trip() {
        for k in -40..=40 {
            let x = Dd::from(k as f64 * 0.37) + 1e-18;
            assert!(close(x.exp().ln(), x, 1e-30) || x.abs().hi < 1e-10);
            assert!(close(x.exp() * (-x).exp(), Dd::from(1.0), 1e-31));
        }
    }

    #[test]
    fn exp_of_half_matches_reference() {
        // e^{1/2} = 1.6487212707001281468486507878141635716537761007101...
        let e = Dd::from(0.5).exp();
        assert_eq!(e.hi, 1.6487212707001282);
        assert!((e.lo - -4.731_568_479_435_833e-17).abs() < 1e-31);
    }

    #[test]
    fn powers() {
        let x = Dd::from(1.7);
        assert!(close(x.powi(3), x * x * x, 1e-31));
        assert!(close(x.powi(-2) * x * x, Dd::from(1.0), 1e-31));
        assert!(close(x.powf(2.5), x * x * x.sqrt(), 1e-30));
        assert!(close(Dd::from(2.0).sqrt() * Dd::from(2.0).sqrt(), Dd::from(2.0), 1e-31));
    }
}
