use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// The 4-jet `(v, v', v'', v''')` of a solution at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State4 {
    pub v: f64,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
}

impl State4 {
    pub const ZERO: State4 = State4 { v: 0.0, v1: 0.0, v2: 0.0, v3: 0.0 };

    pub const fn new(v: f64, v1: f64, v2: f64, v3: f64) -> Self {
        State4 { v, v1, v2, v3 }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.v, self.v1, self.v2, self.v3]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        State4::new(a[0], a[1], a[2], a[3])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Image under `t -> -t`: odd derivatives change sign.
    pub fn reflect(self) -> Self {
        State4::new(self.v, -self.v1, self.v2, -self.v3)
    }
}

impl Add for State4 {
    type Output = State4;
    fn add(self, o: State4) -> State4 {
        State4::new(self.v + o.v, self.v1 + o.v1, self.v2 + o.v2, self.v3 + o.v3)
    }
}

impl AddAssign for State4 {
    fn add_assign(&mut self, o: State4) {
        *self = *self + o;
    }
}

impl Sub for State4 {
    type Output = State4;
    fn sub(self, o: State4) -> State4 {
        State4::new(self.v - o.v, self.v1 - o.v1, self.v2 - o.v2, self.v3 - o.v3)
    }
}

impl Mul<f64> for State4 {
    type Output = State4;
    fn mul(self, k: f64) -> State4 {
        State4::new(self.v * k, self.v1 * k, self.v2 * k, self.v3 * k)
    }
}

impl Neg for State4 {
    type Output = State4;
    fn neg(self) -> State4 {
        self * -1.0
    }
}
