//! Real quaternions `w + xi + yj + zk`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// A quaternion with real components. Serialized as `[w, x, y, z]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quat {
    pub const ZERO: Quat = Quat::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quat = Quat::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quat = Quat::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quat = Quat::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quat = Quat::new(0.0, 0.0, 0.0, 1.0);

    /// The units `e_0, e_1, e_2, e_3 = 1, i, j, k`.
    pub const UNITS: [Quat; 4] = [Quat::ONE, Quat::I, Quat::J, Quat::K];

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quat { w, x, y, z }
    }

    pub const fn real(w: f64) -> Self {
        Quat::new(w, 0.0, 0.0, 0.0)
    }

    pub fn from_array(c: [f64; 4]) -> Self {
        Quat::new(c[0], c[1], c[2], c[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn conj(self) -> Self {
        Quat::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Largest absolute component.
    pub fn max_abs(self) -> f64 {
        self.w.abs().max(self.x.abs()).max(self.y.abs()).max(self.z.abs())
    }

    pub fn scale(self, s: f64) -> Self {
        Quat::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    /// Multiplicative inverse; `None` for the zero quaternion.
    pub fn inv(self) -> Option<Self> {
        let n = self.norm_sqr();
        (n > 0.0).then(|| self.conj().scale(1.0 / n))
    }

    /// Component `p` (0 = real part).
    pub fn component(self, p: usize) -> f64 {
        match p {
            0 => self.w,
            1 => self.x,
            2 => self.y,
            3 => self.z,
            _ => panic!("quaternion component index {p} out of range"),
        }
    }
}

impl From<[f64; 4]> for Quat {
    fn from(c: [f64; 4]) -> Self {
        Quat::from_array(c)
    }
}

impl From<Quat> for [f64; 4] {
    fn from(q: Quat) -> Self {
        q.to_array()
    }
}

impl Add for Quat {
    type Output = Quat;
    fn add(self, o: Quat) -> Quat {
        Quat::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Quat {
    fn add_assign(&mut self, o: Quat) {
        *self = *self + o;
    }
}

impl Sub for Quat {
    type Output = Quat;
    fn sub(self, o: Quat) -> Quat {
        Quat::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Quat {
    fn sub_assign(&mut self, o: Quat) {
        *self = *self - o;
    }
}

impl Neg for Quat {
    type Output = Quat;
    fn neg(self) -> Quat {
        Quat::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl Mul for Quat {
    type Output = Quat;
    fn mul(self, o: Quat) -> Quat {
        let (a1, b1, c1, d1) = (self.w, self.x, self.y, self.z);
        let (a2, b2, c2, d2) = (o.w, o.x, o.y, o.z);
        Quat::new(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )
    }
}

impl Mul<f64> for Quat {
    type Output = Quat;
    fn mul(self, s: f64) -> Quat {
        self.scale(s)
    }
}

impl Mul<Quat> for f64 {
    type Output = Quat;
    fn mul(self, q: Quat) -> Quat {
        q.scale(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unit_table() {
        let (i, j, k) = (Quat::I, Quat::J, Quat::K);
        let m1 = Quat::real(-1.0);
        assert_eq!(i * i, m1);
        assert_eq!(j * j, m1);
        assert_eq!(k * k, m1);
        assert_eq!(i * j * k, m1);
        assert_eq!(i * j, k);
        assert_eq!(j * i, -k);
        assert_eq!(j * k, i);
        assert_eq!(k * i, j);
    }

    #[test]
    fn inverse() {
        let q = Quat::new(1.0, -2.0, 0.5, 3.0);
        let p = q * q.inv().unwrap();
        assert!((p - Quat::ONE).max_abs() < 1e-15);
        assert!(Quat::ZERO.inv().is_none());
    }

    #[test]
    fn serde_as_array() {
        let q = Quat::new(1.0, 2.0, 3.0, 4.0);
        let s = serde_json::to_string(&q).unwrap();
        assert_eq!(s, "[1.0,2.0,3.0,4.0]");
        let back: Quat = serde_json::from_str(&s).unwrap();
        assert_eq!(back, q);
    }

    fn quat() -> impl Strategy<Value = Quat> {
        prop::array::uniform4(-10.0f64..10.0).prop_map(Quat::from_array)
    }

    proptest! {
        #[test]
        fn conj_reverses_products(p in quat(), q in quat()) {
            let lhs = (p * q).conj();
            let rhs = q.conj() * p.conj();
            prop_assert!((lhs - rhs).max_abs() < 1e-12);
        }

        #[test]
        fn norm_is_multiplicative(p in quat(), q in quat()) {
            let lhs = (p * q).norm();
            prop_assert!((lhs - p.norm() * q.norm()).abs() <= 1e-12 * (1.0 + lhs));
        }

        #[test]
        fn associative(p in quat(), q in quat(), r in quat()) {
            let d = (p * q) * r - p * (q * r);
            prop_assert!(d.max_abs() < 1e-9);
        }
    }
}
