//! 2x2 complex matrices acting on (amplitude, phase) quadrature pairs.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPhotonMatrix {
    pub m11: C64,
    pub m12: C64,
    pub m21: C64,
    pub m22: C64,
}

impl TwoPhotonMatrix {
    pub const IDENTITY: Self = Self::new(ONE, ZERO, ZERO, ONE);
    pub const ZERO: Self = Self::new(ZERO, ZERO, ZERO, ZERO);

    pub const fn new(m11: C64, m12: C64, m21: C64, m22: C64) -> Self {
        TwoPhotonMatrix { m11, m12, m21, m22 }
    }

    pub fn from_real(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Self::new(m11.into(), m12.into(), m21.into(), m22.into())
    }

    /// Quadrature rotation `[[cos, -sin], [sin, cos]]`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::from_real(c, -s, s, c)
    }

    pub fn det(&self) -> C64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn try_inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == ZERO || !det.is_finite() {
            return None;
        }
        let inv = det.inv();
        Some(Self::new(
            self.m22 * inv,
            -self.m12 * inv,
            -self.m21 * inv,
            self.m11 * inv,
        ))
    }

    pub fn conj(&self) -> Self {
        Self::new(
            self.m11.conj(),
            self.m12.conj(),
            self.m21.conj(),
            self.m22.conj(),
        )
    }

    pub fn scale(&self, k: C64) -> Self {
        Self::new(self.m11 * k, self.m12 * k, self.m21 * k, self.m22 * k)
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        [
            self.m11 * v[0] + self.m12 * v[1],
            self.m21 * v[0] + self.m22 * v[1],
        ]
    }

    pub fn entries(&self) -> [C64; 4] {
        [self.m11, self.m12, self.m21, self.m22]
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.is_finite())
    }
}

impl Mul for TwoPhotonMatrix {
    type Output = Self;

    fn mul(self, b: Self) -> Self {
        let a = self;
        Self::new(
            a.m11 * b.m11 + a.m12 * b.m21,
            a.m11 * b.m12 + a.m12 * b.m22,
            a.m21 * b.m11 + a.m22 * b.m21,
            a.m21 * b.m12 + a.m22 * b.m22,
        )
    }
}

impl Mul<C64> for TwoPhotonMatrix {
    type Output = Self;

    fn mul(self, k: C64) -> Self {
        self.scale(k)
    }
}

impl Mul<f64> for TwoPhotonMatrix {
    type Output = Self;

    fn mul(self, k: f64) -> Self {
        self.scale(k.into())
    }
}

impl Add for TwoPhotonMatrix {
    type Output = Self;

    fn add(self, b: Self) -> Self {
        Self::new(
            self.m11 + b.m11,
            self.m12 + b.m12,
            self.m21 + b.m21,
            self.m22 + b.m22,
        )
    }
}

impl Sub for TwoPhotonMatrix {
    type Output = Self;

    fn sub(self, b: Self) -> Self {
        Self::new(
            self.m11 - b.m11,
            self.m12 - b.m12,
            self.m21 - b.m21,
            self.m22 - b.m22,
        )
    }
}

impl Neg for TwoPhotonMatrix {
    type Output = Self;

    fn neg(self) -> Self {
        self * -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn product_matches_hand_expansion() {
        let i = c(1.0, 2.0);
        let a = TwoPhotonMatrix::new(i, i + 1.0, i + 2.0, i + 3.0);
        let b = TwoPhotonMatrix::new(i * 2.0, i * 3.0, i * 4.0, i * 5.0);
        let p = a * b;
        let expected = [c(-14.0, 32.0), c(-19.0, 42.0), c(-2.0, 56.0), c(-3.0, 74.0)];
        for (got, want) in p.entries().iter().zip(expected) {
            assert_abs_diff_eq!(got.re, want.re, epsilon = 1e-12);
            assert_abs_diff_eq!(got.im, want.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn inverse_and_rotation_composition() {
        let a = TwoPhotonMatrix::new(c(1.0, 0.5), c(-2.0, 0.1), c(0.3, -1.0), c(4.0, 2.0));
        let id = a * a.try_inverse().unwrap();
        assert!((id - TwoPhotonMatrix::IDENTITY).max_abs() < 1e-14);

        let r = TwoPhotonMatrix::rotation(0.3) * TwoPhotonMatrix::rotation(0.4);
        assert!((r - TwoPhotonMatrix::rotation(0.7)).max_abs() < 1e-15);
        assert!(TwoPhotonMatrix::ZERO.try_inverse().is_none());
    }
}
