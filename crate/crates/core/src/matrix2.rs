//! Small complex 2×2 matrices and 2-vectors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Shorthand constructor for a complex number.
#[inline]
pub const fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub type Vector2 = [Complex64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Matrix2 {
    pub m: [[Complex64; 2]; 2],
}

const ZERO: Complex64 = c64(0.0, 0.0);
const ONE: Complex64 = c64(1.0, 0.0);

impl Matrix2 {
    #[inline]
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Matrix2 { m: [[a, b], [c, d]] }
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn diag(a: Complex64, d: Complex64) -> Self {
        Self::new(a, ZERO, ZERO, d)
    }

    pub fn from_columns(c0: Vector2, c1: Vector2) -> Self {
        Self::new(c0[0], c1[0], c0[1], c1[1])
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.m[r][c]
    }

    pub fn column(&self, c: usize) -> Vector2 {
        [self.m[0][c], self.m[1][c]]
    }

    pub fn row(&self, r: usize) -> Vector2 {
        self.m[r]
    }

    #[inline]
    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    #[inline]
    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    /// Adjugate, so that `A · adj(A) = det(A) · I`.
    #[inline]
    pub fn adj(&self) -> Self {
        Self::new(self.m[1][1], -self.m[0][1], -self.m[1][0], self.m[0][0])
    }

    /// Inverse via the adjugate; `None` when the determinant is exactly zero.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == ZERO {
            None
        } else {
            Some(self.adj().scale(d.inv()))
        }
    }

    #[inline]
    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.m[0][0] * s, self.m[0][1] * s, self.m[1][0] * s, self.m[1][1] * s)
    }

    pub fn conj_transpose(&self) -> Self {
        Self::new(
            self.m[0][0].conj(),
            self.m[1][0].conj(),
            self.m[0][1].conj(),
            self.m[1][1].conj(),
        )
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.m[0][0], self.m[1][0], self.m[0][1], self.m[1][1])
    }

    #[inline]
    pub fn mul_vec(&self, v: Vector2) -> Vector2 {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;
    #[inline]
    fn mul(self, o: Matrix2) -> Matrix2 {
        let a = &self.m;
        let b = &o.m;
        Matrix2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Add for Matrix2 {
    type Output = Matrix2;
    #[inline]
    fn add(self, o: Matrix2) -> Matrix2 {
        Matrix2::new(
            self.m[0][0] + o.m[0][0],
            self.m[0][1] + o.m[0][1],
            self.m[1][0] + o.m[1][0],
            self.m[1][1] + o.m[1][1],
        )
    }
}

impl AddAssign for Matrix2 {
    #[inline]
    fn add_assign(&mut self, o: Matrix2) {
        *self = *self + o;
    }
}

impl Sub for Matrix2 {
    type Output = Matrix2;
    #[inline]
    fn sub(self, o: Matrix2) -> Matrix2 {
        self + (-o)
    }
}

impl Neg for Matrix2 {
    type Output = Matrix2;
    #[inline]
    fn neg(self) -> Matrix2 {
        self.scale(-ONE)
    }
}

/// Hermitian pairing `a · conj(b)` of two 2-vectors.
#[inline]
pub fn dot_conj(a: Vector2, b: Vector2) -> Complex64 {
    a[0] * b[0].conj() + a[1] * b[1].conj()
}

/// Euclidean norm of a 2-vector.
#[inline]
pub fn vnorm(a: Vector2) -> f64 {
    (a[0].norm_sqr() + a[1].norm_sqr()).sqrt()
}
