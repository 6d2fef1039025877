//! Boundary matrix algebra and the unperturbed operator `P = 0`.
//!
//! The boundary conditions read `U(y) = C y(0) + D y(π) = 0` with the
//! 2×4 matrix `U = (C | D)`. Everything about the unperturbed problem is
//! available in closed form from the six column minors of `U`.

use crate::error::{DiracError, Result};
use crate::matrix2::{c64, Matrix2, Vector2};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const RANK_TOL: f64 = 1e-10;
const CLASS_TOL: f64 = 1e-10;
const ZERO_SYSTEM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryMatrix {
    #[serde(rename = "U")]
    pub rows: [[Complex64; 4]; 2],
}

impl BoundaryMatrix {
    /// Validates the rank-2 condition.
    pub fn new(rows: [[Complex64; 4]; 2]) -> Result<Self> {
        let u = BoundaryMatrix { rows };
        if rows.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(DiracError::InvalidInput("non-finite boundary entry".into()));
        }
        u.minors()?;
        Ok(u)
    }

    pub fn from_blocks(c: Matrix2, d: Matrix2) -> Result<Self> {
        Self::new([
            [c.get(0, 0), c.get(0, 1), d.get(0, 0), d.get(0, 1)],
            [c.get(1, 0), c.get(1, 1), d.get(1, 0), d.get(1, 1)],
        ])
    }

    pub fn from_real(rows: [[f64; 4]; 2]) -> Result<Self> {
        Self::new(rows.map(|r| r.map(|x| c64(x, 0.0))))
    }

    /// `C = I`, `D = -I`: `y(0) = y(π)`.
    pub fn periodic() -> Self {
        Self::from_real([[1.0, 0.0, -1.0, 0.0], [0.0, 1.0, 0.0, -1.0]]).unwrap()
    }

    /// `C = D = I`: `y(0) = -y(π)`.
    pub fn antiperiodic() -> Self {
        Self::from_real([[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0]]).unwrap()
    }

    /// `y1(0) + y2(0) = 0`, `y1(π) + y2(π) = 0`.
    pub fn separated() -> Self {
        Self::from_real([[1.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0]]).unwrap()
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "periodic" => Ok(Self::periodic()),
            "antiperiodic" => Ok(Self::antiperiodic()),
            "separated" => Ok(Self::separated()),
            _ => Err(DiracError::InvalidInput(format!("unknown boundary preset `{name}`"))),
        }
    }

    pub fn c(&self) -> Matrix2 {
        let r = &self.rows;
        Matrix2::new(r[0][0], r[0][1], r[1][0], r[1][1])
    }

    pub fn d(&self) -> Matrix2 {
        let r = &self.rows;
        Matrix2::new(r[0][2], r[0][3], r[1][2], r[1][3])
    }

    /// Replace the `D` block by `s · D`.
    pub fn scale_d(&self, s: Complex64) -> Result<Self> {
        Self::from_blocks(self.c(), self.d().scale(s))
    }

    /// `T · U` for a 2×2 matrix `T`.
    pub fn left_multiply(&self, t: &Matrix2) -> Result<Self> {
        Self::from_blocks(*t * self.c(), *t * self.d())
    }

    /// Apply the boundary functional to boundary values `y(0)`, `y(π)`.
    pub fn apply(&self, y0: Vector2, ypi: Vector2) -> Vector2 {
        let a = self.c().mul_vec(y0);
        let b = self.d().mul_vec(ypi);
        [a[0] + b[0], a[1] + b[1]]
    }

    fn max_entry(&self) -> f64 {
        self.rows.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn minor(&self, a: usize, b: usize) -> Complex64 {
        let r = &self.rows;
        r[0][a] * r[1][b] - r[0][b] * r[1][a]
    }

    pub fn minors(&self) -> Result<MinorSet> {
        let s = MinorSet {
            j12: self.minor(0, 1),
            j13: self.minor(0, 2),
            j14: self.minor(0, 3),
            j23: self.minor(1, 2),
            j24: self.minor(1, 3),
            j34: self.minor(2, 3),
        };
        let scale = self.max_entry();
        if scale == 0.0 || s.max_abs() <= RANK_TOL * scale * scale {
            return Err(DiracError::RankDeficient);
        }
        Ok(s)
    }

    pub fn classify(&self) -> Result<BcClass> {
        Ok(self.minors()?.classify())
    }

    fn require_regular(&self) -> Result<MinorSet> {
        let j = self.minors()?;
        if j.classify().kind == BcKind::NonRegular {
            return Err(DiracError::NonRegularInput);
        }
        Ok(j)
    }

    /// Boundary matrix of the adjoint operator.
    pub fn adjoint(&self) -> Result<Self> {
        let j = self.require_regular()?;
        let z = c64(0.0, 0.0);
        Self::new([
            [j.j23.conj(), j.j13.conj(), -j.j12.conj(), z],
            [z, -j.j34.conj(), j.j24.conj(), j.j23.conj()],
        ])
    }

    pub fn unperturbed_spectrum(&self) -> Result<ModelSpectrum> {
        let j = self.require_regular()?;
        ModelSpectrum::from_minors(&j)
    }

    /// Characteristic determinant of the unperturbed problem.
    pub fn delta0(&self, lambda: Complex64) -> Result<Complex64> {
        let j = self.minors()?;
        Ok(j.delta0(lambda))
    }

    /// Unperturbed characteristic matrix `C + D diag(e^{iλπ}, e^{-iλπ})`.
    pub fn char_matrix0(&self, lambda: Complex64) -> Matrix2 {
        let e = Matrix2::diag((Complex64::i() * lambda * PI).exp(), (-Complex64::i() * lambda * PI).exp());
        self.c() + self.d() * e
    }

    /// Normalized eigenfunctions of the unperturbed operator at `λ_n⁰`.
    pub fn model_eigenfunction(&self, n: i64) -> Result<Vec<ModelEigenfunction>> {
        let spec = self.unperturbed_spectrum()?;
        let lambda = spec.lambda0(n);
        let m = self.char_matrix0(lambda);
        let scale = self.max_entry();
        if m.max_abs() <= ZERO_SYSTEM_TOL * scale {
            let one = c64(1.0, 0.0);
            let zero = c64(0.0, 0.0);
            return Ok(vec![
                ModelEigenfunction::normalized(lambda, [one, zero]),
                ModelEigenfunction::normalized(lambda, [zero, one]),
            ]);
        }
        Ok(vec![ModelEigenfunction::normalized(lambda, null_vector(&m))])
    }

    /// A random regular boundary matrix with entries in the unit square.
    pub fn random_regular<R: Rng>(rng: &mut R) -> Self {
        loop {
            let mut rows = [[c64(0.0, 0.0); 4]; 2];
            for r in rows.iter_mut() {
                for z in r.iter_mut() {
                    *z = c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
            if let Ok(u) = Self::new(rows) {
                let j = u.minors().unwrap();
                if (j.j14 * j.j23).norm() > 1e-3 {
                    return u;
                }
            }
        }
    }
}

/// Kernel vector `(M12, -M11)` of a rank-one 2×2 matrix, taken from the
/// row of larger norm.
pub fn null_vector(m: &Matrix2) -> Vector2 {
    let r0 = m.row(0);
    let r1 = m.row(1);
    let n0 = r0[0].norm_sqr() + r0[1].norm_sqr();
    let n1 = r1[0].norm_sqr() + r1[1].norm_sqr();
    let r = if n0 >= n1 { r0 } else { r1 };
    [r[1], -r[0]]
}

/// Multiply `ω` by a unimodular factor that makes its larger component
/// real positive. Ties go to the first component.
pub fn fix_phase(w: Vector2) -> Vector2 {
    let k = if w[0].norm() >= w[1].norm() { 0 } else { 1 };
    let a = w[k].norm();
    if a == 0.0 {
        return w;
    }
    let f = w[k].conj() / a;
    [w[0] * f, w[1] * f]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinorSet {
    pub j12: Complex64,
    pub j13: Complex64,
    pub j14: Complex64,
    pub j23: Complex64,
    pub j24: Complex64,
    pub j34: Complex64,
}

impl MinorSet {
    pub fn j32(&self) -> Complex64 {
        -self.j23
    }

    pub fn j42(&self) -> Complex64 {
        -self.j24
    }

    /// `J_αβ` for 1-based column indices, with `J_βα = -J_αβ`.
    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        let v = match (lo, hi) {
            (1, 2) => self.j12,
            (1, 3) => self.j13,
            (1, 4) => self.j14,
            (2, 3) => self.j23,
            (2, 4) => self.j24,
            (3, 4) => self.j34,
            _ => c64(0.0, 0.0),
        };
        v * sign
    }

    pub fn max_abs(&self) -> f64 {
        [self.j12, self.j13, self.j14, self.j23, self.j24, self.j34]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `J12 J34 - J13 J24 + J14 J23`, identically zero.
    pub fn plucker(&self) -> Complex64 {
        self.j12 * self.j34 - self.j13 * self.j24 + self.j14 * self.j23
    }

    pub fn discriminant(&self) -> Complex64 {
        let s = self.j12 + self.j34;
        s * s + 4.0 * self.j14 * self.j23
    }

    pub fn classify(&self) -> BcClass {
        let m = self.max_abs();
        let disc = self.discriminant();
        let kind = if (self.j14 * self.j23).norm() <= CLASS_TOL * m * m {
            BcKind::NonRegular
        } else if disc.norm() <= CLASS_TOL * m * m {
            BcKind::RegularNotStrong
        } else {
            BcKind::StronglyRegular
        };
        BcClass { kind, discriminant: disc }
    }

    pub fn delta0(&self, lambda: Complex64) -> Complex64 {
        let e = (Complex64::i() * PI * lambda).exp();
        (self.j12 + self.j34) - self.j23 * e + self.j14 / e
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BcKind {
    NonRegular,
    RegularNotStrong,
    StronglyRegular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BcClass {
    pub kind: BcKind,
    pub discriminant: Complex64,
}

impl BcClass {
    pub fn is_regular(&self) -> bool {
        self.kind != BcKind::NonRegular
    }
}

/// The two interleaved eigenvalue series of the unperturbed operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpectrum {
    pub z0: Complex64,
    pub z1: Complex64,
    pub kappa0: Complex64,
    pub kappa1: Complex64,
    /// Both roots coincide, so `λ⁰_{2k} = λ⁰_{2k+1}`.
    pub doubled: bool,
}

/// Principal logarithm with the imaginary part in `(-π, π]`; points on the
/// negative real axis are given imaginary part `π`.
pub fn log_branch(z: Complex64) -> Complex64 {
    let arg = if z.re < 0.0 && z.im.abs() <= 1e-14 * z.norm() { PI } else { z.arg() };
    c64(z.norm().ln(), arg)
}

impl ModelSpectrum {
    fn from_minors(j: &MinorSet) -> Result<Self> {
        let a = j.j23;
        let b = -(j.j12 + j.j34);
        let c = -j.j14;
        let doubled = j.classify().kind == BcKind::RegularNotStrong;
        let (r0, r1) = if doubled {
            let z = -b / (2.0 * a);
            (z, z)
        } else {
            let sq = j.discriminant().sqrt();
            let s = if (b.conj() * sq).re >= 0.0 { sq } else { -sq };
            let q = -(b + s) / 2.0;
            (q / a, c / q)
        };
        let scale = a.norm() + b.norm() + c.norm();
        for z in [r0, r1] {
            let res = (a * z * z + b * z + c).norm();
            if !(res <= 1e-12 * scale * (1.0 + z.norm_sqr())) {
                return Err(DiracError::NewtonFailure("unperturbed quadratic".into()));
            }
        }
        let kappa = |z: Complex64| -Complex64::i() / PI * log_branch(z);
        // Either root may start the first series; keep the assignment that
        // satisfies the ordering rule.
        let candidates = [(r0, r1), (r1, r0)];
        for &(z0, z1) in &candidates {
            let k0 = kappa(z0);
            let k1 = kappa(z1) - 1.0;
            if ordering_holds(k0, k1) {
                return Ok(ModelSpectrum { z0, z1, kappa0: k0, kappa1: k1, doubled });
            }
        }
        Err(DiracError::NewtonFailure("no root assignment satisfies the ordering".into()))
    }

    /// `λ_n⁰ = κ_{n mod 2} + n`.
    pub fn lambda0(&self, n: i64) -> Complex64 {
        let k = if n.rem_euclid(2) == 0 { self.kappa0 } else { self.kappa1 };
        k + n as f64
    }
}

fn ordering_holds(k0: Complex64, k1: Complex64) -> bool {
    const EPS: f64 = 1e-12;
    let upper = k1.re + 1.0;
    if !(k0.re > -1.0 && upper <= 1.0 + EPS && k0.re <= upper + EPS) {
        return false;
    }
    if (k0.re - upper).abs() <= EPS {
        return k0.im <= k1.im + EPS;
    }
    true
}

/// `ω_1 e^{iλx}, ω_2 e^{-iλx}` with unit norm in `L²(0,π)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelEigenfunction {
    pub lambda: Complex64,
    pub omega: Vector2,
}

/// `∫_0^π e^{-2sx} dx`.
fn exp_weight(s: f64) -> f64 {
    let t = 2.0 * s * PI;
    if t.abs() < 1e-8 {
        PI * (1.0 - t / 2.0)
    } else {
        -(-t).exp_m1() / (2.0 * s)
    }
}

impl ModelEigenfunction {
    fn normalized(lambda: Complex64, w: Vector2) -> Self {
        let s = lambda.im;
        let n2 = w[0].norm_sqr() * exp_weight(s) + w[1].norm_sqr() * exp_weight(-s);
        let w = fix_phase(w);
        let k = 1.0 / n2.sqrt();
        ModelEigenfunction { lambda, omega: [w[0] * k, w[1] * k] }
    }

    pub fn eval(&self, x: f64) -> Vector2 {
        let e = (Complex64::i() * self.lambda * x).exp();
        [self.omega[0] * e, self.omega[1] / e]
    }

    pub fn boundary_values(&self) -> (Vector2, Vector2) {
        (self.eval(0.0), self.eval(PI))
    }
}

/// Boundary term of the Lagrange identity,
/// `⟨L f, g⟩ - ⟨f, L* g⟩ = (B f, g)|_0^π` with `B = diag(-i, i)`.
pub fn lagrange_boundary_form(f0: Vector2, fpi: Vector2, g0: Vector2, gpi: Vector2) -> Complex64 {
    let i = Complex64::i();
    let form = |f: Vector2, g: Vector2| -i * f[0] * g[0].conj() + i * f[1] * g[1].conj();
    form(fpi, gpi) - form(f0, g0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn preset_minors() {
        let j = BoundaryMatrix::periodic().minors().unwrap();
        assert_eq!((j.j12, j.j14, j.j23, j.j34), (c64(1., 0.), c64(-1., 0.), c64(1., 0.), c64(1., 0.)));
        assert_eq!((j.j13, j.j24), (c64(0., 0.), c64(0., 0.)));
        let j = BoundaryMatrix::separated().minors().unwrap();
        assert_eq!((j.j12, j.j34), (c64(0., 0.), c64(0., 0.)));
        for v in [j.j13, j.j14, j.j23, j.j24] {
            assert_eq!(v, c64(1., 0.));
        }
        let u = BoundaryMatrix::from_real([[1., 0., 0., 0.], [0., 1., 0., 0.]]).unwrap();
        let j = u.minors().unwrap();
        assert_eq!(j.j12, c64(1., 0.));
        assert_eq!(j.max_abs(), 1.0);
        assert_eq!(j.j34, c64(0., 0.));
        assert_eq!(j.get(3, 2), -j.j23);
    }

    #[test]
    fn rank_deficient_rejected() {
        let r = BoundaryMatrix::from_real([[1., 2., 3., 4.], [2., 4., 6., 8.]]);
        assert_eq!(r, Err(DiracError::RankDeficient));
        let r = BoundaryMatrix::from_real([[0.; 4]; 2]);
        assert_eq!(r, Err(DiracError::RankDeficient));
    }

    #[test]
    fn classification_examples() {
        let c = BoundaryMatrix::periodic().classify().unwrap();
        assert_eq!(c.kind, BcKind::RegularNotStrong);
        assert_eq!(c.discriminant, c64(0., 0.));
        let c = BoundaryMatrix::separated().classify().unwrap();
        assert_eq!(c.kind, BcKind::StronglyRegular);
        assert_eq!(c.discriminant, c64(4., 0.));
        let u = BoundaryMatrix::from_real([[1., 0., 0., 0.], [0., 1., 0., 0.]]).unwrap();
        assert_eq!(u.classify().unwrap().kind, BcKind::NonRegular);
        assert_eq!(u.unperturbed_spectrum(), Err(DiracError::NonRegularInput));
        assert_eq!(u.adjoint(), Err(DiracError::NonRegularInput));
    }

    #[test]
    fn adjoint_examples() {
        let a = BoundaryMatrix::separated().adjoint().unwrap();
        assert_eq!(a, BoundaryMatrix::from_real([[1., 1., 0., 0.], [0., 0., 1., 1.]]).unwrap());
        let a = BoundaryMatrix::periodic().adjoint().unwrap();
        assert_eq!(a, BoundaryMatrix::from_real([[1., 0., -1., 0.], [0., -1., 0., 1.]]).unwrap());
        // row-equivalent to periodic: flip the sign of the second row
        let t = Matrix2::diag(c64(1., 0.), c64(-1., 0.));
        assert_eq!(a.left_multiply(&t).unwrap(), BoundaryMatrix::periodic());
    }

    #[test]
    fn adjoint_preserves_kind() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let u = BoundaryMatrix::random_regular(&mut rng);
            assert_eq!(u.adjoint().unwrap().classify().unwrap().kind, u.classify().unwrap().kind);
        }
        let p = BoundaryMatrix::periodic();
        assert_eq!(p.adjoint().unwrap().classify().unwrap().kind, BcKind::RegularNotStrong);
    }

    #[test]
    fn model_spectra_of_presets() {
        let s = BoundaryMatrix::separated().unperturbed_spectrum().unwrap();
        assert!(close(s.kappa0, c64(0., 0.), 1e-15) && close(s.kappa1, c64(0., 0.), 1e-15));
        for n in -5..=5 {
            assert!(close(s.lambda0(n), c64(n as f64, 0.), 1e-14));
        }
        let s = BoundaryMatrix::periodic().unperturbed_spectrum().unwrap();
        assert!(s.doubled);
        assert!(close(s.kappa0, c64(0., 0.), 1e-15) && close(s.kappa1, c64(-1., 0.), 1e-15));
        for k in -5..=5 {
            assert!(close(s.lambda0(2 * k), c64(2. * k as f64, 0.), 1e-14));
            assert!(close(s.lambda0(2 * k + 1), c64(2. * k as f64, 0.), 1e-14));
        }
        let s = BoundaryMatrix::antiperiodic().unperturbed_spectrum().unwrap();
        for k in -5..=5 {
            let want = c64(2. * k as f64 + 1., 0.);
            assert!(close(s.lambda0(2 * k), want, 1e-14) && close(s.lambda0(2 * k + 1), want, 1e-14));
        }
    }

    #[test]
    fn delta0_examples() {
        let s = BoundaryMatrix::separated();
        assert!(close(s.delta0(c64(0.5, 0.)).unwrap(), c64(0., -2.), 1e-14));
        assert!(BoundaryMatrix::periodic().delta0(c64(0., 0.)).unwrap().norm() < 1e-15);
        let a = BoundaryMatrix::antiperiodic();
        assert!(a.delta0(c64(1., 0.)).unwrap().norm() < 1e-14);
        assert!(close(a.delta0(c64(0., 0.)).unwrap(), c64(4., 0.), 1e-14));
    }

    #[test]
    fn model_eigenfunctions() {
        let s = BoundaryMatrix::separated();
        for n in [-3, 0, 4] {
            let f = s.model_eigenfunction(n).unwrap();
            assert_eq!(f.len(), 1);
            let k = 1.0 / (2.0 * PI).sqrt();
            assert!(close(f[0].omega[0], c64(k, 0.), 1e-14) && close(f[0].omega[1], c64(-k, 0.), 1e-14));
        }
        let p = BoundaryMatrix::periodic();
        let f = p.model_eigenfunction(4).unwrap();
        assert_eq!(f.len(), 2);
        let k = 1.0 / PI.sqrt();
        assert!(close(f[0].omega[0], c64(k, 0.), 1e-14) && f[0].omega[1].norm() == 0.0);
        assert!(close(f[1].omega[1], c64(k, 0.), 1e-14) && f[1].omega[0].norm() == 0.0);
    }

    #[test]
    fn lagrange_form_of_periodic_functions_vanishes() {
        let f = [c64(1., 2.), c64(0.5, -1.)];
        let g = [c64(-0.3, 1.), c64(2., 0.)];
        assert!(lagrange_boundary_form(f, f, g, g).norm() < 1e-15);
    }
}
