//! Fundamental matrix `E(x, λ)` of `B y' + P y = λ y`, `E(0, λ) = I`.
//!
//! On each mesh cell the coefficient matrix `B⁻¹(λ - P)` is replaced by its
//! cell average and exponentiated in closed form. The λ-derivative is carried
//! along by the product rule.

use crate::error::{DiracError, Result};
use crate::matrix2::{c64, Matrix2};
use crate::potential::Mesh;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagation {
    pub e: Matrix2,
    pub de: Option<Matrix2>,
    pub lambda: Complex64,
    pub x: f64,
    /// Exact value of `det E(x, λ)`: `exp(-i ∫_0^x (p1 - p4))`.
    pub liouville: Complex64,
}

// Taylor coefficients of cosh√q, sinh√q/√q and the derivative of the latter.
const SERIES_TERMS: usize = 14;

struct Series {
    c: [f64; SERIES_TERMS],
    s: [f64; SERIES_TERMS],
    ds: [f64; SERIES_TERMS],
}

const fn series() -> Series {
    let mut c = [0.0; SERIES_TERMS];
    let mut s = [0.0; SERIES_TERMS];
    let mut ds = [0.0; SERIES_TERMS];
    let mut fact = 1.0; // (2k)!
    let mut k = 0;
    while k < SERIES_TERMS {
        c[k] = 1.0 / fact;
        s[k] = 1.0 / (fact * (2 * k + 1) as f64);
        fact *= ((2 * k + 1) * (2 * k + 2)) as f64;
        k += 1;
    }
    let mut k = 0;
    while k + 1 < SERIES_TERMS {
        ds[k] = (k + 1) as f64 * s[k + 1];
        k += 1;
    }
    Series { c, s, ds }
}

static SERIES: Series = series();

#[inline]
fn horner(coef: &[f64], q: Complex64) -> Complex64 {
    coef.iter().rev().fold(c64(0.0, 0.0), |acc, &a| acc * q + a)
}

/// `(cosh√q, sinh√q/√q, d/dq sinh√q/√q)`.
#[inline]
fn cs(q: Complex64, with_derivative: bool) -> (Complex64, Complex64, Complex64) {
    if q.norm_sqr() < 1.0 {
        let c = horner(&SERIES.c, q);
        let s = horner(&SERIES.s, q);
        let ds = if with_derivative { horner(&SERIES.ds, q) } else { c64(0.0, 0.0) };
        (c, s, ds)
    } else {
        let r = q.sqrt();
        let c = r.cosh();
        let s = r.sinh() / r;
        (c, s, (c - s) / (2.0 * q))
    }
}

/// Exponential of `h B⁻¹(λ - P̄)` for one cell and, optionally, its
/// derivative in λ.
#[inline]
pub fn cell_exponential(avg: &[Complex64; 4], h: f64, lambda: Complex64, with_derivative: bool) -> (Matrix2, Matrix2) {
    let i = Complex64::i();
    let tau = -i * (avg[0] - avg[3]) * (0.5 * h);
    let a = i * (lambda - (avg[0] + avg[3]) * 0.5) * h;
    let b = -i * avg[1] * h;
    let c = i * avg[2] * h;
    let q = a * a + b * c;
    let (ch, sh, dsh) = cs(q, with_derivative);
    let g = if tau == c64(0.0, 0.0) { c64(1.0, 0.0) } else { tau.exp() };
    let x = Matrix2::new(ch + sh * a, sh * b, sh * c, ch - sh * a).scale(g);
    if !with_derivative {
        return (x, Matrix2::zero());
    }
    let ih = i * h;
    let dq = 2.0 * a * ih;
    let d0 = sh * 0.5 * dq;
    let d1 = dsh * dq;
    let dx = Matrix2::new(d0 + d1 * a + sh * ih, d1 * b, d1 * c, d0 - d1 * a - sh * ih).scale(g);
    (x, dx)
}

fn liouville_factor(mesh: &Mesh, k: usize, h: f64) -> Complex64 {
    let a = &mesh.averages[k];
    -Complex64::i() * (a[0] - a[3]) * h
}

/// `E(x, λ)` and optionally `∂E/∂λ`.
pub fn fundamental_matrix(mesh: &Mesh, lambda: Complex64, x: f64, with_derivative: bool) -> Result<Propagation> {
    let last = mesh.cell_of(x)?;
    let mut e = Matrix2::identity();
    let mut de = Matrix2::zero();
    let mut log_det = c64(0.0, 0.0);
    for k in 0..=last {
        let h = if k == last { x - mesh.bounds[k] } else { mesh.width(k) };
        if h <= 0.0 {
            continue;
        }
        let (xk, dxk) = cell_exponential(&mesh.averages[k], h, lambda, with_derivative);
        if with_derivative {
            de = dxk * e + xk * de;
        }
        e = xk * e;
        log_det += liouville_factor(mesh, k, h);
    }
    Ok(Propagation {
        e,
        de: with_derivative.then_some(de),
        lambda,
        x,
        liouville: log_det.exp(),
    })
}

/// `E(x_j, λ)` at ascending nodes, in one sweep over the mesh.
pub fn fundamental_on_nodes(mesh: &Mesh, lambda: Complex64, xs: &[f64]) -> Result<Vec<Matrix2>> {
    let mut out = Vec::with_capacity(xs.len());
    let mut k = 0;
    let mut e_start = Matrix2::identity();
    let mut prev = f64::NEG_INFINITY;
    for &x in xs {
        if x < prev {
            return Err(DiracError::InvalidInput("nodes must be ascending".into()));
        }
        prev = x;
        let cell = mesh.cell_of(x)?;
        while k < cell {
            e_start = cell_exponential(&mesh.averages[k], mesh.width(k), lambda, false).0 * e_start;
            k += 1;
        }
        let h = x - mesh.bounds[k];
        let e = if h > 0.0 {
            cell_exponential(&mesh.averages[k], h, lambda, false).0 * e_start
        } else {
            e_start
        };
        out.push(e);
    }
    Ok(out)
}

/// `E(x) E(a)⁻¹`, the solution matrix normalized at `a`.
pub fn transfer_matrix(e_a: &Matrix2, e_x: &Matrix2) -> Result<Matrix2> {
    let drift = (e_a.det() - 1.0).norm();
    if !(drift <= 1e-6) {
        return Err(DiracError::DeterminantDrift(drift));
    }
    Ok(*e_x * e_a.adj())
}

/// Closed-form `E(x, λ)` for the constant potential `p2 = a`, `p3 = b`:
/// `cos(ωx) I + sin(ωx)/ω · A`, `ω² = λ² - ab`.
pub fn oracle_const_e(a: Complex64, b: Complex64, lambda: Complex64, x: f64) -> Matrix2 {
    let i = Complex64::i();
    let m = Matrix2::new(i * lambda, -i * a, i * b, -i * lambda);
    let omega = (lambda * lambda - a * b).sqrt();
    let w = omega * x;
    let (cosw, sinc) = if w.norm() < 1e-3 {
        // cos w and sin(w)/ω by their even series
        let w2 = w * w;
        let cosw = 1.0 - w2 / 2.0 + w2 * w2 / 24.0 - w2 * w2 * w2 / 720.0;
        let sinc = (1.0 - w2 / 6.0 + w2 * w2 / 120.0 - w2 * w2 * w2 / 5040.0) * x;
        (cosw, sinc)
    } else {
        (w.cos(), w.sin() / omega)
    };
    Matrix2::new(cosw + sinc * m.get(0, 0), sinc * m.get(0, 1), sinc * m.get(1, 0), cosw + sinc * m.get(1, 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{build_mesh, Channel, PotentialSpec};
    use std::f64::consts::PI;

    #[test]
    fn zero_potential_is_diagonal() {
        let m = build_mesh(&PotentialSpec::zero(), 1e-8);
        for &l in &[c64(0.3, 0.0), c64(-2.0, 1.5), c64(7.0, -0.5)] {
            let p = fundamental_matrix(&m, l, 2.2, true).unwrap();
            let want = Matrix2::diag((Complex64::i() * l * 2.2).exp(), (-Complex64::i() * l * 2.2).exp());
            assert!((p.e - want).max_abs() < 1e-12 * want.max_abs());
            let dwant = Matrix2::diag(Complex64::i() * 2.2 * want.get(0, 0), -Complex64::i() * 2.2 * want.get(1, 1));
            assert!((p.de.unwrap() - dwant).max_abs() < 1e-11);
        }
    }

    #[test]
    fn constant_potential_matches_oracle() {
        let (a, b) = (c64(1.0, 0.0), c64(1.0, 0.0));
        let m = build_mesh(&PotentialSpec::constant_offdiag(a, b), 1e-8);
        for &l in &[c64(0.0, 0.0), c64(-1.0, 0.0), c64(3.0, 0.5), c64(12.0, -1.0)] {
            for &x in &[0.3, 1.7, PI] {
                let p = fundamental_matrix(&m, l, x, false).unwrap();
                assert!((p.e - oracle_const_e(a, b, l, x)).max_abs() < 1e-10, "λ={l} x={x}");
            }
        }
    }

    #[test]
    fn oracle_examples() {
        let one = c64(1.0, 0.0);
        let l = c64(0.4, 0.2);
        let e = oracle_const_e(c64(0., 0.), c64(0., 0.), l, 1.0);
        assert!((e - Matrix2::diag((Complex64::i() * l).exp(), (-Complex64::i() * l).exp())).max_abs() < 1e-15);
        let x = 0.8;
        let i = Complex64::i();
        let e = oracle_const_e(one, one, -one, x);
        let want = Matrix2::identity() + Matrix2::new(-i, -i, i, i).scale(c64(x, 0.0));
        assert!((e - want).max_abs() < 1e-15);
        let e = oracle_const_e(one, one, c64(0., 0.), PI);
        assert!((e.get(0, 0).re - PI.cosh()).abs() < 1e-12);
        assert!((e.get(0, 1) - (-i * PI.sinh())).norm() < 1e-12);
    }

    #[test]
    fn unit_determinant_for_power_potential() {
        let p = PotentialSpec { p2: Channel::power(c64(1., 0.), 0.5), ..Default::default() };
        let m = build_mesh(&p, 1e-8);
        for &l in &[c64(0., 0.), c64(3.0, 0.5), c64(-7.0, 0.0)] {
            let e = fundamental_matrix(&m, l, PI, false).unwrap();
            assert!((e.e.det() - 1.0).norm() < 1e-10);
        }
    }

    #[test]
    fn transfer_examples() {
        let m = build_mesh(&PotentialSpec::zero(), 1e-8);
        let l = c64(1.3, 0.4);
        let ea = fundamental_matrix(&m, l, 0.5, false).unwrap().e;
        let ex = fundamental_matrix(&m, l, 2.0, false).unwrap().e;
        assert!((transfer_matrix(&ea, &ea).unwrap() - Matrix2::identity()).max_abs() < 1e-13);
        let t = transfer_matrix(&ea, &ex).unwrap();
        let want = Matrix2::diag((Complex64::i() * l * 1.5).exp(), (-Complex64::i() * l * 1.5).exp());
        assert!((t - want).max_abs() < 1e-12);
        let bad = Matrix2::diag(c64(2.0, 0.0), c64(1.0, 0.0));
        assert!(matches!(transfer_matrix(&bad, &ex), Err(DiracError::DeterminantDrift(_))));
    }

    #[test]
    fn mesh_range_checked() {
        let m = build_mesh(&PotentialSpec::zero(), 1e-8);
        assert!(matches!(fundamental_matrix(&m, c64(0., 0.), 3.5, false), Err(DiracError::MeshMismatch(_))));
        assert!(matches!(fundamental_matrix(&m, c64(0., 0.), -0.1, false), Err(DiracError::MeshMismatch(_))));
    }

    #[test]
    fn nodes_sweep_matches_pointwise() {
        let p = PotentialSpec { p1: Channel::constant(c64(0.5, 0.)), p2: Channel::power(c64(1., 0.), 0.5), ..Default::default() };
        let m = build_mesh(&p, 1e-8);
        let l = c64(2.5, 0.3);
        let xs = [0.0, 1e-3, 0.7, 0.7, 2.0, PI];
        let es = fundamental_on_nodes(&m, l, &xs).unwrap();
        for (x, e) in xs.iter().zip(&es) {
            let f = fundamental_matrix(&m, l, *x, false).unwrap();
            assert!((f.e - *e).max_abs() < 1e-13);
            assert!((e.det() - f.liouville).norm() < 1e-12);
        }
    }
}
