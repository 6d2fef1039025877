//! Characteristic matrix `M(λ) = C + D E(π, λ)` and its determinant.

use crate::error::Result;
use crate::evolve::fundamental_matrix;
use crate::matrix2::Matrix2;
use crate::operator::DiracOperator;
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharEval {
    pub m: Matrix2,
    pub delta: Complex64,
    pub ddelta: Complex64,
    pub lambda: Complex64,
}

pub fn char_matrix(op: &DiracOperator, lambda: Complex64) -> Result<Matrix2> {
    let e = fundamental_matrix(&op.mesh, lambda, PI, false)?.e;
    Ok(op.bc.c() + op.bc.d() * e)
}

/// `Δ(λ) = det M(λ)` without the derivative.
pub fn delta(op: &DiracOperator, lambda: Complex64) -> Result<Complex64> {
    Ok(char_matrix(op, lambda)?.det())
}

/// `Δ` and `dΔ/dλ = tr(adj(M) · D · dE/dλ)`.
pub fn char_det(op: &DiracOperator, lambda: Complex64) -> Result<CharEval> {
    let p = fundamental_matrix(&op.mesh, lambda, PI, true)?;
    let d = op.bc.d();
    let m = op.bc.c() + d * p.e;
    let dm = d * p.de.unwrap();
    Ok(CharEval { m, delta: m.det(), ddelta: (m.adj() * dm).trace(), lambda })
}

/// `Δ` expanded in the minors and the entries of `E(π, λ)`.
pub fn delta_expansion(op: &DiracOperator, lambda: Complex64) -> Result<Complex64> {
    let e = fundamental_matrix(&op.mesh, lambda, PI, false)?.e;
    let j = &op.minors;
    Ok(j.j12
        + j.j13 * e.get(0, 1)
        + j.j14 * e.get(1, 1)
        + j.j32() * e.get(0, 0)
        + j.j42() * e.get(1, 0)
        + j.j34 * e.det())
}

/// `|Δ(λ) - Δ₀(λ)|`, with `Δ₀` taken for the lattice boundary matrix.
pub fn asymptotic_gap(op: &DiracOperator, lambda: Complex64) -> Result<f64> {
    let d0 = op.lattice.reduced_bc.delta0(lambda - op.lattice.shift)?;
    Ok((delta(op, lambda)? - d0).norm())
}

/// `min |Δ(λ)| e^{-π|Im λ|}` over `samples` points of the vertical segment
/// `Re λ = re`, `Im λ ∈ [im_lo, im_hi]`.
pub fn lower_bound_ratio(op: &DiracOperator, re: f64, im_lo: f64, im_hi: f64, samples: usize) -> Result<f64> {
    let mut best = f64::INFINITY;
    let n = samples.max(2);
    for k in 0..n {
        let im = im_lo + (im_hi - im_lo) * k as f64 / (n - 1) as f64;
        let l = Complex64::new(re, im);
        best = best.min(delta(op, l)?.norm() * (-PI * im.abs()).exp());
    }
    Ok(best)
}
