//! Eigenfunctions, the biorthogonal system, and Riesz-basis diagnostics.

use crate::bcond::{fix_phase, null_vector};
use crate::chardet::char_matrix;
use crate::error::{DiracError, Result};
use crate::evolve::fundamental_on_nodes;
use crate::matrix2::{c64, Matrix2, Vector2};
use crate::operator::DiracOperator;
use crate::quadrature::QuadGrid;
use crate::resolvent::{apply_resolvent, projector_contour, spectral_projector, sum_norm, GridFunction, LowRank, ProjectorContour};
use crate::spectrum::{refine_zero, EigenvalueRecord};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

pub const DEFAULT_BASIS_NODES: usize = 1024;
const SEMI_SIMPLE_TOL: f64 = 1e-8;
const PAIRING_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenfunctionRecord {
    pub n: i64,
    pub lambda: Complex64,
    /// Initial vector `y(0)` after normalization.
    pub omega: Vector2,
    pub values: GridFunction,
    /// `‖E ω‖` for the unnormalized kernel vector.
    pub norm_before: f64,
    /// Total variation of `y1 e^{-iλx}` and `y2 e^{iλx}` on the grid.
    pub tau_variation: [f64; 2],
    /// `(y(0), y(π))`.
    pub boundary: (Vector2, Vector2),
}

pub fn default_basis_grid() -> Arc<QuadGrid> {
    Arc::new(QuadGrid::gauss_with_nodes(DEFAULT_BASIS_NODES).expect("valid grid"))
}

fn build_record(n: i64, lambda: Complex64, omega: Vector2, es: &[Matrix2], epi: &Matrix2, grid: &Arc<QuadGrid>) -> EigenfunctionRecord {
    let omega = fix_phase(omega);
    let raw = GridFunction { grid: grid.clone(), values: es.iter().map(|e| e.mul_vec(omega)).collect() };
    let norm_before = raw.norm();
    let k = c64(1.0 / norm_before, 0.0);
    let values = raw.scale(k);
    let omega = [omega[0] * k, omega[1] * k];
    let i = Complex64::i();
    let taus: Vec<Vector2> = grid
        .nodes
        .iter()
        .zip(&values.values)
        .map(|(&x, y)| [y[0] * (-i * lambda * x).exp(), y[1] * (i * lambda * x).exp()])
        .collect();
    let tv = |c: usize| taus.windows(2).map(|w| (w[1][c] - w[0][c]).norm()).sum();
    EigenfunctionRecord { n, lambda, omega, values, norm_before, tau_variation: [tv(0), tv(1)], boundary: (omega, epi.mul_vec(omega)) }
}

/// Normalized eigenfunction(s) at `rec.lambda`: one record for a simple
/// eigenvalue, the two canonical solutions when `M(λ) ≈ 0`.
pub fn eigenfunction(op: &DiracOperator, rec: &EigenvalueRecord, grid: &Arc<QuadGrid>) -> Result<Vec<EigenfunctionRecord>> {
    eigenfunction_at(op, rec.n, rec.lambda, rec.multiplicity, grid)
}

fn eigenfunction_at(op: &DiracOperator, n: i64, lambda: Complex64, multiplicity: usize, grid: &Arc<QuadGrid>) -> Result<Vec<EigenfunctionRecord>> {
    let mut nodes = grid.nodes.clone();
    nodes.push(PI);
    let mut es = fundamental_on_nodes(&op.mesh, lambda, &nodes)?;
    let epi = es.pop().unwrap();
    let m = char_matrix(op, lambda)?;
    let scale = op.bc.c().max_abs().max(op.bc.d().max_abs() * epi.max_abs());
    let one = c64(1.0, 0.0);
    let zero = c64(0.0, 0.0);
    if m.max_abs() <= SEMI_SIMPLE_TOL * scale {
        return Ok(vec![
            build_record(n, lambda, [one, zero], &es, &epi, grid),
            build_record(n + 1, lambda, [zero, one], &es, &epi, grid),
        ]);
    }
    if multiplicity > 1 {
        return Err(DiracError::DefectiveEigenvalue(n));
    }
    Ok(vec![build_record(n, lambda, null_vector(&m), &es, &epi, grid)])
}

/// Eigenfunctions for a list of spectrum records; semi-simple pairs are
/// emitted once with consecutive indices.
pub fn eigenfunctions(op: &DiracOperator, recs: &[EigenvalueRecord], grid: &Arc<QuadGrid>) -> Result<Vec<EigenfunctionRecord>> {
    let mut groups: Vec<(usize, usize)> = Vec::new();
    for (k, r) in recs.iter().enumerate() {
        match groups.last_mut() {
            Some((s, len)) if r.multiplicity > 1 && (recs[*s].lambda - r.lambda).norm() < 1e-8 => *len += 1,
            _ => groups.push((k, 1)),
        }
    }
    let per: Vec<Vec<EigenfunctionRecord>> = groups
        .par_iter()
        .map(|&(s, len)| {
            let r = &recs[s];
            eigenfunction_at(op, r.n, r.lambda, len.max(r.multiplicity.min(2)), grid)
        })
        .collect::<Result<_>>()?;
    Ok(per.into_iter().flatten().collect())
}

/// Biorthogonal system `w_n`: adjoint eigenfunctions at `conj λ_n` scaled so
/// that `⟨y_n, w_m⟩ = δ_nm`.
pub fn biorthogonal_system(op: &DiracOperator, ys: &[EigenfunctionRecord]) -> Result<Vec<EigenfunctionRecord>> {
    let adj = op.adjoint()?;
    // group eigenfunctions sharing an eigenvalue
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (k, y) in ys.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if ys[g[0]].lambda == y.lambda => g.push(k),
            _ => groups.push(vec![k]),
        }
    }
    let out: Vec<Vec<EigenfunctionRecord>> = groups
        .par_iter()
        .map(|g| {
            let y0 = &ys[g[0]];
            let grid = &y0.values.grid;
            let target = y0.lambda.conj();
            let zs = if g.len() == 1 {
                let (l, _) = refine_zero(&adj, target)?;
                eigenfunction_at(&adj, y0.n, l, 1, grid)?
            } else {
                eigenfunction_at(&adj, y0.n, target, g.len(), grid)?
            };
            if zs.len() != g.len() {
                return Err(DiracError::PairingDegenerate(y0.n));
            }
            let k = g.len();
            let s = DMatrix::from_fn(k, k, |a, b| ys[g[a]].values.inner(&zs[b].values));
            if k == 1 && s[(0, 0)].norm() < PAIRING_TOL {
                return Err(DiracError::PairingDegenerate(y0.n));
            }
            let sinv = s.try_inverse().ok_or(DiracError::PairingDegenerate(y0.n))?;
            // w_c = Σ_b z_b conj((S⁻¹)_bc)
            Ok((0..k)
                .map(|c| {
                    let mut w = GridFunction::zeros(grid);
                    let mut bd0 = [c64(0.0, 0.0); 2];
                    let mut bd1 = [c64(0.0, 0.0); 2];
                    for b in 0..k {
                        let x = sinv[(b, c)].conj();
                        w = w.axpy(x, &zs[b].values);
                        for r in 0..2 {
                            bd0[r] += zs[b].boundary.0[r] * x;
                            bd1[r] += zs[b].boundary.1[r] * x;
                        }
                    }
                    let z = &zs[c];
                    EigenfunctionRecord {
                        n: ys[g[c]].n,
                        lambda: z.lambda,
                        omega: bd0,
                        norm_before: w.norm(),
                        values: w,
                        tau_variation: z.tau_variation,
                        boundary: (bd0, bd1),
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(out.into_iter().flatten().collect())
}

/// Pairing matrix `⟨y_n, w_m⟩`.
pub fn pairing_matrix(ys: &[EigenfunctionRecord], ws: &[EigenfunctionRecord]) -> DMatrix<Complex64> {
    DMatrix::from_fn(ys.len(), ws.len(), |a, b| ys[a].values.inner(&ws[b].values))
}

/// `max |⟨y_n, w_m⟩ - δ_nm|`.
pub fn biorthogonality_error(ys: &[EigenfunctionRecord], ws: &[EigenfunctionRecord]) -> f64 {
    let p = pairing_matrix(ys, ws);
    let mut e = 0.0f64;
    for a in 0..p.nrows() {
        for b in 0..p.ncols() {
            let d = if a == b { 1.0 } else { 0.0 };
            e = e.max((p[(a, b)] - d).norm());
        }
    }
    e
}

#[derive(Debug, Clone)]
pub struct GramResult {
    pub matrix: DMatrix<Complex64>,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

fn hermitian_extremes(m: &DMatrix<Complex64>) -> (f64, f64) {
    let ev = m.clone().symmetric_eigenvalues();
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Gram matrix `G_{ab} = ⟨y_b, y_a⟩` with its extremal eigenvalues.
pub fn gram_matrix(records: &[GridFunction]) -> GramResult {
    let k = records.len();
    let mut m = DMatrix::from_element(k, k, c64(0.0, 0.0));
    for a in 0..k {
        for b in a..k {
            let v = records[b].inner(&records[a]);
            m[(a, b)] = v;
            m[(b, a)] = v.conj();
        }
        m[(a, a)] = c64(m[(a, a)].re, 0.0);
    }
    let (lo, hi) = if k == 0 { (0.0, 0.0) } else { hermitian_extremes(&m) };
    GramResult { matrix: m, min_eigenvalue: lo, max_eigenvalue: hi }
}

/// `Σ |∫_0^π f e^{iλ_n x} dx|² / ‖f‖²` for a scalar `f` on the grid.
pub fn bessel_ratio(grid: &QuadGrid, f: &[Complex64], lambdas: &[Complex64]) -> Result<f64> {
    let nrm2: f64 = f.iter().zip(&grid.weights).map(|(v, w)| v.norm_sqr() * w).sum();
    if !(nrm2.sqrt() >= 1e-14) {
        return Err(DiracError::ZeroFunction);
    }
    let i = Complex64::i();
    let s: f64 = lambdas
        .iter()
        .map(|&l| {
            f.iter()
                .zip(&grid.nodes)
                .zip(&grid.weights)
                .map(|((v, &x), &w)| v * (i * l * x).exp() * w)
                .sum::<Complex64>()
                .norm_sqr()
        })
        .sum();
    Ok(s / nrm2)
}

/// `‖f - Σ ⟨f, w_n⟩ y_n‖`.
pub fn expansion_residual(f: &GridFunction, ys: &[EigenfunctionRecord], ws: &[EigenfunctionRecord]) -> f64 {
    let mut r = f.clone();
    for (y, w) in ys.iter().zip(ws) {
        r = r.axpy(-f.inner(&w.values), &y.values);
    }
    r.norm()
}

/// Projectors kept in weighted low-rank form, keyed by group index.
#[derive(Debug, Clone, Default)]
pub struct ProjectorBank {
    pub parts: BTreeMap<i64, LowRank>,
}

impl ProjectorBank {
    pub fn build(op: &DiracOperator, indices: &[i64], grid: &Arc<QuadGrid>) -> Result<Self> {
        let rank = if op.lattice.doubled() { 2 } else { 1 };
        let mut parts = BTreeMap::new();
        for &n in indices {
            let k = spectral_projector(op, n, grid)?;
            parts.insert(n, k.low_rank(rank, n as u64 ^ 0x5eed));
        }
        Ok(ProjectorBank { parts })
    }

    /// Norm of `Σ_{n ∈ J} P_n`.
    pub fn sum_norm(&self, set: &[i64]) -> Result<f64> {
        let parts: Vec<LowRank> = set
            .iter()
            .map(|n| self.parts.get(n).cloned().ok_or_else(|| DiracError::InvalidInput(format!("projector {n} not in bank"))))
            .collect::<Result<_>>()?;
        Ok(sum_norm(&parts))
    }
}

/// `‖Σ_{n ∈ J} P_n‖` on the weighted grid space.
pub fn projector_sum_norm(op: &DiracOperator, set: &[i64], grid: &Arc<QuadGrid>) -> Result<f64> {
    if set.is_empty() {
        return Ok(0.0);
    }
    ProjectorBank::build(op, set, grid)?.sum_norm(set)
}

/// `P f` by contour quadrature of the resolvent applied to `f`.
pub fn apply_projector(op: &DiracOperator, c: &ProjectorContour, f: &GridFunction, nodes: usize) -> Result<GridFunction> {
    let terms: Vec<GridFunction> = (0..nodes)
        .into_par_iter()
        .map(|k| {
            let w = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / nodes as f64);
            let r = apply_resolvent(op, c.center + w * c.radius, f)?;
            Ok(r.scale(-(w * c.radius) / nodes as f64))
        })
        .collect::<Result<_>>()?;
    let mut acc = GridFunction::zeros(&f.grid);
    for t in &terms {
        acc = acc.axpy(c64(1.0, 0.0), t);
    }
    Ok(acc)
}

/// Block Gram matrix of orthonormal pairs spanning the ranges of `P_n` for
/// the given groups (doubled lattices).
pub fn subspace_gram(op: &DiracOperator, groups: &[i64], grid: &Arc<QuadGrid>) -> Result<GramResult> {
    let i = Complex64::i();
    let zero = c64(0.0, 0.0);
    let mut basis: Vec<GridFunction> = Vec::new();
    for &n in groups {
        let c = projector_contour(op, n)?;
        let l = c.center;
        let seeds = [
            GridFunction::from_fn(grid, |x| [(i * l * x).exp(), zero]),
            GridFunction::from_fn(grid, |x| [zero, (-i * l * x).exp()]),
        ];
        let mut pair: Vec<GridFunction> = Vec::new();
        for s in &seeds {
            let mut v = apply_projector(op, &c, s, 64)?;
            for q in &pair {
                v = v.axpy(-v.inner(q), q);
            }
            let nv = v.norm();
            if nv < 1e-10 {
                return Err(DiracError::ContourSeparationFailure(n));
            }
            pair.push(v.scale(c64(1.0 / nv, 0.0)));
        }
        basis.extend(pair);
    }
    Ok(gram_matrix(&basis))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bcond::BoundaryMatrix;
    use crate::potential::PotentialSpec;
    use crate::spectrum::compute_spectrum;

    fn op(bc: BoundaryMatrix, p: PotentialSpec) -> DiracOperator {
        DiracOperator::new(bc, p).unwrap()
    }

    fn one() -> PotentialSpec {
        PotentialSpec::constant_offdiag(c64(1.0, 0.0), c64(1.0, 0.0))
    }

    #[test]
    fn free_separated_eigenfunctions() {
        let o = op(BoundaryMatrix::separated(), PotentialSpec::zero());
        let g = default_basis_grid();
        let recs = compute_spectrum(&o, -3, 3).unwrap();
        let ys = eigenfunctions(&o, &recs, &g).unwrap();
        assert_eq!(ys.len(), 7);
        let i = Complex64::i();
        let k = 1.0 / (2.0 * PI).sqrt();
        for y in &ys {
            let n = y.n as f64;
            for (&x, v) in g.nodes.iter().zip(&y.values.values) {
                assert!((v[0] - (i * n * x).exp() * k).norm() < 1e-10);
                assert!((v[1] + (-i * n * x).exp() * k).norm() < 1e-10);
            }
            assert!(y.tau_variation[0] < 1e-9);
        }
        let gram = gram_matrix(&ys.iter().map(|y| y.values.clone()).collect::<Vec<_>>());
        assert!((gram.min_eigenvalue - 1.0).abs() < 1e-10 && (gram.max_eigenvalue - 1.0).abs() < 1e-10);
        let ws = biorthogonal_system(&o, &ys).unwrap();
        for (y, w) in ys.iter().zip(&ws) {
            assert!(y.values.sub(&w.values).sup_norm() < 1e-8);
        }
    }

    #[test]
    fn constant_potential_eigenfunction_at_minus_one() {
        let o = op(BoundaryMatrix::separated(), one());
        let g = default_basis_grid();
        let recs = compute_spectrum(&o, -1, -1).unwrap();
        assert!((recs[0].lambda + 1.0).norm() < 1e-9);
        let y = &eigenfunction(&o, &recs[0], &g).unwrap()[0];
        let k = 1.0 / (2.0 * PI).sqrt();
        for v in &y.values.values {
            assert!((v[0] - k).norm() < 1e-7 && (v[1] + k).norm() < 1e-7);
        }
        assert!((y.values.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn periodic_free_pairs_are_semi_simple() {
        let o = op(BoundaryMatrix::periodic(), PotentialSpec::zero());
        let g = default_basis_grid();
        let recs = compute_spectrum(&o, 2, 5).unwrap();
        let ys = eigenfunctions(&o, &recs, &g).unwrap();
        assert_eq!(ys.iter().map(|y| y.n).collect::<Vec<_>>(), vec![2, 3, 4, 5]);
        let ws = biorthogonal_system(&o, &ys).unwrap();
        assert!(biorthogonality_error(&ys, &ws) < 1e-8);
    }

    #[test]
    fn biorthogonal_constant_potential() {
        let o = op(BoundaryMatrix::separated(), one());
        let g = default_basis_grid();
        let recs = compute_spectrum(&o, -6, 6).unwrap();
        let ys = eigenfunctions(&o, &recs, &g).unwrap();
        let ws = biorthogonal_system(&o, &ys).unwrap();
        assert!(biorthogonality_error(&ys, &ws) < 1e-6);
    }

    #[test]
    fn bessel_examples() {
        let g = QuadGrid::gauss_with_nodes(256).unwrap();
        let ones = vec![c64(1.0, 0.0); g.len()];
        let lam: Vec<Complex64> = (-40..=40).map(|n| c64(n as f64, 0.0)).collect();
        let r = bessel_ratio(&g, &ones, &lam).unwrap();
        assert!((r - 2.0 * PI).abs() < 0.05 * 2.0 * PI);
        let f: Vec<Complex64> = g.nodes.iter().map(|&x| (Complex64::i() * 5.0 * x).exp()).collect();
        assert!(bessel_ratio(&g, &f, &lam).unwrap() >= PI - 1e-9);
        let z = vec![c64(0.0, 0.0); g.len()];
        assert!(matches!(bessel_ratio(&g, &z, &lam), Err(DiracError::ZeroFunction)));
    }

    #[test]
    fn projector_sums() {
        let o = op(BoundaryMatrix::periodic(), one());
        let g = Arc::new(QuadGrid::gauss_with_nodes(256).unwrap());
        assert_eq!(projector_sum_norm(&o, &[], &g).unwrap(), 0.0);
        let bank = ProjectorBank::build(&o, &[5, 6], &g).unwrap();
        let s = bank.sum_norm(&[5]).unwrap();
        assert!(s >= 1.0 - 1e-8);
        assert!(bank.sum_norm(&[5, 6]).unwrap() >= 1.0 - 1e-8);
    }

    #[test]
    fn subspace_gram_is_well_conditioned() {
        let o = op(BoundaryMatrix::periodic(), one());
        let g = Arc::new(QuadGrid::gauss_with_nodes(256).unwrap());
        let gr = subspace_gram(&o, &[4, 5, 6], &g).unwrap();
        assert_eq!(gr.matrix.nrows(), 6);
        assert!(gr.min_eigenvalue > 0.3 && gr.max_eigenvalue < 3.0);
    }

    #[test]
    fn expansion_improves() {
        let o = op(BoundaryMatrix::separated(), one());
        let g = default_basis_grid();
        let f = GridFunction::from_fn(&g, |x| [c64((x * (PI - x)).sin(), 0.0), c64(x.cos(), 0.3)]);
        let res = |n: i64| {
            let recs = compute_spectrum(&o, -n, n).unwrap();
            let ys = eigenfunctions(&o, &recs, &g).unwrap();
            let ws = biorthogonal_system(&o, &ys).unwrap();
            expansion_residual(&f, &ys, &ws)
        };
        assert!(res(16) > res(32));
    }
}
