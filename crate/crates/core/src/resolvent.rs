//! Green's function, resolvent application and contour-integral spectral
//! projectors.

use crate::chardet::char_det;
use crate::error::{DiracError, Result};
use crate::evolve::{fundamental_matrix, fundamental_on_nodes};
use crate::matrix2::{c64, dot_conj, Matrix2, Vector2};
use crate::operator::DiracOperator;
use crate::potential::PotentialSpec;
use crate::quadrature::QuadGrid;
use crate::spectrum::{compute_spectrum, group_for_projector};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

pub const DEFAULT_RESOLVENT_NODES: usize = 512;
pub const DEFAULT_KERNEL_NODES: usize = 512;
const NEAR_EIGENVALUE: f64 = 1e-6;
const CONTOUR_NODES: usize = 64;
const CONTOUR_TOL: f64 = 1e-8;
const SEPARATION: f64 = 1e-3;

fn b_inv() -> Matrix2 {
    Matrix2::diag(c64(0.0, 1.0), c64(0.0, -1.0))
}

fn inverse_fundamental(e: &Matrix2) -> Matrix2 {
    e.adj().scale(e.det().inv())
}

/// A vector function sampled on a quadrature grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: Arc<QuadGrid>,
    pub values: Vec<Vector2>,
}

impl GridFunction {
    pub fn from_fn<F: Fn(f64) -> Vector2>(grid: &Arc<QuadGrid>, f: F) -> Self {
        GridFunction { grid: grid.clone(), values: grid.nodes.iter().map(|&x| f(x)).collect() }
    }

    pub fn zeros(grid: &Arc<QuadGrid>) -> Self {
        Self::from_fn(grid, |_| [c64(0.0, 0.0); 2])
    }

    /// `⟨f, g⟩ = ∫ (f, g)`, linear in `f`.
    pub fn inner(&self, other: &GridFunction) -> Complex64 {
        self.values
            .iter()
            .zip(&other.values)
            .zip(&self.grid.weights)
            .map(|((a, b), w)| dot_conj(*a, *b) * *w)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v[0].norm().max(v[1].norm())).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        GridFunction { grid: self.grid.clone(), values: self.values.iter().map(|v| [v[0] * s, v[1] * s]).collect() }
    }

    /// `self + s · other`.
    pub fn axpy(&self, s: Complex64, other: &GridFunction) -> Self {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| [a[0] + b[0] * s, a[1] + b[1] * s]).collect(),
        }
    }

    pub fn sub(&self, other: &GridFunction) -> Self {
        self.axpy(c64(-1.0, 0.0), other)
    }
}

fn check_resolvent_set(op: &DiracOperator, lambda: Complex64) -> Result<Matrix2> {
    let ev = char_det(op, lambda)?;
    if ev.delta == c64(0.0, 0.0) || ev.delta.norm() < NEAR_EIGENVALUE * ev.ddelta.norm() {
        return Err(DiracError::NearEigenvalue);
    }
    Ok(ev.m)
}

/// `G(t, x, λ)`; the diagonal `t = x` takes the `t < x` branch.
pub fn green_kernel(op: &DiracOperator, lambda: Complex64, t: f64, x: f64) -> Result<Matrix2> {
    let m = check_resolvent_set(op, lambda)?;
    let ex = fundamental_matrix(&op.mesh, lambda, x, false)?.e;
    let et = fundamental_matrix(&op.mesh, lambda, t, false)?.e;
    let mut core = m.inverse().ok_or(DiracError::NearEigenvalue)? * op.bc.c();
    if t > x {
        core = core - Matrix2::identity();
    }
    Ok(ex * core * inverse_fundamental(&et) * b_inv())
}

/// The same kernel written through the minors and the transfer matrices,
/// `𝓔(a, x) = E(x) E(a)⁻¹`.
pub fn green_kernel_minor_form(op: &DiracOperator, lambda: Complex64, t: f64, x: f64) -> Result<Matrix2> {
    let ev = char_det(op, lambda)?;
    if ev.delta.norm() < NEAR_EIGENVALUE * ev.ddelta.norm() {
        return Err(DiracError::NearEigenvalue);
    }
    let d = ev.delta;
    let ex = fundamental_matrix(&op.mesh, lambda, x, false)?.e;
    let et = fundamental_matrix(&op.mesh, lambda, t, false)?.e;
    let epi = fundamental_matrix(&op.mesh, lambda, PI, false)?.e;
    let flip = |a: Matrix2| Matrix2::new(a.get(0, 0), -a.get(0, 1), a.get(1, 0), -a.get(1, 1));
    let tx = ex * inverse_fundamental(&et);
    let px = ex * inverse_fundamental(&epi);
    let j = &op.minors;
    let jm = Matrix2::new(j.j14, j.j24, j.j13, j.j23);
    let tail = Matrix2::new(et.get(1, 1), et.get(0, 1), -et.get(1, 0), -et.get(0, 0));
    let chi = if t > x { 1.0 } else { 0.0 };
    let i = Complex64::i();
    // the tail uses adj E(t) in place of E(t)⁻¹; the ratio restores
    // potentials with a non-zero trace part
    let ratio = epi.det() / et.det();
    Ok(flip(tx).scale(i * (j.j12 / d - chi)) + (flip(px) * jm * tail).scale(i * ratio / d))
}

/// `G(t_i, x_j, λ)` for all pairs, `out[j * ts.len() + i]`.
pub fn green_on_grids(op: &DiracOperator, lambda: Complex64, ts: &[f64], xs: &[f64]) -> Result<Vec<Matrix2>> {
    let m = check_resolvent_set(op, lambda)?;
    let core = m.inverse().ok_or(DiracError::NearEigenvalue)? * op.bc.c();
    let ex = fundamental_on_nodes(&op.mesh, lambda, xs)?;
    let et: Vec<Matrix2> = fundamental_on_nodes(&op.mesh, lambda, ts)?.iter().map(|e| inverse_fundamental(e) * b_inv()).collect();
    let jump = core - Matrix2::identity();
    let mut out = Vec::with_capacity(ts.len() * xs.len());
    for (j, &x) in xs.iter().enumerate() {
        let left = ex[j] * core;
        let right = ex[j] * jump;
        for (i, &t) in ts.iter().enumerate() {
            out.push(if t > x { right } else { left } * et[i]);
        }
    }
    Ok(out)
}

struct Variation {
    es: Vec<Matrix2>,
    cum: [Vec<Complex64>; 2],
    total: Vector2,
    base: Vector2,
}

fn variation(op: &DiracOperator, lambda: Complex64, f: &GridFunction) -> Result<Variation> {
    let m = check_resolvent_set(op, lambda)?;
    let core = m.inverse().ok_or(DiracError::NearEigenvalue)? * op.bc.c();
    let grid = &f.grid;
    let es = fundamental_on_nodes(&op.mesh, lambda, &grid.nodes)?;
    let integrand: Vec<Vector2> = es.iter().zip(&f.values).map(|(e, v)| (inverse_fundamental(e) * b_inv()).mul_vec(*v)).collect();
    let comp = |c: usize| integrand.iter().map(|v| v[c]).collect::<Vec<_>>();
    let cum = [grid.cumulative(&comp(0)), grid.cumulative(&comp(1))];
    let total = if grid.nodes.last() == Some(&PI) {
        [*cum[0].last().unwrap(), *cum[1].last().unwrap()]
    } else {
        [grid.integrate(&comp(0)), grid.integrate(&comp(1))]
    };
    let base = core.mul_vec(total);
    Ok(Variation { es, cum, total, base })
}

/// `R(λ) f = (L - λ)⁻¹ f` by variation of constants:
/// `y(x) = E(x)[M⁻¹C g(π) - g(π) + g(x)]`, `g(x) = ∫_0^x E⁻¹B⁻¹f`.
pub fn apply_resolvent(op: &DiracOperator, lambda: Complex64, f: &GridFunction) -> Result<GridFunction> {
    let v = variation(op, lambda, f)?;
    let values = v
        .es
        .iter()
        .enumerate()
        .map(|(j, e)| e.mul_vec([v.base[0] - v.total[0] + v.cum[0][j], v.base[1] - v.total[1] + v.cum[1][j]]))
        .collect();
    Ok(GridFunction { grid: f.grid.clone(), values })
}

/// Boundary values `(y(0), y(π))` of `R(λ) f`, computed from the same formula.
pub fn resolvent_boundary_values(op: &DiracOperator, lambda: Complex64, f: &GridFunction) -> Result<(Vector2, Vector2)> {
    let v = variation(op, lambda, f)?;
    let epi = fundamental_matrix(&op.mesh, lambda, PI, false)?.e;
    Ok(([v.base[0] - v.total[0], v.base[1] - v.total[1]], epi.mul_vec(v.base)))
}

/// A 2×2-block kernel on a quadrature grid, `blocks[j * n + i] = K(t_i, x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub grid: Arc<QuadGrid>,
    pub blocks: Vec<Matrix2>,
}

impl KernelMatrix {
    pub fn n(&self) -> usize {
        self.grid.len()
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Matrix2 {
        self.blocks[j * self.n() + i]
    }

    /// `Σ_j w_j tr K(x_j, x_j)`.
    pub fn trace(&self) -> Complex64 {
        (0..self.n()).map(|j| self.at(j, j).trace() * self.grid.weights[j]).sum()
    }

    /// `(K f)(x_j) = Σ_i w_i K(t_i, x_j) f(t_i)`.
    pub fn apply(&self, f: &GridFunction) -> GridFunction {
        let n = self.n();
        let values = (0..n)
            .map(|j| {
                let mut acc = [c64(0.0, 0.0); 2];
                for i in 0..n {
                    let v = self.at(i, j).mul_vec(f.values[i]);
                    let w = self.grid.weights[i];
                    acc[0] += v[0] * w;
                    acc[1] += v[1] * w;
                }
                acc
            })
            .collect();
        GridFunction { grid: self.grid.clone(), values }
    }

    /// Kernel of `self ∘ other`: `Σ_s w_s K(s, x) L(t, s)`.
    pub fn compose(&self, other: &KernelMatrix) -> KernelMatrix {
        let n = self.n();
        let blocks: Vec<Matrix2> = (0..n)
            .into_par_iter()
            .flat_map_iter(|j| {
                let mut row = vec![Matrix2::zero(); n];
                for s in 0..n {
                    let a = self.at(s, j).scale(c64(self.grid.weights[s], 0.0));
                    let b = &other.blocks[s * n..(s + 1) * n];
                    for (r, bb) in row.iter_mut().zip(b) {
                        *r += a * *bb;
                    }
                }
                row
            })
            .collect();
        KernelMatrix { grid: self.grid.clone(), blocks }
    }

    /// Largest entry modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &KernelMatrix) -> f64 {
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| (*a - *b).max_abs()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(|a| a.max_abs()).fold(0.0, f64::max)
    }

    /// Weighted matrix `W^{1/2} K W^{1/2}`, rows indexed by `x`, columns by `t`.
    fn weighted_dense(&self) -> DMatrix<Complex64> {
        let n = self.n();
        let sw: Vec<f64> = self.grid.weights.iter().map(|w| w.sqrt()).collect();
        DMatrix::from_fn(2 * n, 2 * n, |r, c| {
            let (j, a) = (r / 2, r % 2);
            let (i, b) = (c / 2, c % 2);
            self.at(i, j).get(a, b) * (sw[i] * sw[j])
        })
    }

    /// Randomized low-rank factorization of the weighted kernel.
    pub fn low_rank(&self, rank: usize, seed: u64) -> LowRank {
        let a = self.weighted_dense();
        let k = (rank + 8).min(a.ncols());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let omega = DMatrix::from_fn(a.ncols(), k, |_, _| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let y = &a * omega;
        let q = y.qr().q();
        let b = q.adjoint() * &a;
        LowRank { left: q, right: b }
    }

    /// Operator norm on the weighted grid space.
    pub fn operator_norm(&self, rank_hint: usize) -> f64 {
        sum_norm(&[self.low_rank(rank_hint, 1)])
    }
}

/// `left · right` approximation of a weighted kernel.
#[derive(Debug, Clone)]
pub struct LowRank {
    pub left: DMatrix<Complex64>,
    pub right: DMatrix<Complex64>,
}

/// Operator norm of `Σ left_k · right_k`.
pub fn sum_norm(parts: &[LowRank]) -> f64 {
    if parts.is_empty() {
        return 0.0;
    }
    let rows = parts[0].left.nrows();
    let cols = parts[0].right.ncols();
    let inner: usize = parts.iter().map(|p| p.left.ncols()).sum();
    let mut l = DMatrix::<Complex64>::zeros(rows, inner);
    let mut r = DMatrix::<Complex64>::zeros(inner, cols);
    let mut off = 0;
    for p in parts {
        let k = p.left.ncols();
        l.view_mut((0, off), (rows, k)).copy_from(&p.left);
        r.view_mut((off, 0), (k, cols)).copy_from(&p.right);
        off += k;
    }
    let rr = l.qr().r();
    let core = rr * r;
    let gram = &core * core.adjoint();
    let eig = gram.symmetric_eigenvalues();
    eig.iter().fold(0.0f64, |m, v| m.max(*v)).max(0.0).sqrt()
}

/// Circle used for a projector, with the eigenvalues it encloses.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorContour {
    pub center: Complex64,
    pub radius: f64,
    pub enclosed: Vec<Complex64>,
}

/// Choose the circle for group `n`: radius within `[r/2, r]` of the lattice
/// disk, at least `1e-3` away from every eigenvalue.
pub fn projector_contour(op: &DiracOperator, n: i64) -> Result<ProjectorContour> {
    let g = group_for_projector(op, n);
    let lo = g.first - g.size as i64;
    let hi = g.first + 2 * g.size as i64 - 1;
    let recs = compute_spectrum(op, lo, hi).map_err(|_| DiracError::ContourSeparationFailure(n))?;
    let members: Vec<Complex64> = recs.iter().filter(|r| r.n >= g.first && r.n < g.first + g.size as i64).map(|r| r.lambda).collect();
    let others: Vec<Complex64> = recs.iter().filter(|r| r.n < g.first || r.n >= g.first + g.size as i64).map(|r| r.lambda).collect();
    for k in 0..=8 {
        let rho = g.radius * (1.0 - k as f64 / 16.0);
        let inside = members.iter().all(|z| (z - g.center).norm() <= rho - SEPARATION);
        let outside = others.iter().all(|z| (z - g.center).norm() >= rho + SEPARATION);
        if inside && outside {
            return Ok(ProjectorContour { center: g.center, radius: rho, enclosed: members });
        }
    }
    Err(DiracError::ContourSeparationFailure(n))
}

/// Per-node factors of the smooth part of `G`: `E(x, λ_k)` and
/// `c_k M⁻¹ C E⁻¹(t, λ_k) B⁻¹`, with `c_k` the contour weight.
fn contour_factors(op: &DiracOperator, c: &ProjectorContour, nodes: usize, grid: &QuadGrid) -> Result<Vec<(Vec<Matrix2>, Vec<Matrix2>)>> {
    (0..nodes)
        .into_par_iter()
        .map(|k| {
            let w = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / nodes as f64);
            let lambda = c.center + w * c.radius;
            let es = fundamental_on_nodes(&op.mesh, lambda, &grid.nodes)?;
            let m = op.bc.c() + op.bc.d() * fundamental_matrix(&op.mesh, lambda, PI, false)?.e;
            let core = m.inverse().ok_or(DiracError::ContourSeparationFailure(0))? * op.bc.c();
            // P = -(1/2πi) ∮ R dλ, and dλ = iρw dθ
            let ck = -(w * c.radius) / nodes as f64;
            let right = es.iter().map(|e| (core * inverse_fundamental(e) * b_inv()).scale(ck)).collect();
            Ok((es, right))
        })
        .collect()
}

fn assemble(factors: &[(Vec<Matrix2>, Vec<Matrix2>)], n: usize, stride: usize) -> Vec<Matrix2> {
    (0..n)
        .into_par_iter()
        .flat_map_iter(|j| {
            let mut row = vec![Matrix2::zero(); n];
            for (left, right) in factors.iter().step_by(stride) {
                let l = left[j];
                for (r, rv) in row.iter_mut().zip(right) {
                    *r += l * *rv;
                }
            }
            if stride > 1 {
                for r in row.iter_mut() {
                    *r = r.scale(c64(stride as f64, 0.0));
                }
            }
            row
        })
        .collect()
}

/// Spectral projector of lattice group `n` (a doubled pair for regular but
/// not strongly regular conditions, a single eigenvalue otherwise).
pub fn spectral_projector(op: &DiracOperator, n: i64, grid: &Arc<QuadGrid>) -> Result<KernelMatrix> {
    let c = projector_contour(op, n)?;
    spectral_projector_on(op, &c, grid)
}

pub fn spectral_projector_on(op: &DiracOperator, c: &ProjectorContour, grid: &Arc<QuadGrid>) -> Result<KernelMatrix> {
    let nx = grid.len();
    let mut nodes = CONTOUR_NODES;
    let probe: Vec<usize> = (0..nx).step_by((nx / 16).max(1)).collect();
    loop {
        let factors = contour_factors(op, c, nodes, grid)?;
        // estimate the quadrature error on a probe subgrid against the
        // half-node rule
        let mut err = 0.0f64;
        for &j in &probe {
            for &i in &probe {
                let mut full = Matrix2::zero();
                let mut half = Matrix2::zero();
                for (k, (l, r)) in factors.iter().enumerate() {
                    let v = l[j] * r[i];
                    full += v;
                    if k % 2 == 0 {
                        half += v;
                    }
                }
                err = err.max((full - half.scale(c64(2.0, 0.0))).max_abs());
            }
        }
        if err < CONTOUR_TOL || nodes >= 1024 {
            return Ok(KernelMatrix { grid: grid.clone(), blocks: assemble(&factors, nx, 1) });
        }
        nodes *= 2;
    }
}

/// Default 512-node Gauss grid for kernels.
pub fn default_kernel_grid() -> Arc<QuadGrid> {
    Arc::new(QuadGrid::gauss_with_nodes(DEFAULT_KERNEL_NODES).expect("valid grid"))
}

/// `max |K_{P,n} - K_{0,n}|` over grid pairs.
pub fn projector_deviation(op: &DiracOperator, n: i64, grid: &Arc<QuadGrid>) -> Result<f64> {
    let free = DiracOperator::with_mesh_cells(op.bc, PotentialSpec::zero(), op.mesh.cells())?;
    let a = spectral_projector(op, n, grid)?;
    let b = spectral_projector(&free, n, grid)?;
    Ok(a.max_abs_diff(&b))
}
