//! Potentials on `[0, π]`, integration meshes and the gauge reduction to
//! off-diagonal form.

use crate::bcond::BoundaryMatrix;
use crate::error::{DiracError, Result};
use crate::matrix2::{c64, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_MESH_CELLS: usize = 1024;
pub const DEFAULT_MESH_TOL: f64 = 1e-8;
const GAUGE_SAMPLES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTerm {
    pub amplitude: Complex64,
    pub frequency: i64,
}

/// One scalar entry of the potential matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Channel {
    #[default]
    Zero,
    Constant { value: Complex64 },
    /// `Σ c_j x^j`.
    Polynomial { coeffs: Vec<Complex64> },
    /// `Σ a_k e^{ikx}`.
    Trig { terms: Vec<TrigTerm> },
    /// `c x^{-α}`, `0 ≤ α < 1`.
    Power { c: Complex64, alpha: f64 },
    /// Piecewise-linear interpolation of the samples, extended linearly
    /// beyond the first and last node.
    Samples { xs: Vec<f64>, values: Vec<Complex64> },
    /// `base(x) · m(x)` with `m` the piecewise-linear interpolant of
    /// `factor` on `xs`. Produced by the gauge reduction.
    Modulated { base: Box<Channel>, xs: Vec<f64>, factor: Vec<Complex64> },
}

fn zero() -> Complex64 {
    c64(0.0, 0.0)
}

/// Piecewise-linear interpolation with linear extension.
fn interp(xs: &[f64], vs: &[Complex64], x: f64) -> Complex64 {
    if xs.len() == 1 {
        return vs[0];
    }
    let k = match xs.partition_point(|&t| t <= x) {
        0 => 0,
        k if k >= xs.len() => xs.len() - 2,
        k => k - 1,
    };
    let s = (x - xs[k]) / (xs[k + 1] - xs[k]);
    vs[k] + (vs[k + 1] - vs[k]) * s
}

fn sorted_nodes_in(xs: &[f64], a: f64, b: f64) -> impl Iterator<Item = f64> + '_ {
    let lo = xs.partition_point(|&t| t <= a);
    let hi = xs.partition_point(|&t| t < b);
    xs[lo..hi.max(lo)].iter().copied()
}

impl Channel {
    pub fn constant(value: Complex64) -> Self {
        Channel::Constant { value }
    }

    pub fn power(c: Complex64, alpha: f64) -> Self {
        Channel::Power { c, alpha }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(DiracError::InvalidInput(m.to_string()));
        match self {
            Channel::Power { alpha, .. } if !(0.0..1.0).contains(alpha) => {
                bad("power channel requires 0 <= alpha < 1")
            }
            Channel::Samples { xs, values } | Channel::Modulated { xs, factor: values, .. } => {
                if xs.is_empty() || xs.len() != values.len() {
                    return bad("samples need matching, non-empty xs and values");
                }
                if xs.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("sample nodes must be strictly increasing");
                }
                if xs[0] < 0.0 || *xs.last().unwrap() > PI {
                    return bad("sample nodes must lie in [0, pi]");
                }
                if let Channel::Modulated { base, .. } = self {
                    base.validate()?;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Channel::Zero => true,
            Channel::Constant { value } => *value == zero(),
            _ => false,
        }
    }

    /// The value if the channel is constant (zero included).
    pub fn as_constant(&self) -> Option<Complex64> {
        match self {
            Channel::Zero => Some(zero()),
            Channel::Constant { value } => Some(*value),
            _ => None,
        }
    }

    /// Largest singular exponent, 0 for bounded channels.
    pub fn singular_exponent(&self) -> f64 {
        match self {
            Channel::Power { alpha, .. } => *alpha,
            Channel::Modulated { base, .. } => base.singular_exponent(),
            _ => 0.0,
        }
    }

    pub fn eval(&self, x: f64) -> Result<Complex64> {
        Ok(match self {
            Channel::Zero => zero(),
            Channel::Constant { value } => *value,
            Channel::Polynomial { coeffs } => coeffs.iter().rev().fold(zero(), |acc, &c| acc * x + c),
            Channel::Trig { terms } => terms
                .iter()
                .map(|t| t.amplitude * c64(0.0, t.frequency as f64 * x).exp())
                .sum(),
            Channel::Power { c, alpha } => {
                if *alpha == 0.0 {
                    *c
                } else if x <= 0.0 {
                    return Err(DiracError::SingularPoint);
                } else {
                    *c * x.powf(-alpha)
                }
            }
            Channel::Samples { xs, values } => interp(xs, values, x),
            Channel::Modulated { base, xs, factor } => base.eval(x)? * interp(xs, factor, x),
        })
    }

    /// `∫_0^x p(t) dt`.
    pub fn antiderivative(&self, x: f64) -> Complex64 {
        match self {
            Channel::Zero => zero(),
            Channel::Constant { value } => *value * x,
            Channel::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .rev()
                .fold(zero(), |acc, (j, &c)| acc * x + c / (j as f64 + 1.0))
                * x,
            Channel::Trig { terms } => terms
                .iter()
                .map(|t| {
                    if t.frequency == 0 {
                        t.amplitude * x
                    } else {
                        let k = t.frequency as f64;
                        t.amplitude * (c64(0.0, k * x).exp() - 1.0) / c64(0.0, k)
                    }
                })
                .sum(),
            Channel::Power { c, alpha } => *c * x.powf(1.0 - alpha) / (1.0 - alpha),
            Channel::Samples { .. } | Channel::Modulated { .. } => self.cumulative(&[x])[0],
        }
    }

    /// `∫_0^x t p(t) dt`, used for product integration of modulated channels.
    fn first_moment(&self, x: f64) -> Complex64 {
        match self {
            Channel::Zero => zero(),
            Channel::Constant { value } => *value * (x * x / 2.0),
            Channel::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .rev()
                .fold(zero(), |acc, (j, &c)| acc * x + c / (j as f64 + 2.0))
                * (x * x),
            Channel::Trig { terms } => terms
                .iter()
                .map(|t| {
                    if t.frequency == 0 {
                        t.amplitude * (x * x / 2.0)
                    } else {
                        let k = t.frequency as f64;
                        // ∫ t e^{ikt} = e^{ikt}(1/k² - i t/k)
                        let prim = |s: f64| c64(0.0, k * s).exp() * c64(1.0 / (k * k), -s / k);
                        t.amplitude * (prim(x) - prim(0.0))
                    }
                })
                .sum(),
            Channel::Power { c, alpha } => *c * x.powf(2.0 - alpha) / (2.0 - alpha),
            Channel::Samples { xs, values } => {
                let mut acc = zero();
                let mut a = 0.0;
                let piece = |a: f64, b: f64| {
                    let m = 0.5 * (a + b);
                    (interp(xs, values, a) * a
                        + interp(xs, values, m) * (4.0 * m)
                        + interp(xs, values, b) * b)
                        * ((b - a) / 6.0)
                };
                for t in sorted_nodes_in(xs, 0.0, x) {
                    acc += piece(a, t);
                    a = t;
                }
                acc + piece(a, x)
            }
            Channel::Modulated { .. } => {
                // Not needed: the gauge reduction never nests modulations.
                unreachable!("first moment of a modulated channel")
            }
        }
    }

    /// `∫_0^{q} p` for each of the sorted points `qs`, in one sweep.
    pub fn cumulative(&self, qs: &[f64]) -> Vec<Complex64> {
        match self {
            Channel::Samples { xs, values } => sweep(xs, qs, |a, b| {
                (interp(xs, values, a) + interp(xs, values, b)) * ((b - a) / 2.0)
            }),
            Channel::Modulated { base, xs, factor } => {
                let b0 = |t: f64| base.antiderivative(t);
                let b1 = |t: f64| base.first_moment(t);
                sweep(xs, qs, |a, b| {
                    let ma = interp(xs, factor, a);
                    let mb = interp(xs, factor, b);
                    let s = (mb - ma) / (b - a);
                    let i0 = b0(b) - b0(a);
                    let i1 = b1(b) - b1(a);
                    ma * i0 + s * (i1 - i0 * a)
                })
            }
            _ => qs.iter().map(|&q| self.antiderivative(q)).collect(),
        }
    }

    pub fn conj(&self) -> Channel {
        match self {
            Channel::Zero => Channel::Zero,
            Channel::Constant { value } => Channel::Constant { value: value.conj() },
            Channel::Polynomial { coeffs } => Channel::Polynomial { coeffs: coeffs.iter().map(|c| c.conj()).collect() },
            Channel::Trig { terms } => Channel::Trig {
                terms: terms
                    .iter()
                    .map(|t| TrigTerm { amplitude: t.amplitude.conj(), frequency: -t.frequency })
                    .collect(),
            },
            Channel::Power { c, alpha } => Channel::Power { c: c.conj(), alpha: *alpha },
            Channel::Samples { xs, values } => Channel::Samples {
                xs: xs.clone(),
                values: values.iter().map(|c| c.conj()).collect(),
            },
            Channel::Modulated { base, xs, factor } => Channel::Modulated {
                base: Box::new(base.conj()),
                xs: xs.clone(),
                factor: factor.iter().map(|c| c.conj()).collect(),
            },
        }
    }

    /// Crude `L¹(0,π)` estimate from a 4096-cell mesh of exact cell integrals.
    pub fn l1_estimate(&self) -> f64 {
        let m = 4096;
        let qs: Vec<f64> = (0..=m).map(|k| PI * k as f64 / m as f64).collect();
        let f = self.cumulative(&qs);
        f.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }
}

/// Cumulative integral of a function that is smooth between the
/// breakpoints `xs`; `piece(a, b)` integrates over one smooth piece.
fn sweep<F: Fn(f64, f64) -> Complex64>(xs: &[f64], qs: &[f64], piece: F) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(qs.len());
    let mut acc = zero();
    let mut a = 0.0;
    let mut k = xs.partition_point(|&t| t <= 0.0);
    for &q in qs {
        if q < a {
            // unsorted query: restart
            let mut acc2 = zero();
            let mut a2 = 0.0;
            for t in sorted_nodes_in(xs, 0.0, q) {
                acc2 += piece(a2, t);
                a2 = t;
            }
            out.push(acc2 + piece(a2, q));
            continue;
        }
        while k < xs.len() && xs[k] < q {
            if xs[k] > a {
                acc += piece(a, xs[k]);
                a = xs[k];
            }
            k += 1;
        }
        if q > a {
            acc += piece(a, q);
            a = q;
        }
        out.push(acc);
    }
    out
}

/// The four entries `p1 .. p4` of `P = [[p1, p2], [p3, p4]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    #[serde(default)]
    pub p1: Channel,
    #[serde(default)]
    pub p2: Channel,
    #[serde(default)]
    pub p3: Channel,
    #[serde(default)]
    pub p4: Channel,
}

impl PotentialSpec {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Off-diagonal constant potential `p2 = a`, `p3 = b`.
    pub fn constant_offdiag(a: Complex64, b: Complex64) -> Self {
        PotentialSpec { p2: Channel::constant(a), p3: Channel::constant(b), ..Self::default() }
    }

    pub fn channels(&self) -> [&Channel; 4] {
        [&self.p1, &self.p2, &self.p3, &self.p4]
    }

    pub fn validate(&self) -> Result<()> {
        for c in self.channels() {
            c.validate()?;
        }
        if !self.channels().iter().all(|c| c.l1_estimate().is_finite()) {
            return Err(DiracError::InvalidInput("potential is not integrable".into()));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.channels().iter().all(|c| c.is_zero())
    }

    pub fn has_diagonal(&self) -> bool {
        !(self.p1.is_zero() && self.p4.is_zero())
    }

    pub fn eval(&self, x: f64) -> Result<Matrix2> {
        Ok(Matrix2::new(self.p1.eval(x)?, self.p2.eval(x)?, self.p3.eval(x)?, self.p4.eval(x)?))
    }

    /// Conjugate transpose `P*`, the potential of the adjoint operator.
    pub fn adjoint(&self) -> Self {
        PotentialSpec { p1: self.p1.conj(), p2: self.p3.conj(), p3: self.p2.conj(), p4: self.p4.conj() }
    }

    pub fn singular_exponent(&self) -> f64 {
        self.channels().iter().map(|c| c.singular_exponent()).fold(0.0, f64::max)
    }
}

/// Cell boundaries and per-cell channel averages.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub bounds: Vec<f64>,
    /// `[p1, p2, p3, p4]` averaged over each cell.
    pub averages: Vec<[Complex64; 4]>,
}

/// Default mesh for `P`: 1024 uniform cells, graded near 0 for power channels.
pub fn build_mesh(p: &PotentialSpec, tol: f64) -> Mesh {
    Mesh::build(p, DEFAULT_MESH_CELLS, tol)
}

impl Mesh {
    pub fn build(p: &PotentialSpec, cells: usize, tol: f64) -> Mesh {
        let cells = cells.max(1);
        let h = PI / cells as f64;
        let alpha = p.singular_exponent();
        let mut bounds = vec![0.0];
        if alpha > 0.0 {
            let mut w = tol.powf(1.0 / (1.0 - alpha)).max(1e-300).min(h);
            let mut x = 0.0;
            while w < h {
                x += w;
                bounds.push(x);
                w *= 2.0;
            }
            let rest = ((PI - x) / h).ceil().max(1.0) as usize;
            let hh = (PI - x) / rest as f64;
            for k in 1..rest {
                bounds.push(x + hh * k as f64);
            }
        } else {
            for k in 1..cells {
                bounds.push(h * k as f64);
            }
        }
        bounds.push(PI);
        Self::with_bounds(p, bounds)
    }

    /// Mesh with given boundaries, which must run from 0 to π.
    pub fn with_bounds(p: &PotentialSpec, bounds: Vec<f64>) -> Mesh {
        let f: Vec<Option<Vec<Complex64>>> = p
            .channels()
            .iter()
            .map(|c| if c.as_constant().is_some() { None } else { Some(c.cumulative(&bounds)) })
            .collect();
        let consts = p.channels().map(|c| c.as_constant());
        let averages = (0..bounds.len() - 1)
            .map(|k| {
                let w = bounds[k + 1] - bounds[k];
                [0, 1, 2, 3].map(|j| match (&f[j], consts[j]) {
                    (Some(v), _) => (v[k + 1] - v[k]) / w,
                    (None, c) => c.unwrap(),
                })
            })
            .collect();
        Mesh { bounds, averages }
    }

    pub fn cells(&self) -> usize {
        self.averages.len()
    }

    pub fn width(&self, k: usize) -> f64 {
        self.bounds[k + 1] - self.bounds[k]
    }

    /// Index of the cell containing `x` (the left cell at interior bounds).
    pub fn cell_of(&self, x: f64) -> Result<usize> {
        let end = *self.bounds.last().unwrap();
        if !(x >= 0.0 && x <= end) {
            return Err(DiracError::MeshMismatch(x));
        }
        let k = self.bounds.partition_point(|&b| b < x);
        Ok(k.saturating_sub(1).min(self.cells() - 1))
    }

    /// Conjugate-transposed averages, i.e. the mesh of `P*`.
    pub fn adjoint(&self) -> Mesh {
        Mesh {
            bounds: self.bounds.clone(),
            averages: self
                .averages
                .iter()
                .map(|a| [a[0].conj(), a[2].conj(), a[1].conj(), a[3].conj()])
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaugeResult {
    pub potential: PotentialSpec,
    pub bc: BoundaryMatrix,
    pub gamma: Complex64,
}

/// Remove `p1`, `p4` by the diagonal multiplier `diag(e^{iφ}, e^{iψ})`,
/// `φ = γx - ∫p1`, `ψ = ∫p4 - γx`.
///
/// The reduced operator plus `γ` is similar to the original one, with
/// `p̃2 = p2 e^{i(ψ-φ)}`, `p̃3 = p3 e^{i(φ-ψ)}` and `D̃ = e^{(i/2)∫(p4-p1)} D`.
pub fn gauge_reduce(p: &PotentialSpec, u: &BoundaryMatrix) -> Result<GaugeResult> {
    if !u.classify()?.is_regular() {
        return Err(DiracError::NonRegularInput);
    }
    if !p.has_diagonal() {
        return Ok(GaugeResult { potential: p.clone(), bc: *u, gamma: zero() });
    }
    let i1 = p.p1.antiderivative(PI);
    let i4 = p.p4.antiderivative(PI);
    let gamma = (i1 + i4) / (2.0 * PI);
    let bc = u.scale_d((Complex64::i() * 0.5 * (i4 - i1)).exp())?;
    let (p2, p3) = if p.p1.as_constant().is_some() && p.p4.as_constant().is_some() {
        (p.p2.clone(), p.p3.clone())
    } else {
        let xs: Vec<f64> = (0..=GAUGE_SAMPLES).map(|k| PI * k as f64 / GAUGE_SAMPLES as f64).collect();
        let a1 = p.p1.cumulative(&xs);
        let a4 = p.p4.cumulative(&xs);
        // θ = φ - ψ = 2γx - ∫(p1 + p4)
        let theta: Vec<Complex64> = xs.iter().zip(a1.iter().zip(&a4)).map(|(&x, (f1, f4))| gamma * (2.0 * x) - f1 - f4).collect();
        let modulate = |c: &Channel, sign: f64| -> Channel {
            if c.is_zero() {
                return Channel::Zero;
            }
            let (base, prior): (Channel, Option<(&Vec<f64>, &Vec<Complex64>)>) = match c {
                Channel::Modulated { base, xs, factor } => ((**base).clone(), Some((xs, factor))),
                other => (other.clone(), None),
            };
            let factor = xs
                .iter()
                .zip(&theta)
                .map(|(&x, &t)| {
                    let m = (Complex64::i() * t * sign).exp();
                    match prior {
                        Some((px, pf)) => m * interp(px, pf, x),
                        None => m,
                    }
                })
                .collect();
            Channel::Modulated { base: Box::new(base), xs: xs.clone(), factor }
        };
        (modulate(&p.p2, -1.0), modulate(&p.p3, 1.0))
    };
    Ok(GaugeResult { potential: PotentialSpec { p1: Channel::Zero, p2, p3, p4: Channel::Zero }, bc, gamma })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(PotentialSpec::zero().eval(1.3).unwrap(), Matrix2::zero());
        let p = PotentialSpec::constant_offdiag(c64(1., 0.), c64(1., 0.));
        let one = c64(1., 0.);
        assert_eq!(p.eval(1.0).unwrap(), Matrix2::new(zero(), one, one, zero()));
        let q = PotentialSpec { p2: Channel::power(one, 0.5), ..Default::default() };
        let v = q.eval(PI / 4.0).unwrap().get(0, 1);
        assert!((v.re - 2.0 / PI.sqrt()).abs() < 1e-15);
        assert_eq!(q.eval(0.0), Err(DiracError::SingularPoint));
    }

    #[test]
    fn antiderivative_examples() {
        let one = c64(1., 0.);
        assert!(close(Channel::constant(one).antiderivative(PI), c64(PI, 0.), 1e-15));
        assert!(close(Channel::power(one, 0.5).antiderivative(PI), c64(2.0 * PI.sqrt(), 0.), 1e-14));
        assert_eq!(Channel::Zero.antiderivative(2.0), zero());
        let poly = Channel::Polynomial { coeffs: vec![one, c64(0., 2.), c64(3., 0.)] };
        // x + i x^2 + x^3
        assert!(close(poly.antiderivative(2.0), c64(10.0, 4.0), 1e-14));
        let trig = Channel::Trig { terms: vec![TrigTerm { amplitude: one, frequency: 2 }, TrigTerm { amplitude: one, frequency: 0 }] };
        assert!(close(trig.antiderivative(PI), c64(PI, 0.), 1e-14));
    }

    #[test]
    fn samples_are_integrated_exactly() {
        let s = Channel::Samples { xs: vec![1.0, 2.0], values: vec![c64(1., 0.), c64(3., 0.)] };
        // value 2x - 1 everywhere, by linear extension
        assert!(close(s.eval(0.0).unwrap(), c64(-1., 0.), 1e-15));
        assert!(close(s.antiderivative(3.0), c64(6.0, 0.), 1e-14));
        assert!(close(s.first_moment(3.0), c64(18.0 - 4.5, 0.), 1e-13));
        let c = s.cumulative(&[0.5, 1.5, 3.0]);
        assert!(close(c[0], c64(-0.25, 0.), 1e-15) && close(c[1], c64(0.75, 0.), 1e-14) && close(c[2], c64(6.0, 0.), 1e-14));
    }

    #[test]
    fn moments_match_quadrature() {
        let chans = [
            Channel::Polynomial { coeffs: vec![c64(1., 1.), c64(-2., 0.)] },
            Channel::Trig { terms: vec![TrigTerm { amplitude: c64(0.5, -1.), frequency: -3 }] },
            Channel::power(c64(2., 0.), 0.3),
        ];
        for ch in &chans {
            let n = 200000;
            let h = 2.0 / n as f64;
            let mut acc = zero();
            for k in 0..n {
                let t = (k as f64 + 0.5) * h;
                acc += ch.eval(t).unwrap() * t * h;
            }
            assert!(close(ch.first_moment(2.0), acc, 1e-6), "{ch:?}");
        }
    }

    #[test]
    fn validation() {
        assert!(Channel::power(c64(1., 0.), 1.0).validate().is_err());
        assert!(Channel::Samples { xs: vec![1.0, 0.5], values: vec![zero(), zero()] }.validate().is_err());
        assert!(Channel::Samples { xs: vec![0.0, 4.0], values: vec![zero(), zero()] }.validate().is_err());
        assert!(Channel::Samples { xs: vec![0.0], values: vec![] }.validate().is_err());
    }

    #[test]
    fn mesh_examples() {
        let m = build_mesh(&PotentialSpec::zero(), 1e-8);
        assert_eq!(m.cells(), DEFAULT_MESH_CELLS);
        assert!(m.averages.iter().flatten().all(|a| *a == zero()));
        let c = c64(0.7, -0.2);
        let m = build_mesh(&PotentialSpec::constant_offdiag(c, c), 1e-8);
        assert!(m.averages.iter().all(|a| close(a[1], c, 1e-14) && close(a[2], c, 1e-14)));
        let p = PotentialSpec { p2: Channel::power(c64(1., 0.), 0.5), ..Default::default() };
        let m = build_mesh(&p, 1e-8);
        assert!(m.width(0) <= 1e-15);
        let total: Complex64 = (0..m.cells()).map(|k| m.averages[k][1] * m.width(k)).sum();
        assert!(close(total, c64(2.0 * PI.sqrt(), 0.), 1e-12));
        assert_eq!(*m.bounds.last().unwrap(), PI);
        assert!(m.bounds.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(m.cell_of(4.0), Err(DiracError::MeshMismatch(4.0)));
    }

    #[test]
    fn gauge_identity_without_diagonal() {
        let p = PotentialSpec::constant_offdiag(c64(1., 0.), c64(2., 0.));
        let u = BoundaryMatrix::periodic();
        let g = gauge_reduce(&p, &u).unwrap();
        assert_eq!(g.potential, p);
        assert_eq!(g.bc, u);
        assert_eq!(g.gamma, zero());
    }

    #[test]
    fn gauge_constant_p1_periodic() {
        let p = PotentialSpec { p1: Channel::constant(c64(1., 0.)), ..Default::default() };
        let g = gauge_reduce(&p, &BoundaryMatrix::periodic()).unwrap();
        assert!(close(g.gamma, c64(0.5, 0.), 1e-15));
        assert!(g.potential.is_zero());
        // D̃ = e^{-iπ/2} · (-I) = i I
        let d = g.bc.d();
        assert!(close(d.get(0, 0), c64(0., 1.), 1e-15) && close(d.get(1, 1), c64(0., 1.), 1e-15));
        assert_eq!(g.bc.c(), Matrix2::identity());
    }

    #[test]
    fn gauge_equal_constant_diagonal_keeps_offdiag() {
        let c = c64(0.3, 0.1);
        let p = PotentialSpec { p1: Channel::constant(c), p4: Channel::constant(c), p2: Channel::power(c64(1., 0.), 0.5), p3: Channel::constant(c64(2., 0.)) };
        let g = gauge_reduce(&p, &BoundaryMatrix::separated()).unwrap();
        assert!(close(g.gamma, c, 1e-15));
        assert_eq!(g.potential.p2, p.p2);
        assert_eq!(g.potential.p3, p.p3);
    }

    #[test]
    fn gauge_modulation_matches_pointwise_formula() {
        let p = PotentialSpec {
            p1: Channel::Trig { terms: vec![TrigTerm { amplitude: c64(0.5, 0.), frequency: 1 }] },
            p2: Channel::constant(c64(1., 0.)),
            p3: Channel::power(c64(1., 0.), 0.5),
            p4: Channel::Zero,
        };
        let g = gauge_reduce(&p, &BoundaryMatrix::separated()).unwrap();
        let x = 1.1;
        let gamma = g.gamma;
        let phi = gamma * x - p.p1.antiderivative(x);
        let psi = -gamma * x;
        let want2 = (Complex64::i() * (psi - phi)).exp();
        assert!(close(g.potential.p2.eval(x).unwrap(), want2, 1e-6));
        let want3 = x.powf(-0.5) * (Complex64::i() * (phi - psi)).exp();
        assert!(close(g.potential.p3.eval(x).unwrap(), want3, 1e-6));
        // product integration of the modulated power channel
        // midpoint rule after t = s², which removes the singularity
        let n = 200000;
        let h = x.sqrt() / n as f64;
        let mut acc = zero();
        for k in 0..n {
            let s = (k as f64 + 0.5) * h;
            acc += g.potential.p3.eval(s * s).unwrap() * (2.0 * s * h);
        }
        assert!(close(g.potential.p3.antiderivative(x), acc, 1e-7));
    }

    #[test]
    fn adjoint_potential() {
        let p = PotentialSpec { p1: Channel::constant(c64(0., 1.)), p2: Channel::constant(c64(1., 2.)), ..Default::default() };
        let a = p.adjoint();
        assert_eq!(a.p1, Channel::constant(c64(0., -1.)));
        assert_eq!(a.p3, Channel::constant(c64(1., -2.)));
        assert!(a.p2.is_zero());
    }

    #[test]
    fn json_schema() {
        let s = r#"{"p2": {"kind":"constant","value":[1,0]}, "p3": {"kind":"power","c":[1,0],"alpha":0.5}}"#;
        let p: PotentialSpec = serde_json::from_str(s).unwrap();
        assert_eq!(p.p2, Channel::constant(c64(1., 0.)));
        assert_eq!(p.p3, Channel::power(c64(1., 0.), 0.5));
        assert!(p.p1.is_zero());
        let back: PotentialSpec = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<PotentialSpec>(r#"{"p5": {"kind":"zero"}}"#).is_err());
        assert!(serde_json::from_str::<PotentialSpec>(r#"{"p2": {"kind":"constant","value":[1,0],"x":1}}"#).is_err());
    }
}
