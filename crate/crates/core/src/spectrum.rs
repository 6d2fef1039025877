//! Eigenvalues as zeros of `Δ`, located by the argument principle around
//! the unperturbed lattice and polished by Newton's method.

use crate::chardet::{char_det, delta};
use crate::error::{DiracError, Result};
use crate::matrix2::c64;
use crate::operator::DiracOperator;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cell::Cell;
use std::collections::BTreeMap;
use std::f64::consts::PI;

const MAX_WINDING_NODES: usize = 1 << 16;
const PHASE_STEP: f64 = PI / 3.0;
const ZERO_ON_CONTOUR: f64 = 1e-12;
const MULTIPLICITY_RADIUS: f64 = 1e-4;
const NEWTON_MAX_ITER: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueRecord {
    pub n: i64,
    pub lambda: Complex64,
    pub lambda0: Complex64,
    pub multiplicity: usize,
    pub residual: f64,
}

impl EigenvalueRecord {
    pub fn deviation(&self) -> f64 {
        (self.lambda - self.lambda0).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContourShape {
    Circle { center: Complex64, radius: f64 },
    /// Axis-parallel rectangle `[re_lo, re_hi] × [im_lo, im_hi]`.
    Rectangle { re_lo: f64, re_hi: f64, im_lo: f64, im_hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contour {
    pub shape: ContourShape,
    /// Initial node count before adaptive refinement.
    pub nodes: usize,
}

impl Contour {
    pub fn circle(center: Complex64, radius: f64) -> Self {
        Contour { shape: ContourShape::Circle { center, radius }, nodes: 32 }
    }

    pub fn rectangle(re_lo: f64, re_hi: f64, im_lo: f64, im_hi: f64) -> Self {
        let perimeter = 2.0 * ((re_hi - re_lo) + (im_hi - im_lo));
        let nodes = ((perimeter * 8.0).ceil() as usize).max(32);
        Contour { shape: ContourShape::Rectangle { re_lo, re_hi, im_lo, im_hi }, nodes }
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes.max(4);
        self
    }

    /// Point at parameter `s ∈ [0, 1)`, counter-clockwise.
    pub fn point(&self, s: f64) -> Complex64 {
        match self.shape {
            ContourShape::Circle { center, radius } => center + Complex64::from_polar(radius, 2.0 * PI * s),
            ContourShape::Rectangle { re_lo, re_hi, im_lo, im_hi } => {
                let w = re_hi - re_lo;
                let h = im_hi - im_lo;
                let mut t = s.rem_euclid(1.0) * 2.0 * (w + h);
                if t < w {
                    return c64(re_lo + t, im_lo);
                }
                t -= w;
                if t < h {
                    return c64(re_hi, im_lo + t);
                }
                t -= h;
                if t < w {
                    return c64(re_hi - t, im_hi);
                }
                t -= w;
                c64(re_lo, im_hi - t)
            }
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        match self.shape {
            ContourShape::Circle { center, radius } => (z - center).norm() < radius,
            ContourShape::Rectangle { re_lo, re_hi, im_lo, im_hi } => {
                z.re > re_lo && z.re < re_hi && z.im > im_lo && z.im < im_hi
            }
        }
    }
}

/// Winding number of `f` along the contour by phase accumulation with
/// adaptive segment splitting.
pub fn winding_number<F>(f: &F, contour: &Contour) -> Result<i64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let n0 = contour.nodes.max(4);
    let budget = Cell::new(n0);
    let mut vals = Vec::with_capacity(n0);
    for k in 0..n0 {
        vals.push(f(contour.point(k as f64 / n0 as f64))?);
    }
    let mut max_abs = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut min_abs = vals.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    let mut total = 0.0;
    for k in 0..n0 {
        let sa = k as f64 / n0 as f64;
        let sb = (k + 1) as f64 / n0 as f64;
        let (fa, fb) = (vals[k], vals[(k + 1) % n0]);
        total += segment_phase(f, contour, sa, fa, sb, fb, &budget, &mut max_abs, &mut min_abs)?;
    }
    if !(min_abs > ZERO_ON_CONTOUR * max_abs) {
        return Err(DiracError::ZeroOnContour);
    }
    let w = total / (2.0 * PI);
    let r = w.round();
    if (w - r).abs() >= 1e-3 {
        return Err(DiracError::NonConvergedWinding);
    }
    Ok(r as i64)
}

#[allow(clippy::too_many_arguments)]
fn segment_phase<F>(
    f: &F,
    contour: &Contour,
    sa: f64,
    fa: Complex64,
    sb: f64,
    fb: Complex64,
    budget: &Cell<usize>,
    max_abs: &mut f64,
    min_abs: &mut f64,
) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if fa == c64(0.0, 0.0) || fb == c64(0.0, 0.0) {
        return Err(DiracError::ZeroOnContour);
    }
    let d = (fb / fa).arg();
    if d.abs() < PHASE_STEP {
        return Ok(d);
    }
    if sb - sa < 1e-13 {
        return Err(DiracError::ZeroOnContour);
    }
    if budget.get() >= MAX_WINDING_NODES {
        return Err(DiracError::NonConvergedWinding);
    }
    budget.set(budget.get() + 1);
    let sm = 0.5 * (sa + sb);
    let fm = f(contour.point(sm))?;
    *max_abs = max_abs.max(fm.norm());
    *min_abs = min_abs.min(fm.norm());
    Ok(segment_phase(f, contour, sa, fa, sm, fm, budget, max_abs, min_abs)?
        + segment_phase(f, contour, sm, fm, sb, fb, budget, max_abs, min_abs)?)
}

/// Number of zeros of `Δ` inside the contour, with multiplicity.
pub fn count_zeros(op: &DiracOperator, contour: &Contour) -> Result<usize> {
    // a positive factor leaves the phase alone; it keeps the zero-on-contour
    // test relative to the local size e^{π|Im λ|} of Δ
    let w = winding_number(&|z: Complex64| Ok(delta(op, z)? * (-PI * z.im.abs()).exp()), contour)?;
    usize::try_from(w).map_err(|_| DiracError::NonConvergedWinding)
}

/// Power sums `Σ (z_j - c)^p`, `p = 1..=k`, of the zeros inside a circle,
/// by trapezoidal quadrature of `Δ'/Δ`.
fn circle_moments(op: &DiracOperator, center: Complex64, radius: f64, k: usize) -> Result<Vec<Complex64>> {
    let mut n = 32;
    let mut prev: Option<Vec<Complex64>> = None;
    let mut samples: Vec<Complex64> = Vec::new();
    loop {
        // reuse the previous level's nodes: they are the even ones
        let mut fresh = Vec::with_capacity(n);
        for j in 0..n {
            if !samples.is_empty() && j % 2 == 0 {
                fresh.push(samples[j / 2]);
                continue;
            }
            let w = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
            let e = char_det(op, center + w * radius)?;
            if e.delta == c64(0.0, 0.0) {
                return Err(DiracError::ZeroOnContour);
            }
            fresh.push(e.ddelta / e.delta);
        }
        samples = fresh;
        let m: Vec<Complex64> = (1..=k)
            .map(|p| {
                samples
                    .iter()
                    .enumerate()
                    .map(|(j, g)| Complex64::from_polar(radius.powi(p as i32 + 1), 2.0 * PI * (j * (p + 1)) as f64 / n as f64) * g)
                    .sum::<Complex64>()
                    / n as f64
            })
            .collect();
        if let Some(pm) = &prev {
            let err = pm.iter().zip(&m).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            if err <= 1e-12 * radius.max(1e-300) || n >= 512 {
                return Ok(m);
            }
        }
        prev = Some(m);
        n *= 2;
    }
}

/// Roots of the monic polynomial with the given power sums.
fn roots_from_power_sums(s: &[Complex64]) -> Vec<Complex64> {
    let k = s.len();
    if k == 0 {
        return vec![];
    }
    if k == 1 {
        return vec![s[0]];
    }
    // elementary symmetric functions by Newton's identities
    let mut e = vec![c64(1.0, 0.0)];
    for m in 1..=k {
        let mut acc = c64(0.0, 0.0);
        for i in 1..=m {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += e[m - i] * s[i - 1] * sign;
        }
        e.push(acc / m as f64);
    }
    if k == 2 {
        let b = -e[1];
        let c = e[2];
        let d = (b * b - 4.0 * c).sqrt();
        return vec![(-b + d) / 2.0, (-b - d) / 2.0];
    }
    // Durand–Kerner on u^k - e1 u^{k-1} + e2 u^{k-2} - ...
    let coef: Vec<Complex64> = (0..=k).map(|i| if i % 2 == 0 { e[i] } else { -e[i] }).collect();
    let eval = |u: Complex64| coef.iter().fold(c64(0.0, 0.0), |acc, &c| acc * u + c);
    let scale = s.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-3);
    let mut z: Vec<Complex64> = (0..k).map(|j| Complex64::from_polar(scale, 0.4 + 2.0 * PI * j as f64 / k as f64)).collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for j in 0..k {
            let mut den = c64(1.0, 0.0);
            for (l, zl) in z.iter().enumerate() {
                if l != j {
                    den *= z[j] - zl;
                }
            }
            let step = eval(z[j]) / den;
            z[j] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-15 * scale {
            break;
        }
    }
    z
}

/// Newton's method for a zero of `Δ` of the given multiplicity, deflating
/// the already known zeros `known`.
fn newton(op: &DiracOperator, start: Complex64, known: &[Complex64], mult: usize) -> Result<(Complex64, f64)> {
    let deflated = |z: Complex64, d: Complex64| known.iter().fold(d.norm(), |acc, k| acc / (z - k).norm());
    let mut z = start;
    let mut ev = char_det(op, z)?;
    for _ in 0..NEWTON_MAX_ITER {
        if ev.delta == c64(0.0, 0.0) {
            break;
        }
        let g = ev.ddelta / ev.delta - known.iter().map(|k| (z - k).inv()).sum::<Complex64>();
        let mut step = mult as f64 / g;
        if !step.re.is_finite() || !step.im.is_finite() {
            return Err(DiracError::NewtonFailure(format!("{z}")));
        }
        let r0 = deflated(z, ev.delta);
        let mut next = char_det(op, z - step)?;
        let mut halvings = 0;
        while deflated(z - step, next.delta) > r0 && halvings < 8 {
            step *= 0.5;
            next = char_det(op, z - step)?;
            halvings += 1;
        }
        z -= step;
        ev = next;
        if step.norm() <= 4e-16 * z.norm().max(1.0) {
            break;
        }
    }
    Ok((z, ev.delta.norm()))
}

/// Lattice indices sharing one disk: a doubled pair or a single index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Group {
    pub id: i64,
    pub first: i64,
    pub size: usize,
    pub center: Complex64,
    pub radius: f64,
}

/// Group `n` and its lattice disk, as used for the spectral projector `P_n`.
pub fn group_for_projector(op: &DiracOperator, n: i64) -> Group {
    make_group(op, n)
}

/// Index of the group that contains eigenvalue index `n`.
pub fn group_index(op: &DiracOperator, n: i64) -> i64 {
    group_of(op, n)
}

fn group_of(op: &DiracOperator, n: i64) -> i64 {
    if op.lattice.doubled() {
        n.div_euclid(2)
    } else {
        n
    }
}

fn make_group(op: &DiracOperator, id: i64) -> Group {
    let lat = &op.lattice;
    if lat.doubled() {
        let c = lat.lambda0(2 * id);
        let gap = (lat.lambda0(2 * id + 2) - c).norm().min((c - lat.lambda0(2 * id - 2)).norm());
        Group { id, first: 2 * id, size: 2, center: c, radius: (gap / 4.0).min(0.25) }
    } else {
        let c = lat.lambda0(id);
        let gap = (lat.lambda0(id + 1) - c).norm().min((c - lat.lambda0(id - 1)).norm());
        Group { id, first: id, size: 1, center: c, radius: (gap / 4.0).min(0.25) }
    }
}

/// Zeros inside a disk known to contain exactly `k` of them.
fn zeros_in_disk(op: &DiracOperator, g: &Group, k: usize) -> Result<Vec<Complex64>> {
    let inside = |z: Complex64| (z - g.center).norm() < g.radius;
    if k == 1 {
        if let Ok((z, _)) = newton(op, g.center, &[], 1) {
            if inside(z) {
                return Ok(vec![z]);
            }
        }
    }
    let s = circle_moments(op, g.center, g.radius, k)?;
    let est: Vec<Complex64> = roots_from_power_sums(&s).into_iter().map(|u| u + g.center).collect();
    polish(op, &est, g.radius)
}

/// Newton polish of root estimates; nearly coincident estimates are treated
/// as one multiple zero.
fn polish(op: &DiracOperator, est: &[Complex64], scale: f64) -> Result<Vec<Complex64>> {
    let mut order: Vec<Complex64> = est.to_vec();
    order.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut out: Vec<Complex64> = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && (order[j] - order[i]).norm() < 1e-5 * scale.max(1e-3) {
            j += 1;
        }
        let m = j - i;
        let mean = order[i..j].iter().sum::<Complex64>() / m as f64;
        if m > 1 {
            let (z, _) = newton(op, mean, &[], m)?;
            out.extend(std::iter::repeat_n(z, m));
        } else {
            let (z, _) = newton(op, mean, &out, 1)?;
            out.push(z);
        }
        i = j;
    }
    Ok(out)
}

/// Newton refinement of a simple zero of `Δ` from `start`; returns the
/// zero and `|Δ|` there.
pub fn refine_zero(op: &DiracOperator, start: Complex64) -> Result<(Complex64, f64)> {
    newton(op, start, &[], 1)
}

struct Located {
    zeros: Vec<Complex64>,
}

/// Eigenvalues `λ_n` for `n_min ≤ n ≤ n_max`, paired with lattice points.
pub fn compute_spectrum(op: &DiracOperator, n_min: i64, n_max: i64) -> Result<Vec<EigenvalueRecord>> {
    if n_min > n_max {
        return Ok(vec![]);
    }
    let (g_lo, g_hi) = (group_of(op, n_min), group_of(op, n_max));
    let mut groups: BTreeMap<i64, (Group, usize)> = BTreeMap::new();
    let counted: Vec<(Group, usize)> = (g_lo..=g_hi)
        .into_par_iter()
        .map(|id| {
            let g = make_group(op, id);
            Ok((g, count_zeros(op, &Contour::circle(g.center, g.radius))?))
        })
        .collect::<Result<_>>()?;
    for (g, c) in counted {
        groups.insert(g.id, (g, c));
    }
    let mut found: BTreeMap<i64, Located> = BTreeMap::new();
    let good: Vec<(Group, usize)> = groups.values().filter(|(g, c)| *c == g.size).copied().collect();
    let located: Vec<(i64, Vec<Complex64>)> = good
        .par_iter()
        .map(|(g, c)| Ok((g.id, zeros_in_disk(op, g, *c)?)))
        .collect::<Result<_>>()?;
    for (id, zeros) in located {
        found.insert(id, Located { zeros });
    }
    let bad: Vec<i64> = groups.values().filter(|(g, c)| *c != g.size).map(|(g, _)| g.id).collect();
    if !bad.is_empty() {
        central_sweep(op, &mut groups, &mut found, bad[0], *bad.last().unwrap())?;
    }
    let mut out = Vec::new();
    for (id, loc) in &found {
        let g = groups[id].0;
        let mut zs = loc.zeros.clone();
        zs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let mults = multiplicities(op, &zs, g.size)?;
        for (j, (z, m)) in zs.iter().zip(mults).enumerate() {
            let n = g.first + j as i64;
            if n < n_min || n > n_max {
                continue;
            }
            out.push(EigenvalueRecord {
                n,
                lambda: *z,
                lambda0: op.lambda0(n),
                multiplicity: m,
                residual: delta(op, *z)?.norm(),
            });
        }
    }
    out.sort_by_key(|r| r.n);
    Ok(out)
}

fn multiplicities(op: &DiracOperator, zs: &[Complex64], group_size: usize) -> Result<Vec<usize>> {
    if group_size == 1 && zs.len() == 1 {
        return Ok(vec![1]);
    }
    zs.iter()
        .map(|&z| {
            let mut r = MULTIPLICITY_RADIUS;
            for &w in zs {
                let d = (w - z).norm();
                if d > 1e-10 {
                    r = r.min(d / 3.0);
                }
            }
            count_zeros(op, &Contour::circle(z, r))
        })
        .collect()
}

/// Locate zeros whose lattice disks miscounted, using a rectangle spanning
/// the bad groups, widened until it holds as many zeros as indices.
fn central_sweep(
    op: &DiracOperator,
    groups: &mut BTreeMap<i64, (Group, usize)>,
    found: &mut BTreeMap<i64, Located>,
    bad_lo: i64,
    bad_hi: i64,
) -> Result<()> {
    let ensure = |groups: &mut BTreeMap<i64, (Group, usize)>, id: i64| -> Result<()> {
        if let std::collections::btree_map::Entry::Vacant(e) = groups.entry(id) {
            let g = make_group(op, id);
            e.insert((g, count_zeros(op, &Contour::circle(g.center, g.radius))?));
        }
        Ok(())
    };
    let (mut a, mut b) = (bad_lo, bad_hi);
    for _ in 0..12 {
        for id in a - 1..=b + 1 {
            ensure(groups, id)?;
        }
        // widen until both sides of the rectangle fall between lattice
        // columns with distinct real parts and next to good groups
        let ca = groups[&(a - 1)].0.center.re;
        let cb = groups[&(b + 1)].0.center.re;
        let left_ok = groups[&(a - 1)].1 == groups[&(a - 1)].0.size && ca < groups[&a].0.center.re - 1e-9;
        let right_ok = groups[&(b + 1)].1 == groups[&(b + 1)].0.size && cb > groups[&b].0.center.re + 1e-9;
        if !left_ok {
            a -= 1;
            continue;
        }
        if !right_ok {
            b += 1;
            continue;
        }
        let expected: usize = (a..=b).map(|id| groups[&id].0.size).sum();
        let max_im = (a..=b).map(|id| groups[&id].0.center.im.abs()).fold(0.0, f64::max);
        let mut alpha = (1.0f64).max(2.0 * max_im + 1.0);
        // sides sit off-centre between columns; symmetric spectra put zeros
        // exactly at the midpoints
        let mut sides = None;
        for t in SPLIT_FRACTIONS {
            let re_lo = ca + t * (groups[&a].0.center.re - ca);
            let re_hi = cb + t * (groups[&b].0.center.re - cb);
            match count_rect(op, re_lo, re_hi, alpha) {
                Ok(c) => {
                    sides = Some((re_lo, re_hi, c));
                    break;
                }
                Err(DiracError::ZeroOnContour) => continue,
                Err(e) => return Err(e),
            }
        }
        let (re_lo, re_hi, mut count) = sides.ok_or(DiracError::ZeroOnContour)?;
        // grow the strip until the count is stable, and keep growing while
        // zeros are still missing: a count that is short may hide zeros far
        // from the axis
        while alpha < MAX_SWEEP_HEIGHT {
            let next = match count_rect(op, re_lo, re_hi, 2.0 * alpha) {
                Ok(c) => c,
                Err(_) => break,
            };
            let stable = next == count;
            alpha *= 2.0;
            count = next;
            if stable && count >= expected {
                break;
            }
        }
        if count != expected {
            a -= 1;
            b += 1;
            continue;
        }
        let all = zeros_in_rect(op, Rect { re_lo, re_hi, im_lo: -alpha, im_hi: alpha }, count, 0)?;
        // zeros in good disks keep their disk; the rest go to bad indices
        let mut leftover = Vec::new();
        let mut good_ids = Vec::new();
        for id in a..=b {
            let (g, c) = groups[&id];
            if c == g.size {
                good_ids.push(id);
            }
        }
        for z in all {
            let in_good = good_ids.iter().any(|id| (z - groups[id].0.center).norm() < groups[id].0.radius);
            if !in_good {
                leftover.push(z);
            }
        }
        for id in &good_ids {
            if !found.contains_key(id) {
                let (g, c) = groups[id];
                found.insert(*id, Located { zeros: zeros_in_disk(op, &g, c)? });
            }
        }
        leftover.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        let bad_ids: Vec<i64> = (a..=b).filter(|id| !good_ids.contains(id)).collect();
        let need: usize = bad_ids.iter().map(|id| groups[id].0.size).sum();
        if leftover.len() != need {
            return Err(DiracError::CountMismatch { found: leftover.len(), expected: need });
        }
        let mut it = leftover.into_iter();
        for id in bad_ids {
            let size = groups[&id].0.size;
            let zeros: Vec<Complex64> = it.by_ref().take(size).collect();
            found.insert(id, Located { zeros });
        }
        return Ok(());
    }
    Err(DiracError::CountMismatch { found: 0, expected: 0 })
}

fn count_rect(op: &DiracOperator, re_lo: f64, re_hi: f64, alpha: f64) -> Result<usize> {
    count_zeros(op, &Contour::rectangle(re_lo, re_hi, -alpha, alpha))
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    re_lo: f64,
    re_hi: f64,
    im_lo: f64,
    im_hi: f64,
}

/// Beyond this height `Δ = det(C + D E)` has lost most of its digits.
const MAX_SWEEP_HEIGHT: f64 = 24.0;

const SPLIT_FRACTIONS: [f64; 4] = [0.4913, 0.5371, 0.4637, 0.5189];

/// All zeros inside a rectangle known to contain `count` of them, by
/// off-centre bisection down to disks.
fn zeros_in_rect(op: &DiracOperator, r: Rect, count: usize, depth: usize) -> Result<Vec<Complex64>> {
    if count == 0 {
        return Ok(vec![]);
    }
    let w = r.re_hi - r.re_lo;
    let h = r.im_hi - r.im_lo;
    let diam = (w * w + h * h).sqrt();
    if (count <= 2 && diam < 0.3) || depth > 40 {
        let center = c64(0.5 * (r.re_lo + r.re_hi), 0.5 * (r.im_lo + r.im_hi));
        let radius = 0.5 * diam;
        // the circumscribed disk may pick up zeros just outside the rectangle
        let k = count_zeros(op, &Contour::circle(center, radius))?;
        let g = Group { id: 0, first: 0, size: k, center, radius };
        let zs = zeros_in_disk(op, &g, k)?;
        let inside: Vec<Complex64> = zs
            .into_iter()
            .filter(|z| z.re > r.re_lo && z.re < r.re_hi && z.im > r.im_lo && z.im < r.im_hi)
            .collect();
        if inside.len() == count {
            return Ok(inside);
        }
        if depth > 40 {
            return Err(DiracError::CountMismatch { found: inside.len(), expected: count });
        }
    }
    let mut last_err = DiracError::ZeroOnContour;
    for frac in SPLIT_FRACTIONS {
        let (r1, r2) = if w >= h {
            let m = r.re_lo + frac * w;
            (Rect { re_hi: m, ..r }, Rect { re_lo: m, ..r })
        } else {
            let m = r.im_lo + frac * h;
            (Rect { im_hi: m, ..r }, Rect { im_lo: m, ..r })
        };
        match count_zeros(op, &Contour::rectangle(r1.re_lo, r1.re_hi, r1.im_lo, r1.im_hi)) {
            Ok(c1) if c1 <= count => {
                let mut z = zeros_in_rect(op, r1, c1, depth + 1)?;
                z.extend(zeros_in_rect(op, r2, count - c1, depth + 1)?);
                return Ok(z);
            }
            Ok(c1) => last_err = DiracError::CountMismatch { found: c1, expected: count },
            Err(e @ DiracError::ZeroOnContour) => last_err = e,
            Err(e) => return Err(e),
        }
    }
    Err(last_err)
}

/// Largest `|Im λ|` over the records: the width of the eigenvalue strip.
pub fn strip_width(records: &[EigenvalueRecord]) -> f64 {
    records.iter().map(|r| r.lambda.im.abs()).fold(0.0, f64::max)
}
