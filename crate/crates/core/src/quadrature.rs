//! Quadrature grids on `[0, π]`: uniform trapezoid and composite
//! Gauss–Legendre panels, with cumulative (indefinite) integration.

use crate::error::{DiracError, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridKind {
    /// `n` equispaced nodes including both ends, trapezoid weights.
    Uniform,
    /// `panels` equal panels with an `order`-point Gauss–Legendre rule each.
    GaussPanels { panels: usize, order: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadGrid {
    pub kind: GridKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Per-panel cumulative integration matrix for Gauss panels:
    /// `cum[i][j] = ∫_{a}^{x_i} ℓ_j`, with `ℓ_j` the Lagrange basis.
    cum: Vec<Vec<f64>>,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[n - 1 - i] = z;
        w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

fn lagrange(nodes: &[f64], j: usize, t: f64) -> f64 {
    nodes
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != j)
        .map(|(_, &xk)| (t - xk) / (nodes[j] - xk))
        .product()
}

impl QuadGrid {
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 5 {
            return Err(DiracError::InvalidInput("uniform grid needs at least 5 nodes".into()));
        }
        let h = PI / (n - 1) as f64;
        let nodes: Vec<f64> = (0..n).map(|k| if k == n - 1 { PI } else { h * k as f64 }).collect();
        let mut weights = vec![h; n];
        weights[0] = h / 2.0;
        weights[n - 1] = h / 2.0;
        Ok(QuadGrid { kind: GridKind::Uniform, nodes, weights, cum: vec![] })
    }

    pub fn gauss_panels(panels: usize, order: usize) -> Result<Self> {
        if panels == 0 || order < 2 {
            return Err(DiracError::InvalidInput("Gauss grid needs panels >= 1 and order >= 2".into()));
        }
        let (x, w) = gauss_legendre(order);
        let h = PI / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let a = h * p as f64;
            for k in 0..order {
                nodes.push(a + 0.5 * h * (x[k] + 1.0));
                weights.push(0.5 * h * w[k]);
            }
        }
        // reference-panel cumulative matrix on [0, 1]
        let t: Vec<f64> = x.iter().map(|v| 0.5 * (v + 1.0)).collect();
        let cum = (0..order)
            .map(|i| {
                (0..order)
                    .map(|j| {
                        (0..order)
                            .map(|q| {
                                let s = t[i] * 0.5 * (x[q] + 1.0);
                                0.5 * t[i] * w[q] * lagrange(&t, j, s)
                            })
                            .sum()
                    })
                    .collect()
            })
            .collect();
        Ok(QuadGrid { kind: GridKind::GaussPanels { panels, order }, nodes, weights, cum })
    }

    /// Grid with about `n` nodes: 16-point Gauss panels.
    pub fn gauss_with_nodes(n: usize) -> Result<Self> {
        Self::gauss_panels(n.div_ceil(16).max(1), 16)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: &[Complex64]) -> Complex64 {
        f.iter().zip(&self.weights).map(|(v, w)| v * *w).sum()
    }

    /// `∫_0^{x_j} f` at every node, for a function sampled on the grid.
    pub fn cumulative(&self, f: &[Complex64]) -> Vec<Complex64> {
        match self.kind {
            GridKind::Uniform => cumulative_uniform(f, self.nodes[1] - self.nodes[0]),
            GridKind::GaussPanels { panels, order } => {
                let h = PI / panels as f64;
                let mut out = Vec::with_capacity(f.len());
                let mut base = Complex64::new(0.0, 0.0);
                for p in 0..panels {
                    let fp = &f[p * order..(p + 1) * order];
                    for i in 0..order {
                        let v: Complex64 = fp.iter().zip(&self.cum[i]).map(|(a, c)| a * *c).sum();
                        out.push(base + v * h);
                    }
                    base += fp.iter().zip(&self.weights[p * order..]).map(|(a, w)| a * *w).sum::<Complex64>();
                }
                out
            }
        }
    }
}

/// Fourth-order cumulative rule from local cubic interpolation.
fn cumulative_uniform(f: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = f.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let c = h / 24.0;
    for k in 0..n - 1 {
        let inc = if k == 0 {
            (f[0] * 9.0 + f[1] * 19.0 - f[2] * 5.0 + f[3]) * c
        } else if k == n - 2 {
            (f[n - 1] * 9.0 + f[n - 2] * 19.0 - f[n - 3] * 5.0 + f[n - 4]) * c
        } else {
            (-f[k - 1] + f[k] * 13.0 + f[k + 1] * 13.0 - f[k + 2]) * c
        };
        out[k + 1] = out[k] + inc;
    }
    out
}
