//! Extrinsic geometry of the graph `{(z(u), u)}` in the warped product.
//!
//! With `p = grad z`, `H = hess z` and `W = sqrt(h^2 + |p|^2)`:
//!
//! ```text
//! g_ij   = h^2 delta_ij + p_i p_j
//! g^ij   = delta_ij / h^2 - p_i p_j / (h^2 W^2)
//! a_ij   = (-h H_ij + 2 h' p_i p_j + h^2 h' delta_ij) / W
//! ```
//!
//! The unit normal has `<N, d/dt> = -h / W < 0`. Principal curvatures are
//! the eigenvalues of `g^{-1/2} a g^{-1/2}`, sorted descending.

use crate::ambient::{WarpValue, WarpingProfile};
use crate::error::{Error, Result};
use crate::grid::{NodeField, TorusGrid};
use crate::small::{self, Mat2, ZERO};
use std::io::Write;

/// Geometry at one node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeGeometry {
    pub z: f64,
    pub warp: WarpValue,
    pub grad: [f64; 2],
    pub hess: Mat2,
    pub w: f64,
    pub g: Mat2,
    pub g_inv: Mat2,
    /// `g^{-1/2}`.
    pub g_inv_sqrt: Mat2,
    /// Second fundamental form `a_ij`.
    pub a: Mat2,
    /// Shape operator `a^i_j = g^ik a_kj`.
    pub shape: Mat2,
    /// `g^{-1/2} a g^{-1/2}`.
    pub sym: Mat2,
    /// Principal curvatures, descending.
    pub lambda: [f64; 2],
    /// Eigenvectors of `sym` as columns, matching `lambda`.
    pub frame: Mat2,
    /// `<N, e_0>`.
    pub nu0: f64,
    /// Support function `-h <N, e_0> = h^2 / W`.
    pub tau: f64,
    /// `-H(z)` with `H' = h`.
    pub eta: f64,
}

impl NodeGeometry {
    /// Pointwise geometry from the height, its derivatives and the warp
    /// values at that height. `eta` is supplied by the caller.
    pub fn from_jet(dim: usize, z: f64, warp: WarpValue, grad: [f64; 2], hess: Mat2, eta: f64) -> Self {
        let WarpValue { h, h1, .. } = warp;
        let p2: f64 = grad[..dim].iter().map(|x| x * x).sum();
        let w = (h * h + p2).sqrt();
        let mut g = ZERO;
        let mut g_inv = ZERO;
        let mut g_inv_sqrt = ZERO;
        let mut a = ZERO;
        let sqrt_coef = 1.0 / (h * w * (h + w));
        for i in 0..dim {
            for j in 0..dim {
                let delta = if i == j { 1.0 } else { 0.0 };
                let pp = grad[i] * grad[j];
                g[i][j] = h * h * delta + pp;
                g_inv[i][j] = delta / (h * h) - pp / (h * h * w * w);
                g_inv_sqrt[i][j] = delta / h - pp * sqrt_coef;
                a[i][j] = (-h * hess[i][j] + 2.0 * h1 * pp + h * h * h1 * delta) / w;
            }
        }
        let shape = small::mul(&g_inv, &a, dim);
        let sym = small::mul(&small::mul(&g_inv_sqrt, &a, dim), &g_inv_sqrt, dim);
        let (lambda, frame) = small::sym_eigen(&sym, dim);
        let nu0 = -h / w;
        Self {
            z,
            warp,
            grad,
            hess,
            w,
            g,
            g_inv,
            g_inv_sqrt,
            a,
            shape,
            sym,
            lambda,
            frame,
            nu0,
            tau: -h * nu0,
            eta,
        }
    }

    pub fn grad_norm(&self, dim: usize) -> f64 {
        self.grad[..dim].iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Geometry of a whole height field.
#[derive(Debug, Clone)]
pub struct GraphGeometry {
    grid: TorusGrid,
    nodes: Vec<NodeGeometry>,
}

impl GraphGeometry {
    pub fn compute(z: &NodeField, profile: &WarpingProfile) -> Result<Self> {
        let grid = z.grid().clone();
        let dim = grid.dim();
        let values = z.values();
        let nodes = (0..grid.len())
            .map(|k| {
                let t = values[k];
                let warp = profile.eval_warp(t)?;
                let eta = -profile.antiderivative(t)?;
                let (grad, hess) = grid.derivatives_at(values, k);
                Ok(NodeGeometry::from_jet(dim, t, warp, grad, hess, eta))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid, nodes })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn nodes(&self) -> &[NodeGeometry] {
        &self.nodes
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// Deviation of the special-frame shape operator formulas from the
    /// general one at `node`.
    pub fn special_frame_check(&self, z: &NodeField, node: usize) -> Result<f64> {
        let (grad, hess) = self.grid.derivatives_at(z.values(), node);
        let ng = &self.nodes[node];
        special_frame_deviation(self.dim(), ng.warp, grad, hess).map_err(|e| match e {
            Error::Frame { grad_norm, .. } => Error::Frame { node, grad_norm },
            other => other,
        })
    }

    /// Residuals of the gradient identities for `eta` and `tau`:
    /// `d(eta o z) = -h dz` in base coordinates, and
    /// `grad tau = -A(grad eta)` for the surface gradients. Both hold in
    /// the continuum; the discrete residual is truncation error.
    pub fn support_identity_check(&self) -> (f64, f64) {
        let dim = self.dim();
        let eta: Vec<f64> = self.nodes.iter().map(|n| n.eta).collect();
        let tau: Vec<f64> = self.nodes.iter().map(|n| n.tau).collect();
        let mut err_eta: f64 = 0.0;
        let mut err_tau: f64 = 0.0;
        for (k, ng) in self.nodes.iter().enumerate() {
            let (d_eta, _) = self.grid.derivatives_at(&eta, k);
            let (d_tau, _) = self.grid.derivatives_at(&tau, k);
            for i in 0..dim {
                err_eta = err_eta.max((d_eta[i] + ng.warp.h * ng.grad[i]).abs());
            }
            let mut grad_eta = [0.0; 2];
            let mut grad_tau = [0.0; 2];
            for i in 0..dim {
                for j in 0..dim {
                    grad_eta[i] += ng.g_inv[i][j] * d_eta[j];
                    grad_tau[i] += ng.g_inv[i][j] * d_tau[j];
                }
            }
            for i in 0..dim {
                let a_eta: f64 = (0..dim).map(|j| ng.shape[i][j] * grad_eta[j]).sum();
                err_tau = err_tau.max((grad_tau[i] + a_eta).abs());
            }
        }
        (err_eta, err_tau)
    }

    /// CSV of `u0, u1, z, W, lambda_max, lambda_min, tau` per node.
    pub fn write_fields_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "u0,u1,z,W,lambda_max,lambda_min,tau")?;
        let dim = self.dim();
        for (k, ng) in self.nodes.iter().enumerate() {
            let u = self.grid.coords(k);
            let lmin = ng.lambda[dim - 1];
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                u[0], u[1], ng.z, ng.w, ng.lambda[0], lmin, ng.tau
            )?;
        }
        Ok(())
    }
}

/// Rotates the base frame so its first axis follows `grad`, evaluates the
/// special-frame expressions for `a^1_1`, `a^1_i` and `a^i_j` (`i, j >= 2`),
/// and returns the largest deviation from the rotated `g^{-1} a`.
pub fn special_frame_deviation(dim: usize, warp: WarpValue, grad: [f64; 2], hess: Mat2) -> Result<f64> {
    let WarpValue { h, h1, .. } = warp;
    let norm = grad[..dim].iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-10 {
        return Err(Error::Frame {
            node: 0,
            grad_norm: norm,
        });
    }
    let general = NodeGeometry::from_jet(dim, 0.0, warp, grad, hess, 0.0);
    let rot: Mat2 = if dim == 1 {
        [[grad[0].signum(), 0.0], [0.0, 1.0]]
    } else {
        let (c, s) = (grad[0] / norm, grad[1] / norm);
        [[c, s], [-s, c]]
    };
    let rt = small::transpose(&rot);
    let hr = small::mul(&small::mul(&rot, &hess, dim), &rt, dim);
    let ar = small::mul(&small::mul(&rot, &general.shape, dim), &rt, dim);
    let w = general.w;
    let w3 = w * w * w;
    let mut dev = (ar[0][0] - (-h * hr[0][0] + 2.0 * h1 * norm * norm + h * h * h1) / w3).abs();
    if dim == 2 {
        dev = dev.max((ar[0][1] - (-h / w3) * hr[0][1]).abs());
        dev = dev.max((ar[1][1] - (-h * hr[1][1] + h * h * h1) / (h * h * w)).abs());
    }
    Ok(dev)
}
