//! Brute-force cross-checks. Nothing here shares code with the paths it
//! certifies beyond calling the function being differentiated.

use crate::curvature::CurvatureSpec;
use crate::error::{Error, Result};
use crate::grid::NodeField;
use crate::problem::HomotopyProblem;
use crate::small::Mat2;
use crate::solver::{residual, SparseMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub quantity: String,
    pub max_abs: f64,
    pub max_rel: f64,
    /// Index of the worst relative error (component, node or row-major
    /// matrix entry).
    pub location: usize,
}

impl OracleReport {
    fn new(quantity: &str) -> Self {
        Self {
            quantity: quantity.into(),
            max_abs: 0.0,
            max_rel: 0.0,
            location: 0,
        }
    }

    fn update(&mut self, abs: f64, scale: f64, location: usize) {
        self.max_abs = self.max_abs.max(abs);
        let rel = if scale > 0.0 { abs / scale } else { abs };
        if rel > self.max_rel {
            self.max_rel = rel;
            self.location = location;
        }
    }
}

/// Dense Jacobian of the residual by per-node central differences.
/// A perturbation that leaves the cone is retried with a ten times
/// smaller step, at most three times.
pub fn fd_jacobian(z: &NodeField, s: f64, hp: &HomotopyProblem, step: f64) -> Result<Vec<Vec<f64>>> {
    let n = z.values().len();
    let cols: Vec<usize> = (0..n).collect();
    let columns = fd_jacobian_columns(z, s, hp, step, &cols)?;
    let mut jac = vec![vec![0.0; n]; n];
    for (q, column) in columns.into_iter().enumerate() {
        for (row, v) in jac.iter_mut().zip(column) {
            row[q] = v;
        }
    }
    Ok(jac)
}

/// Selected columns of the finite-difference Jacobian.
pub fn fd_jacobian_columns(
    z: &NodeField,
    s: f64,
    hp: &HomotopyProblem,
    step: f64,
    cols: &[usize],
) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(cols.len());
    for &q in cols {
        let mut h = step;
        let mut attempt = 0;
        let column = loop {
            let mut plus = z.clone();
            let mut minus = z.clone();
            plus.values_mut()[q] += h;
            minus.values_mut()[q] -= h;
            match (residual(&plus, s, hp), residual(&minus, s, hp)) {
                (Ok(rp), Ok(rm)) => {
                    break rp
                        .values()
                        .iter()
                        .zip(rm.values())
                        .map(|(a, b)| (a - b) / (2.0 * h))
                        .collect::<Vec<_>>()
                }
                (Err(e @ Error::Cone { .. }), _) | (_, Err(e @ Error::Cone { .. })) => {
                    attempt += 1;
                    if attempt > 3 {
                        return Err(e);
                    }
                    h /= 10.0;
                }
                (Err(e), _) | (_, Err(e)) => return Err(e),
            }
        };
        out.push(column);
    }
    Ok(out)
}

/// Compares selected columns of a sparse Jacobian with finite-difference
/// columns, scaling each entry as in [`compare_jacobians`].
pub fn compare_columns(name: &str, sparse: &SparseMatrix, cols: &[usize], fd: &[Vec<f64>]) -> OracleReport {
    let n = sparse.dim();
    let mut rep = OracleReport::new(name);
    for (&q, column) in cols.iter().zip(fd) {
        for (i, &v) in column.iter().enumerate() {
            let a = sparse.get(i, q);
            let scale = a.abs().max(sparse.get(i, i).abs());
            rep.update((a - v).abs(), scale, i * n + q);
        }
    }
    rep
}

/// Entrywise comparison of a sparse Jacobian with a dense reference. The
/// relative error of an entry is measured against the larger of the
/// entry and its row's diagonal.
pub fn compare_jacobians(name: &str, sparse: &SparseMatrix, dense: &[Vec<f64>]) -> OracleReport {
    let n = sparse.dim();
    let mut rep = OracleReport::new(name);
    for (i, drow) in dense.iter().enumerate().take(n) {
        let diag = sparse.get(i, i).abs();
        let mut row = vec![0.0; n];
        for (c, v) in sparse.row(i) {
            row[c] = v;
        }
        for j in 0..n {
            let d = (row[j] - drow[j]).abs();
            rep.update(d, row[j].abs().max(diag), i * n + j);
        }
    }
    rep
}

/// Compares `f_grad` with central differences of `f_eval`. Component `i`
/// is perturbed by `step (1 + |lambda_i|)`; the cone must contain the box
/// of ten times that half-width around `lambda`.
pub fn fd_gradcheck(spec: &CurvatureSpec, lambda: &[f64], step: f64) -> Result<OracleReport> {
    let n = lambda.len();
    let steps: Vec<f64> = lambda.iter().map(|l| step * (1.0 + l.abs())).collect();
    for i in 0..n {
        for sign in [-1.0, 1.0] {
            let mut l = lambda.to_vec();
            l[i] += sign * 10.0 * steps[i];
            if !spec.in_cone(&l) {
                return Err(Error::Cone { node: i });
            }
        }
    }
    let grad = spec.f_grad(lambda)?;
    let mut rep = OracleReport::new("f_grad");
    for i in 0..n {
        let mut p = lambda.to_vec();
        let mut m = lambda.to_vec();
        p[i] += steps[i];
        m[i] -= steps[i];
        let fd = (spec.f_eval(&p)? - spec.f_eval(&m)?) / (2.0 * steps[i]);
        rep.update((fd - grad[i]).abs(), grad[i].abs(), i);
    }
    Ok(rep)
}

/// Closed-form eigenpairs of a symmetric 2x2 matrix via the half-angle
/// formulas. Eigenvalues descending; eigenvectors are the columns of a
/// rotation.
pub fn eig2_oracle(m: &Mat2) -> ([f64; 2], Mat2) {
    let (a, b, c) = (m[0][0], m[0][1], m[1][1]);
    let half_diff = 0.5 * (a - c);
    let radius = half_diff.hypot(b);
    let mean = 0.5 * (a + c);
    if radius == 0.0 {
        return ([mean, mean], [[1.0, 0.0], [0.0, 1.0]]);
    }
    let cos2 = half_diff / radius;
    let sin2 = b / radius;
    let cos = ((1.0 + cos2) / 2.0).sqrt();
    let sin = ((1.0 - cos2) / 2.0).sqrt().copysign(if sin2 == 0.0 { 1.0 } else { sin2 });
    ([mean + radius, mean - radius], [[cos, -sin], [sin, cos]])
}

/// Second-order Taylor remainder `|R(z + d v) - R(z) - d J v|_inf` for
/// a sequence of halving `d`; ratios between consecutive remainders
/// approach 4.
pub fn linearization_remainders(
    z: &NodeField,
    s: f64,
    hp: &HomotopyProblem,
    jac: &SparseMatrix,
    direction: &[f64],
    deltas: &[f64],
) -> Result<Vec<f64>> {
    let r0 = residual(z, s, hp)?;
    let jv = jac.mul_vec(direction);
    deltas
        .iter()
        .map(|&d| {
            let mut zp = z.clone();
            for (v, dv) in zp.values_mut().iter_mut().zip(direction) {
                *v += d * dv;
            }
            let rp = residual(&zp, s, hp)?;
            Ok(rp
                .values()
                .iter()
                .zip(r0.values())
                .zip(&jv)
                .map(|((a, b), j)| (a - b - d * j).abs())
                .fold(0.0, f64::max))
        })
        .collect()
}
