//! Normalised r-th mean curvature `f(lambda) = (S_r(lambda) / C(n, r))^(1/r)`
//! on the Garding cone `Gamma_r = {S_1 > 0, ..., S_r > 0}`.
//!
//! `f` is symmetric, homogeneous of degree one, concave on `Gamma_r`, and
//! normalised so that `f(k, ..., k) = k`.

use crate::error::{Error, Result};
use crate::geometry::GraphGeometry;
use crate::small::{self, Mat2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Below this eigenvalue gap the derivative of `F` uses the
/// repeated-eigenvalue limit.
pub const EIGEN_MERGE_TOL: f64 = 1e-9;

/// Elementary symmetric polynomial `S_q(lambda)`; `S_0 = 1`.
pub fn sym_poly(lambda: &[f64], q: usize) -> f64 {
    if q > lambda.len() {
        return 0.0;
    }
    let mut e = vec![0.0; q + 1];
    e[0] = 1.0;
    for &l in lambda {
        for k in (1..=q).rev() {
            e[k] += l * e[k - 1];
        }
    }
    e[q]
}

fn binomial(n: usize, r: usize) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureSpec {
    n: usize,
    r: usize,
    normalization: f64,
}

impl CurvatureSpec {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        if n == 0 || r == 0 || r > n {
            return Err(Error::Config(format!(
                "curvature order r = {r} must satisfy 1 <= r <= n = {n}"
            )));
        }
        Ok(Self {
            n,
            r,
            normalization: binomial(n, r),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// `C(n, r)`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    fn check_len(&self, lambda: &[f64]) -> Result<()> {
        if lambda.len() != self.n {
            return Err(Error::Shape {
                expected: self.n,
                got: lambda.len(),
            });
        }
        Ok(())
    }

    pub fn in_cone(&self, lambda: &[f64]) -> bool {
        lambda.len() == self.n && (1..=self.r).all(|q| sym_poly(lambda, q) > 0.0)
    }

    /// `min_{1 <= q <= r} S_q(lambda)`; positive exactly on the cone.
    pub fn cone_margin(&self, lambda: &[f64]) -> f64 {
        (1..=self.r)
            .map(|q| sym_poly(lambda, q))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn f_eval(&self, lambda: &[f64]) -> Result<f64> {
        self.check_len(lambda)?;
        if !self.in_cone(lambda) {
            return Err(Error::Cone { node: 0 });
        }
        let s = sym_poly(lambda, self.r) / self.normalization;
        Ok(if self.r == 1 {
            s
        } else {
            s.powf(1.0 / self.r as f64)
        })
    }

    /// `f_i = (1/r) (S_r/C)^(1/r - 1) S_{r-1}(lambda | i) / C`.
    pub fn f_grad(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        let f = self.f_eval(lambda)?;
        let r = self.r as f64;
        let s = sym_poly(lambda, self.r) / self.normalization;
        // (S_r/C)^(1/r - 1) = f / (S_r/C)
        let scale = f / (r * s * self.normalization);
        let mut rest = Vec::with_capacity(self.n - 1);
        Ok((0..self.n)
            .map(|i| {
                rest.clear();
                rest.extend(
                    lambda
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .map(|(_, &l)| l),
                );
                scale * sym_poly(&rest, self.r - 1)
            })
            .collect())
    }

    /// Derivative of `F(a) = f(eig(a))` with respect to the entries of a
    /// symmetric matrix with eigenvalues `lambda` and eigenvectors `q`
    /// (columns). Near-repeated eigenvalues use the symmetric limit, which
    /// makes the result independent of the eigenvector choice.
    pub fn f_matrix_derivative_from_eigen(&self, lambda: &[f64; 2], q: &Mat2) -> Result<Mat2> {
        let lam = &lambda[..self.n];
        let grad = self.f_grad(lam)?;
        if self.n == 2 && (lambda[0] - lambda[1]).abs() < EIGEN_MERGE_TOL {
            let mean = 0.5 * (grad[0] + grad[1]);
            return Ok(small::identity(2).map(|row| row.map(|x| x * mean)));
        }
        let mut d = [0.0; 2];
        d[..self.n].copy_from_slice(&grad);
        Ok(small::from_eigen(&d, q, self.n))
    }

    /// `F^{ij}` at one node of a computed geometry, with respect to the
    /// symmetrised shape operator `g^{-1/2} a g^{-1/2}`.
    #[allow(non_snake_case)]
    pub fn F_matrix_derivative(&self, geom: &GraphGeometry, node: usize) -> Result<Mat2> {
        let ng = &geom.nodes()[node];
        self.f_matrix_derivative_from_eigen(&ng.lambda, &ng.frame)
            .map_err(|e| match e {
                Error::Cone { .. } => Error::Cone { node },
                other => other,
            })
    }

    /// Draws a random point of the cone with `f` uniform in `[mu1, mu2]`.
    pub fn sample_slab(&self, rng: &mut impl Rng, mu1: f64, mu2: f64) -> Vec<f64> {
        loop {
            let lam: Vec<f64> = (0..self.n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if !self.in_cone(&lam) {
                continue;
            }
            let f = match self.f_eval(&lam) {
                Ok(f) if f > 1e-3 => f,
                _ => continue,
            };
            let target = if mu2 > mu1 {
                rng.gen_range(mu1..=mu2)
            } else {
                mu1
            };
            return lam.iter().map(|l| l * target / f).collect();
        }
    }

    /// Samples the slab `{mu1 <= f <= mu2}` and measures the structural
    /// conditions the existence theory relies on.
    pub fn check_structural(
        &self,
        mu1: f64,
        mu2: f64,
        samples: usize,
        seed: u64,
    ) -> Result<StructuralReport> {
        if !(mu1 > 0.0 && mu1 <= mu2) {
            return Err(Error::Config(format!(
                "slab bounds must satisfy 0 < mu1 <= mu2, got ({mu1}, {mu2})"
            )));
        }
        if samples < 1000 {
            return Err(Error::Config("structural check needs >= 1000 samples".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rep = StructuralReport {
            samples,
            min_sum_fi: f64::INFINITY,
            min_sum_fi_lambda: f64::INFINITY,
            min_fi: f64::INFINITY,
            max_euler_excess: 0.0,
            max_euler_error: 0.0,
            max_concavity_violation: 0.0,
            max_schur_violation: 0.0,
        };
        for _ in 0..samples {
            let lam = self.sample_slab(&mut rng, mu1, mu2);
            let f = self.f_eval(&lam)?;
            let grad = self.f_grad(&lam)?;
            let sum: f64 = grad.iter().sum();
            let euler: f64 = grad.iter().zip(&lam).map(|(g, l)| g * l).sum();
            rep.min_sum_fi = rep.min_sum_fi.min(sum);
            rep.min_sum_fi_lambda = rep.min_sum_fi_lambda.min(euler);
            rep.min_fi = grad.iter().copied().fold(rep.min_fi, f64::min);
            rep.max_euler_excess = rep.max_euler_excess.max(euler - f);
            rep.max_euler_error = rep.max_euler_error.max((euler - f).abs());

            let mut sorted = lam.clone();
            sorted.sort_by(|a, b| b.total_cmp(a));
            let g = self.f_grad(&sorted)?;
            for w in g.windows(2) {
                rep.max_schur_violation = rep.max_schur_violation.max(w[0] - w[1]);
            }

            let other = self.sample_slab(&mut rng, mu1, mu2);
            let mid: Vec<f64> = lam.iter().zip(&other).map(|(a, b)| 0.5 * (a + b)).collect();
            let viol = 0.5 * (f + self.f_eval(&other)?) - self.f_eval(&mid)?;
            rep.max_concavity_violation = rep.max_concavity_violation.max(viol);
        }
        Ok(rep)
    }
}

/// Sampled extrema of the structural conditions over a slab of the cone.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralReport {
    pub samples: usize,
    /// Sampled lower bound for `sum f_i`.
    pub min_sum_fi: f64,
    /// Sampled lower bound for `sum f_i lambda_i`.
    pub min_sum_fi_lambda: f64,
    pub min_fi: f64,
    /// `max(sum f_i lambda_i - f)`; concavity requires this `<= 0`.
    pub max_euler_excess: f64,
    pub max_euler_error: f64,
    pub max_concavity_violation: f64,
    /// `max(f_i - f_{i+1})` after sorting `lambda` descending.
    pub max_schur_violation: f64,
}

impl StructuralReport {
    /// `f -> 0` on the cone boundary for this family, so the boundary
    /// limsup condition holds whenever the prescription is bounded below
    /// by a positive constant.
    pub const LIMSUP_NOTE: &'static str =
        "f -> 0 on the cone boundary; limsup condition holds for any psi_0 > 0";
}
