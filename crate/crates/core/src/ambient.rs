//! Warping function `h` of the ambient metric `dt^2 + h(t)^2 dsigma^2` and
//! the pointwise quantities derived from it.
//!
//! Slices `{t} x M` are umbilic with principal curvature `kappa = h'/h`
//! (measured against the inward normal `-d/dt`). The ambient sectional
//! curvature has a radial part `h''/h` and, over a flat base, a tangential
//! part `-(h'/h)^2`.

use crate::curvature::CurvatureSpec;
use crate::error::{Error, Result};

/// Number of sample points used when scanning an interval for `kappa > 0`.
pub const MEAN_CONVEX_SCAN: usize = 1024;

/// Value and first two derivatives of `h` at one height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpValue {
    pub h: f64,
    pub h1: f64,
    pub h2: f64,
}

/// Closed-form or tabulated warping function.
#[derive(Debug, Clone, PartialEq)]
pub enum WarpKind {
    /// `h(t) = cosh(t - shift)`.
    Cosh { shift: f64 },
    /// `h(t) = exp(t)`.
    Exp,
    /// `h(t) = t^p` with `p > 0`, defined for `t > 0`.
    Power { p: f64 },
    /// Not-a-knot cubic spline through tabulated `(t, h)` pairs.
    Table(CubicSpline),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarpingProfile {
    kind: WarpKind,
    t_lo: f64,
    t_hi: f64,
    /// Height where the antiderivative of `h` vanishes.
    anchor: f64,
}

impl WarpingProfile {
    pub fn new(kind: WarpKind, t_lo: f64, t_hi: f64) -> Result<Self> {
        if !(t_lo < t_hi) || t_lo.is_nan() || t_hi.is_nan() {
            return Err(Error::Config(format!(
                "profile domain ({t_lo}, {t_hi}) is empty"
            )));
        }
        match &kind {
            WarpKind::Power { p } => {
                if !(*p > 0.0) {
                    return Err(Error::Config(format!("power exponent {p} must be > 0")));
                }
                if t_lo < 0.0 {
                    return Err(Error::Config(
                        "power profile requires a domain inside (0, inf)".into(),
                    ));
                }
            }
            WarpKind::Table(spline) => {
                let (a, b) = spline.range();
                if t_lo < a || t_hi > b {
                    return Err(Error::Config(format!(
                        "table covers [{a}, {b}] but domain is ({t_lo}, {t_hi})"
                    )));
                }
            }
            WarpKind::Cosh { .. } | WarpKind::Exp => {}
        }
        let anchor = if t_lo.is_finite() && t_hi.is_finite() {
            0.5 * (t_lo + t_hi)
        } else if t_lo.is_finite() {
            t_lo + 1.0
        } else if t_hi.is_finite() {
            t_hi - 1.0
        } else {
            0.0
        };
        Ok(Self {
            kind,
            t_lo,
            t_hi,
            anchor,
        })
    }

    pub fn cosh(t_lo: f64, t_hi: f64) -> Result<Self> {
        Self::new(WarpKind::Cosh { shift: 0.0 }, t_lo, t_hi)
    }

    pub fn exp(t_lo: f64, t_hi: f64) -> Result<Self> {
        Self::new(WarpKind::Exp, t_lo, t_hi)
    }

    pub fn power(p: f64, t_lo: f64, t_hi: f64) -> Result<Self> {
        Self::new(WarpKind::Power { p }, t_lo, t_hi)
    }

    pub fn table(ts: &[f64], hs: &[f64], t_lo: f64, t_hi: f64) -> Result<Self> {
        Self::new(WarpKind::Table(CubicSpline::not_a_knot(ts, hs)?), t_lo, t_hi)
    }

    /// Moves the zero of the antiderivative used for `eta`.
    pub fn with_anchor(mut self, anchor: f64) -> Self {
        self.anchor = anchor;
        self
    }

    pub fn kind(&self) -> &WarpKind {
        &self.kind
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.t_lo, self.t_hi)
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn contains(&self, t: f64) -> bool {
        t > self.t_lo && t < self.t_hi
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::Domain {
                t,
                lo: self.t_lo,
                hi: self.t_hi,
            })
        }
    }

    /// `h(t), h'(t), h''(t)`.
    pub fn eval_warp(&self, t: f64) -> Result<WarpValue> {
        self.check_domain(t)?;
        let v = self.eval_unchecked(t);
        if !(v.h > 0.0) {
            return Err(Error::Profile(format!("h({t}) = {} is not positive", v.h)));
        }
        Ok(v)
    }

    fn eval_unchecked(&self, t: f64) -> WarpValue {
        match &self.kind {
            WarpKind::Cosh { shift } => {
                let x = t - shift;
                let (c, s) = (x.cosh(), x.sinh());
                WarpValue { h: c, h1: s, h2: c }
            }
            WarpKind::Exp => {
                let e = t.exp();
                WarpValue { h: e, h1: e, h2: e }
            }
            WarpKind::Power { p } => {
                let p = *p;
                WarpValue {
                    h: t.powf(p),
                    h1: p * t.powf(p - 1.0),
                    h2: p * (p - 1.0) * t.powf(p - 2.0),
                }
            }
            WarpKind::Table(s) => {
                let (h, h1, h2) = s.eval(t);
                WarpValue { h, h1, h2 }
            }
        }
    }

    /// Principal curvature `h'/h` of the slice at height `t`.
    pub fn kappa(&self, t: f64) -> Result<f64> {
        let w = self.eval_warp(t)?;
        let k = w.h1 / w.h;
        if !(k > 0.0) {
            return Err(Error::Profile(format!(
                "kappa({t}) = {k} is not positive; slices must be mean convex"
            )));
        }
        Ok(k)
    }

    /// `d kappa / dt = h''/h - (h'/h)^2`.
    pub fn kappa_dt(&self, t: f64) -> Result<f64> {
        let w = self.eval_warp(t)?;
        let k = w.h1 / w.h;
        Ok(w.h2 / w.h - k * k)
    }

    /// Value of the curvature function on the umbilic slice at `t`,
    /// `f(kappa, ..., kappa)`.
    pub fn k_radial(&self, spec: &CurvatureSpec, t: f64) -> Result<f64> {
        let k = self.kappa(t)?;
        spec.f_eval(&vec![k; spec.n()])
    }

    /// Coefficients `(h''/h, -(h'/h)^2)` of the radial and tangential
    /// curvature forms over a flat base.
    pub fn ambient_curvature(&self, t: f64) -> Result<(f64, f64)> {
        let w = self.eval_warp(t)?;
        let k = w.h1 / w.h;
        Ok((w.h2 / w.h, -(k * k)))
    }

    /// Antiderivative `H` of `h` normalised so that `H(anchor) = 0`.
    pub fn antiderivative(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(self.primitive(t) - self.primitive(self.anchor))
    }

    fn primitive(&self, t: f64) -> f64 {
        match &self.kind {
            WarpKind::Cosh { shift } => (t - shift).sinh(),
            WarpKind::Exp => t.exp(),
            WarpKind::Power { p } => t.powf(p + 1.0) / (p + 1.0),
            WarpKind::Table(s) => s.integral_from_start(t),
        }
    }

    /// Checks `h > 0` and `kappa > 0` at [`MEAN_CONVEX_SCAN`] points of
    /// `[a, b]`.
    pub fn check_mean_convex(&self, a: f64, b: f64) -> Result<()> {
        for i in 0..MEAN_CONVEX_SCAN {
            let t = a + (b - a) * i as f64 / (MEAN_CONVEX_SCAN - 1) as f64;
            self.kappa(t)?;
        }
        Ok(())
    }
}

/// Cubic spline with not-a-knot end conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
    /// Running integral from `x[0]` to each knot.
    cumulative: Vec<f64>,
}

impl CubicSpline {
    pub fn not_a_knot(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n != y.len() {
            return Err(Error::Shape {
                expected: n,
                got: y.len(),
            });
        }
        if n < 4 {
            return Err(Error::Config(
                "not-a-knot spline needs at least 4 knots".into(),
            ));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("spline knots must increase strictly".into()));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let mut a = faer::Mat::<f64>::zeros(n, n);
        let mut rhs = faer::Mat::<f64>::zeros(n, 1);
        a[(0, 0)] = h[1];
        a[(0, 1)] = -(h[0] + h[1]);
        a[(0, 2)] = h[0];
        for i in 1..n - 1 {
            a[(i, i - 1)] = h[i - 1];
            a[(i, i)] = 2.0 * (h[i - 1] + h[i]);
            a[(i, i + 1)] = h[i];
            rhs[(i, 0)] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
        }
        a[(n - 1, n - 3)] = h[n - 2];
        a[(n - 1, n - 2)] = -(h[n - 3] + h[n - 2]);
        a[(n - 1, n - 1)] = h[n - 3];
        let lu = a.partial_piv_lu();
        let sol = faer::linalg::solvers::Solve::solve(&lu, &rhs);
        let m: Vec<f64> = (0..n).map(|i| sol[(i, 0)]).collect();

        let mut spline = Self {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
            cumulative: vec![0.0; n],
        };
        for i in 0..n - 1 {
            spline.cumulative[i + 1] = spline.cumulative[i] + spline.segment_integral(i, x[i + 1]);
        }
        Ok(spline)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn segment(&self, t: f64) -> usize {
        let last = self.x.len() - 2;
        match self.x.partition_point(|&xi| xi <= t) {
            0 => 0,
            k => (k - 1).min(last),
        }
    }

    /// Value, first and second derivative.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let i = self.segment(t);
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let h = x1 - x0;
        let (a, b) = (x1 - t, t - x0);
        let v = m0 * a.powi(3) / (6.0 * h)
            + m1 * b.powi(3) / (6.0 * h)
            + (y0 / h - m0 * h / 6.0) * a
            + (y1 / h - m1 * h / 6.0) * b;
        let d1 = -m0 * a * a / (2.0 * h) + m1 * b * b / (2.0 * h) - (y0 / h - m0 * h / 6.0)
            + (y1 / h - m1 * h / 6.0);
        let d2 = (m0 * a + m1 * b) / h;
        (v, d1, d2)
    }

    fn segment_integral(&self, i: usize, t: f64) -> f64 {
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let h = x1 - x0;
        let (a, b) = (x1 - t, t - x0);
        let c0 = y0 / h - m0 * h / 6.0;
        let c1 = y1 / h - m1 * h / 6.0;
        // antiderivative in t of each term, evaluated between x0 and t
        let term = |a: f64, b: f64| {
            -m0 * a.powi(4) / (24.0 * h) + m1 * b.powi(4) / (24.0 * h) - c0 * a * a / 2.0
                + c1 * b * b / 2.0
        };
        term(a, b) - term(h, 0.0)
    }

    /// `integral_{x[0]}^{t} s`.
    pub fn integral_from_start(&self, t: f64) -> f64 {
        let i = self.segment(t);
        self.cumulative[i] + self.segment_integral(i, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exp_derivatives_coincide() {
        let p = WarpingProfile::exp(-5.0, 5.0).unwrap();
        let e = 0.7f64.exp();
        let w = p.eval_warp(0.7).unwrap();
        assert_eq!((w.h, w.h1, w.h2), (e, e, e));
        assert_eq!(p.kappa(0.7).unwrap(), 1.0);
        assert_eq!(p.ambient_curvature(2.3).unwrap(), (1.0, -1.0));
    }

    #[test]
    fn cosh_values() {
        let p = WarpingProfile::cosh(-1.0, 4.0).unwrap();
        let w = p.eval_warp(0.0).unwrap();
        assert_eq!((w.h, w.h1, w.h2), (1.0, 0.0, 1.0));
        let w = p.eval_warp(1.0).unwrap();
        assert_relative_eq!(w.h, 1.5430806348152437, max_relative = 1e-15);
        assert_relative_eq!(w.h1, 1.1752011936438014, max_relative = 1e-15);
        assert_relative_eq!(w.h2, 1.5430806348152437, max_relative = 1e-15);
        assert_relative_eq!(p.kappa(1.0).unwrap(), 0.7615941559557649, max_relative = 1e-15);
        assert_eq!(p.ambient_curvature(0.0).unwrap(), (1.0, 0.0));
        let (cr, ct) = p.ambient_curvature(1.0).unwrap();
        assert_eq!(cr, 1.0);
        assert_relative_eq!(ct, -(1.0f64.tanh().powi(2)), max_relative = 1e-15);
    }

    #[test]
    fn flat_slice_is_not_mean_convex() {
        let p = WarpingProfile::cosh(-1.0, 4.0).unwrap();
        assert!(matches!(p.kappa(0.0), Err(Error::Profile(_))));
        assert!(matches!(p.kappa(-0.5), Err(Error::Profile(_))));
        assert!(p.kappa(1e-12).unwrap() > 0.0);
    }

    #[test]
    fn outside_domain() {
        let p = WarpingProfile::cosh(0.0, 4.0).unwrap();
        assert!(matches!(p.eval_warp(0.0), Err(Error::Domain { .. })));
        assert!(matches!(p.eval_warp(4.5), Err(Error::Domain { .. })));
        assert!(WarpingProfile::power(-1.0, 0.1, 2.0).is_err());
        assert!(WarpingProfile::power(2.0, -0.1, 2.0).is_err());
        assert!(WarpingProfile::cosh(2.0, 1.0).is_err());
    }

    #[test]
    fn k_radial_is_kappa_for_every_order() {
        let p = WarpingProfile::cosh(0.0, 4.0).unwrap();
        let t1 = 1.0f64.tanh();
        for (n, r) in [(1, 1), (2, 1), (2, 2)] {
            let spec = CurvatureSpec::new(n, r).unwrap();
            assert_relative_eq!(p.k_radial(&spec, 1.0).unwrap(), t1, max_relative = 1e-15);
        }
        let e = WarpingProfile::exp(-3.0, 3.0).unwrap();
        let spec = CurvatureSpec::new(1, 1).unwrap();
        assert_eq!(e.k_radial(&spec, 0.3).unwrap(), 1.0);
        for t in [0.2, 0.9, 2.5] {
            let s1 = CurvatureSpec::new(2, 1).unwrap();
            let s2 = CurvatureSpec::new(2, 2).unwrap();
            let d = (p.k_radial(&s1, t).unwrap() - p.k_radial(&s2, t).unwrap()).abs();
            assert!(d <= 1e-12);
        }
    }

    #[test]
    fn kappa_increasing_for_cosh() {
        let p = WarpingProfile::cosh(0.0, 4.0).unwrap();
        for i in 0..200 {
            let t = 0.1 + 2.9 * i as f64 / 200.0;
            for d in [1e-3, 0.01, 0.1] {
                assert!(p.kappa(t + d).unwrap() > p.kappa(t).unwrap());
            }
        }
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let profiles = [
            WarpingProfile::cosh(0.0, 4.0).unwrap(),
            WarpingProfile::exp(0.0, 4.0).unwrap(),
            WarpingProfile::power(2.5, 0.0, 4.0).unwrap(),
        ];
        let d = 1e-5;
        for p in &profiles {
            for i in 0..200 {
                let t = 0.2 + 3.5 * i as f64 / 200.0;
                let w = p.eval_warp(t).unwrap();
                let fd1 = (p.eval_warp(t + d).unwrap().h - p.eval_warp(t - d).unwrap().h) / (2.0 * d);
                let fd2 = (p.eval_warp(t + d).unwrap().h1 - p.eval_warp(t - d).unwrap().h1) / (2.0 * d);
                assert!((w.h1 - fd1).abs() <= 1e-6 * (1.0 + w.h1.abs()));
                assert!((w.h2 - fd2).abs() <= 1e-6 * (1.0 + w.h2.abs()));
                let fdh = (p.antiderivative(t + d).unwrap() - p.antiderivative(t - d).unwrap()) / (2.0 * d);
                assert!((w.h - fdh).abs() <= 1e-6 * (1.0 + w.h));
            }
        }
    }

    #[test]
    fn spline_reproduces_cubics_and_integrates() {
        // not-a-knot interpolation is exact for cubic data
        let x: Vec<f64> = (0..12).map(|i| 0.3 * i as f64 + 0.05 * (i as f64).sin()).collect();
        let f = |t: f64| 1.0 + 0.5 * t - 0.2 * t * t + 0.1 * t.powi(3);
        let y: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        let s = CubicSpline::not_a_knot(&x, &y).unwrap();
        for i in 0..50 {
            let t = x[0] + (x[11] - x[0]) * i as f64 / 49.0;
            let (v, d1, d2) = s.eval(t);
            assert_relative_eq!(v, f(t), epsilon = 1e-12);
            assert_relative_eq!(d1, 0.5 - 0.4 * t + 0.3 * t * t, epsilon = 1e-11);
            assert_relative_eq!(d2, -0.4 + 0.6 * t, epsilon = 1e-10);
            let prim = |t: f64| t + 0.25 * t * t - 0.2 / 3.0 * t.powi(3) + 0.025 * t.powi(4);
            assert_relative_eq!(s.integral_from_start(t), prim(t) - prim(x[0]), epsilon = 1e-12);
        }
    }

    #[test]
    fn table_profile_tracks_cosh() {
        let ts: Vec<f64> = (0..=64).map(|i| 0.05 * i as f64).collect();
        let hs: Vec<f64> = ts.iter().map(|t| t.cosh()).collect();
        let p = WarpingProfile::table(&ts, &hs, 0.1, 3.1).unwrap();
        let c = WarpingProfile::cosh(0.1, 3.1).unwrap();
        for t in [0.3, 1.0, 2.2] {
            let (a, b) = (p.eval_warp(t).unwrap(), c.eval_warp(t).unwrap());
            assert_relative_eq!(a.h, b.h, max_relative = 1e-6);
            assert_relative_eq!(a.h1, b.h1, max_relative = 1e-4);
            assert_relative_eq!(a.h2, b.h2, max_relative = 1e-2);
        }
        assert!(p.check_mean_convex(0.2, 3.0).is_ok());
        let flat = WarpingProfile::table(&[0.0, 1.0, 2.0, 3.0], &[1.0; 4], 0.0, 3.0).unwrap();
        assert_eq!(flat.eval_warp(1.5).unwrap().h, 1.0);
        assert!(flat.check_mean_convex(0.5, 2.5).is_err());
    }
}
