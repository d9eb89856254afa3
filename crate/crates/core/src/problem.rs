//! Prescribed curvature `psi`, barrier heights `t_-, t_+`, the gauge `phi`
//! and the homotopy
//!
//! ```text
//! Psi(s, t, u) = s psi(t, u) + (1 - s) phi(t) k(t),   k(t) = f(kappa(t), ..., kappa(t))
//! ```
//!
//! together with lattice checks of every hypothesis the existence theory
//! places on them.

use crate::ambient::WarpingProfile;
use crate::curvature::CurvatureSpec;
use crate::error::{Error, Result};
use crate::geometry::NodeGeometry;
use crate::grid::{NodeField, TorusGrid};
use std::fmt;
use std::sync::Arc;

/// Number of heights in every validation lattice.
pub const LATTICE_T: usize = 257;
/// Homotopy parameters sampled by the condition table.
pub const LATTICE_S: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
/// Slack allowed when `d/dt (h psi)` is only available by differences.
pub const FD_SLACK: f64 = 1e-10;
const BISECT_ITERATIONS: usize = 60;
const BISECT_TOL: f64 = 1e-14;

pub(crate) fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| {
        if i + 1 == n {
            b
        } else {
            a + (b - a) * i as f64 / (n - 1) as f64
        }
    })
}

/// Plane wave `cos(k . u)` on the torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularMode {
    pub freq: [i32; 2],
}

impl AngularMode {
    pub fn eval(&self, u: [f64; 2]) -> f64 {
        (self.freq[0] as f64 * u[0] + self.freq[1] as f64 * u[1]).cos()
    }
}

pub type CustomPsi = Arc<dyn Fn(f64, [f64; 2]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum PrescriptionForm {
    /// `psi = (c0 + eps g(u)) exp(-decay (t - decay_anchor)) / h(t)`.
    RadialDecay {
        c0: f64,
        eps: f64,
        mode: AngularMode,
        decay: f64,
        decay_anchor: f64,
    },
    /// `psi = c0 + eps g(u)`, independent of `t`.
    Uniform { c0: f64, eps: f64, mode: AngularMode },
    /// `psi = G(u) / h(t)` with `G` given per node.
    Tabulated { numerator: Vec<f64> },
    Custom(CustomPsi),
}

impl fmt::Debug for PrescriptionForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::RadialDecay {
                c0,
                eps,
                mode,
                decay,
                decay_anchor,
            } => f
                .debug_struct("RadialDecay")
                .field("c0", c0)
                .field("eps", eps)
                .field("mode", mode)
                .field("decay", decay)
                .field("decay_anchor", decay_anchor)
                .finish(),
            Self::Uniform { c0, eps, mode } => f
                .debug_struct("Uniform")
                .field("c0", c0)
                .field("eps", eps)
                .field("mode", mode)
                .finish(),
            Self::Tabulated { numerator } => f
                .debug_struct("Tabulated")
                .field("nodes", &numerator.len())
                .finish(),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl PrescriptionForm {
    pub fn radial_decay(c0: f64, eps: f64, mode: AngularMode) -> Self {
        Self::RadialDecay {
            c0,
            eps,
            mode,
            decay: 0.0,
            decay_anchor: 0.0,
        }
    }
}

/// A prescription bound to a grid, profile and curvature function.
#[derive(Debug, Clone)]
pub struct Prescription {
    form: PrescriptionForm,
    profile: WarpingProfile,
    spec: CurvatureSpec,
    grid: TorusGrid,
    /// `t`-independent factor per node (unused for custom forms).
    numerator: Vec<f64>,
    t_minus: f64,
    t_plus: f64,
    validated: bool,
}

impl Prescription {
    /// Binds and validates: positivity and hypotheses (a), (b), (c).
    pub fn build(
        form: PrescriptionForm,
        t_minus: f64,
        t_plus: f64,
        profile: &WarpingProfile,
        spec: &CurvatureSpec,
        grid: &TorusGrid,
    ) -> Result<Self> {
        let mut p = Self::unchecked(form, t_minus, t_plus, profile, spec, grid)?;
        p.validate()?;
        p.validated = true;
        Ok(p)
    }

    /// Binds without checking the existence hypotheses (manufactured
    /// solutions and other unsafe runs).
    pub fn unchecked(
        form: PrescriptionForm,
        t_minus: f64,
        t_plus: f64,
        profile: &WarpingProfile,
        spec: &CurvatureSpec,
        grid: &TorusGrid,
    ) -> Result<Self> {
        if spec.n() != grid.dim() {
            return Err(Error::Config(format!(
                "curvature dimension {} differs from grid dimension {}",
                spec.n(),
                grid.dim()
            )));
        }
        let (lo, hi) = profile.domain();
        if !(lo < t_minus && t_minus < t_plus && t_plus < hi) {
            return Err(Error::Config(format!(
                "barriers must satisfy {lo} < t_minus = {t_minus} < t_plus = {t_plus} < {hi}"
            )));
        }
        let numerator = match &form {
            PrescriptionForm::RadialDecay { c0, eps, mode, .. }
            | PrescriptionForm::Uniform { c0, eps, mode } => (0..grid.len())
                .map(|k| c0 + eps * mode.eval(grid.coords(k)))
                .collect(),
            PrescriptionForm::Tabulated { numerator } => {
                if numerator.len() != grid.len() {
                    return Err(Error::Shape {
                        expected: grid.len(),
                        got: numerator.len(),
                    });
                }
                numerator.clone()
            }
            PrescriptionForm::Custom(_) => vec![0.0; grid.len()],
        };
        if let PrescriptionForm::RadialDecay { decay, .. } = &form {
            if !(*decay >= 0.0) {
                return Err(Error::Config(format!("decay {decay} must be >= 0")));
            }
        }
        Ok(Self {
            form,
            profile: profile.clone(),
            spec: *spec,
            grid: grid.clone(),
            numerator,
            t_minus,
            t_plus,
            validated: false,
        })
    }

    pub fn form(&self) -> &PrescriptionForm {
        &self.form
    }

    pub fn profile(&self) -> &WarpingProfile {
        &self.profile
    }

    pub fn spec(&self) -> &CurvatureSpec {
        &self.spec
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn barriers(&self) -> (f64, f64) {
        (self.t_minus, self.t_plus)
    }

    pub fn is_validated(&self) -> bool {
        self.validated
    }

    /// `psi(t, u_node)`.
    pub fn psi(&self, t: f64, node: usize) -> Result<f64> {
        let num = self.numerator[node];
        Ok(match &self.form {
            PrescriptionForm::RadialDecay {
                decay,
                decay_anchor,
                ..
            } => num * (-decay * (t - decay_anchor)).exp() / self.profile.eval_warp(t)?.h,
            PrescriptionForm::Tabulated { .. } => num / self.profile.eval_warp(t)?.h,
            PrescriptionForm::Uniform { .. } => {
                self.profile.eval_warp(t)?;
                num
            }
            PrescriptionForm::Custom(f) => {
                self.profile.eval_warp(t)?;
                f(t, self.grid.coords(node))
            }
        })
    }

    fn fd_step(t: f64) -> f64 {
        1e-6 * (1.0 + t.abs())
    }

    /// `(psi, d psi / dt)`.
    pub fn psi_with_dt(&self, t: f64, node: usize) -> Result<(f64, f64)> {
        let psi = self.psi(t, node)?;
        let dt = match &self.form {
            PrescriptionForm::RadialDecay { decay, .. } => {
                let w = self.profile.eval_warp(t)?;
                psi * (-decay - w.h1 / w.h)
            }
            PrescriptionForm::Tabulated { .. } => {
                let w = self.profile.eval_warp(t)?;
                -psi * (w.h1 / w.h)
            }
            PrescriptionForm::Uniform { .. } => 0.0,
            PrescriptionForm::Custom(_) => {
                let d = Self::fd_step(t);
                (self.psi(t + d, node)? - self.psi(t - d, node)?) / (2.0 * d)
            }
        };
        Ok((psi, dt))
    }

    /// `d/dt (h psi)`; closed form where the form allows it.
    pub fn d_t_h_psi(&self, t: f64, node: usize) -> Result<f64> {
        let w = self.profile.eval_warp(t)?;
        Ok(match &self.form {
            PrescriptionForm::RadialDecay { decay, .. } => -decay * w.h * self.psi(t, node)?,
            PrescriptionForm::Tabulated { .. } => 0.0,
            PrescriptionForm::Uniform { .. } => w.h1 * self.numerator[node],
            PrescriptionForm::Custom(_) => {
                let d = Self::fd_step(t);
                let hp = |s: f64| -> Result<f64> { Ok(self.profile.eval_warp(s)?.h * self.psi(s, node)?) };
                (hp(t + d)? - hp(t - d)?) / (2.0 * d)
            }
        })
    }

    fn slack(&self) -> f64 {
        match self.form {
            PrescriptionForm::Custom(_) => FD_SLACK,
            _ => 0.0,
        }
    }

    pub fn k(&self, t: f64) -> Result<f64> {
        self.profile.k_radial(&self.spec, t)
    }

    /// Heights below `t_-` (and above `t_+`) where hypotheses (a), (b)
    /// are sampled, clipped to the profile domain.
    pub fn outer_bands(&self) -> (Vec<f64>, Vec<f64>) {
        let (lo, hi) = self.profile.domain();
        let width = 0.25 * (self.t_plus - self.t_minus);
        let inset = 1e-3 * (self.t_plus - self.t_minus);
        let below_lo = (self.t_minus - width).max(lo + inset).min(self.t_minus);
        let above_hi = (self.t_plus + width).min(hi - inset).max(self.t_plus);
        (
            linspace(below_lo, self.t_minus, 17).collect(),
            linspace(self.t_plus, above_hi, 17).collect(),
        )
    }

    fn witness(&self, hypothesis: &str, t: f64, node: usize, detail: String) -> Error {
        let u = self.grid.coords(node);
        Error::Validation {
            hypothesis: hypothesis.into(),
            t,
            u: u[..self.grid.dim()].to_vec(),
            detail,
        }
    }

    /// Validates positivity, (a), (b) and (c), in that order, returning the
    /// first failure with a witness.
    pub fn validate(&self) -> Result<()> {
        self.profile.check_mean_convex(self.t_minus, self.t_plus)?;
        let inner: Vec<f64> = linspace(self.t_minus, self.t_plus, LATTICE_T).collect();
        for &t in &inner {
            for node in 0..self.grid.len() {
                let psi = self.psi(t, node)?;
                if !(psi > 0.0) {
                    return Err(self.witness("positivity", t, node, format!("psi = {psi}")));
                }
            }
        }
        let (below, above) = self.outer_bands();
        for &t in &below {
            let k = self.k(t)?;
            for node in 0..self.grid.len() {
                let psi = self.psi(t, node)?;
                if !(psi > k) {
                    return Err(self.witness("a", t, node, format!("psi = {psi} <= k = {k}")));
                }
            }
        }
        for &t in &above {
            let k = self.k(t)?;
            for node in 0..self.grid.len() {
                let psi = self.psi(t, node)?;
                if !(psi < k) {
                    return Err(self.witness("b", t, node, format!("psi = {psi} >= k = {k}")));
                }
            }
        }
        let slack = self.slack();
        for &t in &inner {
            for node in 0..self.grid.len() {
                let d = self.d_t_h_psi(t, node)?;
                if d > slack {
                    return Err(self.witness("c", t, node, format!("d/dt(h psi) = {d:e} > 0")));
                }
            }
        }
        Ok(())
    }

    /// Per-node crossing height of `psi(., u) = k` on `[t_-, t_+]`;
    /// returns the smallest and largest.
    pub fn barrier_crossings(&self) -> Result<(f64, f64)> {
        let mut lo_all = f64::INFINITY;
        let mut hi_all = f64::NEG_INFINITY;
        for node in 0..self.grid.len() {
            let gap = |t: f64| -> Result<f64> { Ok(self.psi(t, node)? - self.k(t)?) };
            let (mut a, mut b) = (self.t_minus, self.t_plus);
            let (ga, gb) = (gap(a)?, gap(b)?);
            if !(ga > 0.0 && gb < 0.0) {
                return Err(Error::Bisect { node });
            }
            for _ in 0..BISECT_ITERATIONS {
                let m = 0.5 * (a + b);
                if gap(m)? > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
                if b - a <= BISECT_TOL {
                    break;
                }
            }
            let root = 0.5 * (a + b);
            lo_all = lo_all.min(root);
            hi_all = hi_all.max(root);
        }
        Ok((lo_all, hi_all))
    }

    /// Lowest value of `psi` over the validation lattice.
    pub fn psi_floor(&self) -> Result<f64> {
        let mut m = f64::INFINITY;
        for t in linspace(self.t_minus, self.t_plus, LATTICE_T) {
            for node in 0..self.grid.len() {
                m = m.min(self.psi(t, node)?);
            }
        }
        Ok(m)
    }
}

/// `phi(t) = k(t0) h(t0) exp(eps (t0 - t)) / (k(t) h(t))`, so that
/// `phi k = C exp(-eps t) / h` and `d/dt (phi k) + kappa phi k = -eps phi k`.
#[derive(Debug, Clone)]
pub struct Gauge {
    t0: f64,
    eps_phi: f64,
    scale: f64,
    profile: WarpingProfile,
    spec: CurvatureSpec,
}

impl Gauge {
    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn eps_phi(&self) -> f64 {
        self.eps_phi
    }

    fn k_h(&self, t: f64) -> Result<(f64, f64)> {
        Ok((self.profile.k_radial(&self.spec, t)?, self.profile.eval_warp(t)?.h))
    }

    pub fn phi(&self, t: f64) -> Result<f64> {
        let (k, h) = self.k_h(t)?;
        Ok(self.scale * (self.eps_phi * (self.t0 - t)).exp() / (k * h))
    }

    /// `phi' = phi (-eps - kappa - k'/k)`, with `k' = kappa'` for the
    /// normalised curvature functions.
    pub fn phi_dt(&self, t: f64) -> Result<f64> {
        let phi = self.phi(t)?;
        let kappa = self.profile.kappa(t)?;
        let k = self.profile.k_radial(&self.spec, t)?;
        let dk = self.profile.kappa_dt(t)?;
        Ok(phi * (-self.eps_phi - kappa - dk / k))
    }

    /// `(phi k, d/dt (phi k))`.
    pub fn phi_k(&self, t: f64) -> Result<(f64, f64)> {
        let (k, _) = self.k_h(t)?;
        let pk = self.phi(t)? * k;
        let kappa = self.profile.kappa(t)?;
        Ok((pk, -pk * (self.eps_phi + kappa)))
    }
}

/// Prescription plus gauge: everything the continuation needs.
#[derive(Debug, Clone)]
pub struct HomotopyProblem {
    prescription: Prescription,
    gauge: Gauge,
}

impl HomotopyProblem {
    /// Constructs the gauge for `t0` and `eps_phi` and checks that it is
    /// decreasing on the lattice.
    pub fn new(prescription: Prescription, t0: f64, eps_phi: f64) -> Result<Self> {
        let (tm, tp) = prescription.barriers();
        if !(tm < t0 && t0 < tp) {
            return Err(Error::Config(format!(
                "anchor t0 = {t0} must lie strictly between {tm} and {tp}"
            )));
        }
        if !(eps_phi >= 0.0 && eps_phi.is_finite()) {
            return Err(Error::Config(format!("eps_phi = {eps_phi} must be >= 0")));
        }
        let profile = prescription.profile().clone();
        let spec = *prescription.spec();
        let scale = profile.k_radial(&spec, t0)? * profile.eval_warp(t0)?.h;
        let gauge = Gauge {
            t0,
            eps_phi,
            scale,
            profile,
            spec,
        };
        let hp = Self {
            prescription,
            gauge,
        };
        for t in hp.gauge_lattice() {
            let dphi = hp.gauge.phi_dt(t)?;
            if !(dphi < 0.0) {
                return Err(Error::Gauge { t, dphi });
            }
        }
        Ok(hp)
    }

    /// Default anchor: the midpoint of the barriers.
    pub fn with_midpoint(prescription: Prescription, eps_phi: f64) -> Result<Self> {
        let (tm, tp) = prescription.barriers();
        Self::new(prescription, 0.5 * (tm + tp), eps_phi)
    }

    fn gauge_lattice(&self) -> Vec<f64> {
        let (below, above) = self.prescription.outer_bands();
        let (tm, tp) = self.prescription.barriers();
        below
            .into_iter()
            .chain(linspace(tm, tp, LATTICE_T))
            .chain(above)
            .collect()
    }

    pub fn prescription(&self) -> &Prescription {
        &self.prescription
    }

    pub fn gauge(&self) -> &Gauge {
        &self.gauge
    }

    pub fn profile(&self) -> &WarpingProfile {
        self.prescription.profile()
    }

    pub fn spec(&self) -> &CurvatureSpec {
        self.prescription.spec()
    }

    pub fn grid(&self) -> &TorusGrid {
        self.prescription.grid()
    }

    pub fn t0(&self) -> f64 {
        self.gauge.t0
    }

    /// `(Psi(s, t, u_node), d Psi / dt)`.
    pub fn psi_homotopy(&self, s: f64, t: f64, node: usize) -> Result<(f64, f64)> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::Config(format!("homotopy parameter s = {s} not in [0, 1]")));
        }
        let (psi, dpsi) = self.prescription.psi_with_dt(t, node)?;
        let (pk, dpk) = self.gauge.phi_k(t)?;
        Ok((s * psi + (1.0 - s) * pk, s * dpsi + (1.0 - s) * dpk))
    }

    /// Evaluates every lattice condition on the prescription, gauge and
    /// homotopy. Margins are positive exactly when the condition holds.
    pub fn verify_conditions(&self) -> Result<Vec<ConditionRow>> {
        let pr = &self.prescription;
        let (tm, tp) = pr.barriers();
        let nodes = pr.grid().len();
        let inner: Vec<f64> = linspace(tm, tp, LATTICE_T).collect();
        let (below, above) = pr.outer_bands();
        let mut rows = Vec::new();

        // hypotheses on psi
        let mut pos = f64::INFINITY;
        let mut cond_a = f64::INFINITY;
        let mut cond_b = f64::INFINITY;
        let mut cond_c = f64::INFINITY;
        for &t in &inner {
            for node in 0..nodes {
                pos = pos.min(pr.psi(t, node)?);
                cond_c = cond_c.min(pr.slack() - pr.d_t_h_psi(t, node)?);
            }
        }
        for &t in &below {
            let k = pr.k(t)?;
            for node in 0..nodes {
                cond_a = cond_a.min(pr.psi(t, node)? - k);
            }
        }
        for &t in &above {
            let k = pr.k(t)?;
            for node in 0..nodes {
                cond_b = cond_b.min(k - pr.psi(t, node)?);
            }
        }
        rows.push(ConditionRow::strict("psi > 0", pos));
        rows.push(ConditionRow::strict("(a) psi > k for t <= t_-", cond_a));
        rows.push(ConditionRow::strict("(b) psi < k for t >= t_+", cond_b));
        rows.push(ConditionRow::non_strict("(c) d/dt(h psi) <= 0", cond_c));

        // gauge
        let g = &self.gauge;
        let mut phi_pos = f64::INFINITY;
        let mut phi_dec = f64::INFINITY;
        for t in self.gauge_lattice() {
            phi_pos = phi_pos.min(g.phi(t)?);
            phi_dec = phi_dec.min(-g.phi_dt(t)?);
        }
        let mut phi_below = f64::INFINITY;
        for &t in &below {
            phi_below = phi_below.min(g.phi(t)? - 1.0);
        }
        let mut phi_above = f64::INFINITY;
        for &t in &above {
            phi_above = phi_above.min(1.0 - g.phi(t)?);
        }
        rows.push(ConditionRow::strict("phi (a) phi > 0", phi_pos));
        rows.push(ConditionRow::strict("phi (b) phi > 1 for t <= t_-", phi_below));
        rows.push(ConditionRow::strict("phi (c) phi < 1 for t >= t_+", phi_above));
        rows.push(ConditionRow::strict("phi (d) phi' < 0", phi_dec));
        rows.push(ConditionRow::non_strict(
            "phi(t0) = 1",
            1e-14 - (g.phi(g.t0)? - 1.0).abs(),
        ));

        // homotopy family
        let mut endpoints: f64 = 0.0;
        let mut linearity: f64 = 0.0;
        let mut pos_psi = f64::INFINITY;
        let mut above_k = f64::INFINITY;
        let mut below_k = f64::INFINITY;
        let mut cond_v = f64::INFINITY;
        for node in 0..nodes {
            for &t in &inner {
                let (p1, _) = self.psi_homotopy(1.0, t, node)?;
                let (p0, _) = self.psi_homotopy(0.0, t, node)?;
                endpoints = endpoints
                    .max((p1 - pr.psi(t, node)?).abs())
                    .max((p0 - g.phi_k(t)?.0).abs());
                let kappa = pr.profile().kappa(t)?;
                for &s in &LATTICE_S {
                    let (v, dv) = self.psi_homotopy(s, t, node)?;
                    linearity = linearity.max((v - (s * p1 + (1.0 - s) * p0)).abs());
                    pos_psi = pos_psi.min(v);
                    cond_v = cond_v.min(-(dv + kappa * v));
                }
            }
            for &s in &LATTICE_S {
                for &t in &below {
                    above_k = above_k.min(self.psi_homotopy(s, t, node)?.0 - pr.k(t)?);
                }
                for &t in &above {
                    below_k = below_k.min(pr.k(t)? - self.psi_homotopy(s, t, node)?.0);
                }
            }
        }
        rows.push(ConditionRow::non_strict("(i) Psi(1) = psi, Psi(0) = phi k", -endpoints));
        rows.push(ConditionRow::strict("(ii) Psi > 0", pos_psi));
        rows.push(ConditionRow::strict("(iii) Psi > k for t <= t_-", above_k));
        rows.push(ConditionRow::strict("(iv) Psi < k for t >= t_+", below_k));
        rows.push(ConditionRow::strict("(v) dPsi/dt + kappa Psi < 0", cond_v));
        rows.push(ConditionRow::non_strict("Psi linear in s", 1e-15 - linearity));
        Ok(rows)
    }
}

/// One line of a condition table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionRow {
    pub name: String,
    /// Worst-case margin; the condition holds when `pass` is set.
    pub margin: f64,
    /// Whether a zero margin counts as a failure.
    pub strict: bool,
    pub pass: bool,
}

impl ConditionRow {
    pub fn strict(name: &str, margin: f64) -> Self {
        Self {
            name: name.into(),
            margin,
            strict: true,
            pass: margin > 0.0,
        }
    }

    pub fn non_strict(name: &str, margin: f64) -> Self {
        Self {
            name: name.into(),
            margin,
            strict: false,
            pass: margin >= 0.0,
        }
    }
}

/// Exact height field `z_m` with the prescription that makes it a
/// solution: `psi_m(t, u) = f(lambda(z_m))(u) h(z_m(u)) / h(t)`.
#[derive(Debug, Clone)]
pub struct ManufacturedSolution {
    pub base: f64,
    pub amplitude: f64,
}

impl ManufacturedSolution {
    /// `z_m = base + A sin u0` in one dimension, `base + A sin u0 cos u1`
    /// in two.
    pub fn jet(&self, dim: usize, u: [f64; 2]) -> (f64, [f64; 2], [[f64; 2]; 2]) {
        let a = self.amplitude;
        if dim == 1 {
            let (s, c) = u[0].sin_cos();
            (self.base + a * s, [a * c, 0.0], [[-a * s, 0.0], [0.0, 0.0]])
        } else {
            let (s0, c0) = u[0].sin_cos();
            let (s1, c1) = u[1].sin_cos();
            (
                self.base + a * s0 * c1,
                [a * c0 * c1, -a * s0 * s1],
                [[-a * s0 * c1, -a * c0 * s1], [-a * c0 * s1, -a * s0 * c1]],
            )
        }
    }

    pub fn field(&self, grid: &TorusGrid) -> NodeField {
        grid.field_from_fn(|u| self.jet(grid.dim(), u).0)
    }

    /// Continuum curvature `f(lambda(z_m))` at every node.
    pub fn exact_curvature(&self, grid: &TorusGrid, profile: &WarpingProfile, spec: &CurvatureSpec) -> Result<Vec<f64>> {
        (0..grid.len())
            .map(|k| {
                let (z, grad, hess) = self.jet(grid.dim(), grid.coords(k));
                let ng = NodeGeometry::from_jet(grid.dim(), z, profile.eval_warp(z)?, grad, hess, 0.0);
                spec.f_eval(&ng.lambda[..grid.dim()]).map_err(|_| Error::Cone { node: k })
            })
            .collect()
    }

    /// Unvalidated prescription for which `z_m` solves the `s = 1` problem
    /// up to discretisation error.
    pub fn prescription(
        &self,
        grid: &TorusGrid,
        profile: &WarpingProfile,
        spec: &CurvatureSpec,
        t_minus: f64,
        t_plus: f64,
    ) -> Result<Prescription> {
        let f = self.exact_curvature(grid, profile, spec)?;
        let numerator = (0..grid.len())
            .map(|k| {
                let z = self.jet(grid.dim(), grid.coords(k)).0;
                Ok(f[k] * profile.eval_warp(z)?.h)
            })
            .collect::<Result<Vec<_>>>()?;
        Prescription::unchecked(
            PrescriptionForm::Tabulated { numerator },
            t_minus,
            t_plus,
            profile,
            spec,
            grid,
        )
    }
}
