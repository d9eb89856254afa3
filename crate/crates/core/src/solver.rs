//! Residual `Upsilon(s, z) = f(lambda(z)) - Psi(s, z, u)`, its sparse
//! Jacobian, damped Newton with admissibility backtracking, and
//! continuation in `s` from the constant solution `z = t0` at `s = 0`.

use crate::error::{Error, Result};
use crate::geometry::NodeGeometry;
use crate::grid::{NodeField, Reduction, TorusGrid};
use crate::problem::HomotopyProblem;
use crate::small::{self, Mat2};
use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum JacobianMode {
    #[default]
    Analytic,
    /// Graph-coloured central differences of the residual.
    #[serde(alias = "fd")]
    FdColored,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Target for the residual sup-norm.
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Backtracking factor.
    pub damping: f64,
    pub max_halvings: usize,
    /// Initial continuation step.
    pub ds0: f64,
    pub ds_min: f64,
    pub jacobian_mode: JacobianMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            max_newton: 30,
            damping: 0.5,
            max_halvings: 20,
            ds0: 0.1,
            ds_min: 1e-4,
            jacobian_mode: JacobianMode::Analytic,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.newton_tol > 0.0
            && self.max_newton > 0
            && self.damping > 0.0
            && self.damping < 1.0
            && self.ds0 > 0.0
            && self.ds0 <= 1.0
            && self.ds_min > 0.0
            && self.ds_min <= self.ds0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid solver settings: {self:?}")))
        }
    }
}

/// Geometry at one node, without the `eta` potential.
fn node_geometry(hp: &HomotopyProblem, values: &[f64], node: usize) -> Result<NodeGeometry> {
    let grid = hp.grid();
    let t = values[node];
    let warp = hp.profile().eval_warp(t)?;
    let (grad, hess) = grid.derivatives_at(values, node);
    Ok(NodeGeometry::from_jet(grid.dim(), t, warp, grad, hess, 0.0))
}

fn node_residual(hp: &HomotopyProblem, s: f64, values: &[f64], node: usize) -> Result<f64> {
    let ng = node_geometry(hp, values, node)?;
    let dim = hp.grid().dim();
    let f = hp
        .spec()
        .f_eval(&ng.lambda[..dim])
        .map_err(|_| Error::Cone { node })?;
    Ok(f - hp.psi_homotopy(s, values[node], node)?.0)
}

fn check_shape(z: &NodeField, grid: &TorusGrid) -> Result<()> {
    if z.grid() != grid {
        return Err(Error::Shape {
            expected: grid.len(),
            got: z.values().len(),
        });
    }
    Ok(())
}

pub fn residual(z: &NodeField, s: f64, hp: &HomotopyProblem) -> Result<NodeField> {
    check_shape(z, hp.grid())?;
    let values = z.values();
    let r = (0..values.len())
        .map(|k| node_residual(hp, s, values, k))
        .collect::<Result<Vec<_>>>()?;
    NodeField::new(hp.grid(), r)
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                if cols.len() > *row_ptr.last().unwrap() && *cols.last().unwrap() == c {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(c, v)| v * x[c]).sum()).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            for (c, v) in self.row(i) {
                row[c] += v;
            }
        }
        d
    }

    /// Solves `self x = b` by sparse LU.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let triplets: Vec<Triplet<usize, usize, f64>> = (0..self.n)
            .flat_map(|i| self.row(i).map(move |(c, v)| Triplet::new(i, c, v)))
            .collect();
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(self.n, self.n, &triplets)
            .map_err(|e| Error::Linear(format!("{e:?}")))?;
        let lu = a.sp_lu().map_err(|e| Error::Linear(format!("{e:?}")))?;
        let mut rhs = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        lu.solve_in_place(rhs.as_mut());
        let x: Vec<f64> = (0..self.n).map(|i| rhs[(i, 0)]).collect();
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Linear("singular Jacobian".into()));
        }
        Ok(x)
    }
}

/// Offsets (relative to a row node) read by the residual at that node.
fn footprint(grid: &TorusGrid) -> Vec<[i64; 2]> {
    grid.footprint()
}

/// Sensitivities of `f(lambda)` to the pointwise jet `(z, p, H)`.
struct JetSensitivity {
    dz: f64,
    dp: [f64; 2],
    dh: Mat2,
}

fn jet_sensitivity(ng: &NodeGeometry, f_sym: &Mat2, dim: usize) -> JetSensitivity {
    let (h, h1, h2) = (ng.warp.h, ng.warp.h1, ng.warp.h2);
    let w = ng.w;
    let p = ng.grad;
    // derivative of F with respect to a_ij, and the metric correction
    let phi = small::mul(&small::mul(&ng.g_inv_sqrt, f_sym, dim), &ng.g_inv_sqrt, dim);
    let a_phi = small::mul(&ng.shape, &phi, dim);
    let dfd = |da: &Mat2, dg: &Mat2| -> f64 {
        let mut s = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                s += phi[j][i] * da[i][j] - a_phi[j][i] * dg[i][j];
            }
        }
        s
    };

    let dw_dz = h * h1 / w;
    let mut da = [[0.0; 2]; 2];
    let mut dg = [[0.0; 2]; 2];
    for i in 0..dim {
        for j in 0..dim {
            let delta = if i == j { 1.0 } else { 0.0 };
            da[i][j] = -dw_dz / w * ng.a[i][j]
                + (-h1 * ng.hess[i][j] + 2.0 * h2 * p[i] * p[j] + (2.0 * h * h1 * h1 + h * h * h2) * delta) / w;
            dg[i][j] = 2.0 * h * h1 * delta;
        }
    }
    let dz = dfd(&da, &dg);

    let mut dp = [0.0; 2];
    for (m, dpm) in dp.iter_mut().enumerate().take(dim) {
        for i in 0..dim {
            for j in 0..dim {
                let dij = (if i == m { p[j] } else { 0.0 }) + (if j == m { p[i] } else { 0.0 });
                da[i][j] = -p[m] / (w * w) * ng.a[i][j] + 2.0 * h1 / w * dij;
                dg[i][j] = dij;
            }
        }
        *dpm = dfd(&da, &dg);
    }

    let mut dh = [[0.0; 2]; 2];
    for k in 0..dim {
        for l in 0..dim {
            dh[k][l] = -h / w * phi[l][k];
        }
    }
    JetSensitivity { dz, dp, dh }
}

fn analytic_jacobian(z: &NodeField, s: f64, hp: &HomotopyProblem) -> Result<SparseMatrix> {
    let grid = hp.grid();
    let dim = grid.dim();
    let st = grid.stencil();
    let values = z.values();
    let rows = (0..grid.len())
        .map(|k| {
            let ng = node_geometry(hp, values, k)?;
            let f_sym = hp
                .spec()
                .f_matrix_derivative_from_eigen(&ng.lambda, &ng.frame)
                .map_err(|_| Error::Cone { node: k })?;
            let js = jet_sensitivity(&ng, &f_sym, dim);
            let (_, dpsi) = hp.psi_homotopy(s, values[k], k)?;
            let mut row = vec![(k, js.dz - dpsi)];
            for axis in 0..dim {
                for &(o, w) in &st.first {
                    row.push((grid.neighbor(k, TorusGrid::axis_offset(axis, o)), js.dp[axis] * w));
                }
                for &(o, w) in &st.second {
                    row.push((grid.neighbor(k, TorusGrid::axis_offset(axis, o)), js.dh[axis][axis] * w));
                }
            }
            if dim == 2 {
                let cross = js.dh[0][1] + js.dh[1][0];
                for &(o, w) in &st.mixed {
                    row.push((grid.neighbor(k, o), cross * w));
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SparseMatrix::from_rows(rows))
}

/// Greedy colouring of columns so that no two columns of one colour
/// touch the same row.
pub fn color_columns(grid: &TorusGrid) -> Vec<Vec<usize>> {
    let fp = footprint(grid);
    let n = grid.len();
    let mut color = vec![usize::MAX; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut forbidden = Vec::new();
    for q in 0..n {
        forbidden.clear();
        for o in &fp {
            // rows reading column q
            let r = grid.neighbor(q, [-o[0], -o[1]]);
            for o2 in &fp {
                let c = color[grid.neighbor(r, *o2)];
                if c != usize::MAX {
                    forbidden.push(c);
                }
            }
        }
        let c = (0..).find(|c| !forbidden.contains(c)).unwrap();
        color[q] = c;
        if c == groups.len() {
            groups.push(Vec::new());
        }
        groups[c].push(q);
    }
    groups
}

fn fd_colored_jacobian(z: &NodeField, s: f64, hp: &HomotopyProblem) -> Result<SparseMatrix> {
    let grid = hp.grid();
    let fp = footprint(grid);
    let step = 1e-6 * (1.0 + z.reduce(Reduction::LInf));
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); grid.len()];
    for group in color_columns(grid) {
        let mut plus = z.clone();
        let mut minus = z.clone();
        for &q in &group {
            plus.values_mut()[q] += step;
            minus.values_mut()[q] -= step;
        }
        let rp = residual(&plus, s, hp)?;
        let rm = residual(&minus, s, hp)?;
        for &q in &group {
            for o in &fp {
                let r = grid.neighbor(q, [-o[0], -o[1]]);
                if rows[r].iter().any(|&(c, _)| c == q) {
                    continue;
                }
                rows[r].push((q, (rp.values()[r] - rm.values()[r]) / (2.0 * step)));
            }
        }
    }
    Ok(SparseMatrix::from_rows(rows))
}

pub fn assemble_jacobian(
    z: &NodeField,
    s: f64,
    hp: &HomotopyProblem,
    mode: JacobianMode,
) -> Result<SparseMatrix> {
    check_shape(z, hp.grid())?;
    match mode {
        JacobianMode::Analytic => analytic_jacobian(z, s, hp),
        JacobianMode::FdColored => fd_colored_jacobian(z, s, hp),
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NewtonStats {
    pub iterations: usize,
    /// Residual sup-norm of the start and of every accepted iterate.
    pub residuals: Vec<f64>,
    pub halvings: usize,
    /// Accepted iterates with some node outside `(t_-, t_+)`.
    pub barrier_excursions: usize,
}

impl NewtonStats {
    pub fn final_residual(&self) -> f64 {
        *self.residuals.last().unwrap_or(&f64::NAN)
    }

    /// `r_{k+1} / r_k^2` over consecutive residuals above the rounding
    /// floor.
    pub fn quadratic_constants(&self, floor: f64) -> Vec<f64> {
        self.residuals
            .windows(2)
            .filter(|w| w[1] > floor)
            .map(|w| w[1] / (w[0] * w[0]))
            .collect()
    }
}

fn inside_barriers(z: &NodeField, hp: &HomotopyProblem) -> bool {
    let (tm, tp) = hp.prescription().barriers();
    z.values().iter().all(|&v| v > tm && v < tp)
}

/// Damped Newton at fixed `s`. A trial step is halved while it leaves the
/// admissible set or fails to reduce the residual sup-norm.
pub fn newton_solve(
    z0: &NodeField,
    s: f64,
    hp: &HomotopyProblem,
    cfg: &SolverConfig,
) -> Result<(NodeField, NewtonStats)> {
    let mut z = z0.clone();
    let mut r = residual(&z, s, hp)?;
    let mut rnorm = r.reduce(Reduction::LInf);
    let mut stats = NewtonStats {
        residuals: vec![rnorm],
        ..Default::default()
    };
    if rnorm <= cfg.newton_tol {
        return Ok((z, stats));
    }
    let stall = |stats: &NewtonStats, rnorm: f64| Error::NewtonStall {
        s,
        iterations: stats.iterations,
        residual: rnorm,
    };
    for _ in 0..cfg.max_newton {
        let jac = assemble_jacobian(&z, s, hp, cfg.jacobian_mode)?;
        let neg: Vec<f64> = r.values().iter().map(|v| -v).collect();
        let delta = jac.solve(&neg)?;
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let trial_vals: Vec<f64> = z.values().iter().zip(&delta).map(|(a, d)| a + alpha * d).collect();
            let trial = NodeField::new(hp.grid(), trial_vals)?;
            match residual(&trial, s, hp) {
                Ok(rt) => {
                    let tn = rt.reduce(Reduction::LInf);
                    if tn < rnorm || tn <= cfg.newton_tol {
                        accepted = Some((trial, rt, tn));
                        break;
                    }
                }
                Err(Error::Cone { .. }) | Err(Error::Domain { .. }) | Err(Error::Profile(_)) => {}
                Err(e) => return Err(e),
            }
            alpha *= cfg.damping;
            stats.halvings += 1;
        }
        let Some((zt, rt, tn)) = accepted else {
            return Err(stall(&stats, rnorm));
        };
        z = zt;
        r = rt;
        rnorm = tn;
        stats.iterations += 1;
        stats.residuals.push(rnorm);
        if !inside_barriers(&z, hp) {
            stats.barrier_excursions += 1;
        }
        if rnorm <= cfg.newton_tol {
            return Ok((z, stats));
        }
    }
    Err(stall(&stats, rnorm))
}

/// Diagnostics of one accepted continuation state.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub s: f64,
    pub ds: f64,
    pub newton_iterations: usize,
    pub residual: f64,
    pub residual_history: Vec<f64>,
    pub z_min: f64,
    pub z_max: f64,
    /// `min over nodes and q <= r of S_q(lambda)`.
    pub cone_margin: f64,
    pub max_grad: f64,
    pub max_lambda1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub steps: Vec<StepRecord>,
    pub t_minus: f64,
    pub t_plus: f64,
    /// Continuation steps rejected and retried with a smaller `ds`.
    pub rejected_steps: usize,
    pub barrier_excursions: usize,
    pub verdict: String,
}

impl SolveReport {
    pub fn final_step(&self) -> Option<&StepRecord> {
        self.steps.last()
    }

    pub fn newton_total(&self) -> usize {
        self.steps.iter().map(|s| s.newton_iterations).sum()
    }

    pub fn write_steps_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(
            out,
            "s,ds,newton_iterations,residual,z_min,z_max,margin_lower,margin_upper,cone_margin,max_grad,max_lambda1"
        )?;
        for st in &self.steps {
            writeln!(
                out,
                "{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                st.s,
                st.ds,
                st.newton_iterations,
                st.residual,
                st.z_min,
                st.z_max,
                st.z_min - self.t_minus,
                self.t_plus - st.z_max,
                st.cone_margin,
                st.max_grad,
                st.max_lambda1
            )?;
        }
        Ok(())
    }

    /// One `step { ... }` record per accepted state.
    pub fn write_text(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "barriers {:.16e} {:.16e}", self.t_minus, self.t_plus)?;
        for st in &self.steps {
            writeln!(out, "step {{")?;
            writeln!(out, "  s = {:.16e}", st.s)?;
            writeln!(out, "  ds = {:.16e}", st.ds)?;
            writeln!(out, "  newton_iterations = {}", st.newton_iterations)?;
            writeln!(out, "  residual = {:.16e}", st.residual)?;
            let hist: Vec<String> = st.residual_history.iter().map(|r| format!("{r:.16e}")).collect();
            writeln!(out, "  residual_history = [{}]", hist.join(", "))?;
            writeln!(out, "  z_min = {:.16e}", st.z_min)?;
            writeln!(out, "  z_max = {:.16e}", st.z_max)?;
            writeln!(out, "  cone_margin = {:.16e}", st.cone_margin)?;
            writeln!(out, "  max_grad = {:.16e}", st.max_grad)?;
            writeln!(out, "  max_lambda1 = {:.16e}", st.max_lambda1)?;
            writeln!(out, "}}")?;
        }
        writeln!(out, "rejected_steps = {}", self.rejected_steps)?;
        writeln!(out, "barrier_excursions = {}", self.barrier_excursions)?;
        writeln!(out, "verdict = {}", self.verdict)?;
        Ok(())
    }
}

fn record(
    z: &NodeField,
    s: f64,
    ds: f64,
    stats: &NewtonStats,
    hp: &HomotopyProblem,
) -> Result<StepRecord> {
    let dim = hp.grid().dim();
    let values = z.values();
    let mut cone_margin = f64::INFINITY;
    let mut max_grad: f64 = 0.0;
    let mut max_lambda1 = f64::NEG_INFINITY;
    for k in 0..values.len() {
        let ng = node_geometry(hp, values, k)?;
        cone_margin = cone_margin.min(hp.spec().cone_margin(&ng.lambda[..dim]));
        max_grad = max_grad.max(ng.grad_norm(dim));
        max_lambda1 = max_lambda1.max(ng.lambda[0]);
    }
    Ok(StepRecord {
        s,
        ds,
        newton_iterations: stats.iterations,
        residual: stats.final_residual(),
        residual_history: stats.residuals.clone(),
        z_min: z.reduce(Reduction::Min),
        z_max: z.reduce(Reduction::Max),
        cone_margin,
        max_grad,
        max_lambda1,
    })
}

fn check_barrier(z: &NodeField, s: f64, hp: &HomotopyProblem) -> Result<()> {
    let (tm, tp) = hp.prescription().barriers();
    match z.values().iter().position(|&v| !(v > tm && v < tp)) {
        None => Ok(()),
        Some(node) => Err(Error::BarrierViolation {
            s,
            node,
            z: z.values()[node],
            t_minus: tm,
            t_plus: tp,
        }),
    }
}

/// Iterations at or below which a Newton solve counts as easy.
const EASY_ITERATIONS: usize = 4;

/// Tracks the solution from `(s = 0, z = t0)` to `s = 1`. The step is
/// halved when Newton fails and doubled after two easy steps in a row.
pub fn continuation(hp: &HomotopyProblem, cfg: &SolverConfig) -> Result<(NodeField, SolveReport)> {
    cfg.validate()?;
    let (tm, tp) = hp.prescription().barriers();
    let mut report = SolveReport {
        steps: Vec::new(),
        t_minus: tm,
        t_plus: tp,
        rejected_steps: 0,
        barrier_excursions: 0,
        verdict: String::new(),
    };
    let start = hp.grid().constant(hp.t0());
    let (mut z, stats) = newton_solve(&start, 0.0, hp, cfg)?;
    check_barrier(&z, 0.0, hp)?;
    report.steps.push(record(&z, 0.0, 0.0, &stats, hp)?);

    let mut s = 0.0;
    let mut ds = cfg.ds0;
    let mut easy = 0;
    while s < 1.0 {
        let mut target = s + ds;
        if target > 1.0 || 1.0 - target < 1e-12 {
            target = 1.0;
        }
        match newton_solve(&z, target, hp, cfg) {
            Ok((zn, stats)) => {
                check_barrier(&zn, target, hp)?;
                report.barrier_excursions += stats.barrier_excursions;
                report.steps.push(record(&zn, target, target - s, &stats, hp)?);
                s = target;
                z = zn;
                if stats.iterations <= EASY_ITERATIONS {
                    easy += 1;
                    if easy >= 2 {
                        ds = (2.0 * ds).min(1.0);
                        easy = 0;
                    }
                } else {
                    easy = 0;
                }
            }
            Err(Error::NewtonStall { .. })
            | Err(Error::Cone { .. })
            | Err(Error::Domain { .. })
            | Err(Error::Linear(_)) => {
                report.rejected_steps += 1;
                easy = 0;
                ds *= 0.5;
                if ds < cfg.ds_min {
                    return Err(Error::ContinuationStall { s, ds });
                }
            }
            Err(e) => return Err(e),
        }
    }
    report.verdict = "converged".into();
    Ok((z, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::WarpingProfile;
    use crate::curvature::CurvatureSpec;
    use crate::problem::{AngularMode, Prescription, PrescriptionForm};

    fn problem(dim: usize, n: usize, r: usize, eps: f64) -> HomotopyProblem {
        let profile = WarpingProfile::cosh(0.0, 4.0).unwrap();
        let spec = CurvatureSpec::new(dim, r).unwrap();
        let grid = TorusGrid::with_default_period(dim, n, 2).unwrap();
        let form = PrescriptionForm::radial_decay(1f64.sinh(), eps, AngularMode { freq: [1, 0] });
        let pr = Prescription::build(form, 0.5, 1.5, &profile, &spec, &grid).unwrap();
        HomotopyProblem::new(pr, 1.0, 0.1).unwrap()
    }

    #[test]
    fn constant_anchor_solves_s0() {
        let hp = problem(1, 32, 1, 0.0);
        let r = residual(&hp.grid().constant(1.0), 0.0, &hp).unwrap();
        assert!(r.reduce(Reduction::LInf) <= 1e-14);
    }

    #[test]
    fn slice_residuals_at_s1() {
        let hp = problem(1, 32, 1, 0.0);
        let r = residual(&hp.grid().constant(1.0), 1.0, &hp).unwrap();
        assert!(r.reduce(Reduction::LInf) <= 1e-14);
        let r = residual(&hp.grid().constant(1.1), 1.0, &hp).unwrap();
        let expect = 1.1f64.tanh() - 1f64.sinh() / 1.1f64.cosh();
        assert!(expect > 0.0);
        for v in r.values() {
            assert!((v - expect).abs() <= 1e-14);
        }
    }

    #[test]
    fn inadmissible_state_reports_node() {
        let hp = problem(2, 16, 2, 0.0);
        let grid = hp.grid();
        // a sharp saddle bump at one node
        let mut z = grid.constant(1.0);
        z.values_mut()[grid.neighbor(0, [1, 0])] += 0.5;
        z.values_mut()[grid.neighbor(0, [-1, 0])] += 0.5;
        z.values_mut()[grid.neighbor(0, [0, 1])] -= 0.5;
        z.values_mut()[grid.neighbor(0, [0, -1])] -= 0.5;
        assert!(matches!(residual(&z, 0.5, &hp), Err(Error::Cone { node: 0 })));
    }

    #[test]
    fn row_sums_on_slice_equal_zeroth_order_term() {
        let hp = problem(2, 16, 2, 0.0);
        let z = hp.grid().constant(1.0);
        let jac = assemble_jacobian(&z, 0.0, &hp, JacobianMode::Analytic).unwrap();
        // d/dz [kappa(z) - phi(z) k(z)] at t0 = -phi'(t0) k(t0)
        let expect = -hp.gauge().phi_dt(1.0).unwrap() * 1f64.tanh();
        for i in 0..jac.dim() {
            let sum: f64 = jac.row(i).map(|(_, v)| v).sum();
            assert!((sum - expect).abs() <= 1e-8 * (1.0 + expect), "{sum} vs {expect}");
            assert!(jac.get(i, i) > 0.0);
        }
    }

    #[test]
    fn coloring_separates_rows() {
        for (dim, order) in [(1, 2), (1, 4), (2, 2), (2, 4)] {
            let grid = TorusGrid::with_default_period(dim, 17, order).unwrap();
            let groups = color_columns(&grid);
            let fp = grid.footprint();
            for g in &groups {
                let mut seen = std::collections::HashSet::new();
                for &q in g {
                    for o in &fp {
                        assert!(seen.insert(grid.neighbor(q, [-o[0], -o[1]])));
                    }
                }
            }
            assert_eq!(groups.iter().map(Vec::len).sum::<usize>(), grid.len());
        }
    }

    #[test]
    fn newton_at_anchor_takes_no_steps() {
        let hp = problem(1, 32, 1, 0.0);
        let (_, stats) = newton_solve(&hp.grid().constant(1.0), 0.0, &hp, &SolverConfig::default()).unwrap();
        assert_eq!(stats.iterations, 0);
    }

    #[test]
    fn sparse_matrix_solve() {
        let rows = vec![
            vec![(0, 4.0), (1, -1.0), (2, -1.0)],
            vec![(0, -1.0), (1, 4.0), (2, -1.0), (1, 0.5)],
            vec![(0, -1.0), (1, -1.0), (2, 4.0)],
        ];
        let m = SparseMatrix::from_rows(rows);
        assert_eq!(m.nnz(), 9);
        assert_eq!(m.get(1, 1), 4.5);
        let x = [1.0, -2.0, 0.5];
        let b = m.mul_vec(&x);
        let y = m.solve(&b).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn continuation_reaches_one() {
        let hp = problem(1, 64, 1, 0.0);
        let (z, report) = continuation(&hp, &SolverConfig::default()).unwrap();
        assert!(z.values().iter().all(|v| (v - 1.0).abs() <= 1e-8));
        let ss: Vec<f64> = report.steps.iter().map(|s| s.s).collect();
        assert!(ss.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*ss.last().unwrap(), 1.0);
        assert_eq!(report.verdict, "converged");
    }
}
