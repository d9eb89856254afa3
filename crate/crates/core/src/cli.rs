//! Workflows behind the `weingarten` binary: solve, verify and sweep.

use crate::config::{FormKind, RunConfig};
use crate::error::{exit, Error, Result};
use crate::geometry::GraphGeometry;
use crate::grid::{NodeField, Reduction, TorusGrid};
use crate::oracle;
use crate::problem::{HomotopyProblem, ManufacturedSolution};
use crate::solver::{self, assemble_jacobian, JacobianMode, SolveReport};
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Headline numbers of a finished solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub steps: usize,
    pub newton_total: usize,
    pub final_residual: f64,
    /// `max |z - t0|`
    pub deviation_from_t0: f64,
    pub margin_lower: f64,
    pub margin_upper: f64,
    pub cone_margin: f64,
    /// `max |z - z_m|` for manufactured runs.
    pub manufactured_error: Option<f64>,
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "solve: steps = {}, newton = {}, final_residual = {:.16e}, max|z - t0| = {:.16e}, margin_lower = {:.16e}, margin_upper = {:.16e}, cone_margin = {:.16e}",
            self.steps,
            self.newton_total,
            self.final_residual,
            self.deviation_from_t0,
            self.margin_lower,
            self.margin_upper,
            self.cone_margin
        )?;
        if let Some(e) = self.manufactured_error {
            write!(f, ", max|z - z_m| = {e:.16e}")?;
        }
        Ok(())
    }
}

pub struct SolveOutcome {
    pub problem: HomotopyProblem,
    pub z: NodeField,
    pub report: SolveReport,
    pub summary: Summary,
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<SolveOutcome> {
    let problem = cfg.problem()?;
    let (z, report) = solver::continuation(&problem, &cfg.solver)?;
    let t0 = problem.t0();
    let last = report.final_step().expect("continuation records s = 0");
    let summary = Summary {
        steps: report.steps.len(),
        newton_total: report.newton_total(),
        final_residual: last.residual,
        deviation_from_t0: z.values().iter().map(|v| (v - t0).abs()).fold(0.0, f64::max),
        margin_lower: last.z_min - report.t_minus,
        margin_upper: report.t_plus - last.z_max,
        cone_margin: last.cone_margin,
        manufactured_error: cfg.manufactured().map(|m| {
            let zm = m.field(problem.grid());
            z.values().iter().zip(zm.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        }),
    };
    Ok(SolveOutcome {
        problem,
        z,
        report,
        summary,
    })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Writes `report.txt`, `steps.csv`, `z_final.f64` and `fields.csv`.
pub fn write_outputs(outcome: &SolveOutcome, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut report = create(dir, "report.txt")?;
    outcome.report.write_text(&mut report)?;
    writeln!(report, "{}", outcome.summary)?;
    report.flush()?;
    let mut steps = create(dir, "steps.csv")?;
    outcome.report.write_steps_csv(&mut steps)?;
    steps.flush()?;
    let mut dump = create(dir, "z_final.f64")?;
    outcome.z.write_le(&mut dump)?;
    dump.flush()?;
    let geom = GraphGeometry::compute(&outcome.z, outcome.problem.profile())?;
    let mut fields = create(dir, "fields.csv")?;
    geom.write_fields_csv(&mut fields)?;
    fields.flush()?;
    Ok(())
}

/// One line of the verify table.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub group: &'static str,
    pub name: String,
    pub value: f64,
    /// Human-readable acceptance rule for `value`.
    pub rule: String,
    pub pass: bool,
}

impl CheckRow {
    fn at_most(group: &'static str, name: &str, value: f64, bound: f64) -> Self {
        Self {
            group,
            name: name.into(),
            value,
            rule: format!("<= {bound:e}"),
            pass: value <= bound,
        }
    }

    fn positive(group: &'static str, name: &str, value: f64) -> Self {
        Self {
            group,
            name: name.into(),
            value,
            rule: "> 0".into(),
            pass: value > 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyTable {
    pub rows: Vec<CheckRow>,
}

impl VerifyTable {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failed(&self) -> Vec<&CheckRow> {
        self.rows.iter().filter(|r| !r.pass).collect()
    }

    pub fn row(&self, name: &str) -> Option<&CheckRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

impl fmt::Display for VerifyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<5} {:<11} {:<44} {:>24}  rule", "", "group", "check", "value")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<5} {:<11} {:<44} {:>24.16e}  {}",
                if r.pass { "PASS" } else { "FAIL" },
                r.group,
                r.name,
                r.value + 0.0,
                r.rule
            )?;
        }
        Ok(())
    }
}

/// Smooth admissible perturbation of the anchor slice used by the
/// geometry and Jacobian checks.
fn probe_state(grid: &TorusGrid, t0: f64, amplitude: f64) -> NodeField {
    let dim = grid.dim();
    grid.field_from_fn(|u| {
        let wave = if dim == 1 { u[0].cos() } else { u[0].cos() * (u[1] + 0.3).sin() };
        t0 + amplitude * wave
    })
}

const PROBE_AMPLITUDE: f64 = 0.05;
const PROBE_S: f64 = 0.5;
/// Upper bound on finite-difference Jacobian columns compared in verify.
const MAX_FD_COLUMNS: usize = 64;

/// Structural checks, the homotopy condition table, geometry identities
/// and every oracle comparison.
pub fn cmd_verify(cfg: &RunConfig) -> Result<VerifyTable> {
    let hp = cfg.problem()?;
    let spec = *hp.spec();
    let grid = hp.grid().clone();
    let profile = hp.profile().clone();
    let dim = grid.dim();
    let t0 = hp.t0();
    let mut rows = Vec::new();

    let st = spec.check_structural(0.5, 2.0, 1000, cfg.seed)?;
    rows.push(CheckRow::positive("structural", "min f_i", st.min_fi));
    rows.push(CheckRow::positive("structural", "min sum f_i", st.min_sum_fi));
    rows.push(CheckRow::positive("structural", "min sum f_i lambda_i", st.min_sum_fi_lambda));
    rows.push(CheckRow::at_most("structural", "Euler identity error", st.max_euler_error, 1e-12));
    rows.push(CheckRow::at_most("structural", "midpoint concavity violation", st.max_concavity_violation, 1e-12));
    rows.push(CheckRow::at_most("structural", "Schur ordering violation", st.max_schur_violation, 1e-12));

    for c in hp.verify_conditions()? {
        rows.push(CheckRow {
            group: "homotopy",
            rule: if c.strict { "margin > 0" } else { "margin >= 0" }.into(),
            name: c.name,
            value: c.margin,
            pass: c.pass,
        });
    }

    // geometry
    let slice = GraphGeometry::compute(&grid.constant(t0), &profile)?;
    let kappa = profile.kappa(t0)?;
    let umbilic = slice
        .nodes()
        .iter()
        .flat_map(|n| n.lambda[..dim].iter().map(|l| (l - kappa).abs()).collect::<Vec<_>>())
        .fold(0.0, f64::max);
    rows.push(CheckRow::at_most("geometry", "umbilic slice |lambda - kappa|", umbilic, 1e-12));

    let z = probe_state(&grid, t0, PROBE_AMPLITUDE);
    let geom = GraphGeometry::compute(&z, &profile)?;
    let mut frame: f64 = 0.0;
    for k in 0..grid.len() {
        match geom.special_frame_check(&z, k) {
            Ok(d) => frame = frame.max(d),
            Err(Error::Frame { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    rows.push(CheckRow::at_most("geometry", "special frame deviation", frame, 1e-10));

    let p = grid.order() as f64;
    let fine = TorusGrid::new(dim, 2 * grid.nodes_per_axis(), grid.period(), grid.order())?;
    let (e_eta, e_tau) = geom.support_identity_check();
    let (f_eta, f_tau) = GraphGeometry::compute(&probe_state(&fine, t0, PROBE_AMPLITUDE), &profile)?.support_identity_check();
    for (name, coarse, finer) in [("support identity order (eta)", e_eta, f_eta), ("support identity order (tau)", e_tau, f_tau)] {
        let order = (coarse / finer).log2();
        rows.push(CheckRow {
            group: "geometry",
            name: name.into(),
            value: order,
            rule: format!("{p} +- 15%"),
            pass: (order - p).abs() <= 0.15 * p,
        });
    }

    // oracles
    let mut eig_err: f64 = 0.0;
    let mut grad_rel: f64 = 0.0;
    for ng in geom.nodes() {
        let lam = if dim == 2 {
            oracle::eig2_oracle(&ng.sym).0
        } else {
            [ng.sym[0][0], 0.0]
        };
        for i in 0..dim {
            eig_err = eig_err.max((lam[i] - ng.lambda[i]).abs() / (1.0 + lam[i].abs()));
        }
        grad_rel = grad_rel.max(oracle::fd_gradcheck(&spec, &ng.lambda[..dim], 1e-6)?.max_rel);
    }
    rows.push(CheckRow::at_most("oracle", "eigenvalues vs closed form", eig_err, 1e-12));
    rows.push(CheckRow::at_most("oracle", "f_grad vs central differences", grad_rel, 1e-6));

    let analytic = assemble_jacobian(&z, PROBE_S, &hp, JacobianMode::Analytic)?;
    let stride = grid.len().div_ceil(MAX_FD_COLUMNS);
    let cols: Vec<usize> = (0..grid.len()).step_by(stride).collect();
    let step = 1e-6 * (1.0 + z.reduce(Reduction::LInf));
    let fd = oracle::fd_jacobian_columns(&z, PROBE_S, &hp, step, &cols)?;
    let rep = oracle::compare_columns("jacobian", &analytic, &cols, &fd);
    rows.push(CheckRow::at_most("oracle", "analytic Jacobian vs dense differences", rep.max_rel, 1e-6));
    let colored = assemble_jacobian(&z, PROBE_S, &hp, JacobianMode::FdColored)?;
    let rep = oracle::compare_jacobians("jacobian", &analytic, &colored.to_dense());
    rows.push(CheckRow::at_most("oracle", "analytic Jacobian vs colored differences", rep.max_rel, 1e-6));

    let v: Vec<f64> = grid.field_from_fn(|u| (u[0] + 2.0 * u[1]).sin()).into_values();
    let deltas: Vec<f64> = (0..5).map(|k| 1e-2 / 2f64.powi(k)).collect();
    let rem = oracle::linearization_remainders(&z, PROBE_S, &hp, &analytic, &v, &deltas)?;
    let worst = rem
        .windows(2)
        .map(|w| w[0] / w[1])
        .fold(4.0f64, |acc, r| if (r - 4.0).abs() > (acc - 4.0).abs() { r } else { acc });
    rows.push(CheckRow {
        group: "oracle",
        name: "linearization remainder ratio".into(),
        value: worst,
        rule: "4 +- 20%".into(),
        pass: (worst - 4.0).abs() <= 0.8,
    });

    Ok(VerifyTable { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    N,
    Eps,
    R,
    STrace,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            Self::N => "N",
            Self::Eps => "eps",
            Self::R => "r",
            Self::STrace => "s",
        }
    }
}

/// One run of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub exit_code: i32,
    pub final_residual: f64,
    pub newton_total: usize,
    pub margin_lower: f64,
    pub margin_upper: f64,
    pub crossing_lower: f64,
    pub crossing_upper: f64,
    pub max_lambda1: f64,
    pub max_grad: f64,
    /// `|Upsilon(1, z_m)|_inf` for manufactured runs.
    pub truncation_residual: f64,
    pub manufactured_error: f64,
    /// Observed order against the previous row (grid sweeps only).
    pub order: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
    /// Invariants that failed across rows.
    pub violations: Vec<String>,
}

impl SweepTable {
    pub fn exit_code(&self) -> i32 {
        if !self.violations.is_empty() || !self.rows.iter().any(|r| r.exit_code == exit::OK) {
            exit::CHECKS_FAILED
        } else {
            exit::OK
        }
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(
            out,
            "{},exit_code,final_residual,newton_total,margin_lower,margin_upper,crossing_lower,crossing_upper,max_lambda1,max_grad,truncation_residual,manufactured_error,order",
            self.axis.name()
        )?;
        for r in &self.rows {
            writeln!(
                out,
                "{:.16e},{},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.value,
                r.exit_code,
                r.final_residual,
                r.newton_total,
                r.margin_lower,
                r.margin_upper,
                r.crossing_lower,
                r.crossing_upper,
                r.max_lambda1,
                r.max_grad,
                r.truncation_residual,
                r.manufactured_error,
                r.order
            )?;
        }
        Ok(())
    }
}

/// Discrete residual of the exact manufactured solution at `s = 1`.
pub fn truncation_residual(m: &ManufacturedSolution, hp: &HomotopyProblem) -> Result<f64> {
    Ok(solver::residual(&m.field(hp.grid()), 1.0, hp)?.reduce(Reduction::LInf))
}

fn failed_row(value: f64, code: i32) -> SweepRow {
    SweepRow {
        value,
        exit_code: code,
        final_residual: f64::NAN,
        newton_total: 0,
        margin_lower: f64::NAN,
        margin_upper: f64::NAN,
        crossing_lower: f64::NAN,
        crossing_upper: f64::NAN,
        max_lambda1: f64::NAN,
        max_grad: f64::NAN,
        truncation_residual: f64::NAN,
        manufactured_error: f64::NAN,
        order: f64::NAN,
    }
}

fn sweep_one(cfg: &RunConfig, value: f64) -> SweepRow {
    let crossings = cfg
        .prescription()
        .and_then(|p| p.barrier_crossings())
        .unwrap_or((f64::NAN, f64::NAN));
    let mut row = match cmd_solve(cfg) {
        Ok(out) => {
            let last = out.report.final_step().expect("s = 0 recorded");
            let mut row = failed_row(value, exit::OK);
            row.final_residual = last.residual;
            row.newton_total = out.report.newton_total();
            row.margin_lower = out.summary.margin_lower;
            row.margin_upper = out.summary.margin_upper;
            row.max_lambda1 = out.report.steps.iter().map(|s| s.max_lambda1).fold(f64::NEG_INFINITY, f64::max);
            row.max_grad = out.report.steps.iter().map(|s| s.max_grad).fold(0.0, f64::max);
            row.manufactured_error = out.summary.manufactured_error.unwrap_or(f64::NAN);
            row
        }
        Err(e) => failed_row(value, e.exit_code()),
    };
    row.crossing_lower = crossings.0;
    row.crossing_upper = crossings.1;
    if let Some(m) = cfg.manufactured() {
        if let Ok(hp) = cfg.problem() {
            row.truncation_residual = truncation_residual(&m, &hp).unwrap_or(f64::NAN);
        }
    }
    row
}

/// Repeats the solve along one axis. For `s-trace` the values are
/// ignored and one row per accepted continuation state is emitted.
pub fn cmd_sweep(cfg: &RunConfig, axis: SweepAxis, values: &[f64]) -> Result<SweepTable> {
    if axis == SweepAxis::STrace {
        let out = cmd_solve(cfg)?;
        let crossings = out.problem.prescription().barrier_crossings().unwrap_or((f64::NAN, f64::NAN));
        let rows = out
            .report
            .steps
            .iter()
            .map(|st| {
                let mut row = failed_row(st.s, exit::OK);
                row.final_residual = st.residual;
                row.newton_total = st.newton_iterations;
                row.margin_lower = st.z_min - out.report.t_minus;
                row.margin_upper = out.report.t_plus - st.z_max;
                row.crossing_lower = crossings.0;
                row.crossing_upper = crossings.1;
                row.max_lambda1 = st.max_lambda1;
                row.max_grad = st.max_grad;
                row
            })
            .collect();
        return Ok(SweepTable {
            axis,
            rows,
            violations: Vec::new(),
        });
    }
    if values.len() < 2 {
        return Err(Error::Config("a sweep needs at least two values".into()));
    }
    let mut rows = Vec::with_capacity(values.len());
    for &v in values {
        let mut c = cfg.clone();
        match axis {
            SweepAxis::N => {
                if v < 1.0 || v.fract() != 0.0 {
                    return Err(Error::Config(format!("N = {v} is not a positive integer")));
                }
                c.grid.nodes = v as usize;
            }
            SweepAxis::Eps => c.prescription.eps = v,
            SweepAxis::R => {
                if v < 1.0 || v.fract() != 0.0 {
                    return Err(Error::Config(format!("r = {v} is not a positive integer")));
                }
                c.curvature.r = v as usize;
            }
            SweepAxis::STrace => unreachable!(),
        }
        rows.push(match c.validate() {
            Ok(()) => sweep_one(&c, v),
            Err(e) => failed_row(v, e.exit_code()),
        });
    }

    let mut violations = Vec::new();
    if axis == SweepAxis::N {
        for i in 1..rows.len() {
            let measure = |r: &SweepRow| {
                if cfg.prescription.form == FormKind::Manufactured {
                    r.truncation_residual
                } else {
                    r.final_residual
                }
            };
            let (a, b) = (measure(&rows[i - 1]), measure(&rows[i]));
            rows[i].order = (a / b).ln() / (rows[i].value / rows[i - 1].value).ln();
        }
    }
    if axis == SweepAxis::Eps {
        let mut by_eps: Vec<&SweepRow> = rows.iter().filter(|r| r.crossing_lower.is_finite()).collect();
        by_eps.sort_by(|a, b| a.value.abs().total_cmp(&b.value.abs()));
        for w in by_eps.windows(2) {
            let wa = w[0].crossing_upper - w[0].crossing_lower;
            let wb = w[1].crossing_upper - w[1].crossing_lower;
            if wb < wa {
                violations.push(format!(
                    "crossing width shrinks from {wa:e} at eps = {} to {wb:e} at eps = {}",
                    w[0].value, w[1].value
                ));
            }
        }
    }
    Ok(SweepTable {
        axis,
        rows,
        violations,
    })
}

