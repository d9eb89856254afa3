//! Acceptance criteria 1 to 8. Prints one PASS/FAIL line per criterion
//! and exits nonzero if any fails.

mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;
use weingarten::ambient::WarpingProfile;
use weingarten::cli::{cmd_solve, cmd_sweep, SweepAxis};
use weingarten::curvature::CurvatureSpec;
use weingarten::geometry::{special_frame_deviation, GraphGeometry};
use weingarten::grid::TorusGrid;
use weingarten::oracle;
use weingarten::solver::{assemble_jacobian, continuation, newton_solve, JacobianMode};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

const RADIAL_CASES: [(usize, usize, usize); 3] = [(1, 256, 1), (2, 48, 1), (2, 48, 2)];
/// Anchor below the crossing so the branch actually moves.
const MOVING_T0: f64 = 0.8;
const QUADRATIC_BOUND: f64 = 100.0;
const QUADRATIC_FLOOR: f64 = 1e-12;

fn exact_radial() -> Outcome {
    let mut worst_dev: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    for (n, nodes, r) in RADIAL_CASES {
        for t0 in [1.0, MOVING_T0] {
            let mut cfg = base_config(n, nodes, r);
            cfg.homotopy.t0 = Some(t0);
            let start = Instant::now();
            let out = cmd_solve(&cfg).map_err(|e| format!("(n, r) = ({n}, {r}), t0 = {t0}: {e}"))?;
            let secs = start.elapsed().as_secs_f64();
            let last = out.report.final_step().unwrap();
            let dev = out.z.values().iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
            ensure(last.s == 1.0, || format!("({n}, {r}) stopped at s = {}", last.s))?;
            ensure(dev <= 1e-8, || format!("({n}, {r}), t0 = {t0}: max|z - 1| = {dev:e}"))?;
            ensure(last.residual <= 1e-10, || format!("({n}, {r}): residual {:e}", last.residual))?;
            ensure(secs <= 30.0, || format!("({n}, {r}) took {secs:.1} s"))?;
            worst_dev = worst_dev.max(dev);
            worst_res = worst_res.max(last.residual);
            slowest = slowest.max(secs);
        }
    }
    Ok(format!(
        "max|z - 1| = {worst_dev:.3e}, max final residual = {worst_res:.3e}, slowest case {slowest:.2} s"
    ))
}

fn uniqueness_at_s0() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (n, nodes, r) in [(1, 64, 1), (2, 32, 2)] {
        let cfg = default_config(n, nodes, r);
        let hp = cfg.problem().map_err(|e| e.to_string())?;
        for trial in 0..10 {
            let v = smooth_random_field(hp.grid(), &mut rng);
            let z0 = v.map(|x| hp.t0() + 0.05 * x);
            let (z, _) = newton_solve(&z0, 0.0, &hp, &cfg.solver).map_err(|e| format!("n = {n}, trial {trial}: {e}"))?;
            let dev = z.values().iter().map(|x| (x - hp.t0()).abs()).fold(0.0, f64::max);
            ensure(dev <= 1e-8, || format!("n = {n}, trial {trial}: max|z - t0| = {dev:e}"))?;
            worst = worst.max(dev);
        }
    }
    Ok(format!("20 trials, max|z - t0| = {worst:.3e}"))
}

fn barrier_bounds() -> Outcome {
    let mut tightest = f64::INFINITY;
    let mut states = 0;
    for (n, nodes, r) in RADIAL_CASES {
        let mut cfg = base_config(n, nodes, r);
        cfg.prescription.eps = 0.1;
        let hp = cfg.problem().map_err(|e| e.to_string())?;
        let (lo, hi) = hp.prescription().barrier_crossings().map_err(|e| e.to_string())?;
        let (_, report) = continuation(&hp, &cfg.solver).map_err(|e| format!("({n}, {r}): {e}"))?;
        ensure(report.barrier_excursions == 0, || {
            format!("({n}, {r}): {} barrier excursions", report.barrier_excursions)
        })?;
        for st in &report.steps {
            ensure(st.z_min > lo && st.z_max < hi, || {
                format!("({n}, {r}) s = {}: z in [{}, {}] outside ({lo}, {hi})", st.s, st.z_min, st.z_max)
            })?;
            tightest = tightest.min((st.z_min - lo).min(hi - st.z_max));
            states += 1;
        }
    }
    Ok(format!("{states} accepted states, smallest distance to crossing interval {tightest:.3e}"))
}

fn homotopy_conditions() -> Outcome {
    let cfg = default_config(2, 16, 2);
    let rows = cfg.problem().and_then(|hp| hp.verify_conditions()).map_err(|e| e.to_string())?;
    let failed: Vec<&str> = rows.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
    ensure(failed.is_empty(), || format!("eps_phi = 0.1 fails {failed:?}"))?;
    let strict_min = rows
        .iter()
        .filter(|r| ["(ii)", "(iii)", "(iv)", "(v)"].iter().any(|p| r.name.starts_with(p)))
        .map(|r| r.margin)
        .fold(f64::INFINITY, f64::min);
    ensure(strict_min > 0.0, || format!("min margin of (ii)-(v) is {strict_min:e}"))?;

    let mut zero = cfg.clone();
    zero.homotopy.eps_phi = 0.0;
    let rows = zero.problem().and_then(|hp| hp.verify_conditions()).map_err(|e| e.to_string())?;
    let failed: Vec<&str> = rows.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
    ensure(failed.len() == 1 && failed[0].starts_with("(v)"), || {
        format!("eps_phi = 0 fails {failed:?}, expected only (v)")
    })?;
    Ok(format!("min margin (ii)-(v) = {strict_min:.3e}; eps_phi = 0 fails only (v)"))
}

fn jacobian_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut configs = 0;
    for (n, nodes, r, order) in [(1, 64, 1, 2), (1, 64, 1, 4), (2, 16, 1, 2), (2, 16, 2, 2), (2, 16, 2, 4)] {
        let mut cfg = default_config(n, nodes, r);
        cfg.grid.order = order;
        let hp = cfg.problem().map_err(|e| e.to_string())?;
        for trial in 0..5 {
            let z = smooth_random_field(hp.grid(), &mut rng).map(|x| hp.t0() + 0.1 * x);
            let s: f64 = rng.gen_range(0.0..=1.0);
            let a = assemble_jacobian(&z, s, &hp, JacobianMode::Analytic).map_err(|e| e.to_string())?;
            let f = assemble_jacobian(&z, s, &hp, JacobianMode::FdColored).map_err(|e| e.to_string())?;
            let rep = oracle::compare_jacobians("jacobian", &a, &f.to_dense());
            ensure(rep.max_rel <= 1e-6, || {
                format!("(n, r, order) = ({n}, {r}, {order}) trial {trial}: rel error {:e}", rep.max_rel)
            })?;
            worst = worst.max(rep.max_rel);
        }
        configs += 1;
    }

    let mut worst_c: f64 = 0.0;
    for (n, nodes, r) in RADIAL_CASES {
        let mut cfg = base_config(n, nodes, r);
        cfg.homotopy.t0 = Some(MOVING_T0);
        let (_, report) = continuation(&cfg.problem().map_err(|e| e.to_string())?, &cfg.solver)
            .map_err(|e| e.to_string())?;
        for st in &report.steps {
            for w in st.residual_history.windows(2).filter(|w| w[1] > QUADRATIC_FLOOR) {
                worst_c = worst_c.max(w[1] / (w[0] * w[0]));
            }
        }
    }
    ensure(worst_c <= QUADRATIC_BOUND, || format!("r_(k+1) / r_k^2 reaches {worst_c:e}"))?;
    Ok(format!(
        "{configs} configurations x 5 states, max rel entry error {worst:.3e}; max r_(k+1)/r_k^2 = {worst_c:.3e}"
    ))
}

fn curvature_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_euler: f64 = 0.0;
    let mut worst_concave: f64 = 0.0;
    let mut worst_misc: f64 = 0.0;
    for (n, r) in [(1, 1), (2, 1), (2, 2), (3, 2), (3, 3), (4, 2)] {
        let spec = CurvatureSpec::new(n, r).map_err(|e| e.to_string())?;
        let rep = spec.check_structural(0.5, 2.0, 10_000, 6).map_err(|e| e.to_string())?;
        ensure(rep.min_fi > 0.0, || format!("({n}, {r}): min f_i = {:e}", rep.min_fi))?;
        ensure(rep.max_euler_error <= 1e-12, || format!("({n}, {r}): Euler {:e}", rep.max_euler_error))?;
        ensure(rep.max_concavity_violation <= 1e-12, || {
            format!("({n}, {r}): concavity {:e}", rep.max_concavity_violation)
        })?;
        ensure(rep.max_schur_violation <= 0.0, || format!("({n}, {r}): Schur {:e}", rep.max_schur_violation))?;
        worst_euler = worst_euler.max(rep.max_euler_error);
        worst_concave = worst_concave.max(rep.max_concavity_violation);
        for _ in 0..1000 {
            let lam = spec.sample_slab(&mut rng, 0.5, 2.0);
            let f = spec.f_eval(&lam).unwrap();
            let c: f64 = rng.gen_range(0.1..10.0);
            let scaled: Vec<f64> = lam.iter().map(|l| c * l).collect();
            let hom = (spec.f_eval(&scaled).unwrap() - c * f).abs() / (c * f);
            let mut perm = lam.clone();
            perm.rotate_left(1);
            perm.reverse();
            let sym = (spec.f_eval(&perm).unwrap() - f).abs() / f;
            ensure(hom <= 1e-13 && sym <= 1e-13, || format!("({n}, {r}) at {lam:?}: {hom:e} {sym:e}"))?;
            worst_misc = worst_misc.max(hom).max(sym);
        }
    }
    Ok(format!(
        "Euler {worst_euler:.3e}, concavity {worst_concave:.3e}, homogeneity/symmetry {worst_misc:.3e}"
    ))
}

fn geometry_identities() -> Outcome {
    let mut umbilic: f64 = 0.0;
    for profile in [
        WarpingProfile::cosh(0.0, 4.0).unwrap(),
        WarpingProfile::exp(-2.0, 2.0).unwrap(),
        WarpingProfile::power(2.0, 0.1, 4.0).unwrap(),
    ] {
        for dim in [1, 2] {
            let grid = TorusGrid::with_default_period(dim, 16, 2).unwrap();
            for c in [0.5, 1.0, 1.7] {
                let kappa = profile.kappa(c).unwrap();
                let g = GraphGeometry::compute(&grid.constant(c), &profile).unwrap();
                for ng in g.nodes() {
                    for l in &ng.lambda[..dim] {
                        umbilic = umbilic.max((l - kappa).abs());
                    }
                }
            }
        }
    }
    ensure(umbilic <= 1e-12, || format!("umbilic slice error {umbilic:e}"))?;

    let profile = WarpingProfile::cosh(0.0, 4.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut frame: f64 = 0.0;
    for k in 0..1000 {
        let dim = 1 + k % 2;
        let t: f64 = rng.gen_range(0.3..3.0);
        let mut grad: [f64; 2] = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let h01 = rng.gen_range(-2.0..2.0);
        let mut hess = [[rng.gen_range(-2.0..2.0), h01], [h01, rng.gen_range(-2.0..2.0)]];
        if dim == 1 {
            grad[1] = 0.0;
            hess = [[hess[0][0], 0.0], [0.0, 0.0]];
        }
        if grad[0].hypot(grad[1]) < 1e-3 {
            grad[0] = 0.5;
        }
        let d = special_frame_deviation(dim, profile.eval_warp(t).unwrap(), grad, hess).map_err(|e| e.to_string())?;
        frame = frame.max(d);
    }
    ensure(frame <= 1e-10, || format!("special frame deviation {frame:e}"))?;

    let mut orders = Vec::new();
    for dim in [1, 2] {
        let errs: Vec<(f64, f64)> = [16, 32, 64]
            .iter()
            .map(|&n| {
                let grid = TorusGrid::with_default_period(dim, n, 2).unwrap();
                let z = grid.field_from_fn(|u| 1.0 + 0.1 * u[0].sin() * (u[1] + 0.4).cos());
                GraphGeometry::compute(&z, &profile.clone().with_anchor(1.0)).unwrap().support_identity_check()
            })
            .collect();
        for w in errs.windows(2) {
            for (a, b) in [(w[0].0, w[1].0), (w[0].1, w[1].1)] {
                let p = (a / b).log2();
                ensure((p - 2.0).abs() <= 0.3, || format!("n = {dim}: support identity order {p}"))?;
                orders.push(p);
            }
        }
    }
    let lo = orders.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = orders.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(format!(
        "umbilic {umbilic:.3e}, special frame {frame:.3e}, support identity orders in [{lo:.4}, {hi:.4}]"
    ))
}

fn manufactured_convergence() -> Outcome {
    let mut orders = Vec::new();
    for (n, r, values) in [(1, 1, [64.0, 128.0, 256.0]), (2, 2, [24.0, 48.0, 96.0])] {
        let cfg = manufactured_config(n, values[0] as usize, r);
        let table = cmd_sweep(&cfg, SweepAxis::N, &values).map_err(|e| e.to_string())?;
        for row in &table.rows {
            ensure(row.exit_code == 0, || format!("n = {n}, N = {}: exit {}", row.value, row.exit_code))?;
            ensure(row.final_residual <= 1e-10, || format!("n = {n}, N = {}: residual {:e}", row.value, row.final_residual))?;
        }
        for row in &table.rows[1..] {
            ensure(row.order >= 1.9, || format!("n = {n}, N = {}: order {}", row.value, row.order))?;
            orders.push(row.order);
        }
    }
    let lo = orders.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(format!("min observed order {lo:.4} over {} refinements", orders.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("exact radial solution", exact_radial),
        ("uniqueness at s = 0", uniqueness_at_s0),
        ("barrier bounds", barrier_bounds),
        ("homotopy conditions", homotopy_conditions),
        ("Jacobian correctness", jacobian_correctness),
        ("curvature-function suite", curvature_suite),
        ("geometry identities", geometry_identities),
        ("manufactured-solution convergence", manufactured_convergence),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {} [{name}]: PASS ({detail})", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {} [{name}]: FAIL ({detail})", i + 1);
            }
        }
    }
    if failures > 0 {
        println!("{failures} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
