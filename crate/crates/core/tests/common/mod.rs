#![allow(dead_code)]

use rand::Rng;
use weingarten::config::RunConfig;
use weingarten::grid::{NodeField, TorusGrid};

pub const SINH1: f64 = 1.1752011936438014;

/// Cosh profile on (0, 4), barriers 0.5 and 1.5, `psi = sinh(1) / cosh(t)`.
pub fn base_config(n: usize, nodes: usize, r: usize) -> RunConfig {
    RunConfig::from_toml_str(&format!(
        r#"
        [profile]
        kind = "cosh"
        domain = [0.0, 4.0]

        [grid]
        n = {n}
        N = {nodes}

        [curvature]
        r = {r}

        [prescription]
        form = "radial"
        c0 = {SINH1}
        t_minus = 0.5
        t_plus = 1.5

        [homotopy]
        t0 = 1.0
        eps_phi = 0.1
        "#
    ))
    .unwrap()
}

/// Configuration used by the default verify run: `eps = 0.1`, decay 0.1
/// anchored at the crossing.
pub fn default_config(n: usize, nodes: usize, r: usize) -> RunConfig {
    let mut cfg = base_config(n, nodes, r);
    cfg.prescription.eps = 0.1;
    cfg.prescription.decay = 0.1;
    cfg.prescription.decay_anchor = Some(1.0);
    cfg
}

pub fn manufactured_config(n: usize, nodes: usize, r: usize) -> RunConfig {
    let mut cfg = base_config(n, nodes, r);
    cfg.unsafe_mode = true;
    cfg.prescription.form = weingarten::config::FormKind::Manufactured;
    cfg.prescription.amplitude = 0.05;
    cfg.validate().unwrap();
    cfg
}

/// Random trigonometric polynomial of degree <= 2 per axis, scaled to
/// unit sup-norm.
pub fn smooth_random_field(grid: &TorusGrid, rng: &mut impl Rng) -> NodeField {
    let dim = grid.dim();
    let kmax1 = if dim == 2 { 2 } else { 0 };
    let mut terms = Vec::new();
    for k0 in 0..=2i32 {
        for k1 in -kmax1..=kmax1 {
            if k0 == 0 && k1 <= 0 {
                continue;
            }
            terms.push((k0 as f64, k1 as f64, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
    }
    let f = grid.field_from_fn(|u| {
        terms
            .iter()
            .map(|(a, b, c, s)| {
                let ph = a * u[0] + b * u[1];
                c * ph.cos() + s * ph.sin()
            })
            .sum()
    });
    let m = f.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    f.map(|v| v / m)
}
