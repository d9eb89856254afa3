//! Flat torus `(R / L Z)^n`, `n in {1, 2}`, with periodic centred finite
//! differences. On the flat base the frame components `z_i`, `z_ij` are
//! ordinary partial derivatives.
//!
//! Nodes are ordered row-major with axis 0 fastest: `index = i0 + N * i1`.

use crate::error::{Error, Result};
use crate::small::{Mat2, ZERO};
use std::f64::consts::PI;
use std::io::{Read, Write};

#[derive(Debug, Clone, PartialEq)]
pub struct TorusGrid {
    dim: usize,
    n: usize,
    period: f64,
    spacing: f64,
    order: usize,
    stencil: Stencil,
}

/// Linear functionals giving derivatives at a node from neighbour values.
/// Offsets are in node units, weights include the grid spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    /// `d/du` along one axis.
    pub first: Vec<(i64, f64)>,
    /// `d^2/du^2` along one axis.
    pub second: Vec<(i64, f64)>,
    /// `d^2/du0 du1`.
    pub mixed: Vec<([i64; 2], f64)>,
}

impl Stencil {
    fn new(order: usize, du: f64) -> Self {
        let (first, second, mixed) = match order {
            2 => {
                let d = 1.0 / (2.0 * du);
                let d2 = 1.0 / (du * du);
                let m = 1.0 / (4.0 * du * du);
                (
                    vec![(-1, -d), (1, d)],
                    vec![(-1, d2), (0, -2.0 * d2), (1, d2)],
                    vec![([1, 1], m), ([-1, -1], m), ([1, -1], -m), ([-1, 1], -m)],
                )
            }
            _ => {
                let d = 1.0 / (12.0 * du);
                let d2 = 1.0 / (12.0 * du * du);
                // (16 C(1) - C(2)) / 48 with C(m) the diagonal cross difference
                let m1 = 16.0 / (48.0 * du * du);
                let m2 = -1.0 / (48.0 * du * du);
                (
                    vec![(-2, d), (-1, -8.0 * d), (1, 8.0 * d), (2, -d)],
                    vec![
                        (-2, -d2),
                        (-1, 16.0 * d2),
                        (0, -30.0 * d2),
                        (1, 16.0 * d2),
                        (2, -d2),
                    ],
                    vec![
                        ([1, 1], m1),
                        ([-1, -1], m1),
                        ([1, -1], -m1),
                        ([-1, 1], -m1),
                        ([2, 2], m2),
                        ([-2, -2], m2),
                        ([2, -2], -m2),
                        ([-2, 2], -m2),
                    ],
                )
            }
        };
        Self {
            first,
            second,
            mixed,
        }
    }
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize, period: f64, order: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::Config(format!("grid dimension {dim} not in {{1, 2}}")));
        }
        if n < 16 {
            return Err(Error::Config(format!("need at least 16 nodes per axis, got {n}")));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::Config(format!("period {period} must be positive")));
        }
        if order != 2 && order != 4 {
            return Err(Error::Config(format!("stencil order {order} not in {{2, 4}}")));
        }
        let spacing = period / n as f64;
        Ok(Self {
            dim,
            n,
            period,
            spacing,
            order,
            stencil: Stencil::new(order, spacing),
        })
    }

    /// Default period `2 pi`.
    pub fn with_default_period(dim: usize, n: usize, order: usize) -> Result<Self> {
        Self::new(dim, n, 2.0 * PI, order)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn stencil(&self) -> &Stencil {
        &self.stencil
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume element `(du)^n`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    pub fn multi_index(&self, node: usize) -> [usize; 2] {
        [node % self.n, node / self.n]
    }

    pub fn coords(&self, node: usize) -> [f64; 2] {
        let [i, j] = self.multi_index(node);
        [i as f64 * self.spacing, j as f64 * self.spacing]
    }

    /// Node reached from `node` by a periodic offset.
    pub fn neighbor(&self, node: usize, offset: [i64; 2]) -> usize {
        let n = self.n as i64;
        let [i, j] = self.multi_index(node);
        let i = (i as i64 + offset[0]).rem_euclid(n) as usize;
        if self.dim == 1 {
            return i;
        }
        let j = (j as i64 + offset[1]).rem_euclid(n) as usize;
        i + self.n * j
    }

    pub fn field_from_fn(&self, f: impl Fn([f64; 2]) -> f64) -> NodeField {
        NodeField {
            grid: self.clone(),
            values: (0..self.len()).map(|k| f(self.coords(k))).collect(),
        }
    }

    pub fn constant(&self, c: f64) -> NodeField {
        NodeField {
            grid: self.clone(),
            values: vec![c; self.len()],
        }
    }

    /// Unit offset along `axis`.
    pub fn axis_offset(axis: usize, k: i64) -> [i64; 2] {
        if axis == 0 {
            [k, 0]
        } else {
            [0, k]
        }
    }

    /// Every offset a derivative at one node reads, including the node.
    pub fn footprint(&self) -> Vec<[i64; 2]> {
        let mut out = vec![[0, 0]];
        for axis in 0..self.dim {
            for &(k, _) in self.stencil.first.iter().chain(&self.stencil.second) {
                out.push(Self::axis_offset(axis, k));
            }
        }
        if self.dim == 2 {
            out.extend(self.stencil.mixed.iter().map(|&(o, _)| o));
        }
        out.sort();
        out.dedup();
        out
    }

    /// Gradient and Hessian of a periodic field at one node.
    pub fn derivatives_at(&self, values: &[f64], node: usize) -> ([f64; 2], Mat2) {
        let mut grad = [0.0; 2];
        let mut hess = ZERO;
        for axis in 0..self.dim {
            grad[axis] = self
                .stencil
                .first
                .iter()
                .map(|&(k, w)| w * values[self.neighbor(node, Self::axis_offset(axis, k))])
                .sum();
            hess[axis][axis] = self
                .stencil
                .second
                .iter()
                .map(|&(k, w)| w * values[self.neighbor(node, Self::axis_offset(axis, k))])
                .sum();
        }
        if self.dim == 2 {
            let cross: f64 = self
                .stencil
                .mixed
                .iter()
                .map(|&(o, w)| w * values[self.neighbor(node, o)])
                .sum();
            hess[0][1] = cross;
            hess[1][0] = cross;
        }
        (grad, hess)
    }

    /// Periodic first-difference divergence of a vector field.
    pub fn divergence(&self, w: &[[f64; 2]]) -> Vec<f64> {
        (0..self.len())
            .map(|node| {
                (0..self.dim)
                    .map(|axis| {
                        self.stencil
                            .first
                            .iter()
                            .map(|&(k, c)| c * w[self.neighbor(node, Self::axis_offset(axis, k))][axis])
                            .sum::<f64>()
                    })
                    .sum()
            })
            .collect()
    }
}

/// One real value per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeField {
    grid: TorusGrid,
    values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    Max,
    Min,
    L2,
    LInf,
}

/// Per-node gradient and Hessian.
#[derive(Debug, Clone)]
pub struct Derivatives {
    pub grad: Vec<[f64; 2]>,
    pub hess: Vec<Mat2>,
}

impl NodeField {
    pub fn new(grid: &TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Config(format!("non-finite value at node {k}")));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> NodeField {
        NodeField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn derivatives(&self) -> Derivatives {
        let (grad, hess) = (0..self.grid.len())
            .map(|k| self.grid.derivatives_at(&self.values, k))
            .unzip();
        Derivatives { grad, hess }
    }

    pub fn reduce(&self, mode: Reduction) -> f64 {
        let v = &self.values;
        match mode {
            Reduction::Max => v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Reduction::Min => v.iter().copied().fold(f64::INFINITY, f64::min),
            Reduction::LInf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            Reduction::L2 => (v.iter().map(|x| x * x).sum::<f64>() * self.grid.cell_volume()).sqrt(),
        }
    }

    /// Raw little-endian `f64` values in node order.
    pub fn write_le(&self, mut out: impl Write) -> Result<()> {
        for v in &self.values {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_le(grid: &TorusGrid, mut input: impl Read) -> Result<Self> {
        let mut bytes = Vec::new();
        input.read_to_end(&mut bytes)?;
        if bytes.len() != 8 * grid.len() {
            return Err(Error::Shape {
                expected: grid.len(),
                got: bytes.len() / 8,
            });
        }
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        Self::new(grid, values)
    }

    /// `n N L` header describing the binary dump layout.
    pub fn header(&self) -> String {
        format!(
            "n={} N={} L={:.16e}",
            self.grid.dim, self.grid.n, self.grid.period
        )
    }
}
