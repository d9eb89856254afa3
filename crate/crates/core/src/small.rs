//! Fixed 2x2 matrix helpers. One-dimensional problems use the upper-left
//! entry only and keep the rest zero.

pub type Mat2 = [[f64; 2]; 2];

pub const ZERO: Mat2 = [[0.0; 2]; 2];

pub fn identity(dim: usize) -> Mat2 {
    let mut m = ZERO;
    for (i, row) in m.iter_mut().enumerate().take(dim) {
        row[i] = 1.0;
    }
    m
}

pub fn mul(a: &Mat2, b: &Mat2, dim: usize) -> Mat2 {
    let mut c = ZERO;
    for i in 0..dim {
        for j in 0..dim {
            c[i][j] = (0..dim).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn transpose(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

/// `sum_ij a_ij b_ij`.
pub fn contract(a: &Mat2, b: &Mat2, dim: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            s += a[i][j] * b[i][j];
        }
    }
    s
}

pub fn max_abs_diff(a: &Mat2, b: &Mat2, dim: usize) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            d = d.max((a[i][j] - b[i][j]).abs());
        }
    }
    d
}

/// Eigen-decomposition of a symmetric matrix: eigenvalues sorted
/// descending and the matching unit eigenvectors as columns of `q`.
pub fn sym_eigen(m: &Mat2, dim: usize) -> ([f64; 2], Mat2) {
    if dim == 1 {
        return ([m[0][0], 0.0], identity(1));
    }
    let (a, b, c) = (m[0][0], 0.5 * (m[0][1] + m[1][0]), m[1][1]);
    let mean = 0.5 * (a + c);
    let half_gap = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let l1 = mean + half_gap;
    let l2 = mean - half_gap;
    if half_gap == 0.0 {
        return ([l1, l2], identity(2));
    }
    // null vector of m - l1*I, taken from whichever row is better conditioned
    let r1 = [b, l1 - a];
    let r2 = [l1 - c, b];
    let v = if r1[0].hypot(r1[1]) >= r2[0].hypot(r2[1]) {
        r1
    } else {
        r2
    };
    let norm = v[0].hypot(v[1]);
    let (x, y) = (v[0] / norm, v[1] / norm);
    ([l1, l2], [[x, -y], [y, x]])
}

/// `q diag(d) q^T`.
pub fn from_eigen(d: &[f64; 2], q: &Mat2, dim: usize) -> Mat2 {
    let mut out = ZERO;
    for i in 0..dim {
        for j in 0..dim {
            out[i][j] = (0..dim).map(|k| q[i][k] * d[k] * q[j][k]).sum();
        }
    }
    out
}
