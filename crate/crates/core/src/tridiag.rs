//! Symmetric tridiagonal eigensolver (implicit-shift QL).
//!
//! The interaction blocks and the collective `S_x` matrix are both real
//! symmetric tridiagonal with a zero diagonal, so a small dedicated solver
//! covers every spectral problem in the crate.

use nalgebra::DMatrix;

/// Relative deflation threshold on an off-diagonal entry.
pub const CONVERGENCE_TOL: f64 = 1e-14;
/// Total QL sweeps allowed per unit of matrix dimension.
pub const SWEEPS_PER_DIM: usize = 50;

/// Eigenvalues sorted ascending and orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NotConverged;

/// Diagonalizes the symmetric tridiagonal matrix with diagonal `diag` and
/// first off-diagonal `offdiag` (`offdiag.len() + 1 == diag.len()`).
///
/// Each eigenvector column is signed so that its first nonzero component is
/// positive, which makes the output reproducible bit-for-bit.
pub fn symmetric_tridiagonal_eigen(diag: &[f64], offdiag: &[f64]) -> Result<Eigensystem, NotConverged> {
    let n = diag.len();
    assert!(n >= 1, "empty matrix");
    assert_eq!(offdiag.len() + 1, n, "off-diagonal length must be n - 1");

    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);
    let mut z = DMatrix::<f64>::identity(n, n);

    let anorm = (0..n)
        .map(|i| d[i].abs() + e[i].abs() + if i > 0 { e[i - 1].abs() } else { 0.0 })
        .fold(0.0, f64::max);

    let cap = SWEEPS_PER_DIM * n;
    let mut sweeps = 0usize;

    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= CONVERGENCE_TOL * dd || e[m].abs() <= f64::EPSILON * anorm {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > cap {
                return Err(NotConverged);
            }

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;

            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let f = z[(k, i + 1)];
                    z[(k, i + 1)] = s * z[(k, i)] + c * f;
                    z[(k, i)] = c * z[(k, i)] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));

    let values = order.iter().map(|&j| d[j]).collect();
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for (col, &j) in order.iter().enumerate() {
        let lead = (0..n)
            .map(|k| z[(k, j)])
            .find(|v| v.abs() > f64::EPSILON)
            .unwrap_or(1.0);
        let sign = if lead < 0.0 { -1.0 } else { 1.0 };
        for k in 0..n {
            vectors[(k, col)] = sign * z[(k, j)];
        }
    }

    Ok(Eigensystem { values, vectors })
}
