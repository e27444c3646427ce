//! Collective-spin matrices in the Dicke basis and finite-rotation matrices.
//!
//! Rows and columns are labelled by the excited-atom count `M = 0..=A`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::tridiag::{symmetric_tridiagonal_eigen, Eigensystem};

/// Spin-`A/2` representation generated by `A` two-level atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinRep {
    pub atoms: usize,
    pub s_plus: DMatrix<f64>,
    pub s_minus: DMatrix<f64>,
    pub s3: DMatrix<f64>,
    pub sx: DMatrix<f64>,
}

impl SpinRep {
    pub fn dim(&self) -> usize {
        self.atoms + 1
    }
}

/// `<M+1| S_+ |M> = sqrt((M+1)(A-M))`.
pub fn raising_element(atoms: usize, m: usize) -> f64 {
    (((m + 1) * (atoms - m)) as f64).sqrt()
}

pub fn spin_matrices(atoms: usize) -> Result<SpinRep> {
    if atoms == 0 {
        return Err(invalid("atom count must be at least 1"));
    }
    let dim = atoms + 1;
    let mut s_plus = DMatrix::zeros(dim, dim);
    for m in 0..atoms {
        s_plus[(m + 1, m)] = raising_element(atoms, m);
    }
    let s_minus = s_plus.transpose();
    let s3 = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            i as f64 - atoms as f64 / 2.0
        } else {
            0.0
        }
    });
    let sx = (&s_plus + &s_minus) * 0.5;
    Ok(SpinRep {
        atoms,
        s_plus,
        s_minus,
        s3,
        sx,
    })
}

/// Spectral decomposition of `S_x`; eigenvalues ascend from `-A/2` to `A/2`.
pub fn sx_eigensystem(atoms: usize) -> Result<Eigensystem> {
    if atoms == 0 {
        return Err(invalid("atom count must be at least 1"));
    }
    let diag = vec![0.0; atoms + 1];
    let off: Vec<f64> = (0..atoms).map(|m| 0.5 * raising_element(atoms, m)).collect();
    symmetric_tridiagonal_eigen(&diag, &off).map_err(|_| Error::NoConvergence {
        atoms,
        excitations: 0,
    })
}

/// Finite rotation `d(angle) = exp(i angle S_x)` in the Dicke basis.
///
/// The entries are complex: `d_{M'M}` carries the factor `i^{|M'-M|}` times a
/// real number. The matrix is unitary and symmetric in its indices.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerDMatrix {
    pub atoms: usize,
    pub angle: f64,
    pub entries: DMatrix<Complex64>,
}

impl WignerDMatrix {
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }
}

pub fn wigner_d(atoms: usize, angle: f64) -> Result<WignerDMatrix> {
    let es = sx_eigensystem(atoms)?;
    Ok(WignerDMatrix {
        atoms,
        angle,
        entries: rotation_from_eigensystem(&es, angle),
    })
}

pub(crate) fn rotation_from_eigensystem(es: &Eigensystem, angle: f64) -> DMatrix<Complex64> {
    let dim = es.values.len();
    let phases: Vec<Complex64> = es
        .values
        .iter()
        .map(|&lam| Complex64::from_polar(1.0, angle * lam))
        .collect();
    DMatrix::from_fn(dim, dim, |r, c| {
        (0..dim)
            .map(|j| phases[j] * (es.vectors[(r, j)] * es.vectors[(c, j)]))
            .sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        a * b - b * a
    }

    #[test]
    fn spin_half() {
        let s = spin_matrices(1).unwrap();
        assert_eq!(s.s3[(0, 0)], -0.5);
        assert_eq!(s.s3[(1, 1)], 0.5);
        assert_eq!(s.s_plus[(1, 0)], 1.0);
        assert_eq!(s.s_plus.iter().filter(|v| **v != 0.0).count(), 1);
    }

    #[test]
    fn spin_one_ladder() {
        let s = spin_matrices(2).unwrap();
        assert!((s.s_plus[(1, 0)] - 2f64.sqrt()).abs() < 1e-15);
        assert!((s.s_plus[(2, 1)] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_atoms_rejected() {
        assert!(matches!(spin_matrices(0), Err(Error::InvalidParameter(_))));
        assert!(wigner_d(0, 0.1).is_err());
    }

    #[test]
    fn commutation_relations() {
        for a in 1..=12 {
            let s = spin_matrices(a).unwrap();
            let c1 = commutator(&s.s3, &s.s_plus) - &s.s_plus;
            let c2 = commutator(&s.s3, &s.s_minus) + &s.s_minus;
            let c3 = commutator(&s.s_plus, &s.s_minus) - &s.s3 * 2.0;
            assert!(c1.abs().max() <= 1e-12, "A={a}");
            assert!(c2.abs().max() <= 1e-12, "A={a}");
            assert!(c3.abs().max() <= 1e-12, "A={a}");
        }
    }

    #[test]
    fn spin_half_rotation_closed_form() {
        let theta = 0.83;
        let d = wigner_d(1, theta).unwrap();
        let c = (theta / 2.0).cos();
        let s = (theta / 2.0).sin();
        assert!((d.get(0, 0) - Complex64::new(c, 0.0)).norm() < 1e-14);
        assert!((d.get(1, 1) - Complex64::new(c, 0.0)).norm() < 1e-14);
        assert!((d.get(0, 1) - Complex64::new(0.0, s)).norm() < 1e-14);
        assert!((d.get(1, 0) - Complex64::new(0.0, s)).norm() < 1e-14);
    }

    #[test]
    fn zero_angle_is_identity() {
        for a in [1, 4, 9] {
            let d = wigner_d(a, 0.0).unwrap();
            let id = DMatrix::<Complex64>::identity(a + 1, a + 1);
            assert!((d.entries - id).iter().all(|z| z.norm() < 1e-13));
        }
    }

    #[test]
    fn symmetric_and_unitary() {
        let d = wigner_d(6, 1.3 * PI).unwrap();
        let n = 7;
        for r in 0..n {
            for c in 0..n {
                assert!((d.get(r, c) - d.get(c, r)).norm() < 1e-12);
            }
            let row: f64 = (0..n).map(|c| d.get(r, c).norm_sqr()).sum();
            assert!((row - 1.0).abs() < 1e-10);
        }
        let gram = d.entries.adjoint() * &d.entries;
        let id = DMatrix::<Complex64>::identity(n, n);
        assert!((gram - id).iter().all(|z| z.norm() < 1e-10));
    }
}
