//! Interaction Hamiltonian restricted to the invariant subspaces of fixed
//! excitation number, its spectrum, and the resulting evolution matrices.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::tridiag::symmetric_tridiagonal_eigen;

/// `D = min(N, A)`; the block has dimension `D + 1`.
pub fn block_span(excitations: usize, atoms: usize) -> usize {
    excitations.min(atoms)
}

/// Resonant interaction block `H^(N) = g * tridiag(h)` with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBlock {
    pub atoms: usize,
    pub excitations: usize,
    pub coupling: f64,
    /// `h_M = sqrt((M+1)(N-M)(A-M))` for `M = 0..D`.
    pub offdiag: Vec<f64>,
}

impl SubspaceBlock {
    pub fn build(atoms: usize, excitations: usize, coupling: f64) -> Result<Self> {
        if atoms == 0 {
            return Err(invalid("atom count must be at least 1"));
        }
        if !(coupling > 0.0 && coupling.is_finite()) {
            return Err(invalid(format!("coupling must be positive, got {coupling}")));
        }
        let span = block_span(excitations, atoms);
        let offdiag = (0..span)
            .map(|m| (((m + 1) * (excitations - m) * (atoms - m)) as f64).sqrt())
            .collect();
        Ok(Self {
            atoms,
            excitations,
            coupling,
            offdiag,
        })
    }

    pub fn span(&self) -> usize {
        self.offdiag.len()
    }

    pub fn dim(&self) -> usize {
        self.offdiag.len() + 1
    }

    /// Dense Hamiltonian, including the coupling factor.
    pub fn hamiltonian(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut h = DMatrix::zeros(n, n);
        for (m, &hm) in self.offdiag.iter().enumerate() {
            h[(m, m + 1)] = self.coupling * hm;
            h[(m + 1, m)] = self.coupling * hm;
        }
        h
    }

    pub fn eigendecompose(self) -> Result<SolvedBlock> {
        let diag = vec![0.0; self.dim()];
        let off: Vec<f64> = self.offdiag.iter().map(|h| self.coupling * h).collect();
        let es = symmetric_tridiagonal_eigen(&diag, &off).map_err(|_| Error::NoConvergence {
            atoms: self.atoms,
            excitations: self.excitations,
        })?;
        Ok(SolvedBlock {
            block: self,
            eigenvalues: es.values,
            eigenvectors: es.vectors,
        })
    }
}

/// Block together with its ascending spectrum and orthogonal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SolvedBlock {
    pub block: SubspaceBlock,
    pub eigenvalues: Vec<f64>,
    /// Columns are eigenvectors, rows are labelled by `M`.
    pub eigenvectors: DMatrix<f64>,
}

impl SolvedBlock {
    pub fn dim(&self) -> usize {
        self.block.dim()
    }

    /// Largest `|eps_J + eps_{D-J}|` over the spectrum.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.eigenvalues.len();
        (0..n)
            .map(|j| (self.eigenvalues[j] + self.eigenvalues[n - 1 - j]).abs())
            .fold(0.0, f64::max)
    }

    /// `C_{M'M}(t) = sum_J U_{MJ} U_{M'J} exp(-i eps_J t)`.
    pub fn evolution_coeffs(&self, t: f64) -> EvolutionCoeffs {
        let n = self.dim();
        let u = &self.eigenvectors;
        let phases: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|&e| Complex64::from_polar(1.0, -e * t))
            .collect();
        let mut c = DMatrix::<Complex64>::zeros(n, n);
        for row in 0..n {
            for col in row..n {
                let v: Complex64 = (0..n).map(|j| phases[j] * (u[(row, j)] * u[(col, j)])).sum();
                c[(row, col)] = v;
                c[(col, row)] = v;
            }
        }
        EvolutionCoeffs {
            excitations: self.block.excitations,
            time: t,
            matrix: c,
        }
    }
}

/// Matrix elements of the block evolution operator at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionCoeffs {
    pub excitations: usize,
    pub time: f64,
    /// Entry `(M', M)` is `<N-M', M'| exp(-i H t) |N-M, M>`.
    pub matrix: DMatrix<Complex64>,
}

impl EvolutionCoeffs {
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    /// `psi'_{M'} = sum_M C_{M'M} psi_M`.
    pub fn apply(&self, amplitudes: &[Complex64]) -> Vec<Complex64> {
        let n = self.matrix.nrows();
        debug_assert_eq!(amplitudes.len(), n);
        (0..n)
            .map(|r| (0..n).map(|c| self.matrix[(r, c)] * amplitudes[c]).sum())
            .collect()
    }
}

pub fn build_block(atoms: usize, excitations: usize, coupling: f64) -> Result<SubspaceBlock> {
    SubspaceBlock::build(atoms, excitations, coupling)
}

/// Diagonal evolution generated by the large-detuning effective Hamiltonian
/// `Delta S_3 + lambda (2 a^dag a + 1) S_3 + lambda (C - S_3^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersiveBlock {
    pub atoms: usize,
    pub excitations: usize,
    pub detuning: f64,
    pub coupling: f64,
    /// `lambda = g^2 / Delta`.
    pub lambda: f64,
}

impl DispersiveBlock {
    pub fn new(atoms: usize, excitations: usize, detuning: f64, coupling: f64) -> Result<Self> {
        if atoms == 0 {
            return Err(invalid("atom count must be at least 1"));
        }
        if detuning == 0.0 || !detuning.is_finite() {
            return Err(invalid("dispersive evolution needs a nonzero finite detuning"));
        }
        if !(coupling > 0.0 && coupling.is_finite()) {
            return Err(invalid(format!("coupling must be positive, got {coupling}")));
        }
        Ok(Self {
            atoms,
            excitations,
            detuning,
            coupling,
            lambda: coupling * coupling / detuning,
        })
    }

    pub fn span(&self) -> usize {
        block_span(self.excitations, self.atoms)
    }

    /// `A/2 (A/2 + 1)`.
    pub fn casimir(&self) -> f64 {
        let j = self.atoms as f64 / 2.0;
        j * (j + 1.0)
    }

    /// Effective-Hamiltonian eigenvalue on `|N-M, M>`.
    pub fn energy(&self, m: usize) -> f64 {
        let s3 = m as f64 - self.atoms as f64 / 2.0;
        let photons = (self.excitations - m) as f64;
        self.detuning * s3
            + self.lambda * (2.0 * photons + 1.0) * s3
            + self.lambda * (self.casimir() - s3 * s3)
    }

    /// `f_M^N = 2 N M lambda + [Delta + lambda (2A + 1)] M - 3 lambda M^2`;
    /// differs from [`energy`](Self::energy) by an `M`-independent constant.
    pub fn reduced_phase(&self, m: usize) -> f64 {
        let (n, m, a) = (self.excitations as f64, m as f64, self.atoms as f64);
        2.0 * n * m * self.lambda + (self.detuning + self.lambda * (2.0 * a + 1.0)) * m
            - 3.0 * self.lambda * m * m
    }

    /// Diagonal entries `C_{MM}(t) = exp(-i t E_M)`.
    pub fn coefficients(&self, t: f64) -> Vec<Complex64> {
        (0..=self.span())
            .map(|m| Complex64::from_polar(1.0, -t * self.energy(m)))
            .collect()
    }

    /// Diagonal phases built from the reduced phase `f_M^N`.
    pub fn reduced_coefficients(&self, t: f64) -> Vec<Complex64> {
        (0..=self.span())
            .map(|m| Complex64::from_polar(1.0, -t * self.reduced_phase(m)))
            .collect()
    }
}

pub fn dispersive_coeffs(
    atoms: usize,
    excitations: usize,
    detuning: f64,
    coupling: f64,
    t: f64,
) -> Result<(DispersiveBlock, Vec<Complex64>)> {
    let block = DispersiveBlock::new(atoms, excitations, detuning, coupling)?;
    let c = block.coefficients(t);
    Ok((block, c))
}

/// Solved blocks for one `(A, g)` pair, built on demand and shared across
/// threads, plus a memo of evolution matrices keyed by `(N, t)`.
#[derive(Debug)]
pub struct Propagator {
    atoms: usize,
    coupling: f64,
    blocks: RwLock<HashMap<usize, Arc<SolvedBlock>>>,
    coeffs: Mutex<HashMap<(usize, u64), Arc<EvolutionCoeffs>>>,
    memoize: bool,
}

impl Propagator {
    pub fn new(atoms: usize, coupling: f64) -> Result<Self> {
        // validates the parameters once
        SubspaceBlock::build(atoms, 0, coupling)?;
        Ok(Self {
            atoms,
            coupling,
            blocks: RwLock::new(HashMap::new()),
            coeffs: Mutex::new(HashMap::new()),
            memoize: false,
        })
    }

    /// Keeps every evolution matrix computed so far, for scans that revisit
    /// the same time grid.
    pub fn with_memo(mut self) -> Self {
        self.memoize = true;
        self
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn block(&self, excitations: usize) -> Result<Arc<SolvedBlock>> {
        if let Some(b) = self.blocks.read().expect("block cache poisoned").get(&excitations) {
            return Ok(Arc::clone(b));
        }
        let solved = Arc::new(SubspaceBlock::build(self.atoms, excitations, self.coupling)?.eigendecompose()?);
        let mut cache = self.blocks.write().expect("block cache poisoned");
        Ok(Arc::clone(cache.entry(excitations).or_insert(solved)))
    }

    /// Solves every block up to `max_excitations` in parallel.
    pub fn prepare(&self, max_excitations: usize) -> Result<()> {
        (0..=max_excitations)
            .into_par_iter()
            .try_for_each(|n| self.block(n).map(|_| ()))
    }

    pub fn coeffs(&self, excitations: usize, t: f64) -> Result<Arc<EvolutionCoeffs>> {
        if !self.memoize {
            return Ok(Arc::new(self.block(excitations)?.evolution_coeffs(t)));
        }
        let key = (excitations, t.to_bits());
        if let Some(c) = self.coeffs.lock().expect("coefficient memo poisoned").get(&key) {
            return Ok(Arc::clone(c));
        }
        let c = Arc::new(self.block(excitations)?.evolution_coeffs(t));
        let mut memo = self.coeffs.lock().expect("coefficient memo poisoned");
        Ok(Arc::clone(memo.entry(key).or_insert(c)))
    }

    pub fn clear_memo(&self) {
        self.coeffs.lock().expect("coefficient memo poisoned").clear();
    }
}

/// One line of the spectrum dump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRow {
    pub excitations: usize,
    pub index: usize,
    pub eigenvalue: f64,
    pub symmetry_residual: f64,
}

pub fn spectrum_table(
    atoms: usize,
    coupling: f64,
    excitations: std::ops::RangeInclusive<usize>,
) -> Result<Vec<SpectrumRow>> {
    let solved: Vec<SolvedBlock> = excitations
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|n| SubspaceBlock::build(atoms, n, coupling)?.eigendecompose())
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for b in &solved {
        let n = b.eigenvalues.len();
        for (j, &eps) in b.eigenvalues.iter().enumerate() {
            rows.push(SpectrumRow {
                excitations: b.block.excitations,
                index: j,
                eigenvalue: eps,
                symmetry_residual: (eps + b.eigenvalues[n - 1 - j]).abs(),
            });
        }
    }
    Ok(rows)
}
