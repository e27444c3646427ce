//! Relative-phase eigenbasis of each excitation subspace, the continuous
//! relative-phase density and its circular moments.
//!
//! Sign convention: the density is
//! `P(N, phi) = (2 pi)^-1 |sum_M psi^N_M exp(i M phi)|^2`, and the lattice
//! eigenvectors are `(D+1)^-1/2 sum_M exp(-i M phi_r) |N-M, M>`. With these
//! choices the cyclic shift `E |N-M, M> = |N-M-1, M+1>` has eigenvalue
//! `exp(i phi_r)` and `<E> = integral exp(i phi) P(phi) dphi` up to the
//! wraparound term.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::blocks::block_span;
use crate::error::{Error, Result};
use crate::states::JointState;

/// Default number of grid points over the 2 pi window (0.5 degree spacing).
pub const DEFAULT_GRID: usize = 720;
/// Largest Fock truncation accepted by [`povm_crosscheck`].
pub const POVM_MAX_NMAX: usize = 60;

/// Lattice phase states of one excitation subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseBasis {
    pub excitations: usize,
    pub span: usize,
    pub reference: f64,
    /// `phi_r = phi_0 + 2 pi r / (D + 1)`.
    pub eigenvalues: Vec<f64>,
    /// Column `r` holds `|phi_r>` in the `M` basis.
    pub vectors: DMatrix<Complex64>,
}

impl PhaseBasis {
    pub fn dim(&self) -> usize {
        self.span + 1
    }

    pub fn vector(&self, r: usize) -> Vec<Complex64> {
        self.vectors.column(r).iter().copied().collect()
    }
}

pub fn phase_basis(excitations: usize, atoms: usize, reference: f64) -> PhaseBasis {
    let span = block_span(excitations, atoms);
    let dim = span + 1;
    let eigenvalues: Vec<f64> = (0..dim).map(|r| reference + TAU * r as f64 / dim as f64).collect();
    let scale = 1.0 / (dim as f64).sqrt();
    let vectors = DMatrix::from_fn(dim, dim, |m, r| Complex64::from_polar(scale, -(m as f64) * eigenvalues[r]));
    PhaseBasis {
        excitations,
        span,
        reference,
        eigenvalues,
        vectors,
    }
}

/// Cyclic ladder `E`: `|N-M, M> -> |N-M-1, M+1>`, `|N-D, D> -> |N, 0>`.
pub fn apply_e(state: &JointState) -> JointState {
    let mut out = state.clone();
    for amps in &mut out.subspaces {
        amps.rotate_right(1);
    }
    out
}

/// Probabilities `|<phi_r|psi^N>|^2` on the lattice of subspace `N`.
pub fn lattice_distribution(state: &JointState, excitations: usize, reference: f64) -> Vec<f64> {
    let Some(amps) = state.subspace(excitations) else {
        return Vec::new();
    };
    let basis = phase_basis(excitations, state.atoms, reference);
    (0..basis.dim())
        .map(|r| {
            basis
                .vectors
                .column(r)
                .iter()
                .zip(amps)
                .map(|(v, z)| v.conj() * z)
                .sum::<Complex64>()
                .norm_sqr()
        })
        .collect()
}

fn subspace_density(amps: &[Complex64], z: Complex64) -> f64 {
    // Horner in exp(i phi)
    let mut acc = Complex64::new(0.0, 0.0);
    for a in amps.iter().rev() {
        acc = acc * z + a;
    }
    acc.norm_sqr() / TAU
}

/// Joint density `P(N, phi)`; zero outside the state's support.
pub fn joint_phase_distribution(state: &JointState, excitations: usize, phi: f64) -> f64 {
    state
        .subspace(excitations)
        .map_or(0.0, |amps| subspace_density(amps, Complex64::from_polar(1.0, phi)))
}

/// Uniform grid over `[phi_0 - pi, phi_0 + pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseGrid {
    pub points: usize,
    pub reference: f64,
}

impl PhaseGrid {
    pub fn new(points: usize, reference: f64) -> Self {
        assert!(points > 0, "phase grid needs at least one point");
        Self { points, reference }
    }

    pub fn step(&self) -> f64 {
        TAU / self.points as f64
    }

    pub fn phi(&self, k: usize) -> f64 {
        self.reference - PI + self.step() * k as f64
    }

    pub fn phis(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.phi(k)).collect()
    }

    /// Reduces an angle into the grid window.
    pub fn wrap(&self, phi: f64) -> f64 {
        self.reference - PI + (phi - self.reference + PI).rem_euclid(TAU)
    }

    /// Index of the grid point nearest to `phi` (mod 2 pi).
    pub fn nearest(&self, phi: f64) -> usize {
        let x = (self.wrap(phi) - (self.reference - PI)) / self.step();
        (x.round() as usize) % self.points
    }

    /// Cyclic distance in grid cells between two indices.
    pub fn cell_distance(&self, a: usize, b: usize) -> usize {
        let d = a.abs_diff(b);
        d.min(self.points - d)
    }
}

impl Default for PhaseGrid {
    fn default() -> Self {
        Self::new(DEFAULT_GRID, 0.0)
    }
}

/// Sampled relative-phase density.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDistribution {
    pub grid: PhaseGrid,
    pub phi: Vec<f64>,
    pub values: Vec<f64>,
    pub time: f64,
    /// `|sum_k P(phi_k) dphi - 1|`.
    pub normalization_residual: f64,
}

impl PhaseDistribution {
    pub fn from_values(grid: PhaseGrid, values: Vec<f64>, time: f64) -> Self {
        let integral = periodic_integral(&values, grid.step());
        Self {
            grid,
            phi: grid.phis(),
            values,
            time,
            normalization_residual: (integral - 1.0).abs(),
        }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn integral(&self) -> f64 {
        periodic_integral(&self.values, self.grid.step())
    }

    /// `integral exp(i nu phi) P(phi) dphi` by the periodic trapezoid rule.
    pub fn circular_moment(&self, nu: i64) -> Complex64 {
        let terms: Vec<Complex64> = self
            .phi
            .iter()
            .zip(&self.values)
            .map(|(&phi, &p)| Complex64::from_polar(p, nu as f64 * phi))
            .collect();
        let re = neumaier(terms.iter().map(|z| z.re));
        let im = neumaier(terms.iter().map(|z| z.im));
        Complex64::new(re, im) * self.grid.step()
    }

    /// Indices of strict cyclic local maxima (ties resolved toward the left).
    pub fn local_maxima(&self) -> Vec<usize> {
        let g = self.values.len();
        (0..g)
            .filter(|&k| {
                let prev = self.values[(k + g - 1) % g];
                let next = self.values[(k + 1) % g];
                self.values[k] > prev && self.values[k] >= next
            })
            .collect()
    }

    pub fn max_abs_diff(&self, other: &[f64]) -> f64 {
        self.values
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn periodic_integral(values: &[f64], step: f64) -> f64 {
    neumaier(values.iter().copied()) * step
}

/// Compensated summation.
pub fn neumaier(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `P(phi) = sum_N P(N, phi)` on the grid.
pub fn phase_distribution(state: &JointState, grid: PhaseGrid) -> PhaseDistribution {
    let phis = grid.phis();
    let values = phis
        .par_iter()
        .map(|&phi| {
            let z = Complex64::from_polar(1.0, phi);
            neumaier(state.subspaces.iter().map(|amps| subspace_density(amps, z)))
        })
        .collect();
    PhaseDistribution::from_values(grid, values, state.time)
}

pub fn excitation_distribution(state: &JointState) -> Vec<f64> {
    state.excitation_distribution()
}

/// Which shift operator a circular moment refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MomentConvention {
    /// Moments of the continuous density: `sum_M psi*_{M+nu} psi_M` without
    /// wraparound. Equals the quadrature of `exp(i nu phi) P(phi)`.
    #[default]
    Continuum,
    /// Expectation of `E^nu` with the cyclic closure of each subspace, i.e.
    /// `sum_r exp(i nu phi_r) |<phi_r|psi>|^2` for `phi_0 = 0`.
    Lattice,
}

/// `<exp(i nu Phi)>` in shift-overlap form.
pub fn circular_moment(state: &JointState, nu: usize, convention: MomentConvention) -> Complex64 {
    let mut re = Vec::new();
    let mut im = Vec::new();
    for amps in &state.subspaces {
        let dim = amps.len();
        for m in 0..dim {
            let shifted = match convention {
                MomentConvention::Continuum if m + nu < dim => m + nu,
                MomentConvention::Continuum => continue,
                MomentConvention::Lattice => (m + nu) % dim,
            };
            let z = amps[shifted].conj() * amps[m];
            re.push(z.re);
            im.push(z.im);
        }
    }
    Complex64::new(neumaier(re), neumaier(im))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentKind {
    Sin,
    Cos,
    Circular(usize),
}

/// `<sin Phi>`, `<cos Phi>` or `<exp(i nu Phi)>` of the continuous density.
pub fn phase_moment(state: &JointState, kind: MomentKind) -> Complex64 {
    match kind {
        MomentKind::Sin => Complex64::new(circular_moment(state, 1, MomentConvention::Continuum).im, 0.0),
        MomentKind::Cos => Complex64::new(circular_moment(state, 1, MomentConvention::Continuum).re, 0.0),
        MomentKind::Circular(nu) => circular_moment(state, nu, MomentConvention::Continuum),
    }
}

/// Relative-phase density obtained from the product of the field and atomic
/// Susskind-Glogower phase POVMs, marginalized over the phase sum by
/// quadrature: `P(phi) = integral dtheta P(theta_a = theta, theta_f = theta + phi)`.
///
/// Independent of [`phase_distribution`]: it works from the photon-number /
/// Dicke amplitude table and never groups terms by excitation number.
pub fn povm_crosscheck(state: &JointState, grid: PhaseGrid) -> Result<PhaseDistribution> {
    if state.n_max > POVM_MAX_NMAX {
        return Err(Error::SupportTooLarge {
            n_max: state.n_max,
            limit: POVM_MAX_NMAX,
        });
    }
    let atoms = state.atoms;
    let top = state.top_excitation();
    // amplitude table psi(n, M) with n the photon number
    let mut table = vec![vec![Complex64::new(0.0, 0.0); atoms + 1]; top + 1];
    for (n_exc, amps) in state.subspaces.iter().enumerate() {
        for (m, z) in amps.iter().enumerate() {
            table[n_exc - m][m] = *z;
        }
    }
    // trapezoid in theta is exact for trigonometric polynomials of degree < nodes
    let nodes = 2 * top + 2;
    let dtheta = TAU / nodes as f64;
    let norm = 1.0 / (TAU * TAU);

    let values = grid
        .phis()
        .par_iter()
        .map(|&phi| {
            let samples = (0..nodes).map(|k| {
                let theta_a = dtheta * k as f64;
                let theta_f = theta_a + phi;
                let wa = Complex64::from_polar(1.0, -theta_a);
                let wf = Complex64::from_polar(1.0, -theta_f);
                // <theta_a, theta_f | Psi> up to the 1/(2 pi) factor
                let mut amp = Complex64::new(0.0, 0.0);
                let mut field_phase = Complex64::new(1.0, 0.0);
                for row in &table {
                    let mut atom_sum = Complex64::new(0.0, 0.0);
                    for z in row.iter().rev() {
                        atom_sum = atom_sum * wa + z;
                    }
                    amp += field_phase * atom_sum;
                    field_phase *= wf;
                }
                amp.norm_sqr() * norm
            });
            neumaier(samples) * dtheta
        })
        .collect();
    Ok(PhaseDistribution::from_values(grid, values, state.time))
}
