//! Initial product states, their decomposition over excitation subspaces,
//! and exact or dispersive time evolution.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::algebra::sx_eigensystem;
use crate::blocks::{block_span, DispersiveBlock, Propagator};
use crate::error::{invalid, Error, Result};

/// Default tail probability left out by the Fock truncation.
pub const DEFAULT_TAIL: f64 = 1e-12;

fn ln_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    if k == 0 || k == n {
        return 0.0;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldKind {
    Coherent { mean_photons: f64, phase: f64 },
    Number { photons: usize },
    Custom,
}

/// Photon-number amplitudes `Q_n`, `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldWeights {
    pub kind: FieldKind,
    pub amplitudes: Vec<Complex64>,
}

impl FieldWeights {
    pub fn n_max(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn probability(&self, n: usize) -> f64 {
        self.amplitudes.get(n).map_or(0.0, |q| q.norm_sqr())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|q| q.norm_sqr()).sum()
    }

    /// Multiplies `Q_n` by `exp(i n theta)`.
    pub fn with_phase(mut self, theta: f64) -> Self {
        for (n, q) in self.amplitudes.iter_mut().enumerate() {
            *q *= Complex64::from_polar(1.0, n as f64 * theta);
        }
        if let FieldKind::Coherent { phase, .. } = &mut self.kind {
            *phase += theta;
        }
        self
    }

    pub fn custom(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(invalid("field amplitudes must not be empty"));
        }
        Ok(Self {
            kind: FieldKind::Custom,
            amplitudes,
        })
    }
}

/// Truncation for a Poisson distribution: smallest `n_max` whose tail is below
/// `tail`, but never less than `mean + 10 sqrt(mean + 1)`.
pub fn coherent_cutoff(mean: f64, tail: f64) -> usize {
    if mean == 0.0 {
        return 0;
    }
    let floor = (mean + 10.0 * (mean + 1.0).sqrt()).ceil() as usize;
    let bound = (mean + 40.0 * (mean + 1.0).sqrt() + 40.0).ceil() as usize;
    let probs: Vec<f64> = (0..=bound).map(|n| poisson_ln(mean, n).exp()).collect();
    // tails[n] = sum_{k > n} p_k, accumulated from the top
    let mut tails = vec![0.0; bound + 1];
    for n in (0..bound).rev() {
        tails[n] = tails[n + 1] + probs[n + 1];
    }
    let first = (0..=bound).find(|&n| tails[n] < tail).unwrap_or(bound);
    first.max(floor)
}

fn poisson_ln(mean: f64, n: usize) -> f64 {
    if n == 0 {
        -mean
    } else {
        -mean + n as f64 * mean.ln() - ln_factorial(n)
    }
}

/// Zero-phase coherent field `Q_n = sqrt(exp(-mean) mean^n / n!)`.
pub fn field_coherent(mean_photons: f64, tail: f64) -> Result<FieldWeights> {
    if !(mean_photons >= 0.0 && mean_photons.is_finite()) {
        return Err(invalid(format!("mean photon number must be >= 0, got {mean_photons}")));
    }
    if !(tail > 0.0 && tail < 1.0) {
        return Err(invalid(format!("truncation tail must lie in (0, 1), got {tail}")));
    }
    let n_max = coherent_cutoff(mean_photons, tail);
    let amplitudes = (0..=n_max)
        .map(|n| Complex64::new((0.5 * poisson_ln(mean_photons, n)).exp(), 0.0))
        .collect();
    Ok(FieldWeights {
        kind: FieldKind::Coherent {
            mean_photons,
            phase: 0.0,
        },
        amplitudes,
    })
}

/// Fock state `|k>`.
pub fn field_number(photons: usize) -> FieldWeights {
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); photons + 1];
    amplitudes[photons] = Complex64::new(1.0, 0.0);
    FieldWeights {
        kind: FieldKind::Number { photons },
        amplitudes,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AtomicKind {
    Coherent { theta: f64, azimuth: f64 },
    Dicke { excited: usize },
    Semiclassical { index: usize },
    Custom,
}

/// Atomic amplitudes `A_M` over the Dicke states `M = 0..=A`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicAmplitudes {
    pub kind: AtomicKind,
    pub amplitudes: Vec<Complex64>,
}

impl AtomicAmplitudes {
    pub fn atoms(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn custom(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(invalid("atomic amplitudes need at least two entries (A >= 1)"));
        }
        Ok(Self {
            kind: AtomicKind::Custom,
            amplitudes,
        })
    }
}

/// Atomic coherent state with `zeta = -tan(theta/2) exp(-i azimuth)`.
///
/// Written as `sqrt(binom) (-sin)^M cos^(A-M) exp(-i M azimuth)` so that
/// `theta = pi` needs no special case.
pub fn atomic_coherent(atoms: usize, theta: f64, azimuth: f64) -> Result<AtomicAmplitudes> {
    if atoms == 0 {
        return Err(invalid("atom count must be at least 1"));
    }
    let (s, c) = (theta / 2.0).sin_cos();
    let amplitudes = (0..=atoms)
        .map(|m| {
            let k = atoms - m;
            if (m > 0 && s == 0.0) || (k > 0 && c == 0.0) {
                return Complex64::new(0.0, 0.0);
            }
            let mut ln = 0.5 * ln_binomial(atoms, m);
            if m > 0 {
                ln += m as f64 * s.abs().ln();
            }
            if k > 0 {
                ln += k as f64 * c.abs().ln();
            }
            let odd = m % 2 == 1;
            let neg = odd ^ (s < 0.0 && odd) ^ (c < 0.0 && odd);
            let sign = if neg { -1.0 } else { 1.0 };
            Complex64::from_polar(sign * ln.exp(), -(m as f64) * azimuth)
        })
        .collect();
    Ok(AtomicAmplitudes {
        kind: AtomicKind::Coherent { theta, azimuth },
        amplitudes,
    })
}

/// Dicke state with `excited` atoms up.
pub fn atomic_dicke(atoms: usize, excited: usize) -> Result<AtomicAmplitudes> {
    if atoms == 0 || excited > atoms {
        return Err(invalid(format!("Dicke state needs 1 <= A and K <= A, got A={atoms}, K={excited}")));
    }
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); atoms + 1];
    amplitudes[excited] = Complex64::new(1.0, 0.0);
    Ok(AtomicAmplitudes {
        kind: AtomicKind::Dicke { excited },
        amplitudes,
    })
}

/// Eigenvector of `2 S_x` with eigenvalue `A - 2P`, leading component positive.
pub fn semiclassical_state(atoms: usize, index: usize) -> Result<AtomicAmplitudes> {
    if atoms == 0 || index > atoms {
        return Err(invalid(format!("semiclassical state needs 0 <= P <= A, got A={atoms}, P={index}")));
    }
    let es = sx_eigensystem(atoms)?;
    // ascending order puts Lambda_P = A - 2P at position A - P
    let col = atoms - index;
    let expected = atoms as f64 - 2.0 * index as f64;
    if (2.0 * es.values[col] - expected).abs() > 1e-8 * (1.0 + atoms as f64) {
        return Err(Error::Internal(format!(
            "2 S_x eigenvalue {} does not match {expected}",
            2.0 * es.values[col]
        )));
    }
    let amplitudes = (0..=atoms)
        .map(|m| Complex64::new(es.vectors[(m, col)], 0.0))
        .collect();
    Ok(AtomicAmplitudes {
        kind: AtomicKind::Semiclassical { index },
        amplitudes,
    })
}

/// Construction record carried by a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateOrigin {
    pub field: FieldKind,
    pub atomic: AtomicKind,
}

/// Pure state decomposed over the subspaces `N = 0..=N_top`; subspace `N`
/// stores `psi^N_M` for `M = 0..=min(N, A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub atoms: usize,
    pub n_max: usize,
    pub time: f64,
    pub subspaces: Vec<Vec<Complex64>>,
    /// `1 - norm` at construction (Fock truncation residual).
    pub norm_residual: f64,
    pub origin: StateOrigin,
}

impl JointState {
    /// Builds a state from explicit subspace amplitudes; lengths must match
    /// `min(N, A) + 1`.
    pub fn from_subspaces(atoms: usize, subspaces: Vec<Vec<Complex64>>, origin: StateOrigin) -> Result<Self> {
        if atoms == 0 || subspaces.is_empty() {
            return Err(invalid("state needs A >= 1 and at least one subspace"));
        }
        for (n, amps) in subspaces.iter().enumerate() {
            if amps.len() != block_span(n, atoms) + 1 {
                return Err(invalid(format!(
                    "subspace N={n} needs {} amplitudes, got {}",
                    block_span(n, atoms) + 1,
                    amps.len()
                )));
            }
        }
        let n_max = subspaces.len() - 1;
        let mut state = Self {
            atoms,
            n_max,
            time: 0.0,
            subspaces,
            norm_residual: 0.0,
            origin,
        };
        state.norm_residual = 1.0 - state.norm_sqr();
        Ok(state)
    }

    pub fn top_excitation(&self) -> usize {
        self.subspaces.len() - 1
    }

    pub fn subspace(&self, excitations: usize) -> Option<&[Complex64]> {
        self.subspaces.get(excitations).map(Vec::as_slice)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.subspaces.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    /// `P(N) = sum_M |psi^N_M|^2`.
    pub fn excitation_distribution(&self) -> Vec<f64> {
        self.subspaces
            .iter()
            .map(|amps| amps.iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }

    pub fn with_global_phase(&self, phase: f64) -> Self {
        let w = Complex64::from_polar(1.0, phase);
        let mut out = self.clone();
        out.subspaces.iter_mut().flatten().for_each(|z| *z *= w);
        out
    }
}

/// `psi^N_M = Q_{N-M} A_M` for `0 <= M <= min(N, A)` and `N - M <= n_max`.
pub fn assemble(field: &FieldWeights, atoms: &AtomicAmplitudes) -> JointState {
    let a = atoms.atoms();
    let n_max = field.n_max();
    let top = n_max + a;
    let subspaces = (0..=top)
        .map(|n| {
            (0..=block_span(n, a))
                .map(|m| {
                    let photons = n - m;
                    if photons <= n_max {
                        field.amplitudes[photons] * atoms.amplitudes[m]
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect()
        })
        .collect();
    let mut state = JointState {
        atoms: a,
        n_max,
        time: 0.0,
        subspaces,
        norm_residual: 0.0,
        origin: StateOrigin {
            field: field.kind,
            atomic: atoms.kind,
        },
    };
    state.norm_residual = 1.0 - state.norm_sqr();
    state
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvolutionMode {
    /// Resonant block evolution.
    Exact,
    /// Diagonal large-detuning evolution with the given detuning.
    Dispersive { detuning: f64 },
}

/// Evolves every subspace by `t` (same units as `1 / g`).
pub fn evolve(state: &JointState, t: f64, mode: EvolutionMode, propagator: &Propagator) -> Result<JointState> {
    if propagator.atoms() != state.atoms {
        return Err(invalid(format!(
            "propagator built for A={}, state has A={}",
            propagator.atoms(),
            state.atoms
        )));
    }
    let subspaces = state
        .subspaces
        .par_iter()
        .enumerate()
        .map(|(n, amps)| match mode {
            EvolutionMode::Exact => Ok(propagator.coeffs(n, t)?.apply(amps)),
            EvolutionMode::Dispersive { detuning } => {
                let block = DispersiveBlock::new(state.atoms, n, detuning, propagator.coupling())?;
                Ok(block
                    .coefficients(t)
                    .iter()
                    .zip(amps)
                    .map(|(c, z)| c * z)
                    .collect())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(JointState {
        subspaces,
        time: state.time + t,
        ..state.clone()
    })
}
