//! Closed-form limits of the relative-phase density, each evaluable on its
//! own and comparable point by point with the exact engine.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::algebra::{rotation_from_eigensystem, sx_eigensystem, wigner_d, WignerDMatrix};
use crate::blocks::{block_span, DispersiveBlock, EvolutionCoeffs, SubspaceBlock};
use crate::error::{invalid, Error, Result};
use crate::phase::{neumaier, PhaseDistribution, PhaseGrid};
use crate::states::{semiclassical_state, AtomicAmplitudes, FieldWeights};

fn sqrt_binomial(n: usize, k: usize) -> f64 {
    if k == 0 || k == n {
        return 1.0;
    }
    (0.5 * (ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0))).exp()
}

/// Difference `phi - center` reduced into `[-pi, pi)`.
fn angular_offset(phi: f64, center: f64) -> f64 {
    (phi - center + PI).rem_euclid(TAU) - PI
}

fn density(amps: impl DoubleEndedIterator<Item = Complex64>, phi: f64) -> f64 {
    let z = Complex64::from_polar(1.0, phi);
    let mut acc = Complex64::new(0.0, 0.0);
    for a in amps.rev() {
        acc = acc * z + a;
    }
    acc.norm_sqr() / TAU
}

/// Weak-field density keeping only the `N = 0` and `N = 1` subspaces:
/// `(2 pi)^-1 {1 + n [|C00|^2 + |C01|^2 + 2 Re(C00* C01 e^{i phi})]} e^{-n}`.
pub fn weak_field(mean_photons: f64, phi: f64, coeffs: &EvolutionCoeffs) -> f64 {
    let c00 = coeffs.get(0, 0);
    let c01 = coeffs.get(0, 1);
    let cross = c00.conj() * c01 * Complex64::from_polar(1.0, phi);
    (1.0 + mean_photons * (c00.norm_sqr() + c01.norm_sqr() + 2.0 * cross.re)) * (-mean_photons).exp() / TAU
}

/// `Omega_N = 2 g sqrt(N - A/2 + 1/2)`.
pub fn rabi_frequency(excitations: usize, atoms: usize, coupling: f64) -> Result<f64> {
    let radicand = excitations as f64 - atoms as f64 / 2.0 + 0.5;
    if radicand < 0.0 {
        return Err(Error::Regime(format!(
            "Rabi frequency undefined for N={excitations} < (A-1)/2 with A={atoms}"
        )));
    }
    Ok(2.0 * coupling * radicand.sqrt())
}

/// Strong-field evolution matrix `d(-Omega_N t)` for a block with `N >= A`.
pub fn strong_field_coeffs(atoms: usize, excitations: usize, coupling: f64, t: f64) -> Result<WignerDMatrix> {
    let omega = rabi_frequency(excitations, atoms, coupling)?;
    wigner_d(atoms, -omega * t)
}

/// Strong-field density for initially unexcited atoms,
/// `(2 pi)^-1 sum_N Q_N^2 |sum_M sqrt(binom) cos^(A-M) sin^M e^{i M (phi - pi/2)}|^2`
/// with half-angle `Omega_N t / 2`. Subspaces below `(A-1)/2` use `Omega = 0`.
pub fn strong_field_distribution(atoms: usize, field: &FieldWeights, coupling: f64, t: f64, phi: f64) -> f64 {
    let binom: Vec<f64> = (0..=atoms).map(|m| sqrt_binomial(atoms, m)).collect();
    strong_field_point(atoms, field, coupling, t, phi, &binom)
}

fn strong_field_point(atoms: usize, field: &FieldWeights, coupling: f64, t: f64, phi: f64, binom: &[f64]) -> f64 {
    let rotor = Complex64::from_polar(1.0, phi - FRAC_PI_2);
    let terms = field.amplitudes.iter().enumerate().map(|(n, q)| {
        let weight = q.norm_sqr();
        if weight == 0.0 {
            return 0.0;
        }
        let omega = rabi_frequency(n, atoms, coupling).unwrap_or(0.0);
        let (s, c) = (0.5 * omega * t).sin_cos();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut rot = Complex64::new(1.0, 0.0);
        for (m, b) in binom.iter().enumerate() {
            acc += rot * (b * c.powi((atoms - m) as i32) * s.powi(m as i32));
            rot *= rotor;
        }
        weight * acc.norm_sqr()
    });
    neumaier(terms) / TAU
}

/// Single-subspace Gaussian envelope `sqrt(A / 2 pi) exp[-(A/2)(phi - pi/2 + delta)^2]`.
pub fn strong_field_gaussian(atoms: usize, phi: f64, shift: f64) -> f64 {
    let a = atoms as f64;
    let x = angular_offset(phi, FRAC_PI_2 - shift);
    (a / TAU).sqrt() * (-0.5 * a * x * x).exp()
}

/// Time-independent density of a factorized state, normalized over the
/// continuous window: `(2 pi)^-1 |sum_M <M|P> e^{i M phi}|^2`.
pub fn factorized_distribution(atoms: usize, index: usize, phi: f64) -> Result<f64> {
    let state = semiclassical_state(atoms, index)?;
    Ok(density(state.amplitudes.into_iter(), phi))
}

/// `sqrt(A / 2 pi) exp(-A phi^2 / 2)`.
pub fn factorized_gaussian(atoms: usize, phi: f64) -> f64 {
    let a = atoms as f64;
    let x = angular_offset(phi, 0.0);
    (a / TAU).sqrt() * (-0.5 * a * x * x).exp()
}

/// Large-detuning density evaluated directly from the reduced phases `f_M^N`:
/// `(2 pi)^-1 sum_N |sum_M Q_{N-M} A_M e^{-i f_M^N t} e^{i M phi}|^2`.
pub fn dispersive_distribution(
    field: &FieldWeights,
    atomic: &AtomicAmplitudes,
    detuning: f64,
    coupling: f64,
    t: f64,
    grid: PhaseGrid,
) -> Result<PhaseDistribution> {
    let subspaces = dispersive_amplitudes(field, atomic, detuning, coupling, t)?;
    let values = grid
        .phis()
        .iter()
        .map(|&phi| neumaier(subspaces.iter().map(|amps| density(amps.iter().copied(), phi))))
        .collect();
    Ok(PhaseDistribution::from_values(grid, values, t))
}

fn dispersive_amplitudes(
    field: &FieldWeights,
    atomic: &AtomicAmplitudes,
    detuning: f64,
    coupling: f64,
    t: f64,
) -> Result<Vec<Vec<Complex64>>> {
    let atoms = atomic.atoms();
    let n_max = field.n_max();
    (0..=n_max + atoms)
        .map(|n| {
            let block = DispersiveBlock::new(atoms, n, detuning, coupling)?;
            Ok((0..=block_span(n, atoms))
                .map(|m| {
                    let q = field.amplitudes.get(n - m).copied().unwrap_or_default();
                    q * atomic.amplitudes[m] * Complex64::from_polar(1.0, -block.reduced_phase(m) * t)
                })
                .collect())
        })
        .collect()
}

/// Centers of the two cat humps at `lambda t = pi/6`, before reduction mod 2 pi:
/// `pi phi_n / (3 lambda)` and that value minus pi, with
/// `phi_n = 2 n lambda + A + lambda (2A + 1)`.
pub fn cat_centers(atoms: usize, mean_photons: f64, lambda: f64) -> (f64, f64) {
    let a = atoms as f64;
    let phi_n = 2.0 * mean_photons * lambda + a + lambda * (2.0 * a + 1.0);
    let first = PI * phi_n / (3.0 * lambda);
    (first, first - PI)
}

/// Two-Gaussian cat prediction
/// `sqrt(A / 8 pi) {exp(-[phi - c]^2 A/2) + exp(-[phi + pi - c]^2 A/2)}`.
pub fn cat_prediction(atoms: usize, mean_photons: f64, lambda: f64, phi: f64) -> f64 {
    let a = atoms as f64;
    let (c1, c2) = cat_centers(atoms, mean_photons, lambda);
    let x1 = angular_offset(phi, c1);
    let x2 = angular_offset(phi, c2);
    (a / (8.0 * PI)).sqrt() * ((-0.5 * a * x1 * x1).exp() + (-0.5 * a * x2 * x2).exp())
}

/// Which analytic limit an [`ApproxPrediction`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Weak,
    StrongD,
    StrongTan,
    StrongGaussian,
    Factorized,
    FactorizedGaussian,
    Dispersive,
    CatGaussian,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Weak => "weak",
            Regime::StrongD => "strong-d",
            Regime::StrongTan => "strong-tan",
            Regime::StrongGaussian => "strong-gaussian",
            Regime::Factorized => "factorized",
            Regime::FactorizedGaussian => "factorized-gaussian",
            Regime::Dispersive => "dispersive",
            Regime::CatGaussian => "cat-gaussian",
        }
    }
}

/// An analytic limit bundled with its parameters, evaluable at `(phi, t)`.
#[derive(Debug, Clone)]
pub enum ApproxPrediction {
    Weak {
        atoms: usize,
        mean_photons: f64,
        coupling: f64,
    },
    /// Exact block coefficients replaced by `d(-Omega_N t)`; subspaces with
    /// `N < A` keep the leading `(N+1) x (N+1)` corner.
    StrongD {
        field: FieldWeights,
        atomic: AtomicAmplitudes,
        coupling: f64,
    },
    StrongTan {
        atoms: usize,
        field: FieldWeights,
        coupling: f64,
    },
    StrongGaussian {
        atoms: usize,
        shift: f64,
    },
    Factorized {
        atomic: AtomicAmplitudes,
    },
    FactorizedGaussian {
        atoms: usize,
    },
    Dispersive {
        field: FieldWeights,
        atomic: AtomicAmplitudes,
        detuning: f64,
        coupling: f64,
    },
    CatGaussian {
        atoms: usize,
        mean_photons: f64,
        lambda: f64,
    },
}

impl ApproxPrediction {
    pub fn regime(&self) -> Regime {
        match self {
            ApproxPrediction::Weak { .. } => Regime::Weak,
            ApproxPrediction::StrongD { .. } => Regime::StrongD,
            ApproxPrediction::StrongTan { .. } => Regime::StrongTan,
            ApproxPrediction::StrongGaussian { .. } => Regime::StrongGaussian,
            ApproxPrediction::Factorized { .. } => Regime::Factorized,
            ApproxPrediction::FactorizedGaussian { .. } => Regime::FactorizedGaussian,
            ApproxPrediction::Dispersive { .. } => Regime::Dispersive,
            ApproxPrediction::CatGaussian { .. } => Regime::CatGaussian,
        }
    }

    pub fn evaluate(&self, phi: f64, t: f64) -> Result<f64> {
        Ok(match self {
            ApproxPrediction::Weak {
                atoms,
                mean_photons,
                coupling,
            } => {
                let block = SubspaceBlock::build(*atoms, 1, *coupling)?.eigendecompose()?;
                weak_field(*mean_photons, phi, &block.evolution_coeffs(t))
            }
            ApproxPrediction::StrongD {
                field,
                atomic,
                coupling,
            } => {
                let subspaces = strong_d_amplitudes(field, atomic, *coupling, t)?;
                neumaier(subspaces.iter().map(|amps| density(amps.iter().copied(), phi)))
            }
            ApproxPrediction::StrongTan { atoms, field, coupling } => {
                strong_field_distribution(*atoms, field, *coupling, t, phi)
            }
            ApproxPrediction::StrongGaussian { atoms, shift } => strong_field_gaussian(*atoms, phi, *shift),
            ApproxPrediction::Factorized { atomic } => density(atomic.amplitudes.iter().copied(), phi),
            ApproxPrediction::FactorizedGaussian { atoms } => factorized_gaussian(*atoms, phi),
            ApproxPrediction::Dispersive {
                field,
                atomic,
                detuning,
                coupling,
            } => {
                let subspaces = dispersive_amplitudes(field, atomic, *detuning, *coupling, t)?;
                neumaier(subspaces.iter().map(|amps| density(amps.iter().copied(), phi)))
            }
            ApproxPrediction::CatGaussian {
                atoms,
                mean_photons,
                lambda,
            } => cat_prediction(*atoms, *mean_photons, *lambda, phi),
        })
    }

    /// Evaluates the prediction on a grid, reusing the per-time work.
    pub fn profile(&self, grid: PhaseGrid, t: f64) -> Result<PhaseDistribution> {
        let phis = grid.phis();
        let values = match self {
            ApproxPrediction::Weak {
                atoms,
                mean_photons,
                coupling,
            } => {
                let coeffs = SubspaceBlock::build(*atoms, 1, *coupling)?.eigendecompose()?.evolution_coeffs(t);
                phis.iter().map(|&phi| weak_field(*mean_photons, phi, &coeffs)).collect()
            }
            ApproxPrediction::StrongD {
                field,
                atomic,
                coupling,
            } => {
                let subspaces = strong_d_amplitudes(field, atomic, *coupling, t)?;
                phis.iter()
                    .map(|&phi| neumaier(subspaces.iter().map(|amps| density(amps.iter().copied(), phi))))
                    .collect()
            }
            ApproxPrediction::StrongTan { atoms, field, coupling } => {
                let binom: Vec<f64> = (0..=*atoms).map(|m| sqrt_binomial(*atoms, m)).collect();
                phis.iter()
                    .map(|&phi| strong_field_point(*atoms, field, *coupling, t, phi, &binom))
                    .collect()
            }
            ApproxPrediction::Dispersive {
                field,
                atomic,
                detuning,
                coupling,
            } => return dispersive_distribution(field, atomic, *detuning, *coupling, t, grid),
            _ => phis
                .iter()
                .map(|&phi| self.evaluate(phi, t))
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(PhaseDistribution::from_values(grid, values, t))
    }
}

fn strong_d_amplitudes(
    field: &FieldWeights,
    atomic: &AtomicAmplitudes,
    coupling: f64,
    t: f64,
) -> Result<Vec<Vec<Complex64>>> {
    let atoms = atomic.atoms();
    let es = sx_eigensystem(atoms)?;
    (0..=field.n_max() + atoms)
        .map(|n| {
            let span = block_span(n, atoms);
            let omega = rabi_frequency(n, atoms, coupling).unwrap_or(0.0);
            let d = rotation_from_eigensystem(&es, -omega * t);
            let initial: Vec<Complex64> = (0..=span)
                .map(|m| field.amplitudes.get(n - m).copied().unwrap_or_default() * atomic.amplitudes[m])
                .collect();
            Ok((0..=span)
                .map(|row| (0..=span).map(|col| d[(row, col)] * initial[col]).sum())
                .collect())
        })
        .collect()
}

/// One line of a comparison report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub time: f64,
    pub phi: f64,
    pub exact: f64,
    pub approx: f64,
    pub abs_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub regime: Regime,
    pub rows: Vec<ComparisonRow>,
    pub max_error: f64,
    pub mean_error: f64,
}

impl ComparisonReport {
    pub fn new(regime: Regime) -> Self {
        Self {
            regime,
            rows: Vec::new(),
            max_error: 0.0,
            mean_error: 0.0,
        }
    }

    pub fn push_profiles(&mut self, exact: &PhaseDistribution, approx: &PhaseDistribution) -> Result<()> {
        if exact.values.len() != approx.values.len() {
            return Err(invalid("comparison profiles must share a grid"));
        }
        for ((&phi, &e), &a) in exact.phi.iter().zip(&exact.values).zip(&approx.values) {
            self.rows.push(ComparisonRow {
                time: exact.time,
                phi,
                exact: e,
                approx: a,
                abs_err: (e - a).abs(),
            });
        }
        let errs: Vec<f64> = self.rows.iter().map(|r| r.abs_err).collect();
        self.max_error = errs.iter().copied().fold(0.0, f64::max);
        self.mean_error = crate::mean(&errs);
        Ok(())
    }
}
