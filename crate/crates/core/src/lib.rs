//! Relative phase between a collection of two-level atoms and a single
//! cavity mode in the Dicke model.
//!
//! The interaction conserves the excitation number `N`, so the dynamics
//! splits into independent tridiagonal blocks. On top of the exact block
//! evolution the crate builds the relative-phase basis of every block, the
//! continuous relative-phase density `P(phi, t)`, its circular moments, and
//! the closed-form weak-field, strong-field, factorized-state and dispersive
//! limits used to cross-check the exact engine.
//!
//! Basis labels follow the excited-atom count: `M = 0..=A`, `|N - M, M>`.

pub mod algebra;
pub mod approx;
pub mod blocks;
pub mod cli;
pub mod error;
pub mod io;
pub mod phase;
pub mod states;
pub mod tridiag;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Mean-value convenience used by reports.
pub(crate) fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}
