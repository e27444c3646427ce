#![allow(dead_code)]

use dicke_phase::states::{AtomicKind, FieldKind, JointState, StateOrigin};
use dicke_phase::Complex64;
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `exp(-i H t)` by Taylor series with scaling and squaring.
pub fn expm_minus_i(h: &DMatrix<f64>, t: f64) -> DMatrix<Complex64> {
    let n = h.nrows();
    let a: DMatrix<Complex64> = h.map(|x| Complex64::new(0.0, -x * t));
    let norm = a.iter().map(|z| z.norm()).fold(0.0, f64::max) * n as f64;
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = a * Complex64::new(scale, 0.0);
    let mut result = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    for k in 1..=30 {
        term = &term * &a * Complex64::new(1.0 / k as f64, 0.0);
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

pub fn custom_origin() -> StateOrigin {
    StateOrigin {
        field: FieldKind::Custom,
        atomic: AtomicKind::Custom,
    }
}

/// Normalized random state with photon numbers up to `n_max`.
pub fn random_state(rng: &mut ChaCha8Rng, atoms: usize, n_max: usize) -> JointState {
    let top = n_max + atoms;
    let mut subspaces: Vec<Vec<Complex64>> = (0..=top)
        .map(|n| {
            (0..=n.min(atoms))
                .map(|m| {
                    if n - m <= n_max {
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect()
        })
        .collect();
    let norm: f64 = subspaces.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    subspaces.iter_mut().flatten().for_each(|z| *z /= norm);
    JointState::from_subspaces(atoms, subspaces, custom_origin()).unwrap()
}
