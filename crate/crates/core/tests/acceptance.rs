//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

mod common;

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::process::Command;
use std::time::{Duration, Instant};

use dicke_phase::approx::{cat_centers, rabi_frequency, strong_field_distribution};
use dicke_phase::blocks::{Propagator, SubspaceBlock};
use dicke_phase::phase::{
    circular_moment, phase_distribution, povm_crosscheck, MomentConvention, PhaseDistribution, PhaseGrid,
};
use dicke_phase::states::{
    assemble, atomic_coherent, atomic_dicke, evolve, field_coherent, field_number, EvolutionMode, FieldWeights,
    JointState, DEFAULT_TAIL,
};
use dicke_phase::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit_secs: f64) -> bool {
    elapsed.as_secs_f64() < limit_secs
}

fn exact_profile(state: &JointState, prop: &Propagator, gt: f64, grid: PhaseGrid) -> PhaseDistribution {
    let evolved = evolve(state, gt / prop.coupling(), EvolutionMode::Exact, prop).unwrap();
    phase_distribution(&evolved, grid)
}

fn flat_initial() -> Outcome {
    let start = Instant::now();
    let grid = PhaseGrid::new(720, 0.0);
    let atomic = atomic_dicke(5, 0).unwrap();
    let mut worst = 0.0f64;
    for nbar in [1.0, 5.0, 50.0] {
        let state = assemble(&field_coherent(nbar, DEFAULT_TAIL).unwrap(), &atomic);
        let d = phase_distribution(&state, grid);
        let dev = d.values.iter().map(|p| (p - 1.0 / TAU).abs()).fold(0.0, f64::max);
        worst = worst.max(dev);
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-10 && within(elapsed, 1.0),
        format!("max |P - 1/2pi| = {worst:.3e}, {:.3} s", elapsed.as_secs_f64()),
    )
}

fn spectral_symmetry() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut zero_mismatch = 0;
    for atoms in 1..=8 {
        for n in 0..=120 {
            let solved = SubspaceBlock::build(atoms, n, 1.0).unwrap().eigendecompose().unwrap();
            let eps = &solved.eigenvalues;
            let d = eps.len() - 1;
            let scale = eps.iter().map(|e| e.abs()).fold(1.0, f64::max);
            let res = (0..=d).map(|j| (eps[j] + eps[d - j]).abs()).fold(0.0, f64::max) / scale;
            worst = worst.max(res);
            let has_zero = eps.iter().any(|e| e.abs() <= 1e-9 * scale);
            if has_zero != (eps.len() % 2 == 1) {
                zero_mismatch += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-9 && zero_mismatch == 0 && within(elapsed, 5.0),
        format!(
            "max relative residual = {worst:.3e}, zero-eigenvalue mismatches = {zero_mismatch}, {:.3} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn evolution_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let atoms = rng.gen_range(1..=6);
        let n = rng.gen_range(0..=12);
        let gt = rng.gen_range(0.0..=5.0);
        let block = SubspaceBlock::build(atoms, n, 1.0).unwrap();
        let oracle = common::expm_minus_i(&block.hamiltonian(), gt);
        let coeffs = block.eigendecompose().unwrap().evolution_coeffs(gt);
        for r in 0..oracle.nrows() {
            for c in 0..oracle.ncols() {
                worst = worst.max((coeffs.get(r, c) - oracle[(r, c)]).norm());
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-8 && within(elapsed, 10.0),
        format!("max elementwise error = {worst:.3e}, {:.3} s", elapsed.as_secs_f64()),
    )
}

fn unitarity() -> Outcome {
    let state = assemble(
        &field_coherent(50.0, DEFAULT_TAIL).unwrap(),
        &atomic_dicke(5, 0).unwrap(),
    );
    let prop = Propagator::new(5, 1.0).unwrap();
    let n0 = state.norm_sqr();
    let p0 = state.excitation_distribution();
    let mut norm_drift = 0.0f64;
    let mut pn_drift = 0.0f64;
    // one long jump and an accumulated chain of 100 steps of gt = 10
    let mut chained = state.clone();
    for _ in 0..100 {
        chained = evolve(&chained, 10.0, EvolutionMode::Exact, &prop).unwrap();
    }
    let direct = evolve(&state, 1000.0, EvolutionMode::Exact, &prop).unwrap();
    for s in [&chained, &direct] {
        norm_drift = norm_drift.max((s.norm_sqr().sqrt() - n0.sqrt()).abs());
        let p = s.excitation_distribution();
        pn_drift = pn_drift.max(p.iter().zip(&p0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    outcome(
        norm_drift <= 1e-9 && pn_drift <= 1e-10,
        format!("norm drift = {norm_drift:.3e}, max P(N) drift = {pn_drift:.3e}"),
    )
}

fn povm_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let grid = PhaseGrid::new(360, 0.0);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let atoms = rng.gen_range(1..=4);
        let n_max = rng.gen_range(0..=40);
        let state = common::random_state(&mut rng, atoms, n_max);
        let projector = phase_distribution(&state, grid);
        let povm = povm_crosscheck(&state, grid).unwrap();
        worst = worst.max(projector.max_abs_diff(&povm.values));
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-6 && within(elapsed, 60.0),
        format!("max |P_proj - P_povm| = {worst:.3e}, {:.3} s", elapsed.as_secs_f64()),
    )
}

fn jaynes_cummings() -> Outcome {
    let mut eig_err = 0.0f64;
    let mut coeff_err = 0.0f64;
    let g = 0.7;
    for n in 0..=200 {
        let solved = SubspaceBlock::build(1, n, g).unwrap().eigendecompose().unwrap();
        let w = g * (n as f64).sqrt();
        if n == 0 {
            eig_err = eig_err.max(solved.eigenvalues[0].abs());
            continue;
        }
        eig_err = eig_err.max((solved.eigenvalues[0] + w).abs()).max((solved.eigenvalues[1] - w).abs());
        for t in [0.3, 2.0, 17.0] {
            let c = solved.evolution_coeffs(t);
            let (s, co) = (w * t).sin_cos();
            let expected = [
                [Complex64::new(co, 0.0), Complex64::new(0.0, -s)],
                [Complex64::new(0.0, -s), Complex64::new(co, 0.0)],
            ];
            for (r, row) in expected.iter().enumerate() {
                for (k, e) in row.iter().enumerate() {
                    coeff_err = coeff_err.max((c.get(r, k) - e).norm());
                }
            }
        }
    }
    outcome(
        eig_err <= 1e-12 && coeff_err <= 1e-10,
        format!("eigenvalue error = {eig_err:.3e}, coefficient error = {coeff_err:.3e}"),
    )
}

fn strong_field_scaling() -> Outcome {
    let start = Instant::now();
    let atoms = 5;
    let grid = PhaseGrid::new(360, 0.0);
    let prop = Propagator::new(atoms, 1.0).unwrap();
    let mut distances = Vec::new();
    for nbar in [25.0, 100.0, 400.0] {
        let field = field_coherent(nbar, DEFAULT_TAIL).unwrap();
        let state = assemble(&field, &atomic_dicke(atoms, 0).unwrap());
        prop.prepare(state.top_excitation()).unwrap();
        let omega = rabi_frequency(nbar as usize, atoms, 1.0).unwrap();
        let tmax = 10.0 * TAU / omega;
        let steps = 100;
        let mut dist = 0.0f64;
        for k in 0..=steps {
            let gt = tmax * k as f64 / steps as f64;
            let exact = exact_profile(&state, &prop, gt, grid);
            for (phi, p) in exact.phi.iter().zip(&exact.values) {
                dist = dist.max((p - strong_field_distribution(atoms, &field, 1.0, gt, *phi)).abs());
            }
        }
        distances.push(dist);
    }
    let decreasing = distances.windows(2).all(|w| w[1] < w[0]);
    let elapsed = start.elapsed();
    outcome(
        decreasing && within(elapsed, 120.0),
        format!(
            "L-inf at nbar 25/100/400 = {:.3e} / {:.3e} / {:.3e}, {:.1} s",
            distances[0],
            distances[1],
            distances[2],
            elapsed.as_secs_f64()
        ),
    )
}

fn strong_field_peaks() -> Outcome {
    let atoms = 5;
    let nbar = 50.0;
    let grid = PhaseGrid::new(720, 0.0);
    let state = assemble(
        &field_coherent(nbar, DEFAULT_TAIL).unwrap(),
        &atomic_dicke(atoms, 0).unwrap(),
    );
    let prop = Propagator::new(atoms, 1.0).unwrap();
    // between collapse and the first revival near gt = 2 pi sqrt(nbar)
    let revival = TAU * nbar.sqrt();
    let targets = [grid.nearest(FRAC_PI_2), grid.nearest(-FRAC_PI_2)];
    let mut worst_cells = 0usize;
    for k in 0..=10 {
        let gt = revival * (0.25 + 0.05 * k as f64);
        let d = exact_profile(&state, &prop, gt, grid);
        let mut maxima = d.local_maxima();
        maxima.sort_by(|&a, &b| d.values[b].total_cmp(&d.values[a]));
        if maxima.len() < 2 {
            worst_cells = usize::MAX;
            break;
        }
        let (p, q) = (maxima[0], maxima[1]);
        let direct = grid.cell_distance(p, targets[0]).max(grid.cell_distance(q, targets[1]));
        let swapped = grid.cell_distance(p, targets[1]).max(grid.cell_distance(q, targets[0]));
        worst_cells = worst_cells.max(direct.min(swapped));
    }
    outcome(
        worst_cells <= 3,
        format!("worst peak offset from +-pi/2 over gt in [0.25, 0.75] t_revival = {worst_cells} cells"),
    )
}

fn factorized_stationarity() -> Outcome {
    let atoms = 3;
    let nbar: f64 = 20.0;
    let grid = PhaseGrid::new(720, 0.0);
    let state = assemble(
        &field_coherent(nbar, DEFAULT_TAIL).unwrap(),
        &atomic_coherent(atoms, FRAC_PI_2, 0.0).unwrap(),
    );
    let prop = Propagator::new(atoms, 1.0).unwrap();
    let initial = exact_profile(&state, &prop, 0.0, grid);
    let steps = 100;
    let mut dev = 0.0f64;
    for k in 0..=steps {
        let gt = nbar.sqrt() * k as f64 / steps as f64;
        dev = dev.max(exact_profile(&state, &prop, gt, grid).max_abs_diff(&initial.values));
    }
    let bound = 0.05 * initial.max();
    outcome(
        dev <= bound,
        format!("max deviation = {dev:.4e}, bound 0.05 max P(0) = {bound:.4e}"),
    )
}

fn dispersive_flatness() -> Outcome {
    let grid = PhaseGrid::new(720, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let random_field = {
        let amps: Vec<Complex64> = (0..25)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        FieldWeights::custom(amps.into_iter().map(|z| z / norm).collect()).unwrap()
    };
    let fields = [
        field_coherent(10.0, DEFAULT_TAIL).unwrap(),
        field_number(7),
        random_field,
    ];
    let (detuning, coupling) = (100.0, 1.0);
    let lambda = coupling * coupling / detuning;
    let mut worst = 0.0f64;
    for atoms in [1, 3, 5] {
        let prop = Propagator::new(atoms, coupling).unwrap();
        for excited in 0..=atoms {
            let atomic = atomic_dicke(atoms, excited).unwrap();
            for field in &fields {
                let state = assemble(field, &atomic);
                let norm = state.norm_sqr();
                for k in 0..20 {
                    let t = (k as f64 * 0.37 + 0.05) / lambda;
                    let evolved = evolve(&state, t, EvolutionMode::Dispersive { detuning }, &prop).unwrap();
                    let d = phase_distribution(&evolved, grid);
                    let dev = d.values.iter().map(|p| (p - norm / TAU).abs()).fold(0.0, f64::max);
                    worst = worst.max(dev);
                }
            }
        }
    }
    outcome(worst <= 1e-10, format!("max deviation from flat = {worst:.3e}"))
}

fn cat_formation() -> Outcome {
    let atoms = 5;
    let nbar = 10.0;
    let (detuning, coupling) = (100.0, 1.0);
    let lambda = coupling * coupling / detuning;
    let grid = PhaseGrid::new(720, 0.0);
    let state = assemble(
        &field_coherent(nbar, DEFAULT_TAIL).unwrap(),
        &atomic_coherent(atoms, FRAC_PI_2, 0.0).unwrap(),
    );
    let prop = Propagator::new(atoms, coupling).unwrap();
    let evolved = evolve(&state, (PI / 6.0) / lambda, EvolutionMode::Dispersive { detuning }, &prop).unwrap();
    let d = phase_distribution(&evolved, grid);
    let half = 0.5 * d.max();
    let humps: Vec<usize> = d.local_maxima().into_iter().filter(|&k| d.values[k] > half).collect();
    let half_turn = grid.points / 2;
    let (c1, c2) = cat_centers(atoms, nbar, lambda);
    let centers = [grid.nearest(grid.wrap(c1)), grid.nearest(grid.wrap(c2))];
    let mut pass = humps.len() == 2;
    let mut detail = format!(
        "{} maxima above half max (max {:.5}, min {:.5}); predicted centers {:.3}, {:.3}",
        humps.len(),
        d.max(),
        d.values.iter().copied().fold(f64::INFINITY, f64::min),
        grid.phi(centers[0]),
        grid.phi(centers[1])
    );
    if humps.len() == 2 {
        let sep = grid.cell_distance(humps[0], humps[1]);
        let direct = grid.cell_distance(humps[0], centers[0]).max(grid.cell_distance(humps[1], centers[1]));
        let swapped = grid.cell_distance(humps[0], centers[1]).max(grid.cell_distance(humps[1], centers[0]));
        pass = sep.abs_diff(half_turn) <= 2 && direct.min(swapped) <= 2;
        detail += &format!(
            "; humps at {:.3}, {:.3}, separation {sep} cells",
            d.phi[humps[0]], d.phi[humps[1]]
        );
    }
    outcome(pass, detail)
}

fn moment_consistency() -> Outcome {
    let atoms = 5;
    let grid = PhaseGrid::new(720, 0.0);
    let prop = Propagator::new(atoms, 1.0).unwrap();
    let mut worst = 0.0f64;
    let mut initial = 0.0f64;
    for nbar in [1.0, 50.0, 5.0] {
        let state = assemble(
            &field_coherent(nbar, DEFAULT_TAIL).unwrap(),
            &atomic_dicke(atoms, 0).unwrap(),
        );
        initial = initial.max(circular_moment(&state, 1, MomentConvention::Continuum).im.abs());
        for k in 0..=80 {
            let gt = 20.0 * k as f64 / 80.0;
            let evolved = evolve(&state, gt, EvolutionMode::Exact, &prop).unwrap();
            let overlap = circular_moment(&evolved, 1, MomentConvention::Continuum).im;
            let quad = phase_distribution(&evolved, grid).circular_moment(1).im;
            worst = worst.max((overlap - quad).abs());
        }
    }
    outcome(
        worst <= 1e-8 && initial <= 1e-12,
        format!("max |overlap - quadrature| = {worst:.3e}, |<sin>(0)| = {initial:.3e}"),
    )
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_dicke-phase");
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 5] = [
        &["fig1", "--steps", "8", "--grid", "180"],
        &["fig2", "--steps", "8", "--grid", "180"],
        &["fig3", "--steps", "40", "--grid", "180"],
        &["fig4"],
        &["fig4", "--format", "json"],
    ];
    let mut mismatches = Vec::new();
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let path = dir.path().join(format!("run{i}_{rep}.out"));
            let status = Command::new(bin)
                .args(*args)
                .arg("--out")
                .arg(&path)
                .env_remove("SOURCE_DATE_EPOCH")
                .output()
                .unwrap();
            assert!(status.status.success(), "{args:?} failed");
            let mut bytes = std::fs::read(&path).unwrap();
            let manifest = dicke_phase::io::manifest_path(&path);
            if manifest.exists() {
                bytes.extend(std::fs::read(manifest).unwrap());
            }
            outputs.push(bytes);
        }
        if outputs[0] != outputs[1] {
            mismatches.push(args[0]);
        }
    }
    outcome(
        mismatches.is_empty(),
        format!("{} figure runs repeated, non-identical: {mismatches:?}", runs.len()),
    )
}

fn main() {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check); 13] = [
        ("flat initial distribution", flat_initial),
        ("spectral symmetry", spectral_symmetry),
        ("evolution operator vs matrix exponential", evolution_oracle),
        ("unitarity and excitation conservation", unitarity),
        ("POVM marginal vs projector density", povm_equivalence),
        ("single-atom closed form", jaynes_cummings),
        ("strong-field error shrinks with nbar", strong_field_scaling),
        ("strong-field peaks at +-pi/2", strong_field_peaks),
        ("factorized-state stationarity", factorized_stationarity),
        ("dispersive flatness for Dicke states", dispersive_flatness),
        ("cat formation at lambda t = pi/6", cat_formation),
        ("moment overlap vs quadrature", moment_consistency),
        ("byte-identical reruns", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "[{}] {:>2}. {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
