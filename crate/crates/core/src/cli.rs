//! Command-line driver: figure data, spectrum dumps and exact-vs-limit
//! comparisons.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::approx::{cat_centers, rabi_frequency, ApproxPrediction, ComparisonReport};
use crate::blocks::{spectrum_table, Propagator};
use crate::error::Error;
use crate::io::{self, Format, IoError, RunManifest, Table};
use crate::phase::{circular_moment, phase_distribution, MomentConvention, PhaseDistribution, PhaseGrid};
use crate::states::{
    assemble, atomic_coherent, atomic_dicke, evolve, field_coherent, semiclassical_state, AtomicAmplitudes,
    EvolutionMode, JointState,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_PARAMETER: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "dicke-phase", version, about = "Atom-field relative phase in the Dicke model")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Number of atoms A.
    #[arg(long, global = true)]
    pub atoms: Option<usize>,
    /// Mean photon number of the coherent field.
    #[arg(long, global = true)]
    pub nbar: Option<f64>,
    /// Atom-field coupling g.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub coupling: f64,
    /// Points on the phase grid.
    #[arg(long, global = true, default_value_t = crate::phase::DEFAULT_GRID)]
    pub grid: usize,
    /// End of the time axis (gt, or lambda t for dispersive runs).
    #[arg(long, global = true)]
    pub tmax: Option<f64>,
    /// Number of time steps.
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Reference phase phi_0; the grid covers [phi_0 - pi, phi_0 + pi).
    #[arg(long, global = true, default_value_t = 0.0)]
    pub phi0: f64,
    /// Fock-space tail probability left out of the coherent field.
    #[arg(long, global = true, default_value_t = crate::states::DEFAULT_TAIL)]
    pub tail: f64,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }
    }
}

#[derive(Debug, Args, Clone)]
pub struct AtomicOpts {
    /// Polar angle of the atomic coherent state.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Azimuth of the atomic coherent state.
    #[arg(long = "phi-azimuth")]
    pub phi_azimuth: Option<f64>,
    /// Use the semiclassical state with this index instead of a coherent state.
    #[arg(long = "p-index")]
    pub p_index: Option<usize>,
    /// Use the Dicke state with this many excited atoms.
    #[arg(long)]
    pub dicke: Option<usize>,
}

#[derive(Debug, Args, Clone)]
pub struct DispersiveOpts {
    /// lambda = g^2 / Delta; overrides --coupling when given.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Detuning Delta.
    #[arg(long)]
    pub detuning: Option<f64>,
    /// Evaluation time in units of lambda t.
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// P(phi, gt) for unexcited atoms and coherent fields (default nbar 1, 50, 5).
    Fig1,
    /// P(phi, gt) for a factorized state.
    Fig2(AtomicOpts),
    /// <sin Phi>(gt) for the Fig1 setups.
    Fig3,
    /// Dispersive P(phi) at the cat time with the two-Gaussian overlay.
    Fig4 {
        #[command(flatten)]
        atomic: AtomicOpts,
        #[command(flatten)]
        dispersive: DispersiveOpts,
    },
    /// Block spectra with the eps_J + eps_{D-J} residual.
    Spectrum {
        #[arg(long, default_value_t = 0)]
        n_min: usize,
        #[arg(long, default_value_t = 20)]
        n_max: usize,
    },
    /// Exact engine against one analytic limit on a shared grid.
    Compare {
        #[arg(long, value_enum)]
        regime: CompareRegime,
        #[command(flatten)]
        atomic: AtomicOpts,
        #[command(flatten)]
        dispersive: DispersiveOpts,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CompareRegime {
    Weak,
    Strong,
    Factorized,
    Dispersive,
    Cat,
}

/// Failure of a CLI run, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Library(Error),
    Io(IoError),
    Parameter(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Library(Error::NoConvergence { .. } | Error::Internal(_)) => EXIT_NUMERICAL,
            CliError::Library(_) | CliError::Parameter(_) => EXIT_PARAMETER,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Library(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Parameter(m) => write!(f, "invalid parameter: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Library(e)
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARAMETER } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Output of one command: a manifest and a table.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub manifest: RunManifest,
    pub table: Table,
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let output = execute(cli)?;
    emit(&cli.global, &output)
}

fn emit(global: &GlobalOpts, output: &CommandOutput) -> CliResult<()> {
    let format = Format::from(global.format);
    match &global.out {
        Some(path) => io::write_output(path, format, &output.manifest, &output.table)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            let res = match format {
                Format::Csv => io::write_csv(&mut lock, &output.table),
                Format::Json => lock.write_all(io::to_json(&output.manifest, &output.table).as_bytes()),
            };
            res.map_err(|source| {
                CliError::Io(IoError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
            })?;
        }
    }
    if !output.manifest.summary.is_empty() {
        for (k, v) in &output.manifest.summary {
            eprintln!("{k}: {v}");
        }
    }
    Ok(())
}

/// Runs a command without writing anything.
pub fn execute(cli: &Cli) -> CliResult<CommandOutput> {
    let g = &cli.global;
    check_common(g)?;
    match &cli.command {
        Command::Fig1 => fig1(g),
        Command::Fig2(atomic) => fig2(g, atomic),
        Command::Fig3 => fig3(g),
        Command::Fig4 { atomic, dispersive } => fig4(g, atomic, dispersive),
        Command::Spectrum { n_min, n_max } => spectrum(g, *n_min, *n_max),
        Command::Compare {
            regime,
            atomic,
            dispersive,
        } => compare(g, *regime, atomic, dispersive),
    }
}

fn check_common(g: &GlobalOpts) -> CliResult<()> {
    if g.grid == 0 {
        return Err(CliError::Parameter("--grid must be positive".into()));
    }
    if !(g.coupling > 0.0 && g.coupling.is_finite()) {
        return Err(CliError::Parameter("--coupling must be positive".into()));
    }
    if g.steps == Some(0) {
        return Err(CliError::Parameter("--steps must be positive".into()));
    }
    if let Some(t) = g.tmax {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(CliError::Parameter("--tmax must be finite and non-negative".into()));
        }
    }
    Ok(())
}

fn time_grid(tmax: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| tmax * k as f64 / steps as f64).collect()
}

fn base_manifest(command: &str, g: &GlobalOpts, atoms: usize) -> RunManifest {
    RunManifest::new(command)
        .physical("atoms", atoms)
        .physical("coupling", g.coupling)
        .physical("phi0", g.phi0)
        .numerical("grid", g.grid)
        .numerical("truncation_tail", g.tail)
        .numerical(
            "format",
            match g.format {
                OutputFormat::Csv => "csv",
                OutputFormat::Json => "json",
            },
        )
}

fn grid_of(g: &GlobalOpts) -> PhaseGrid {
    PhaseGrid::new(g.grid, g.phi0)
}

/// Resolves the atomic state from the flags, falling back to `default`.
fn atomic_state(atoms: usize, opts: &AtomicOpts, default: (f64, f64)) -> CliResult<AtomicAmplitudes> {
    let chosen = [opts.p_index.is_some(), opts.dicke.is_some(), opts.theta.is_some() || opts.phi_azimuth.is_some()]
        .iter()
        .filter(|b| **b)
        .count();
    if chosen > 1 {
        return Err(CliError::Parameter(
            "choose one of --p-index, --dicke or --theta/--phi-azimuth".into(),
        ));
    }
    if let Some(p) = opts.p_index {
        return Ok(semiclassical_state(atoms, p)?);
    }
    if let Some(k) = opts.dicke {
        return Ok(atomic_dicke(atoms, k)?);
    }
    let theta = opts.theta.unwrap_or(default.0);
    let azimuth = opts.phi_azimuth.unwrap_or(default.1);
    Ok(atomic_coherent(atoms, theta, azimuth)?)
}

fn exact_scan(
    state: &JointState,
    propagator: &Propagator,
    times: &[f64],
    coupling: f64,
    grid: PhaseGrid,
) -> CliResult<Vec<PhaseDistribution>> {
    propagator.prepare(state.top_excitation())?;
    times
        .iter()
        .map(|&gt| {
            let evolved = evolve(state, gt / coupling, EvolutionMode::Exact, propagator)?;
            let mut d = phase_distribution(&evolved, grid);
            d.time = gt;
            Ok(d)
        })
        .collect()
}

fn fig1(g: &GlobalOpts) -> CliResult<CommandOutput> {
    let atoms = g.atoms.unwrap_or(5);
    let nbars = g.nbar.map_or_else(|| vec![1.0, 50.0, 5.0], |n| vec![n]);
    let tmax = g.tmax.unwrap_or(20.0);
    let steps = g.steps.unwrap_or(100);
    let grid = grid_of(g);
    let times = time_grid(tmax, steps);
    let propagator = Propagator::new(atoms, g.coupling)?;
    let atomic = atomic_dicke(atoms, 0)?;

    let mut table = Table::new(&["nbar", "gt", "phi", "P"]);
    let mut manifest = base_manifest("fig1", g, atoms)
        .physical("field", "coherent")
        .physical("nbar", &nbars)
        .physical("atomic", "dicke(0)")
        .numerical("tmax", tmax)
        .numerical("steps", steps);
    let mut residuals = Vec::new();
    for &nbar in &nbars {
        let field = field_coherent(nbar, g.tail)?;
        let state = assemble(&field, &atomic);
        residuals.push(state.norm_residual);
        for d in exact_scan(&state, &propagator, &times, g.coupling, grid)? {
            for (&phi, &p) in d.phi.iter().zip(&d.values) {
                table.push(vec![nbar, d.time, phi, p]);
            }
        }
    }
    manifest.set_summary("truncation_residual", residuals);
    Ok(CommandOutput { manifest, table })
}

fn fig2(g: &GlobalOpts, opts: &AtomicOpts) -> CliResult<CommandOutput> {
    let atoms = g.atoms.unwrap_or(3);
    let nbar = g.nbar.unwrap_or(20.0);
    let tmax = g.tmax.unwrap_or(nbar.sqrt());
    let steps = g.steps.unwrap_or(100);
    let grid = grid_of(g);
    let atomic = atomic_state(atoms, opts, (FRAC_PI_2, 0.0))?;
    let field = field_coherent(nbar, g.tail)?;
    let state = assemble(&field, &atomic);
    let propagator = Propagator::new(atoms, g.coupling)?;
    let times = time_grid(tmax, steps);
    let scans = exact_scan(&state, &propagator, &times, g.coupling, grid)?;
    let factorized = ApproxPrediction::Factorized { atomic: atomic.clone() }.profile(grid, 0.0)?;

    let mut table = Table::new(&["gt", "phi", "P", "P_factorized"]);
    let initial = &scans[0];
    let mut deviation = 0.0f64;
    for d in &scans {
        deviation = deviation.max(d.max_abs_diff(&initial.values));
        for ((&phi, &p), &f) in d.phi.iter().zip(&d.values).zip(&factorized.values) {
            table.push(vec![d.time, phi, p, f]);
        }
    }
    let mut manifest = base_manifest("fig2", g, atoms)
        .physical("field", "coherent")
        .physical("nbar", nbar)
        .physical("atomic", atomic.kind)
        .numerical("tmax", tmax)
        .numerical("steps", steps);
    manifest.set_summary("max_deviation_from_t0", deviation);
    manifest.set_summary("relative_deviation_from_t0", deviation / initial.max());
    manifest.set_summary("truncation_residual", state.norm_residual);
    Ok(CommandOutput { manifest, table })
}

fn fig3(g: &GlobalOpts) -> CliResult<CommandOutput> {
    let atoms = g.atoms.unwrap_or(5);
    let nbars = g.nbar.map_or_else(|| vec![1.0, 50.0, 5.0], |n| vec![n]);
    let tmax = g.tmax.unwrap_or(20.0);
    let steps = g.steps.unwrap_or(400);
    let grid = grid_of(g);
    let times = time_grid(tmax, steps);
    let propagator = Propagator::new(atoms, g.coupling)?;
    let atomic = atomic_dicke(atoms, 0)?;

    let mut table = Table::new(&["nbar", "gt", "sin_phi", "sin_phi_quadrature"]);
    let mut worst = 0.0f64;
    for &nbar in &nbars {
        let state = assemble(&field_coherent(nbar, g.tail)?, &atomic);
        propagator.prepare(state.top_excitation())?;
        for &gt in &times {
            let evolved = evolve(&state, gt / g.coupling, EvolutionMode::Exact, &propagator)?;
            let overlap = circular_moment(&evolved, 1, MomentConvention::Continuum).im;
            let quad = phase_distribution(&evolved, grid).circular_moment(1).im;
            worst = worst.max((overlap - quad).abs());
            table.push(vec![nbar, gt, overlap, quad]);
        }
    }
    let mut manifest = base_manifest("fig3", g, atoms)
        .physical("field", "coherent")
        .physical("nbar", &nbars)
        .physical("atomic", "dicke(0)")
        .numerical("tmax", tmax)
        .numerical("steps", steps);
    manifest.set_summary("max_overlap_vs_quadrature", worst);
    Ok(CommandOutput { manifest, table })
}

/// `(coupling, detuning, lambda)` from the dispersive flags.
fn dispersive_params(g: &GlobalOpts, opts: &DispersiveOpts) -> CliResult<(f64, f64, f64)> {
    let detuning = opts.detuning.unwrap_or(100.0);
    if detuning == 0.0 || !detuning.is_finite() {
        return Err(CliError::Parameter("--detuning must be nonzero".into()));
    }
    let coupling = match opts.lambda {
        Some(lambda) => {
            if lambda * detuning <= 0.0 {
                return Err(CliError::Parameter("--lambda must have the sign of --detuning".into()));
            }
            (lambda * detuning).sqrt()
        }
        None => g.coupling,
    };
    Ok((coupling, detuning, coupling * coupling / detuning))
}

fn dispersive_exact(state: &JointState, detuning: f64, coupling: f64, t: f64, grid: PhaseGrid) -> CliResult<PhaseDistribution> {
    let propagator = Propagator::new(state.atoms, coupling)?;
    let evolved = evolve(state, t, EvolutionMode::Dispersive { detuning }, &propagator)?;
    Ok(phase_distribution(&evolved, grid))
}

fn warn_dispersive(nbar: f64, atoms: usize, coupling: f64, detuning: f64) {
    let bound = coupling * (nbar + 1.0).sqrt() * atoms as f64;
    if detuning.abs() <= bound {
        eprintln!("warning: |Delta| = {detuning} is not large against g sqrt(nbar+1) A = {bound}");
    }
}

fn fig4(g: &GlobalOpts, atomic_opts: &AtomicOpts, opts: &DispersiveOpts) -> CliResult<CommandOutput> {
    let atoms = g.atoms.unwrap_or(5);
    let nbar = g.nbar.unwrap_or(10.0);
    let tau = opts.tau.unwrap_or(PI / 6.0);
    let (coupling, detuning, lambda) = dispersive_params(g, opts)?;
    warn_dispersive(nbar, atoms, coupling, detuning);
    let grid = grid_of(g);
    let atomic = atomic_state(atoms, atomic_opts, (FRAC_PI_2, 0.0))?;
    let field = field_coherent(nbar, g.tail)?;
    let state = assemble(&field, &atomic);
    let t = tau / lambda;
    let exact = dispersive_exact(&state, detuning, coupling, t, grid)?;
    let cat = ApproxPrediction::CatGaussian {
        atoms,
        mean_photons: nbar,
        lambda,
    }
    .profile(grid, t)?;

    let mut table = Table::new(&["phi", "P", "P_cat"]);
    for ((&phi, &p), &c) in exact.phi.iter().zip(&exact.values).zip(&cat.values) {
        table.push(vec![phi, p, c]);
    }
    let (c1, c2) = cat_centers(atoms, nbar, lambda);
    let half = 0.5 * exact.max();
    let humps: Vec<f64> = exact
        .local_maxima()
        .into_iter()
        .filter(|&k| exact.values[k] > half)
        .map(|k| exact.phi[k])
        .collect();
    let mut manifest = base_manifest("fig4", g, atoms)
        .physical("field", "coherent")
        .physical("nbar", nbar)
        .physical("atomic", atomic.kind)
        .physical("detuning", detuning)
        .physical("lambda", lambda)
        .physical("coupling", coupling)
        .numerical("tau", tau);
    manifest.set_summary("cat_centers", [grid.wrap(c1), grid.wrap(c2)]);
    manifest.set_summary("humps_above_half_max", humps);
    manifest.set_summary("normalization_residual", exact.normalization_residual);
    Ok(CommandOutput { manifest, table })
}

fn spectrum(g: &GlobalOpts, n_min: usize, n_max: usize) -> CliResult<CommandOutput> {
    if n_min > n_max {
        return Err(CliError::Parameter("--n-min must not exceed --n-max".into()));
    }
    let atoms = g.atoms.unwrap_or(5);
    let rows = spectrum_table(atoms, g.coupling, n_min..=n_max)?;
    let mut table = Table::new(&["N", "J", "epsilon", "symmetry_residual"]);
    let mut worst = 0.0f64;
    for r in &rows {
        worst = worst.max(r.symmetry_residual);
        table.push(vec![r.excitations as f64, r.index as f64, r.eigenvalue, r.symmetry_residual]);
    }
    let mut manifest = RunManifest::new("spectrum")
        .physical("atoms", atoms)
        .physical("coupling", g.coupling)
        .numerical("n_min", n_min)
        .numerical("n_max", n_max);
    manifest.set_summary("max_symmetry_residual", worst);
    Ok(CommandOutput { manifest, table })
}

fn compare(
    g: &GlobalOpts,
    regime: CompareRegime,
    atomic_opts: &AtomicOpts,
    opts: &DispersiveOpts,
) -> CliResult<CommandOutput> {
    let atoms = g.atoms.unwrap_or(5);
    let grid = grid_of(g);
    let steps = g.steps.unwrap_or(20);
    let mut report;
    let mut manifest = base_manifest("compare", g, atoms);

    match regime {
        CompareRegime::Weak | CompareRegime::Strong => {
            let strong = regime == CompareRegime::Strong;
            let nbar = g.nbar.unwrap_or(if strong { 50.0 } else { 1.0 });
            let tmax = g.tmax.unwrap_or(if strong {
                10.0 * 2.0 * PI / rabi_frequency(nbar.round() as usize, atoms, 1.0).unwrap_or(1.0)
            } else {
                20.0
            });
            if !strong && nbar > 1.0 {
                eprintln!("warning: weak-field limit assumes nbar <~ 1, got {nbar}");
            }
            if strong && nbar < atoms as f64 {
                eprintln!("warning: strong-field limit assumes nbar >> A, got nbar={nbar}, A={atoms}");
            }
            let field = field_coherent(nbar, g.tail)?;
            let state = assemble(&field, &atomic_dicke(atoms, 0)?);
            let propagator = Propagator::new(atoms, g.coupling)?;
            let times = time_grid(tmax, steps);
            let pred = if strong {
                ApproxPrediction::StrongTan {
                    atoms,
                    field,
                    coupling: g.coupling,
                }
            } else {
                ApproxPrediction::Weak {
                    atoms,
                    mean_photons: nbar,
                    coupling: g.coupling,
                }
            };
            report = ComparisonReport::new(pred.regime());
            for exact in exact_scan(&state, &propagator, &times, g.coupling, grid)? {
                let approx = pred.profile(grid, exact.time / g.coupling)?;
                report.push_profiles(&exact, &approx)?;
            }
            manifest = manifest
                .physical("nbar", nbar)
                .physical("atomic", "dicke(0)")
                .numerical("tmax", tmax)
                .numerical("steps", steps);
        }
        CompareRegime::Factorized => {
            let nbar = g.nbar.unwrap_or(20.0);
            let tmax = g.tmax.unwrap_or(nbar.sqrt());
            if tmax > nbar.sqrt() {
                eprintln!("warning: factorization only holds up to gt ~ sqrt(nbar) = {}", nbar.sqrt());
            }
            let atomic = match (atomic_opts.p_index, atomic_opts.theta, atomic_opts.dicke) {
                (None, None, None) => semiclassical_state(atoms, 0)?,
                _ => atomic_state(atoms, atomic_opts, (FRAC_PI_2, 0.0))?,
            };
            let state = assemble(&field_coherent(nbar, g.tail)?, &atomic);
            let propagator = Propagator::new(atoms, g.coupling)?;
            let pred = ApproxPrediction::Factorized { atomic: atomic.clone() };
            let approx = pred.profile(grid, 0.0)?;
            report = ComparisonReport::new(pred.regime());
            for exact in exact_scan(&state, &propagator, &time_grid(tmax, steps), g.coupling, grid)? {
                let mut a = approx.clone();
                a.time = exact.time;
                report.push_profiles(&exact, &a)?;
            }
            manifest = manifest
                .physical("nbar", nbar)
                .physical("atomic", atomic.kind)
                .numerical("tmax", tmax)
                .numerical("steps", steps);
        }
        CompareRegime::Dispersive | CompareRegime::Cat => {
            let nbar = g.nbar.unwrap_or(10.0);
            let (coupling, detuning, lambda) = dispersive_params(g, opts)?;
            warn_dispersive(nbar, atoms, coupling, detuning);
            let atomic = atomic_state(atoms, atomic_opts, (FRAC_PI_2, 0.0))?;
            let field = field_coherent(nbar, g.tail)?;
            let state = assemble(&field, &atomic);
            let taus = if regime == CompareRegime::Cat {
                vec![opts.tau.unwrap_or(PI / 6.0)]
            } else {
                time_grid(g.tmax.unwrap_or(PI), steps)
            };
            let pred = if regime == CompareRegime::Cat {
                ApproxPrediction::CatGaussian {
                    atoms,
                    mean_photons: nbar,
                    lambda,
                }
            } else {
                ApproxPrediction::Dispersive {
                    field: field.clone(),
                    atomic: atomic.clone(),
                    detuning,
                    coupling,
                }
            };
            report = ComparisonReport::new(pred.regime());
            for &tau in &taus {
                let t = tau / lambda;
                let mut exact = dispersive_exact(&state, detuning, coupling, t, grid)?;
                let mut approx = pred.profile(grid, t)?;
                exact.time = tau;
                approx.time = tau;
                report.push_profiles(&exact, &approx)?;
            }
            manifest = manifest
                .physical("nbar", nbar)
                .physical("atomic", atomic.kind)
                .physical("detuning", detuning)
                .physical("lambda", lambda)
                .physical("coupling", coupling)
                .numerical("taus", &taus);
        }
    }

    let mut table = Table::new(&["t", "phi", "P_exact", "P_approx", "abs_err"]);
    for r in &report.rows {
        table.push(vec![r.time, r.phi, r.exact, r.approx, r.abs_err]);
    }
    manifest = manifest.physical("regime", report.regime.name());
    manifest.set_summary("max_error", report.max_error);
    manifest.set_summary("mean_error", report.mean_error);
    Ok(CommandOutput { manifest, table })
}
