//! Subcommands: `gen-state`, `simulate`, `reconstruct`, `compare`, `qscan`.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use photomo_core::quasiprob::characteristic_scan;
use photomo_core::reconstruction::reconstruct_with;
use photomo_core::{
    build_state, fidelity, q_from_zero_counts, trace_distance, weight_function, DensityMatrix,
    ForwardModel, PhaseSpaceGrid,
};

use crate::config::{parse_s, parse_shots, ConfigFile, GridFile, RunConfig, SChoice, SqueezeFile};
use crate::error::{CliError, CliResult};
use crate::io;
use crate::parallel::build_table_parallel;

#[derive(Debug, Parser)]
#[command(name = "photomo", version, about = "Photon-number tomography: simulate and reconstruct")]
pub struct Cli {
    #[command(flatten)]
    pub flags: Flags,
    #[command(subcommand)]
    pub command: Command,
}

/// Overrides for [`ConfigFile`] fields.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// State descriptor: vacuum, fock:N, coherent:RE,IM, thermal:NBAR, cat:RE,IM[,PHASE], squeezed:MAG[,PHASE].
    #[arg(long, global = true)]
    pub state: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    /// Ordering parameter or `auto`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub s: Option<String>,
    #[arg(long, global = true)]
    pub squeeze_mag: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub squeeze_phase: Option<f64>,
    /// `fixed` or `synthesized`.
    #[arg(long, global = true)]
    pub squeeze_mode: Option<String>,
    #[arg(long, global = true)]
    pub rmax: Option<f64>,
    #[arg(long, global = true)]
    pub nr: Option<usize>,
    #[arg(long, global = true)]
    pub ntheta: Option<usize>,
    #[arg(long, global = true)]
    pub nmax: Option<usize>,
    /// Shots per node or `exact`.
    #[arg(long, global = true)]
    pub shots: Option<String>,
    /// Radial rule: nodal, product or product:N.
    #[arg(long, global = true)]
    pub rule: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanKind {
    /// Husimi function (s = -1).
    Q,
    /// Wigner function (s = 0).
    Wigner,
    /// Weight function at the configured s.
    Weight,
    /// Characteristic function at the configured s (auto means 0).
    Chi,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a test state and write it as a density-matrix file.
    GenState,
    /// Simulate a measurement table from a density-matrix file.
    Simulate { state_file: PathBuf },
    /// Reconstruct a density matrix from a table CSV (its JSON sidecar is read alongside).
    Reconstruct {
        table: PathBuf,
        /// Density matrix to compare the reconstruction with.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Fidelity and trace distance between two density-matrix or report files.
    Compare { a: PathBuf, b: PathBuf },
    /// Phase-space scan of a state file, or the zero-count Q route of a table CSV.
    Qscan {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "q")]
        kind: ScanKind,
    },
}

impl Flags {
    fn as_config(&self) -> CliResult<ConfigFile> {
        let grid = (self.rmax.is_some() || self.nr.is_some() || self.ntheta.is_some()).then_some(GridFile {
            r_max: self.rmax,
            n_r: self.nr,
            n_theta: self.ntheta,
        });
        let squeeze = (self.squeeze_mag.is_some() || self.squeeze_phase.is_some()).then_some(SqueezeFile {
            mag: self.squeeze_mag,
            phase: self.squeeze_phase,
        });
        Ok(ConfigFile {
            state: self.state.clone(),
            dim: self.dim,
            grid,
            eta: self.eta,
            squeeze,
            squeeze_mode: self.squeeze_mode.clone(),
            s: self.s.as_deref().map(parse_s).transpose()?,
            n_max: self.nmax,
            shots: self.shots.as_deref().map(parse_shots).transpose()?,
            seed: self.seed,
            rule: self.rule.clone(),
            out: self.out.clone(),
        })
    }

    /// `base` < config file < flags.
    fn resolve(&self, base: ConfigFile) -> CliResult<RunConfig> {
        let file = match self.config {
            Some(ref p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        RunConfig::resolve(base.overridden_by(file).overridden_by(self.as_config()?))
    }
}

fn out_path(cfg: &RunConfig) -> CliResult<&Path> {
    cfg.out
        .as_deref()
        .ok_or_else(|| CliError::Invalid("no output path: pass --out or set `out` in the config".into()))
}

fn report_warnings<W: std::fmt::Display>(err: &mut dyn Write, warnings: &[W]) {
    for w in warnings {
        let _ = writeln!(err, "warning: {w}");
    }
}

/// Mean amplitude `sqrt(<n>)`, used to size the default grid for a state read from disk.
fn amplitude_of(rho: &DensityMatrix) -> f64 {
    let mean: f64 = rho.photon_distribution().iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    mean.max(0.0).sqrt()
}

fn gen_state(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    let built = build_state(&cfg.state, cfg.dim)?;
    io::write_density(out_path(cfg)?, &built.rho)?;
    let p0 = built.rho.photon_distribution()[0];
    writeln!(out, "leakage {:e}\np0 {}", built.leakage, p0).map_err(stdout_err)?;
    Ok(())
}

fn simulate(cfg: &RunConfig, state_file: &Path, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let rho = io::read_density(state_file)?;
    let grid = PhaseSpaceGrid::new(cfg.grid_for(amplitude_of(&rho))?)?;
    let model = ForwardModel {
        eta: cfg.eta,
        squeeze: cfg.squeeze,
        locking: cfg.locking,
        n_max: cfg.n_max,
        shots: cfg.shots,
        seed: cfg.seed,
    };
    let table = build_table_parallel(&rho, &grid, &model)?;
    io::write_table(out_path(cfg)?, &table)?;
    report_warnings(err, table.warnings());
    writeln!(
        out,
        "nodes {}\nn_max {}\nmax_tail_mass {:e}",
        table.len(),
        table.n_max(),
        table.max_tail_mass()
    )
    .map_err(stdout_err)?;
    Ok(())
}

fn reconstruct_cmd(
    flags: &Flags,
    table_path: &Path,
    truth: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult<()> {
    let table = io::read_table(table_path)?;
    let sidecar = io::Sidecar::from_table(&table);
    let grid_spec = table
        .grid()
        .ok_or_else(|| CliError::Format(format!("{}: sidecar has no grid", table_path.display())))?;
    let base = ConfigFile {
        eta: Some(sidecar.eta),
        squeeze: Some(SqueezeFile {
            mag: Some(sidecar.zeta_mag),
            phase: Some(sidecar.zeta_phase),
        }),
        squeeze_mode: Some(sidecar.squeeze_mode),
        n_max: Some(sidecar.n_max),
        grid: Some(GridFile {
            r_max: Some(grid_spec.r_max),
            n_r: Some(grid_spec.n_r),
            n_theta: Some(grid_spec.n_theta),
        }),
        seed: Some(sidecar.seed),
        ..Default::default()
    };
    let cfg = flags.resolve(base)?;
    if cfg.n_max != table.n_max() {
        return Err(CliError::Invalid(format!(
            "n_max = {} differs from the table's n_max = {}",
            cfg.n_max,
            table.n_max()
        )));
    }
    let params = cfg.kernel_params(cfg.eta, cfg.squeeze.delta())?;
    let grid = PhaseSpaceGrid::new(cfg.grid_for(0.0)?)?;
    let report = reconstruct_with(&table, &params, &grid, cfg.dim, cfg.rule)?;
    io::write_report(out_path(&cfg)?, &report)?;
    report_warnings(err, &report.warnings);
    let text = format!(
        "s {}\nraw_trace {}\nhermiticity_defect {:e}\nmin_eig_before_clip {:e}\n",
        params.s, report.raw_trace, report.hermiticity_defect, report.min_eigenvalue_before_clip
    );
    out.write_all(text.as_bytes()).map_err(stdout_err)?;
    if let Some(t) = truth {
        let (a, b) = same_dim(report.rho_hat.clone(), io::read_density(t)?)?;
        writeln!(out, "fidelity {}", fidelity(&a, &b)?).map_err(stdout_err)?;
    }
    Ok(())
}

fn same_dim(a: DensityMatrix, b: DensityMatrix) -> CliResult<(DensityMatrix, DensityMatrix)> {
    let d = a.dim().max(b.dim());
    Ok((a.embed(d)?, b.embed(d)?))
}

fn compare(a: &Path, b: &Path, out: &mut dyn Write) -> CliResult<()> {
    let (a, b) = same_dim(io::read_density(a)?, io::read_density(b)?)?;
    writeln!(out, "fidelity {}\ntrace_distance {}", fidelity(&a, &b)?, trace_distance(&a, &b)?).map_err(stdout_err)?;
    Ok(())
}

fn is_table(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn qscan(flags: &Flags, input: &Path, kind: ScanKind, out: &mut dyn Write) -> CliResult<()> {
    if is_table(input) {
        if kind != ScanKind::Q {
            return Err(CliError::Invalid("tables support only the zero-count Q scan (--kind q)".into()));
        }
        let cfg = flags.resolve(ConfigFile::default())?;
        let q = q_from_zero_counts(&io::read_table(input)?)?;
        io::write_q_scan(out_path(&cfg)?, &q)?;
        writeln!(out, "s {}\nintegral {}", q.s, q.integral()).map_err(stdout_err)?;
        return Ok(());
    }
    let cfg = flags.resolve(ConfigFile::default())?;
    let rho = io::read_density(input)?;
    let grid = PhaseSpaceGrid::new(cfg.grid_for(amplitude_of(&rho))?)?;
    let path = out_path(&cfg)?;
    let s = match (kind, cfg.s) {
        (ScanKind::Q, _) => -1.0,
        (ScanKind::Wigner, _) | (ScanKind::Chi, SChoice::Auto) => 0.0,
        (_, SChoice::Value(s)) => s,
        (ScanKind::Weight, SChoice::Auto) => {
            return Err(CliError::Invalid("--kind weight needs an explicit --s".into()))
        }
    };
    if kind == ScanKind::Chi {
        let chi = characteristic_scan(&rho, grid.nodes(), s)?;
        io::write_chi_scan(path, grid.nodes(), &chi)?;
        writeln!(out, "s {s}\npoints {}", chi.len()).map_err(stdout_err)?;
        return Ok(());
    }
    let values = grid
        .nodes()
        .iter()
        .map(|a| weight_function(&rho, *a, s))
        .collect::<Result<Vec<f64>, _>>()?;
    io::write_weight_scan(path, grid.nodes(), &values)?;
    let integral: f64 = values.iter().zip(grid.weights()).map(|(v, w)| v * w).sum();
    writeln!(out, "s {s}\nintegral {integral}").map_err(stdout_err)?;
    Ok(())
}

fn stdout_err(e: std::io::Error) -> CliError {
    CliError::io(Path::new("<stdout>"), e)
}

/// Executes a parsed command line, writing results to `out` and diagnostics to `err`.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let flags = &cli.flags;
    match cli.command {
        Command::GenState => gen_state(&flags.resolve(ConfigFile::default())?, out),
        Command::Simulate { ref state_file } => simulate(&flags.resolve(ConfigFile::default())?, state_file, out, err),
        Command::Reconstruct { ref table, ref truth } => reconstruct_cmd(flags, table, truth.as_deref(), out, err),
        Command::Compare { ref a, ref b } => compare(a, b, out),
        Command::Qscan { ref input, kind } => qscan(flags, input, kind, out),
    }
}

/// Process entry point; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    match execute(&cli, &mut stdout.lock(), &mut stderr.lock()) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr.lock(), "error: {e}");
            e.exit_code()
        }
    }
}
