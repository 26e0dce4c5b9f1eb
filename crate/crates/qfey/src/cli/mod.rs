//! Command-line surface: `qfey evolve | converge | tangency | kernel |
//! compare-formulas`, each emitting CSV.
//!
//! Flags override values from an optional `--config key=value` file. Output
//! is written to a temporary file and renamed into place, so a failed run
//! leaves no partial file. Exit codes: 0 success, 1 usage error, 2 numerical
//! failure; every error prints exactly one diagnostic line to stderr.

pub mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::error::{QfeyError, Result};
use crate::families::{default_t_samples, measure_tangency, GeneratorDescriptor, TangentFamily};
use crate::grid::{Grid, WaveFunction};
use crate::kernels::{gauss_kernel, polyharmonic_kernel, PolyharmonicParams};
use crate::operators::LinearOperator;
use crate::oracle::{
    discretize_hamiltonian, free_packet_evolution, EigenDecomposition, HamiltonianKind,
    HamiltonianSpec, PacketParams,
};
use crate::propagator::{
    evaluate_formula, evolve_schrodinger, resolve_k, run_convergence, FormulaId, PropagationSpec,
};

use config::{ExpMethodChoice, FamilyKind, PotentialPreset, ReferenceKind, RunConfig};

#[derive(Parser)]
#[command(
    name = "qfey",
    version,
    about = "Quasi-Feynman propagation on a periodic 1-D grid"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate a wave packet; CSV columns x,re_psi,im_psi,abs_psi
    Evolve(CommonArgs),
    /// Chernoff convergence study; CSV columns n,l2_error,sup_error,runtime_ms
    Converge(CommonArgs),
    /// Measure tangency residuals; CSV columns t,residual_norm plus a slope line
    Tangency(TangencyArgs),
    /// Tabulate a kernel; CSV columns y,kernel_value plus a normalization line
    Kernel(KernelArgs),
    /// Cross-check formula variants; CSV columns formula_id,l2_diff_vs_F1_merged,runtime_ms
    #[command(name = "compare-formulas")]
    CompareFormulas(CommonArgs),
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// key=value config file; explicit flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// heat-gauss | polyharmonic
    #[arg(long)]
    family: Option<String>,
    /// polyharmonic order (2..=8)
    #[arg(long = "N")]
    n_order: Option<usize>,
    /// zero | cosine:amp,freq | sech2:depth,width | gaussian-well:depth,width
    #[arg(long)]
    potential: Option<String>,
    /// grid as min,max,m
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// the nonzero real constant multiplying the generator
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    /// evolution time (may be negative)
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    /// Chernoff subdivision count
    #[arg(long)]
    n: Option<usize>,
    /// comma-separated n values for convergence studies
    #[arg(long = "n-list")]
    n_list: Option<String>,
    /// taylor | euler | scaling-squaring
    #[arg(long = "exp-method")]
    exp_method: Option<String>,
    /// F1_product | F1_merged | F2_taylor | F3_binomial | F4_euler |
    /// F5_euler_binomial | F6_full_binomial
    #[arg(long)]
    formula: Option<String>,
    /// inner expansion order for F2..F6
    #[arg(long)]
    k: Option<usize>,
    /// initial Gaussian packet as x0,p0,sigma
    #[arg(long, allow_hyphen_values = true)]
    packet: Option<String>,
    /// oracle | analytic
    #[arg(long)]
    reference: Option<String>,
    /// comma-separated probe times for tangency
    #[arg(long = "t-samples")]
    t_samples: Option<String>,
    /// use the three-point recombination of the family
    #[arg(long = "three-point")]
    three_point: bool,
    /// output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TangencyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// negative control: deliberately detune the family's generator
    #[arg(long)]
    broken: bool,
}

#[derive(Args)]
struct KernelArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// gauss | polyharmonic (defaults to the family's kernel)
    #[arg(long)]
    kind: Option<String>,
}

/// Parse the process arguments, run, and map errors to exit codes.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return 0;
        }
        Err(e) if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            eprintln!("error: missing subcommand (run qfey --help for usage)");
            return 1;
        }
        Err(e) => {
            let msg = e.to_string();
            let line = msg
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments");
            eprintln!("{line}");
            return 1;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &QfeyError) -> i32 {
    match e {
        QfeyError::InvalidGrid(_)
        | QfeyError::InvalidParameter(_)
        | QfeyError::GridMismatch
        | QfeyError::DimensionMismatch { .. }
        | QfeyError::GuardViolation(_) => 1,
        _ => 2,
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Evolve(args) => cmd_evolve(&resolve_config(&args, None)?),
        Command::Converge(args) => cmd_converge(&resolve_config(&args, None)?),
        Command::Tangency(args) => {
            let cfg = resolve_config(&args.common, None)?;
            cmd_tangency(&cfg, args.broken)
        }
        Command::Kernel(args) => {
            let kind = args.kind.clone();
            let cfg = resolve_config(&args.common, kind.as_deref())?;
            cmd_kernel(&cfg, kind.as_deref())
        }
        Command::CompareFormulas(args) => cmd_compare_formulas(&resolve_config(&args, None)?),
    }
}

/// Merge defaults, config file and flags (in that order of precedence).
fn resolve_config(args: &CommonArgs, kernel_kind: Option<&str>) -> Result<RunConfig> {
    let mut grid_given = false;
    let mut cfg = if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| QfeyError::InvalidParameter(format!("cannot read config file: {e}")))?;
        grid_given = text
            .lines()
            .any(|l| l.trim_start().starts_with("grid") && l.contains('='));
        RunConfig::parse(&text)?
    } else {
        RunConfig::default()
    };

    if let Some(v) = &args.family {
        cfg.family = FamilyKind::parse(v)?;
    }
    if let Some(v) = args.n_order {
        cfg.n_order = v;
    }
    if let Some(v) = &args.potential {
        cfg.potential = PotentialPreset::parse(v)?;
    }
    if let Some(v) = &args.grid {
        cfg.set("grid", v)?;
        grid_given = true;
    }
    if let Some(v) = args.a {
        cfg.a = v;
    }
    if let Some(v) = args.t {
        cfg.t = v;
    }
    if let Some(v) = args.n {
        cfg.n = v;
    }
    if let Some(v) = &args.n_list {
        cfg.set("n_list", v)?;
    }
    if let Some(v) = &args.exp_method {
        cfg.exp_method = ExpMethodChoice::parse(v)?;
    }
    if let Some(v) = &args.formula {
        cfg.formula = FormulaId::parse(v)?;
    }
    if let Some(v) = args.k {
        cfg.k = Some(v);
    }
    if let Some(v) = &args.packet {
        cfg.set("packet", v)?;
    }
    if let Some(v) = &args.reference {
        cfg.reference = ReferenceKind::parse(v)?;
    }
    if let Some(v) = &args.t_samples {
        cfg.set("t_samples", v)?;
    }
    if args.three_point {
        cfg.three_point = true;
    }
    if let Some(v) = &args.out {
        cfg.out = Some(v.display().to_string());
    }

    // the polyharmonic kernel decays slowly; default it to the wider box
    let polyharmonic =
        cfg.family == FamilyKind::Polyharmonic || kernel_kind == Some("polyharmonic");
    if !grid_given && polyharmonic {
        cfg.grid = (-40.0, 40.0, 512);
    }
    Ok(cfg)
}

fn build_family(cfg: &RunConfig, grid: Grid) -> Result<TangentFamily> {
    let potential = cfg.potential.sample(grid)?;
    let base = match cfg.family {
        FamilyKind::HeatGauss => TangentFamily::heat_gauss(&potential, grid)?,
        FamilyKind::Polyharmonic => TangentFamily::polyharmonic(&potential, cfg.n_order, grid)?,
    };
    if cfg.three_point {
        base.three_point()
    } else {
        Ok(base)
    }
}

fn oracle_hamiltonian(cfg: &RunConfig, grid: Grid) -> Result<LinearOperator> {
    let kind = match cfg.family {
        FamilyKind::HeatGauss => HamiltonianKind::HalfLaplacianMinusV,
        FamilyKind::Polyharmonic => HamiltonianKind::NegPolyharmonicMinusV {
            n_order: cfg.n_order,
        },
    };
    let spec = HamiltonianSpec::new(kind, cfg.potential.sample(grid)?, grid)?;
    discretize_hamiltonian(&spec)
}

fn initial_packet(cfg: &RunConfig, grid: Grid) -> Result<WaveFunction> {
    PacketParams {
        x0: cfg.packet.0,
        p0: cfg.packet.1,
        sigma: cfg.packet.2,
    }
    .sample(grid)
}

fn emit(cfg: &RunConfig, csv: String) -> Result<()> {
    match &cfg.out {
        Some(path) => write_atomic(Path::new(path), &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

/// Shortest-round-trip decimal, switching to scientific notation outside
/// a readable magnitude window.
fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v != 0.0 && (a < 1e-4 || a >= 1e15) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// Write to `<path>.tmp`, then rename into place.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let io_err = |e: std::io::Error| QfeyError::Io(e.to_string());
    std::fs::write(&tmp, contents).map_err(io_err)?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        io_err(e)
    })
}

fn cmd_evolve(cfg: &RunConfig) -> Result<()> {
    let grid = cfg.make_grid()?;
    let family = build_family(cfg, grid)?;
    let psi0 = initial_packet(cfg, grid)?;
    let spec = PropagationSpec::new(cfg.a, cfg.t, cfg.n)?
        .with_method(cfg.exp_method.to_method())
        .with_formula(cfg.formula);
    let psi = match cfg.formula {
        FormulaId::F1Product | FormulaId::F1Merged => evolve_schrodinger(&family, &spec, &psi0)?,
        _ => match cfg.k {
            Some(k) => evaluate_formula(&family, &spec, &psi0, k)?,
            None => resolve_k(&family, &spec, &psi0)?.state,
        },
    };
    let mut csv = String::from("x,re_psi,im_psi,abs_psi\n");
    for (j, z) in psi.values().iter().enumerate() {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            fmt_num(grid.point(j)),
            fmt_num(z.re),
            fmt_num(z.im),
            fmt_num(z.norm())
        );
    }
    emit(cfg, csv)
}

fn cmd_converge(cfg: &RunConfig) -> Result<()> {
    let grid = cfg.make_grid()?;
    let family = build_family(cfg, grid)?;
    let psi0 = initial_packet(cfg, grid)?;
    let n_list = cfg
        .n_list
        .clone()
        .unwrap_or_else(|| vec![1, 2, 4, 8, 16, 32, 64]);
    let (reference, descriptor) = match cfg.reference {
        ReferenceKind::Oracle => {
            let h = oracle_hamiltonian(cfg, grid)?;
            let eig = EigenDecomposition::new(&h)?;
            (eig.group(cfg.a, cfg.t, &psi0)?, "oracle")
        }
        ReferenceKind::Analytic => {
            if cfg.potential != PotentialPreset::Zero || cfg.family != FamilyKind::HeatGauss {
                return Err(QfeyError::InvalidParameter(
                    "analytic reference requires the heat-gauss family with zero potential"
                        .into(),
                ));
            }
            (
                free_packet_evolution(
                    cfg.packet.0,
                    cfg.packet.1,
                    cfg.packet.2,
                    cfg.a,
                    cfg.t,
                    grid,
                )?,
                "analytic",
            )
        }
    };
    let report = run_convergence(&family, cfg.a, cfg.t, &n_list, &psi0, &reference, descriptor)?;
    let mut csv = String::from("n,l2_error,sup_error,runtime_ms\n");
    for row in &report.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            row.n,
            fmt_num(row.l2_error),
            fmt_num(row.sup_error),
            fmt_num(row.runtime_ms)
        );
    }
    emit(cfg, csv)
}

fn cmd_tangency(cfg: &RunConfig, broken: bool) -> Result<()> {
    let grid = cfg.make_grid()?;
    let family = build_family(cfg, grid)?;
    let family = if broken {
        // wrong generator on purpose: S(t/2) is tangent to H/2, so the
        // residual plateaus and the fitted slope collapses to about zero
        let inner = family.clone();
        TangentFamily::from_builder(grid, GeneratorDescriptor::Custom, true, move |t| {
            inner.build(t / 2.0)
        })
    } else {
        family
    };
    let h = oracle_hamiltonian(cfg, grid)?;
    let max_mode = match cfg.family {
        FamilyKind::HeatGauss => grid.len() / 8,
        FamilyKind::Polyharmonic => grid.len() / 32,
    };
    let f = initial_packet(cfg, grid)?.band_limited(max_mode);
    let t_samples = cfg.t_samples.clone().unwrap_or_else(default_t_samples);
    let report = measure_tangency(&family, &f, &h, &t_samples)?;
    let mut csv = String::from("t,residual_norm\n");
    for (t, r) in report.t_samples.iter().zip(&report.residual_norms) {
        let _ = writeln!(csv, "{},{}", fmt_num(*t), fmt_num(*r));
    }
    let _ = writeln!(csv, "# slope={}", fmt_num(report.fitted_slope));
    emit(cfg, csv)
}

fn cmd_kernel(cfg: &RunConfig, kind: Option<&str>) -> Result<()> {
    let grid = cfg.make_grid()?;
    let kind = match kind {
        Some("gauss") => FamilyKind::HeatGauss,
        Some("polyharmonic") => FamilyKind::Polyharmonic,
        Some(other) => {
            return Err(QfeyError::InvalidParameter(format!(
                "unknown kernel kind '{other}' (expected gauss or polyharmonic)"
            )))
        }
        None => cfg.family,
    };
    let t = cfg.t;
    let params = match kind {
        FamilyKind::HeatGauss => None,
        FamilyKind::Polyharmonic => Some(PolyharmonicParams::new(cfg.n_order)?),
    };
    let m = grid.len();
    // circular offsets ordered from most negative to most positive
    let order = (m / 2 + 1..m).chain(0..=m / 2);
    let mut body = String::new();
    let mut mass = 0.0;
    for j in order {
        let y = grid.circular_offset(j);
        let value = match &params {
            None => gauss_kernel(t, y)?,
            Some(p) => polyharmonic_kernel(t, y, p)?,
        };
        mass += value * grid.h();
        let _ = writeln!(body, "{},{}", fmt_num(y), fmt_num(value));
    }
    let mut csv = String::from("y,kernel_value\n");
    csv.push_str(&body);
    let _ = writeln!(csv, "# normalization={}", fmt_num(mass));
    emit(cfg, csv)
}

fn cmd_compare_formulas(cfg: &RunConfig) -> Result<()> {
    let grid = cfg.make_grid()?;
    let family = build_family(cfg, grid)?;
    let psi0 = initial_packet(cfg, grid)?;
    let base = PropagationSpec::new(cfg.a, cfg.t, cfg.n)?.with_method(cfg.exp_method.to_method());
    let merged = evolve_schrodinger(&family, &base.with_formula(FormulaId::F1Merged), &psi0)?;
    let k = cfg.k.unwrap_or(30);
    let mut csv = String::from("formula_id,l2_diff_vs_F1_merged,runtime_ms\n");
    for formula in [
        FormulaId::F2Taylor,
        FormulaId::F3Binomial,
        FormulaId::F4Euler,
        FormulaId::F5EulerBinomial,
        FormulaId::F6FullBinomial,
    ] {
        let spec = base.with_formula(formula);
        let start = Instant::now();
        match evaluate_formula(&family, &spec, &psi0, k) {
            Ok(state) => {
                let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
                let diff = state.sub(&merged)?.l2_norm();
                let _ = writeln!(
                    csv,
                    "{},{},{}",
                    formula.name(),
                    fmt_num(diff),
                    fmt_num(runtime_ms)
                );
            }
            Err(QfeyError::GuardViolation(_)) => {
                let _ = writeln!(csv, "{},skipped,0", formula.name());
            }
            Err(other) => return Err(other),
        }
    }
    emit(cfg, csv)
}
