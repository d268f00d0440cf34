use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cp_multipole::dataio::commands::{
    cmd_asymptote, cmd_potential, cmd_ratio, cmd_verify, AsymptoteRow, RatioReport, VerifyOptions,
};
use cp_multipole::dataio::config::parse_channels;
use cp_multipole::dataio::output::RunMetadata;
use cp_multipole::dataio::{
    bundled_cs_fixture, load_dataset, AtomDataset, ModelSpec, RunConfig, ZGrid,
};
use cp_multipole::halfspace_green::DyadFault;
use cp_multipole::potentials::QuadMode;
use cp_multipole::units::UnitSystem;
use cp_multipole::{Error, Result};

#[derive(Parser)]
#[command(
    name = "cp-multipole",
    version,
    about = "Casimir-Polder multipole potentials near a dielectric half-space"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate U(z) per channel as CSV.
    Potential(PotentialArgs),
    /// Run the invariant suites and print a JSON report.
    Verify(VerifyArgs),
    /// Static polarizability ratio and retarded potential ratio.
    Ratio(RatioArgs),
    /// Compare retarded closed forms with fitted numerical coefficients.
    Asymptote(AsymptoteArgs),
}

#[derive(Args)]
#[group(required = false, multiple = false)]
struct ModelArgs {
    /// Constant permittivity of the half-space.
    #[arg(long, value_name = "VALUE")]
    epsilon: Option<f64>,
    /// Drude-Lorentz parameters (frequencies in the selected units).
    #[arg(long, value_name = "WP,W0,GAMMA")]
    drude_lorentz: Option<String>,
    /// Perfectly reflecting half-space (default).
    #[arg(long)]
    perfect_mirror: bool,
}

impl ModelArgs {
    fn spec(&self) -> Result<ModelSpec> {
        if let Some(eps) = self.epsilon {
            Ok(ModelSpec::Epsilon { epsilon: eps })
        } else if let Some(dl) = &self.drude_lorentz {
            ModelSpec::parse_drude_lorentz(dl)
        } else {
            Ok(ModelSpec::PerfectMirror)
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Dataset file (JSON); the bundled Cs fixture when omitted.
    #[arg(long, value_name = "PATH")]
    data: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
    /// Comma-separated channels out of dd, qq, od, do.
    #[arg(long, value_name = "LIST", default_value = "dd,qq,od,do")]
    channels: String,
    /// Relative tolerance of the frequency quadrature.
    #[arg(long, default_value_t = 1e-8, allow_negative_numbers = true)]
    tol: f64,
    /// Unit system for distances, energies and model frequencies.
    #[arg(long, value_parser = ["si", "au", "natural"], default_value = "au")]
    units: String,
    /// Quadrupole contraction: isotropic or tensor.
    #[arg(long, value_parser = ["isotropic", "tensor"], default_value = "isotropic")]
    qq_mode: String,
}

#[derive(Args)]
struct PotentialArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    zmin: f64,
    #[arg(long, default_value_t = 1e4, allow_negative_numbers = true)]
    zmax: f64,
    #[arg(long, default_value_t = 61)]
    points: usize,
    /// Logarithmic spacing of the distance grid.
    #[arg(long)]
    log: bool,
    /// CSV destination; a `.meta.json` sidecar is written next to it.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 20240917)]
    seed: u64,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Flip the sign of the p-dyad off-diagonal entries (negative control).
    #[arg(long, hide = true)]
    inject_dyad_fault: bool,
}

#[derive(Args)]
struct RatioArgs {
    #[arg(long, value_name = "PATH")]
    data: Option<PathBuf>,
    /// Skip the quadrature cross-check at large distance.
    #[arg(long)]
    no_numerical: bool,
    #[arg(long)]
    json: bool,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AsymptoteArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    json: bool,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn dataset(path: &Option<PathBuf>) -> Result<AtomDataset> {
    match path {
        Some(p) => load_dataset(p),
        None => Ok(bundled_cs_fixture()),
    }
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn config(common: &CommonArgs, grid: ZGrid) -> Result<RunConfig> {
    let cfg = RunConfig {
        model: common.model.spec()?,
        grid,
        channels: parse_channels(&common.channels)?,
        tol: common.tol,
        units: common.units.parse::<UnitSystem>()?,
        qq_mode: common.qq_mode.parse::<QuadMode>()?,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn run_potential(args: &PotentialArgs) -> Result<u8> {
    let grid = ZGrid {
        min: args.zmin,
        max: args.zmax,
        points: args.points,
        log: args.log,
    };
    let cfg = config(&args.common, grid)?;
    let ds = dataset(&args.common.data)?;
    let set = cmd_potential(&cfg, &ds, sink(&args.out)?)?;
    if let Some(out) = &args.out {
        let meta = RunMetadata::new(&cfg, &ds.atom, &ds.provenance, &set);
        std::fs::write(meta_path(out), serde_json::to_string_pretty(&meta)? + "\n")?;
    }
    let failed = set.failure_count();
    if failed > 0 {
        eprintln!("{failed} point(s) failed; see NaN cells");
        return Ok(4);
    }
    Ok(0)
}

fn run_verify(args: &VerifyArgs) -> Result<u8> {
    let fault = args
        .inject_dyad_fault
        .then_some(DyadFault::FlipPOffDiagonalSign);
    let report = cmd_verify(&VerifyOptions {
        fault,
        seed: args.seed,
    })?;
    let mut w = sink(&args.out)?;
    writeln!(w, "{}", serde_json::to_string_pretty(&report)?)?;
    Ok(if report.passed { 0 } else { 1 })
}

fn print_ratio(w: &mut dyn Write, r: &RatioReport) -> io::Result<()> {
    writeln!(w, "atom                         {}", r.atom)?;
    writeln!(
        w,
        "alpha_od(0) + alpha_do(0)    {:e}",
        r.alpha_od + r.alpha_do
    )?;
    writeln!(w, "alpha_qq(0)                  {:e}", r.alpha_qq)?;
    writeln!(
        w,
        "polarizability ratio         {:.6}",
        r.polarizability_ratio
    )?;
    writeln!(w, "prefactor                    2/15")?;
    writeln!(w, "potential ratio              {:.6}", r.potential_ratio)?;
    if let (Some(n), Some(z)) = (r.numerical_potential_ratio, r.numerical_z) {
        writeln!(w, "numerical ratio (z = {z:.4e} bohr, mirror)  {n:.6}")?;
    }
    Ok(())
}

fn run_ratio(args: &RatioArgs) -> Result<u8> {
    let report = cmd_ratio(&dataset(&args.data)?, !args.no_numerical)?;
    let mut w = sink(&args.out)?;
    if args.json {
        writeln!(w, "{}", serde_json::to_string_pretty(&report)?)?;
    } else {
        print_ratio(&mut w, &report)?;
    }
    Ok(0)
}

fn print_rows(w: &mut dyn Write, rows: &[AsymptoteRow], units: UnitSystem) -> io::Result<()> {
    writeln!(
        w,
        "{:<8}{:>6}{:>16}{:>16}{:>12}{:>10}{:>8}",
        "channel", "power", "analytic", "fitted", "deviation", "exponent", "order"
    )?;
    writeln!(
        w,
        "# coefficients in {} * {}^n",
        units.energy_unit(),
        units.length_unit()
    )?;
    let opt = |x: Option<f64>, p: usize| x.map_or_else(|| "-".to_string(), |v| format!("{v:.p$}"));
    for r in rows {
        writeln!(
            w,
            "{:<8}{:>6}{:>16.6e}{:>16.6e}{:>12.2e}{:>10}{:>8}",
            r.channel.short_name(),
            r.power,
            r.analytic,
            r.fitted,
            r.deviation,
            opt(r.exponent, 4),
            opt(r.convergence_order, 2)
        )?;
    }
    Ok(())
}

fn run_asymptote(args: &AsymptoteArgs) -> Result<u8> {
    let grid = ZGrid {
        min: 1.0,
        max: 1.0,
        points: 1,
        log: false,
    };
    let cfg = config(&args.common, grid)?;
    let mut rows = cmd_asymptote(&cfg, &dataset(&args.common.data)?)?;
    let u = cfg.units;
    for r in &mut rows {
        let scale = u.energy_from_natural(1.0) * u.length_from_natural(1.0).powi(r.power);
        r.analytic *= scale;
        r.fitted *= scale;
    }
    let mut w = sink(&args.out)?;
    if args.json {
        writeln!(w, "{}", serde_json::to_string_pretty(&rows)?)?;
    } else {
        print_rows(&mut w, &rows, u)?;
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Potential(a) => run_potential(a),
        Command::Verify(a) => run_verify(a),
        Command::Ratio(a) => run_ratio(a),
        Command::Asymptote(a) => run_asymptote(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_status(&e))
        }
    }
}

fn exit_status(e: &Error) -> u8 {
    e.exit_code() as u8
}
