use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use casimir_cli::config::{Command, RawConfig};
use casimir_cli::{run, CliError, EXIT_CONFIG, EXIT_IO, EXIT_NUMERICAL, EXIT_OK};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "casimir", version, about = "Casimir energies, forces and lateral forces between plane and corrugated mirrors")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Closed-form perfect-mirror energy and force.
    Ideal(Opts),
    /// Energy and force between two plane mirrors.
    Lifshitz(Opts),
    /// eta_F over a log-spaced separation grid.
    EtaSweep(Opts),
    /// Proximity-force energy correction and lateral force.
    LateralPfa(Opts),
    /// Response kernel G_C, rho_C and the beyond-PFA lateral force.
    Kernel(Opts),
    /// rho_C over a log-spaced kappa_C L grid.
    RhoSweep(Opts),
    /// Read an optical table and write eps(i xi) on its nodes.
    Ingest(Opts),
}

/// Numeric flags are taken as text so that validation reports the
/// configuration field they set.
#[derive(Args)]
struct Opts {
    /// Configuration file (`key = value`), or a manifest JSON from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override any configuration key.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// quadrature.rel_tol
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<String>,
    /// output.path
    #[arg(long)]
    out: Option<String>,
    /// run.threads (0: all cores)
    #[arg(long)]
    threads: Option<String>,
    /// Both mirrors: gold-plasma, perfect, plasma:<lambda_P>, table:<A|B>:<path>
    #[arg(long)]
    material: Option<String>,
    #[arg(long)]
    mirror1: Option<String>,
    #[arg(long)]
    mirror2: Option<String>,
    /// geometry.separation_L, m
    #[arg(long = "L", allow_hyphen_values = true)]
    separation: Option<String>,
    /// geometry.area_A, m^2
    #[arg(long = "A", allow_hyphen_values = true)]
    area: Option<String>,
    /// geometry.temperature_T, K
    #[arg(long = "T", allow_hyphen_values = true)]
    temperature: Option<String>,
    #[arg(long = "L-min", allow_hyphen_values = true)]
    l_min: Option<String>,
    #[arg(long = "L-max", allow_hyphen_values = true)]
    l_max: Option<String>,
    #[arg(long = "kappaL-min", allow_hyphen_values = true)]
    kappa_l_min: Option<String>,
    #[arg(long = "kappaL-max", allow_hyphen_values = true)]
    kappa_l_max: Option<String>,
    /// Grid size of the command's sweep.
    #[arg(long, allow_hyphen_values = true)]
    points: Option<String>,
    /// corrugation.a1, m
    #[arg(long, allow_hyphen_values = true)]
    a1: Option<String>,
    /// corrugation.a2, m
    #[arg(long, allow_hyphen_values = true)]
    a2: Option<String>,
    /// corrugation.kappa_C, 1/m
    #[arg(long = "kappa-C", allow_hyphen_values = true)]
    kappa_c: Option<String>,
    /// corrugation.b, m
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    /// ingest.input
    #[arg(long)]
    input: Option<String>,
    /// ingest.format (A or B)
    #[arg(long)]
    format: Option<String>,
}

impl Cmd {
    fn split(self) -> (Command, Opts) {
        match self {
            Cmd::Ideal(o) => (Command::Ideal, o),
            Cmd::Lifshitz(o) => (Command::Lifshitz, o),
            Cmd::EtaSweep(o) => (Command::EtaSweep, o),
            Cmd::LateralPfa(o) => (Command::LateralPfa, o),
            Cmd::Kernel(o) => (Command::Kernel, o),
            Cmd::RhoSweep(o) => (Command::RhoSweep, o),
            Cmd::Ingest(o) => (Command::Ingest, o),
        }
    }
}

fn load(path: &PathBuf) -> anyhow::Result<RawConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CliError::Io { path: path.clone(), source })
        .with_context(|| format!("reading config {}", path.display()))?;
    // A manifest carries the canonical configuration text.
    let text = match serde_json::from_str::<serde_json::Value>(&text) {
        Ok(v) => v
            .get("config")
            .and_then(|c| c.as_str())
            .map(str::to_string)
            .ok_or_else(|| CliError::Invalid(format!("{}: JSON without a 'config' string", path.display())))?,
        Err(_) => text,
    };
    Ok(RawConfig::parse(&text).map_err(CliError::from)?)
}

fn build(command: Command, o: Opts) -> anyhow::Result<RawConfig> {
    let mut raw = match &o.config {
        Some(p) => load(p)?,
        None => RawConfig::default(),
    };
    let err = |e| anyhow::Error::from(CliError::from(e));
    raw.set("command", command.name()).map_err(err)?;
    if let Some(m) = &o.material {
        raw.set_material("mirror1", m).map_err(err)?;
        raw.set_material("mirror2", m).map_err(err)?;
    }
    for (prefix, m) in [("mirror1", &o.mirror1), ("mirror2", &o.mirror2)] {
        if let Some(m) = m {
            raw.set_material(prefix, m).map_err(err)?;
        }
    }
    let points_key = match command {
        Command::RhoSweep => "sweep.kappaL_points",
        Command::LateralPfa | Command::Kernel => "sweep.b_points",
        _ => "sweep.L_points",
    };
    let flags = [
        ("quadrature.rel_tol", &o.tol),
        ("output.path", &o.out),
        ("run.threads", &o.threads),
        ("geometry.separation_L", &o.separation),
        ("geometry.area_A", &o.area),
        ("geometry.temperature_T", &o.temperature),
        ("sweep.L_min", &o.l_min),
        ("sweep.L_max", &o.l_max),
        ("sweep.kappaL_min", &o.kappa_l_min),
        ("sweep.kappaL_max", &o.kappa_l_max),
        (points_key, &o.points),
        ("corrugation.a1", &o.a1),
        ("corrugation.a2", &o.a2),
        ("corrugation.kappa_C", &o.kappa_c),
        ("corrugation.b", &o.b),
        ("ingest.input", &o.input),
        ("ingest.format", &o.format),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            raw.set(key, v).map_err(err)?;
        }
    }
    for pair in &o.set {
        raw.set_pair(pair).map_err(err)?;
    }
    Ok(raw)
}

fn execute(cli: Cli) -> anyhow::Result<u8> {
    let (command, opts) = cli.command.split();
    let raw = build(command, opts)?;
    let config = raw.resolve().map_err(CliError::from)?;
    let report = run(&config)?;
    eprintln!("wrote {} ({} rows), manifest {}", report.csv.display(), report.rows, report.manifest.display());
    if let Some(p) = &report.plot {
        eprintln!("plot data {}", p.display());
    }
    if report.converged {
        Ok(EXIT_OK)
    } else {
        eprintln!("warning: some results did not reach the requested tolerance (see the 'converged' column)");
        Ok(EXIT_NUMERICAL)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<CliError>().map_or(EXIT_IO, |c| c.exit_code());
            debug_assert!([EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO].contains(&code));
            ExitCode::from(code)
        }
    }
}
