mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use orbicat::Tolerance;

#[derive(Parser, Debug)]
#[command(name = "orbicat", version, about = "Orbifold data, Wilson lines and Drinfeld centres of fusion categories")]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Residual threshold for every check.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Seed for randomized idempotent splitting.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Emit JSON (default).
    #[arg(long, global = true, conflicts_with = "table")]
    pub json: bool,
    /// Emit aligned human-readable tables.
    #[arg(long, global = true)]
    pub table: bool,
    /// Write the report here instead of stdout.
    #[arg(short = 'o', long = "output", global = true)]
    pub output: Option<PathBuf>,
}

impl RunArgs {
    pub fn tolerance(&self) -> Tolerance {
        Tolerance::uniform(self.tol)
    }
}

/// Inputs are file paths, or `builtin:<name>` for the bundled categories.
#[derive(Subcommand, Debug)]
enum Command {
    /// Fusion category input.
    #[command(subcommand)]
    Cat(CatCmd),
    /// Orbifold data.
    #[command(subcommand)]
    Orbifold(OrbifoldCmd),
    /// The Wilson-line category of an orbifold datum.
    #[command(subcommand)]
    Ca(CaCmd),
    /// Drinfeld centre via the tube algebra.
    Centre { cat: String },
    /// Match two modular data files up to a unit-fixing relabelling.
    Compare { a: PathBuf, b: PathBuf },
    /// Local modules of a commutative algebra.
    Locmod { cat: String, alg: PathBuf },
    /// End-to-end pipelines.
    #[command(subcommand)]
    Pipeline(PipelineCmd),
}

#[derive(Subcommand, Debug)]
enum CatCmd {
    /// Pentagon, hexagon and dimension checks.
    Check { cat: String },
    /// Print a bundled category as JSON.
    Builtin { name: String },
}

#[derive(Subcommand, Debug)]
enum OrbifoldCmd {
    /// The orbifold datum of a spherical category.
    BuildSpherical { cat: String },
    /// Verify O1–O8 and the derived identities.
    Check { datum: PathBuf },
}

#[derive(Subcommand, Debug)]
enum CaCmd {
    /// Enumerate simple objects.
    Simples {
        datum: PathBuf,
        /// Also compute fusion rules.
        #[arg(long)]
        fusion: bool,
    },
    /// S, T, quantum dimensions and the modularity checks.
    Modular { datum: PathBuf },
}

#[derive(Subcommand, Debug)]
enum PipelineCmd {
    /// Orbifold route against the centre oracle.
    CentreCheck { cat: String },
}

fn configure_threads() -> Result<(), commands::CliError> {
    if let Ok(v) = std::env::var("ORBICAT_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| commands::CliError::usage(format!("ORBICAT_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| commands::CliError::usage(e.to_string()))?;
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<commands::Outcome, commands::CliError> {
    use commands as c;
    let r = &cli.run;
    match &cli.cmd {
        Command::Cat(CatCmd::Check { cat }) => c::cat_check(r, cat),
        Command::Cat(CatCmd::Builtin { name }) => c::cat_builtin(name),
        Command::Orbifold(OrbifoldCmd::BuildSpherical { cat }) => c::build_spherical(cat),
        Command::Orbifold(OrbifoldCmd::Check { datum }) => c::orbifold_check(r, datum),
        Command::Ca(CaCmd::Simples { datum, fusion }) => c::ca_simples(r, datum, *fusion),
        Command::Ca(CaCmd::Modular { datum }) => c::ca_modular(r, datum),
        Command::Centre { cat } => c::centre(r, cat),
        Command::Compare { a, b } => c::compare(r, a, b),
        Command::Locmod { cat, alg } => c::locmod(r, cat, alg),
        Command::Pipeline(PipelineCmd::CentreCheck { cat }) => c::centre_check(r, cat),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| dispatch(&cli)).and_then(|out| {
        let text = if cli.run.table { render::table(&out.body) } else { render::json(&out.body) };
        match &cli.run.output {
            Some(p) => std::fs::write(p, text).map_err(|e| commands::CliError::io(p, e))?,
            None => print!("{text}"),
        }
        Ok(out.passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let mut body = json!({ "error": e.kind, "message": e.message, "exit_code": e.code });
            if let Some((line, column)) = e.location {
                body["line"] = json!(line);
                body["column"] = json!(column);
            }
            eprintln!("{body}");
            ExitCode::from(e.code)
        }
    }
}
