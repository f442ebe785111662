//! Argument parsing and dispatch.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::{self, Format, GaugeArg, Options, Outcome, Session};
use crate::error::{CliError, EXIT_FAILURE, EXIT_OK};
use crate::model::parse_model;
use crate::report::render_json;

#[derive(Debug, Parser)]
#[command(
    name = "hdw-forge",
    version,
    about = "Derive, check and integrate Hamilton-De Donder-Weyl field equations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coefficient tables and the field equations of a model.
    Derive { model: PathBuf },
    /// Machine-check the structural identities of the derived fields.
    Check { model: PathBuf },
    /// Legendre maps, regularity, Euler-Lagrange equations and rank diagnostics.
    Legendre { model: PathBuf },
    /// Integrate the `[solve]` block; writes a grid CSV and a JSON report.
    Solve { model: PathBuf },
    /// Re-solve a model and compare against a stored grid.
    Compare {
        model: PathBuf,
        #[arg(long)]
        against: PathBuf,
        /// Largest acceptable absolute difference.
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormatArg {
    Text,
    Json,
    Csv,
    Latex,
}

#[derive(Debug, Args)]
pub struct Common {
    /// `equal-split` or a file holding a `[gauge]` section.
    #[arg(long, global = true)]
    pub gauge: Option<String>,
    /// Time step override for solve and compare.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Grid override for 1+1 runs, as `<time steps>x<points>`.
    #[arg(long, global = true, value_parser = parse_grid)]
    pub grid: Option<(usize, usize)>,
    /// Output directory for solve.
    #[arg(long, global = true, env = "HDW_FORGE_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: FormatArg,
    /// Seed for randomized check corpora and sample points.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// JSON edit applied to derived fields before checking or solving.
    #[arg(long, global = true, value_name = "FIELD_JSON")]
    pub debug_inject: Option<PathBuf>,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (t, x) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected <time steps>x<points>, got `{s}`"))?;
    let t = t.trim().parse().map_err(|_| format!("bad time step count `{t}`"))?;
    let x = x.trim().parse().map_err(|_| format!("bad point count `{x}`"))?;
    Ok((t, x))
}

fn options(common: &Common) -> Options {
    Options {
        gauge: common.gauge.as_ref().map(|g| match g.as_str() {
            "equal-split" => GaugeArg::EqualSplit,
            path => GaugeArg::File(PathBuf::from(path)),
        }),
        dt: common.dt,
        grid: common.grid,
        out: common.out.clone(),
        format: match common.format {
            FormatArg::Text => Format::Text,
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
            FormatArg::Latex => Format::Latex,
        },
        seed: common.seed,
        debug_inject: common.debug_inject.clone(),
        against: None,
        tolerance: 1e-9,
    }
}

type CommandFn = fn(&Session, &Options) -> Result<Outcome, CliError>;

fn execute(cli: &Cli) -> Result<(Session, Outcome), CliError> {
    let mut opts = options(&cli.common);
    let (model, run): (_, CommandFn) = match &cli.command {
        Command::Derive { model } => (model, commands::derive),
        Command::Check { model } => (model, commands::check),
        Command::Legendre { model } => (model, commands::legendre),
        Command::Solve { model } => (model, commands::solve),
        Command::Compare {
            model,
            against,
            tolerance,
        } => {
            opts.against = Some(against.clone());
            opts.tolerance = *tolerance;
            (model, commands::compare)
        }
    };
    let session = Session::new(parse_model(model)?, &opts)?;
    let outcome = run(&session, &opts)?;
    Ok((session, outcome))
}

/// Run a parsed command line, writing to the given streams. Returns the
/// process exit status.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match execute(cli) {
        Ok((session, outcome)) => {
            let body = match cli.common.format {
                FormatArg::Text => outcome.text.join("\n") + "\n",
                FormatArg::Json => render_json(&outcome.report.to_json(&session.model)),
                FormatArg::Csv => outcome.csv.clone(),
                FormatArg::Latex => outcome.latex.join("\n") + "\n",
            };
            let _ = stdout.write_all(body.as_bytes());
            if let Some(s) = &outcome.summary {
                let _ = writeln!(stderr, "{s}");
            }
            if outcome.report.failed() {
                EXIT_FAILURE
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
