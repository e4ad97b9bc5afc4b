use std::path::PathBuf;
use std::process::ExitCode;

use anonybench::commands::{self, CommandOutput};
use anonybench::{api, demo, io, RunConfig, Session};
use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "anonybench", version, about = "Anonymize tables and graphs, attack the releases, answer DP counts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run config JSON; relative paths inside it resolve against its directory.
    #[arg(long, env = "ANONYBENCH_CONFIG")]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Search the lattice and write the release CSV and run report.
    Anonymize(Common),
    /// Anonymize, then run the configured attacks on the release.
    Attack(Common),
    /// k-degree anonymize the configured edge list.
    Graph(Common),
    /// Answer the configured count queries under the privacy budget.
    Dp(Common),
    /// Serve the HTTP API for the run.
    Serve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        port: Option<u16>,
    },
    /// Write demo inputs, or a table from a synthetic spec.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2000)]
        rows: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Synthetic spec JSON to generate from instead of the demo.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
}

fn load(common: &Common) -> Result<RunConfig> {
    let mut config = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<CommandOutput> {
    match cli.command {
        Command::Anonymize(c) => commands::anonymize(&load(&c)?),
        Command::Attack(c) => commands::attack(&load(&c)?),
        Command::Graph(c) => commands::graph(&load(&c)?),
        Command::Dp(c) => commands::dp(&load(&c)?),
        Command::Serve { common, port } => {
            let config = load(&common)?;
            let port = port.unwrap_or(config.port());
            let session = Session::load(config)?;
            let run = session.search()?;
            let state = api::AppState::new(session, run)?;
            tokio::runtime::Runtime::new()?.block_on(api::serve(state, port))?;
            Ok(CommandOutput {
                code: 0,
                stdout: String::new(),
            })
        }
        Command::Generate { out, rows, seed, spec } => {
            let files = match spec {
                Some(p) => {
                    let spec = serde_json::from_str(&io::read_text(&p)?).with_context(|| format!("{}", p.display()))?;
                    demo::generate_from_spec(&out, &spec)?
                }
                None => demo::generate_demo(&out, rows, seed)?,
            };
            let stdout = files.iter().map(|f| format!("{}\n", out.join(f).display())).collect();
            Ok(CommandOutput { code: 0, stdout })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
