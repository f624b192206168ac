use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use monotile_cli::commands::{self, CliError, GenerateArgs, RenderArgs, SearchArgs, TorusScanArgs};
use monotile_cli::service::{serve, AppState};

#[derive(Parser)]
#[command(
    name = "monotile",
    version,
    about = "Generate, verify and render decorated hexagonal monotile patches"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a hexagonal region and write the patch document.
    Generate {
        /// Shipped rule-set name or path to a rule-set document.
        #[arg(long)]
        ruleset: String,
        #[arg(long)]
        radius: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2_000_000)]
        node_limit: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also render the patch to this SVG file.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long, default_value = "outline")]
        style: String,
    },
    /// Check a patch document against every clause.
    Verify {
        patch: PathBuf,
        /// Override the rule set named in the document.
        #[arg(long)]
        ruleset: Option<String>,
    },
    /// Print the tiler's placement order.
    Order {
        patch: PathBuf,
        #[arg(long)]
        ruleset: Option<String>,
    },
    /// Solve every canonical torus up to a determinant.
    TorusScan {
        #[arg(long)]
        ruleset: String,
        #[arg(long)]
        max_det: u32,
        #[arg(long, default_value_t = 2_000_000)]
        node_limit: u64,
        #[arg(long)]
        out: PathBuf,
        /// Run bases one after another instead of on the thread pool.
        #[arg(long)]
        sequential: bool,
    },
    /// Render a patch document to SVG.
    Render {
        patch: PathBuf,
        #[arg(long)]
        style: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 40.0)]
        size: f64,
        /// Color overrides, e.g. `male=#ff0000,stripe=black`.
        #[arg(long)]
        palette: Option<String>,
        #[arg(long)]
        ruleset: Option<String>,
    },
    /// Expand a rule-set template and keep the instantiations that pass the
    /// filter.
    Search {
        template: PathBuf,
        #[arg(long, default_value_t = 4096)]
        max_candidates: usize,
        #[arg(long, default_value_t = 200_000)]
        node_limit: u64,
        /// Write every survivor here as `<name>-<index>.json`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run the HTTP session service.
    Serve {
        #[arg(long)]
        port: u16,
        #[arg(long)]
        ruleset: String,
        /// Persist sessions as patch documents in this directory.
        #[arg(long)]
        sessions: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Generate {
            ruleset,
            radius,
            seed,
            node_limit,
            out,
            svg,
            style,
        } => commands::generate(
            &GenerateArgs {
                ruleset,
                radius,
                seed,
                node_limit,
                out,
                svg,
                style,
            },
            &mut stdout,
        ),
        Command::Verify { patch, ruleset } => {
            commands::verify(&patch, ruleset.as_deref(), &mut stdout)
        }
        Command::Order { patch, ruleset } => {
            commands::order(&patch, ruleset.as_deref(), &mut stdout, &mut io::stderr())
        }
        Command::TorusScan {
            ruleset,
            max_det,
            node_limit,
            out,
            sequential,
        } => commands::torus_scan_cmd(
            &TorusScanArgs {
                ruleset,
                max_det,
                node_limit,
                out,
                sequential,
            },
            &mut stdout,
        ),
        Command::Render {
            patch,
            style,
            out,
            size,
            palette,
            ruleset,
        } => commands::render(&RenderArgs {
            patch,
            ruleset,
            style,
            size,
            palette,
            out,
        }),
        Command::Search {
            template,
            max_candidates,
            node_limit,
            out_dir,
        } => commands::search(
            &SearchArgs {
                template,
                max_candidates,
                node_limit,
                out_dir,
            },
            &mut stdout,
        ),
        Command::Serve {
            port,
            ruleset,
            sessions,
        } => {
            let rs = commands::resolve_ruleset(&ruleset)?;
            let state = AppState::new(rs, sessions.clone()).map_err(|source| CliError::Io {
                path: sessions.unwrap_or_default(),
                source,
            })?;
            let rt = tokio::runtime::Runtime::new().map_err(|source| CliError::Io {
                path: PathBuf::new(),
                source,
            })?;
            eprintln!("listening on http://127.0.0.1:{port}");
            rt.block_on(serve(port, state))
                .map_err(|source| CliError::Io {
                    path: PathBuf::from(format!("127.0.0.1:{port}")),
                    source,
                })?;
            Ok(commands::EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                commands::EXIT_USAGE as u8
            } else {
                0
            });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
