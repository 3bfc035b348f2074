//! The `tvc` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use tvc_core::image::load_image;
use tvc_core::verify::{self, VerifyConfig};
use tvc_core::{MergePolicy, Side};

use crate::store::{self, StoreError, Workspace};
use crate::view::{self, MigrationView};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "tvc", version, about = "Structural version control for typed tuple documents")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct PairArgs {
    /// Image of variant A.
    pub a: PathBuf,
    /// Image of variant B.
    pub b: PathBuf,
    /// Number of leading history entries both images share.
    #[arg(long, value_name = "N")]
    pub ancestor_prefix: Option<usize>,
    /// Print JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Policy {
    Historical,
    Reverse,
    Random,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create an empty image.
    Init {
        image: PathBuf,
        #[arg(long)]
        replica: String,
    },
    /// Append an edit such as `ins 1 num`, `conv 2 str` or `move 1 2`.
    Edit {
        image: PathBuf,
        #[arg(required = true, num_args = 1.., allow_hyphen_values = true)]
        edit: Vec<String>,
    },
    /// Print the document and history of an image.
    Show {
        image: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Print the agreement and the differences of two images.
    Diff {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Migrate one difference to the other image.
    Migrate {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        side: Side,
        #[arg(long)]
        index: usize,
        /// Migrate the differences it depends on first.
        #[arg(long)]
        with_deps: bool,
    },
    /// Migrate every difference of one side to the other image.
    Merge {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        side: Side,
        #[arg(long, value_enum, default_value = "historical")]
        policy: Policy,
        /// Seed for the random policy.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check the algebra's properties on exhaustive and random cases.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        cases: usize,
        #[arg(long, default_value_t = 12)]
        max_history: usize,
        /// Count the move/move round-trip exceptions as failures.
        #[arg(long)]
        strict: bool,
    },
    /// Serve the JSON API for two images.
    Serve {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, value_name = "N")]
        ancestor_prefix: Option<usize>,
    },
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("view serializes");
    text.push('\n');
    text
}

fn state_text(ws: &Workspace, as_json: bool) -> Result<String, StoreError> {
    let pair = ws.pair()?;
    let state = view::state(&pair)?;
    Ok(if as_json {
        json(&state)
    } else {
        view::render_state(&state)
    })
}

fn migration_text(ws: &Workspace, report: &tvc_core::MigrationReport, as_json: bool) -> Result<String, StoreError> {
    let migration = MigrationView::from(report);
    if as_json {
        let pair = ws.pair()?;
        let body = serde_json::json!({ "migration": migration, "state": view::state(&pair)? });
        return Ok(json(&body));
    }
    Ok(format!("{}{}", view::render_migration(&migration), state_text(ws, false)?))
}

fn execute(command: Command, out: &mut dyn Write) -> Result<u8, StoreError> {
    let text = match command {
        Command::Init { image, replica } => {
            store::init_image(&image, &replica)?;
            format!("created {} for replica {replica}\n", image.display())
        }
        Command::Edit { image, edit } => {
            let mut file = load_image(&image)?;
            let (_, doc) = store::append_edit(&mut file, &edit.join(" "))?;
            tvc_core::image::save_image(&image, &file)?;
            format!("{}\n", view::tuple(&view::slots(&doc)))
        }
        Command::Show { image, json: as_json } => {
            let file = load_image(&image)?;
            let doc = file.document::<f64>()?;
            if as_json {
                let history: Vec<String> = file.history.iter().map(tvc_core::syntax::print).collect();
                json(&serde_json::json!({
                    "replica": file.replica,
                    "document": view::slots(&doc),
                    "history": history,
                }))
            } else {
                let mut s = format!("{}\n", view::tuple(&view::slots(&doc)));
                for (k, e) in file.history.iter().enumerate() {
                    s.push_str(&format!("  {}  {}\n", k + 1, tvc_core::syntax::print(e)));
                }
                s
            }
        }
        Command::Diff { pair } => {
            let ws = Workspace::open(&pair.a, &pair.b, pair.ancestor_prefix)?;
            state_text(&ws, pair.json)?
        }
        Command::Migrate {
            pair,
            side,
            index,
            with_deps,
        } => {
            let mut ws = Workspace::open(&pair.a, &pair.b, pair.ancestor_prefix)?;
            let report = ws.migrate(side, index, with_deps)?;
            migration_text(&ws, &report, pair.json)?
        }
        Command::Merge {
            pair,
            side,
            policy,
            seed,
        } => {
            let policy = match policy {
                Policy::Historical => MergePolicy::Historical,
                Policy::Reverse => MergePolicy::Reverse,
                Policy::Random => MergePolicy::Random(seed),
            };
            let mut ws = Workspace::open(&pair.a, &pair.b, pair.ancestor_prefix)?;
            let report = ws.merge(side, policy)?;
            migration_text(&ws, &report, pair.json)?
        }
        Command::Verify {
            seed,
            cases,
            max_history,
            strict,
        } => {
            let config = VerifyConfig {
                seed,
                cases,
                max_history,
                strict_round_trip: strict,
                ..VerifyConfig::default()
            };
            let report = verify::run(&config);
            let _ = writeln!(out, "{report}");
            return Ok(if report.passed() { EXIT_OK } else { EXIT_VERIFY });
        }
        Command::Serve {
            a,
            b,
            port,
            ancestor_prefix,
        } => {
            let ws = Workspace::open(&a, &b, ancestor_prefix)?;
            ws.pair()?;
            let runtime = tokio::runtime::Runtime::new().map_err(|source| {
                StoreError::Image(tvc_core::image::ImageError::Io {
                    path: a.clone(),
                    source,
                })
            })?;
            runtime
                .block_on(crate::api::serve(ws, port))
                .map_err(|source| StoreError::Image(tvc_core::image::ImageError::Io { path: a, source }))?;
            return Ok(EXIT_OK);
        }
    };
    let _ = out.write_all(text.as_bytes());
    Ok(EXIT_OK)
}

/// Runs one command line and returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(rendered.as_bytes())
            } else {
                out.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match &e {
                StoreError::Parse { input, error } => {
                    let _ = writeln!(err, "{}", error.caret(input));
                }
                StoreError::Engine(tvc_core::Error::Dependency { .. }) => {
                    let _ = writeln!(err, "hint: pass --with-deps to migrate the dependency first");
                }
                _ => {}
            }
            e.exit_code()
        }
    }
}
