//! Command-line entry point.
//!
//! Failures print one JSON line `{"error":{"code":..,"message":..}}` to
//! stderr and exit nonzero: 1 for runtime errors, 2 for usage errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use provkg_core::clock::SystemClock;
use provkg_core::document::StandardId;
use provkg_core::governance::{Principal, Role};
use provkg_core::hub::{DataPaths, ExportQuery, Hub, IngestOverrides};
use provkg_core::ids::GraphId;
use provkg_core::ingest::Intake;
use provkg_core::llm::{RecordingClient, ReplayClient, Transport, UreqTransport};
use provkg_core::store::{verify_file, EdgeFilter, VerifyReport};
use provkg_core::{Error, Result};

use crate::config::ServiceConfig;
use crate::error::ApiError;

const CLI_ACTOR: &str = "cli";

#[derive(Debug, Parser)]
#[command(name = "provkg", version, about = "Provenance-aware knowledge graph service")]
pub struct Cli {
    /// Service configuration file.
    #[arg(long, global = true, env = "PROVKG_CONFIG", default_value = "provkg.yaml")]
    pub config: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP service.
    Serve,
    /// Ingest an intake JSON file and print the report.
    Ingest {
        intake: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Write a graph's edges to stdout.
    Export {
        graph: String,
        #[arg(long, value_enum, default_value_t = Format::Jsonl)]
        format: Format,
        #[arg(long)]
        include_deleted: bool,
        #[arg(long)]
        include_rejected: bool,
    },
    /// Check the audit chain on disk.
    VerifyAudit,
    /// Ingest through the live model, appending every exchange to a fixture.
    RecordFixtures {
        intake: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Re-run an ingestion in memory against a fixture and print the report.
    ReplayCheck {
        fixture: PathBuf,
        #[arg(long)]
        intake: PathBuf,
        /// Defaults to the configured replay model id.
        #[arg(long)]
        model_id: Option<String>,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Manage accounts.
    Account {
        #[command(subcommand)]
        command: AccountCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum AccountCommand {
    /// Create an account without an admin session.
    Create {
        #[arg(long)]
        username: String,
        #[arg(long)]
        password: String,
        #[arg(long, value_parser = parse_role)]
        role: Role,
    },
}

#[derive(Debug, Clone, Copy, Default, Args)]
pub struct OverrideArgs {
    #[arg(long, value_parser = parse_standard)]
    pub standard: Option<StandardId>,
    #[arg(long)]
    pub chunk_size: Option<usize>,
    #[arg(long)]
    pub overlap: Option<usize>,
}

impl From<OverrideArgs> for IngestOverrides {
    fn from(a: OverrideArgs) -> Self {
        IngestOverrides {
            standard: a.standard,
            chunk_size: a.chunk_size,
            overlap: a.overlap,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Jsonl,
    Csv,
}

fn parse_standard(s: &str) -> std::result::Result<StandardId, String> {
    s.parse()
}

fn parse_role(s: &str) -> std::result::Result<Role, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn transport() -> Arc<dyn Transport> {
    Arc::new(UreqTransport::default())
}

fn open_hub(cfg: &ServiceConfig) -> Result<Hub> {
    cfg.open_hub(transport(), Arc::new(SystemClock))
}

fn print_json<T: serde::Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Storage(e.to_string()))?;
    writeln!(out, "{text}")?;
    Ok(())
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "{}", ApiError::from(e).line());
            1
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::VerifyAudit => {
            let cfg = ServiceConfig::load(&cli.config)?;
            verify_audit(&DataPaths::new(&cfg.data_dir).log, out)
        }
        Command::ReplayCheck {
            fixture,
            intake,
            model_id,
            overrides,
        } => {
            let cfg = if cli.config.exists() {
                Some(ServiceConfig::load(&cli.config)?)
            } else {
                None
            };
            let model_id = model_id
                .or_else(|| cfg.as_ref().and_then(|c| c.llm.replay.as_ref()).map(|r| r.model_id.clone()))
                .ok_or_else(|| Error::InvalidArgument("--model-id is required without a replay config".into()))?;
            let registry = match &cfg {
                Some(c) => c.registry()?,
                None => Default::default(),
            };
            let hub_cfg = match &cfg {
                Some(c) => c.hub_config(&registry),
                None => Default::default(),
            };
            let llm = Arc::new(ReplayClient::from_file(model_id, fixture)?);
            let hub = Hub::in_memory(llm, registry, hub_cfg, Arc::new(SystemClock));
            let report = hub.ingest(&cli_principal(), Intake::load(intake)?, overrides.into())?;
            print_json(out, &report)?;
            Ok(0)
        }
        command => {
            let cfg = ServiceConfig::load(&cli.config)?;
            run_with_config(command, &cfg, out)
        }
    }
}

fn cli_principal() -> Principal {
    Principal::system(CLI_ACTOR, Role::Expert)
}

fn run_with_config(command: Command, cfg: &ServiceConfig, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Serve => {
            let hub = Arc::new(open_hub(cfg)?);
            let runtime = tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()?;
            runtime.block_on(async {
                let listener = tokio::net::TcpListener::bind(&cfg.listen).await?;
                writeln!(out, "listening on {}", listener.local_addr()?)?;
                out.flush()?;
                axum::serve(listener, crate::routes::router(hub)).await?;
                Ok::<_, Error>(())
            })?;
            Ok(0)
        }
        Command::Ingest { intake, overrides } => {
            let hub = open_hub(cfg)?;
            let report = hub.ingest(&cli_principal(), Intake::load(intake)?, overrides.into())?;
            print_json(out, &report)?;
            Ok(0)
        }
        Command::Export {
            graph,
            format,
            include_deleted,
            include_rejected,
        } => {
            let hub = open_hub(cfg)?;
            let query = ExportQuery {
                graph_id: GraphId::new(graph),
                filter: EdgeFilter {
                    include_deleted,
                    ..EdgeFilter::default()
                },
                include_rejected,
            };
            let export = hub.export(&cli_principal(), &query)?;
            match format {
                Format::Csv => write!(out, "{}", export.to_csv())?,
                Format::Jsonl => write!(out, "{}", export.to_jsonl())?,
            }
            Ok(0)
        }
        Command::RecordFixtures { intake, out: fixture, overrides } => {
            let live = cfg.live_client(transport())?;
            let registry = cfg.registry()?;
            let llm = Arc::new(RecordingClient::new(live, fixture));
            let hub = Hub::in_memory(llm, registry.clone(), cfg.hub_config(&registry), Arc::new(SystemClock));
            let report = hub.ingest(&cli_principal(), Intake::load(intake)?, overrides.into())?;
            print_json(out, &report)?;
            Ok(0)
        }
        Command::Account {
            command: AccountCommand::Create { username, password, role },
        } => {
            let hub = open_hub(cfg)?;
            let account = hub.bootstrap_account(CLI_ACTOR, &username, &password, role)?;
            print_json(out, &account)?;
            Ok(0)
        }
        Command::VerifyAudit | Command::ReplayCheck { .. } => unreachable!("handled without a hub"),
    }
}

/// Prints the chain check as one JSON line; exit status 1 on a broken chain.
fn verify_audit(log: &Path, out: &mut dyn Write) -> Result<i32> {
    let report = if log.exists() {
        verify_file(log)?
    } else {
        VerifyReport {
            ok: true,
            entries: 0,
            first_bad_seq: None,
            reason: None,
        }
    };
    writeln!(out, "{}", serde_json::to_string(&report).map_err(|e| Error::Storage(e.to_string()))?)?;
    Ok(if report.ok { 0 } else { 1 })
}
