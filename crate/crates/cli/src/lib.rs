//! `invlab` command-line driver.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

mod commands;
pub mod report;

use report::{payload_hash, write_atomic, RunReport, Status, Table, SCHEMA_VERSION, TOOL_VERSION};

#[derive(Parser, Debug)]
#[command(name = "invlab", version, about = "Noise invariants of quNit channels and the protocols built on them")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Output format; with --out this selects the file format and a table goes to stdout.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Write the report here (atomically).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true, env = "INVLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Leave operator matrices and per-round records out of the payload.
    #[arg(long, global = true)]
    pub summary_only: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Channel catalog and Kraus-file validation.
    #[command(subcommand)]
    Channels(commands::channels::ChannelsCmd),
    /// Curated lists, discovery, certification and verification.
    #[command(subcommand)]
    Invariants(commands::invariants::InvariantsCmd),
    /// Protocol simulations.
    #[command(subcommand)]
    Protocol(commands::protocol::ProtocolCmd),
}

/// Result of one command before it is wrapped in a report.
pub(crate) struct Output {
    pub config: Value,
    pub payload: Value,
    pub table: Table,
    /// Extra lines printed under the text table.
    pub notes: Vec<String>,
    pub status: Status,
}

#[derive(Debug)]
pub(crate) struct CliError {
    pub status: Status,
    pub message: String,
    pub config: Value,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            status: Status::UsageError,
            message: message.into(),
            config: Value::Null,
        }
    }
}

impl From<invlab_core::Error> for CliError {
    fn from(e: invlab_core::Error) -> Self {
        use invlab_core::Error as E;
        let status = match e {
            E::UnknownChannel(_)
            | E::InvalidDimension(_)
            | E::InvalidConfig(_)
            | E::ParameterOutOfRange(_)
            | E::InvalidProbabilities(_)
            | E::Parse(_) => Status::UsageError,
            _ => Status::Failed,
        };
        Self {
            status,
            message: e.to_string(),
            config: Value::Null,
        }
    }
}

/// Best-effort report for arguments clap rejected: the raw argv is scanned
/// for `--out` and `--format json` so the error still lands where a report
/// was asked for.
fn usage_failure(argv: &[OsString], e: &clap::Error) -> i32 {
    let _ = e.print();
    let raw: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let flag = |name: &str| {
        raw.iter().enumerate().find_map(|(i, a)| {
            a.strip_prefix(&format!("{name}=")).map(str::to_string).or_else(|| (a == name).then(|| raw.get(i + 1).cloned()).flatten())
        })
    };
    let status = Status::UsageError;
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION,
        kind: "usage".into(),
        command: raw.clone(),
        config: Value::Null,
        seed: flag("--seed").and_then(|s| s.parse().ok()).unwrap_or(0),
        wall_time_ms: 0.0,
        status,
        exit_code: status.exit_code(),
        error: Some(e.render().to_string().trim_end().to_string()),
        payload_sha256: payload_hash(&Value::Null),
        payload: Value::Null,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    if let Some(path) = flag("--out") {
        let _ = write_atomic(std::path::Path::new(&path), &json);
    } else if flag("--format").as_deref() == Some("json") {
        print!("{json}");
    }
    report.exit_code
}

fn kind_of(cmd: &Command) -> String {
    match cmd {
        Command::Channels(c) => format!("channels.{}", c.name()),
        Command::Invariants(c) => format!("invariants.{}", c.name()),
        Command::Protocol(c) => format!("protocol.{}", c.name()),
    }
}

/// Parses `argv` (program name first), runs the command and writes the
/// report. Returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => return usage_failure(&argv, &e),
    };
    let command: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let kind = kind_of(&cli.command);
    let g = cli.global.clone();
    let start = Instant::now();
    let result = match &cli.command {
        Command::Channels(c) => c.run(&g),
        Command::Invariants(c) => c.run(&g),
        Command::Protocol(c) => c.run(&g),
    };
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;

    let (out, error) = match result {
        Ok(o) => (o, None),
        Err(e) => (
            Output {
                config: e.config,
                payload: Value::Null,
                table: Table::new(&["error"]),
                notes: Vec::new(),
                status: e.status,
            },
            Some(e.message),
        ),
    };
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION,
        kind,
        command,
        config: out.config,
        seed: g.seed,
        wall_time_ms,
        status: out.status,
        exit_code: out.status.exit_code(),
        error: error.clone(),
        payload_sha256: payload_hash(&out.payload),
        payload: out.payload,
    };

    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    let text = {
        let mut s = if out.table.rows.is_empty() && error.is_some() {
            String::new()
        } else {
            out.table.to_text()
        };
        for n in &out.notes {
            s.push_str(n);
            s.push('\n');
        }
        s
    };
    let machine = |f: Option<Format>| match f {
        Some(Format::Csv) => out.table.to_csv(),
        _ => json.clone(),
    };
    match &g.out {
        Some(path) => {
            if let Err(e) = write_atomic(path, &machine(g.format)) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 2;
            }
            print!("{text}");
        }
        None => match g.format {
            None | Some(Format::Table) => print!("{text}"),
            f => print!("{}", machine(f)),
        },
    }
    if let Some(e) = &error {
        eprintln!("error: {e}");
    }
    report.exit_code
}
