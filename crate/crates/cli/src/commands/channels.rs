use std::path::PathBuf;

use clap::Subcommand;
use invlab_core::channels::{ChannelFile, ChannelKind};
use serde_json::json;

use crate::report::{sci, Status, Table};
use crate::{CliError, GlobalArgs, Output};

#[derive(Subcommand, Debug)]
pub enum ChannelsCmd {
    /// Catalog with parameter ranges.
    List {
        /// Dimension used to size the parameter vectors of quNit channels.
        #[arg(long, default_value_t = 3)]
        dim: usize,
    },
    /// CPTP check of a Kraus-set JSON file.
    Validate {
        #[arg(long)]
        file: PathBuf,
    },
}

impl ChannelsCmd {
    pub fn name(&self) -> &'static str {
        match self {
            Self::List { .. } => "list",
            Self::Validate { .. } => "validate",
        }
    }

    pub(crate) fn run(&self, _g: &GlobalArgs) -> Result<Output, CliError> {
        match self {
            Self::List { dim } => list(*dim),
            Self::Validate { file } => validate(file),
        }
    }
}

fn list(dim: usize) -> Result<Output, CliError> {
    if dim < 2 {
        return Err(CliError::usage("--dim must be at least 2"));
    }
    let mut table = Table::new(&["channel", "dim", "param", "len", "constraint"]);
    let mut entries = Vec::new();
    for kind in ChannelKind::ALL {
        let n = kind.fixed_dim().unwrap_or(dim);
        let specs = kind.param_specs(n);
        if specs.is_empty() {
            table.push(vec![kind.name().into(), n.to_string(), "-".into(), "0".into(), "-".into()]);
        }
        for s in &specs {
            table.push(vec![
                kind.name().into(),
                n.to_string(),
                s.name.clone(),
                s.len.to_string(),
                s.constraint.clone(),
            ]);
        }
        entries.push(json!({
            "name": kind.name(),
            "fixed_dim": kind.fixed_dim(),
            "dim": n,
            "params": specs,
        }));
    }
    Ok(Output {
        config: json!({ "dim": dim }),
        payload: json!({ "channels": entries }),
        table,
        notes: Vec::new(),
        status: Status::Ok,
    })
}

fn validate(file: &PathBuf) -> Result<Output, CliError> {
    let config = json!({ "file": file.display().to_string() });
    let text = std::fs::read_to_string(file).map_err(|e| CliError {
        status: Status::UsageError,
        message: format!("cannot read {}: {e}", file.display()),
        config: config.clone(),
    })?;
    let parsed = ChannelFile::parse(&text).and_then(|f| f.to_channel_unchecked().map(|c| (f, c)));
    let (f, ch) = parsed.map_err(|e| CliError {
        status: Status::Failed,
        message: e.to_string(),
        config: config.clone(),
    })?;
    let rep = ch.validate_cptp();
    let mut table = Table::new(&["name", "dim", "kraus", "max_deviation", "cptp"]);
    table.push(vec![
        f.name.clone(),
        f.dim.to_string(),
        f.kraus.len().to_string(),
        sci(rep.max_deviation),
        rep.ok.to_string(),
    ]);
    Ok(Output {
        config,
        payload: json!({
            "name": f.name,
            "dim": f.dim,
            "kraus_count": f.kraus.len(),
            "max_deviation": rep.max_deviation,
            "cptp": rep.ok,
        }),
        table,
        notes: Vec::new(),
        status: if rep.ok { Status::Ok } else { Status::Failed },
    })
}
