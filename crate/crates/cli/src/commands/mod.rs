pub mod channels;
pub mod invariants;
pub mod protocol;

use std::collections::BTreeMap;

use invlab_core::channels::{ChannelFamily, ChannelKind, KrausChannel};
use invlab_core::RngSeed;
use serde_json::Value;

use crate::CliError;

/// `--dim`, defaulting to the fixed dimension of qubit-only channels.
pub(crate) fn resolve_dim(kind: ChannelKind, dim: Option<usize>) -> Result<usize, CliError> {
    match (dim, kind.fixed_dim()) {
        (Some(n), _) => Ok(n),
        (None, Some(d)) => Ok(d),
        (None, None) => Err(CliError::usage(format!("--dim is required for {kind}"))),
    }
}

pub(crate) fn family(channel: &str, dim: Option<usize>) -> Result<ChannelFamily, CliError> {
    let kind: ChannelKind = channel.parse()?;
    Ok(ChannelFamily::new(kind, resolve_dim(kind, dim)?)?)
}

/// `name=a,b,c` pairs.
pub(crate) fn parse_params(raw: &[String]) -> Result<BTreeMap<String, Vec<f64>>, CliError> {
    let mut out = BTreeMap::new();
    for item in raw {
        let (name, values) = item
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("--params expects name=v1,v2,..., got `{item}`")))?;
        let values = values
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::usage(format!("bad value in `{item}`: {e}")))?;
        out.insert(name.trim().to_string(), values);
    }
    Ok(out)
}

/// The channel from explicit parameters, or a seeded draw when none are given.
pub(crate) fn channel_from(fam: &ChannelFamily, params: &[String], seed: u64) -> Result<KrausChannel, CliError> {
    if params.is_empty() && !fam.params.is_empty() {
        Ok(fam.sample(&mut RngSeed::new(seed).derive(1, 0).rng())?)
    } else {
        Ok(fam.build(&parse_params(params)?)?)
    }
}

/// Strips operator matrices from catalog entries.
pub(crate) fn drop_operators(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("operators");
            for x in m.values_mut() {
                drop_operators(x);
            }
        }
        Value::Array(xs) => xs.iter_mut().for_each(drop_operators),
        _ => {}
    }
}

pub(crate) fn attach_config<T>(r: Result<T, CliError>, config: &Value) -> Result<T, CliError> {
    r.map_err(|mut e| {
        e.config = config.clone();
        e
    })
}
