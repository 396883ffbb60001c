//! Reading and writing the JSON files the subcommands exchange.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use fairdiv_core::crossing::{CrossingInstance, MonCrossingInstance};
use fairdiv_core::DensityValuation;
use serde::de::DeserializeOwned;
use serde_json::Value;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("malformed JSON in {}", path.display()))
}

/// Reads `path` and, when it is an object holding `field`, narrows to it.
fn read_field<T: DeserializeOwned>(path: &Path, field: &str) -> Result<T> {
    let mut v: Value = read_json(path)?;
    if let Some(inner) = v.get_mut(field) {
        v = inner.take();
    }
    serde_json::from_value(v).with_context(|| format!("malformed {field} in {}", path.display()))
}

pub fn read_valuations(path: &Path) -> Result<Vec<DensityValuation>> {
    read_field(path, "valuations")
}

pub fn read_mon_instance(path: &Path) -> Result<MonCrossingInstance> {
    read_field(path, "instance")
}

pub fn read_crossing_instance(path: &Path) -> Result<CrossingInstance> {
    let inst: CrossingInstance = read_field(path, "instance")?;
    inst.validate()
        .with_context(|| format!("invalid instance in {}", path.display()))?;
    Ok(inst)
}

/// Writes `text` plus a newline to `path`, or to stdout when `path` is `None`.
pub fn write(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, format!("{text}\n")).with_context(|| format!("cannot write {}", p.display())),
        None => print(text),
    }
}

/// Prints `text` plus a newline; a closed pipe on the reading side is not an error.
pub fn print(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    match writeln!(out, "{text}").and_then(|()| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}
