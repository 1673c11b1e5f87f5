//! Batch front-end: configuration, command dispatch and run artifacts.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};

use commands::CommandRegistry;
use config::{locate, parse_config, RunConfig};
pub use error::CliError;
use output::{KeyValues, RunDir};

pub const DEFAULT_OUT: &str = "runs";

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Prefixes `section.key: …` messages with the line they refer to.
fn annotate(text: &str, msg: String) -> String {
    let head = msg.split(':').next().unwrap_or("");
    let (section, key) = head.split_once('.').unwrap_or((head, ""));
    let plain = |s: &str| !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !plain(section) || !(key.is_empty() || plain(key)) {
        return msg;
    }
    match locate(text, section, key) {
        Some(line) => format!("line {line}: {msg}"),
        None => msg,
    }
}

/// Parses, resolves and validates; nothing is written.
pub fn prepare(command: &str, text: &str, o: &Overrides) -> Result<RunConfig, CliError> {
    let registry = CommandRegistry::default();
    let cmd = registry.get(command).ok_or_else(|| {
        CliError::Config(format!("unknown command '{command}', expected one of {:?}", registry.names()))
    })?;
    let mut cfg = parse_config(text)?;
    if let Some(c) = &cfg.command {
        if c != command {
            let line = text.lines().position(|l| l.trim_start().starts_with("command")).map_or(1, |i| i + 1);
            return Err(CliError::Config(format!(
                "line {line}: config is for command '{c}' but '{command}' was requested"
            )));
        }
    }
    if let Some(seed) = o.seed {
        cfg.initial.seed = Some(seed);
    }
    if let Some(out) = &o.out {
        cfg.output.dir = Some(out.to_string_lossy().into_owned());
    }
    let mut eff = cmd.resolve(&cfg).map_err(|m| CliError::Config(annotate(text, m)))?;
    eff.command = Some(command.to_string());
    eff.output.dir.get_or_insert_with(|| DEFAULT_OUT.to_string());
    Ok(eff)
}

/// Runs `command` from configuration text; returns the run directory.
pub fn dispatch(command: &str, text: &str, o: &Overrides) -> Result<PathBuf, CliError> {
    let eff = prepare(command, text, o)?;
    let root = PathBuf::from(eff.output.dir.clone().expect("resolved"));
    let dir = RunDir::create(&root, command)?;
    dir.write(
        "config.toml",
        &format!("# effective configuration of this run\n{}", eff.to_toml()),
    )?;
    let cmd = CommandRegistry::default();
    let cmd = cmd.get(command).expect("checked in prepare");
    let result = cmd.execute(&eff, &dir);
    let mut kv = KeyValues::default();
    kv.put("command", command).put("version", env!("CARGO_PKG_VERSION"));
    match &result {
        Ok(()) => {
            kv.put("status", "ok");
        }
        Err(e) => {
            kv.put("status", "failed");
            let mut diag = KeyValues::default();
            diag.put("command", command).put("error", e);
            dir.write("diagnostics.txt", &diag.finish())?;
        }
    }
    dir.write("status.txt", &kv.finish())?;
    result.map(|()| dir.path().to_path_buf())
}

/// Reads the file and dispatches; unreadable files are configuration errors.
pub fn run_file(command: &str, path: &Path, o: &Overrides) -> Result<PathBuf, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    dispatch(command, &text, o)
}
