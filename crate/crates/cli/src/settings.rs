//! Effective run settings: command defaults, overlaid by an optional
//! key=value config file, overlaid by flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use interbank_core::config::KeyValues;
use interbank_core::Error;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(Error::Parameter(_) | Error::Domain(_)) => 1,
            CliError::Core(Error::InsufficientData(_)) => 3,
            CliError::Core(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Core(e.into())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Sets `key` when the flag was given.
pub fn put<T: ToString>(kv: &mut KeyValues, key: &str, value: &Option<T>) {
    if let Some(v) = value {
        kv.set(key, v.to_string());
    }
}

pub struct Settings {
    pub command: &'static str,
    pub kv: KeyValues,
}

impl Settings {
    /// `allowed` lists every key the command understands; `defaults` holds
    /// those that have one.
    pub fn resolve(
        command: &'static str,
        allowed: &[&str],
        defaults: KeyValues,
        config: Option<&Path>,
        flags: KeyValues,
    ) -> CliResult<Self> {
        let mut kv = defaults;
        if let Some(path) = config {
            let mut file = KeyValues::read(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            if let Some(other) = file.remove("command") {
                if other != command {
                    return Err(CliError::Usage(format!(
                        "config {} was written by `{other}`, not `{command}`",
                        path.display()
                    )));
                }
            }
            if let Some(unknown) = file.keys().find(|k| !allowed.contains(k)) {
                return Err(CliError::Usage(format!(
                    "unknown key {unknown:?} in {} (valid keys: {})",
                    path.display(),
                    allowed.join(", ")
                )));
            }
            kv.merge(&file);
        }
        kv.merge(&flags);
        Ok(Self { command, kv })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<T> {
        self.optional(key)?.ok_or_else(|| CliError::Usage(format!("`{}` needs --{}", self.command, flag_name(key))))
    }

    pub fn optional<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        self.kv.parsed(key).map_err(|e| CliError::Usage(format!("--{}: {e}", flag_name(key))))
    }

    pub fn path(&self, key: &str) -> CliResult<PathBuf> {
        self.get::<String>(key).map(PathBuf::from)
    }

    /// Writes the effective settings so that `--config <manifest>` replays the run.
    pub fn write_manifest(&self, path: &Path) -> CliResult<()> {
        let mut kv = self.kv.clone();
        kv.set("command", self.command);
        kv.write(path)?;
        Ok(())
    }
}

pub fn flag_name(key: &str) -> String {
    key.replace('_', "-")
}

/// `a:b` (step 1), `a:b:s`, or a comma-separated list.
pub fn parse_grid(text: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::Usage(format!("bad grid {text:?}; expected a:b, a:b:step or a comma list"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let grid: Vec<usize> = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let (lo, hi, step) = match parts.as_slice() {
            [a, b] => (num(a)?, num(b)?, 1),
            [a, b, s] => (num(a)?, num(b)?, num(s)?),
            _ => return Err(bad()),
        };
        if step == 0 || hi < lo {
            return Err(bad());
        }
        (lo..=hi).step_by(step).collect()
    } else {
        text.split(',').map(num).collect::<CliResult<_>>()?
    };
    if grid.is_empty() {
        return Err(bad());
    }
    Ok(grid)
}
