//! Scenario files: one TOML document per command invocation.
//!
//! The top level carries the command and the run controls shared by every
//! command (`seed`, `samples`, `out`); every other key belongs to the
//! command and is checked against its parameter set, so a misspelled key is
//! an error rather than a silently ignored setting.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Catalyze,
    Reduce,
    VerifyLemma1,
    Bounds,
    Superadd,
    Distill,
    SynthCatalyst,
    PureRate,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Catalyze,
        Command::Reduce,
        Command::VerifyLemma1,
        Command::Bounds,
        Command::Superadd,
        Command::Distill,
        Command::SynthCatalyst,
        Command::PureRate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Catalyze => "catalyze",
            Command::Reduce => "reduce",
            Command::VerifyLemma1 => "verify-lemma1",
            Command::Bounds => "bounds",
            Command::Superadd => "superadd",
            Command::Distill => "distill",
            Command::SynthCatalyst => "synth-catalyst",
            Command::PureRate => "pure-rate",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::Scenario(format!("unknown command `{s}`")))
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub command: Command,
    pub seed: u64,
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
    /// Directory that relative file references are resolved against.
    pub base_dir: PathBuf,
    params: toml::Table,
}

impl Scenario {
    /// Parses a scenario document. `command` may be omitted when `default`
    /// supplies it; when both are present they must agree.
    pub fn parse(text: &str, base_dir: &Path, default: Option<Command>) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Scenario(e.to_string()))?;
        let command = match (table.remove("command"), default) {
            (Some(v), d) => {
                let c: Command = v
                    .as_str()
                    .ok_or_else(|| CliError::Scenario("`command` must be a string".into()))?
                    .parse()?;
                if let Some(d) = d.filter(|d| *d != c) {
                    return Err(CliError::Scenario(format!(
                        "scenario is a `{c}` scenario but was run as `{d}`"
                    )));
                }
                c
            }
            (None, Some(d)) => d,
            (None, None) => return Err(CliError::Scenario("missing `command`".into())),
        };
        let seed = match table.remove("seed") {
            None => 0,
            Some(toml::Value::Integer(s)) if s >= 0 => s as u64,
            Some(v) => return Err(CliError::Scenario(format!("`seed` must be a non-negative integer, got {v}"))),
        };
        let samples = match table.remove("samples") {
            None => None,
            Some(toml::Value::Integer(s)) if s > 0 => Some(s as usize),
            Some(v) => return Err(CliError::Scenario(format!("`samples` must be a positive integer, got {v}"))),
        };
        let out = match table.remove("out") {
            None => None,
            Some(toml::Value::String(s)) => Some(base_dir.join(s)),
            Some(v) => return Err(CliError::Scenario(format!("`out` must be a path string, got {v}"))),
        };
        Ok(Scenario {
            command,
            seed,
            samples,
            out,
            base_dir: base_dir.to_path_buf(),
            params: table,
        })
    }

    pub fn load(path: &Path, default: Option<Command>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Scenario::parse(&text, &base, default)
    }

    /// Command parameters, rejecting keys the command does not know.
    pub fn params<T: DeserializeOwned>(&self) -> Result<T> {
        toml::Value::Table(self.params.clone())
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Scenario(format!("{} parameters: {}", self.command, e.message())))
    }

    /// Samples requested by the scenario or the command line, else `default`.
    pub fn samples_or(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }

    /// The scenario as run, after overrides, for the report. The output
    /// path is left out so that the same run written to two places gives
    /// identical reports.
    pub fn echo(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(&self.params).expect("TOML tables are JSON-representable");
        let map = v.as_object_mut().expect("table");
        map.insert("command".into(), self.command.name().into());
        map.insert("seed".into(), self.seed.into());
        if let Some(s) = self.samples {
            map.insert("samples".into(), s.into());
        }
        v
    }
}
