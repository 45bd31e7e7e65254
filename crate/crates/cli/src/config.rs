//! Experiment files: flat `key = value` lines grouped under `[section]`
//! headers. `#` starts a comment. Keys before the first header belong to
//! `[experiment]`.
//!
//! ```text
//! [experiment]
//! scheme = zf
//! nt = 4
//! snr_db = 10
//! tfb = 300
//! b_values = 15, 20, 25
//!
//! [channel]
//! beta = 1
//! r = 0.95
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use fbsim_core::channel::ReceiverCsi;
use fbsim_core::montecarlo::{ExperimentConfig, Scheme};
use fbsim_core::quantization::QuantizerKind;
use fbsim_core::schemes::CqiKind;

use crate::error::{CliError, CliResult};

/// Desk-scale default; large enough for standard errors around 0.02 bps/Hz.
pub const DEFAULT_TRIALS: u64 = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Section {
    Experiment,
    Channel,
    Output,
}

impl Section {
    fn name(self) -> &'static str {
        match self {
            Section::Experiment => "experiment",
            Section::Channel => "channel",
            Section::Output => "output",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "experiment" => Some(Section::Experiment),
            "channel" => Some(Section::Channel),
            "output" => Some(Section::Output),
            _ => None,
        }
    }

    fn of_key(key: &str) -> Option<Self> {
        match key {
            "scheme" | "nt" | "snr_db" | "tfb" | "b_values" | "trials" | "seed" | "quantizer"
            | "cqi" | "cqi_bits" | "relaxed" => Some(Section::Experiment),
            "beta" | "r" | "mmse_exact" => Some(Section::Channel),
            "name" | "dir" => Some(Section::Output),
            _ => None,
        }
    }
}

/// One `key = value` with where it came from, for diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    /// 1-based line, or `None` for a command-line override.
    pub line: Option<usize>,
}

/// A fully resolved `fbsim run` request.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub snr_db: f64,
    pub name: String,
    pub out_dir: PathBuf,
}

struct Source<'a> {
    path: &'a Path,
}

impl Source<'_> {
    fn error(&self, entry: &Entry, message: String) -> CliError {
        match entry.line {
            Some(line) => CliError::Parse {
                path: self.path.to_path_buf(),
                line,
                message,
            },
            None => CliError::Config(format!(
                "override --{}: {message}",
                entry.key.replace('_', "-")
            )),
        }
    }

    fn value<T: FromStr>(&self, entry: &Entry, what: &str) -> CliResult<T> {
        entry.value.parse().map_err(|_| {
            self.error(
                entry,
                format!(
                    "field '{}': expected {what}, got '{}'",
                    entry.key, entry.value
                ),
            )
        })
    }

    fn parsed<T>(&self, entry: &Entry) -> CliResult<T>
    where
        T: FromStr<Err = fbsim_core::Error>,
    {
        entry.value.parse().map_err(|e: fbsim_core::Error| {
            self.error(entry, format!("field '{}': {e}", entry.key))
        })
    }
}

/// Splits an experiment file into entries, rejecting unknown sections and
/// keys placed in the wrong section.
pub fn parse_entries(path: &Path, text: &str) -> CliResult<Vec<Entry>> {
    let mut section = Section::Experiment;
    let mut entries: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| CliError::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(format!("unterminated section header '{content}'")))?
                .trim();
            section = Section::parse(name).ok_or_else(|| {
                err(format!(
                    "unknown section [{name}]; expected [experiment], [channel] or [output]"
                ))
            })?;
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(format!("expected 'key = value', got '{content}'")))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        match Section::of_key(&key) {
            Some(s) if s == section => {}
            Some(s) => {
                return Err(err(format!(
                    "key '{key}' belongs in [{}], not [{}]",
                    s.name(),
                    section.name()
                )))
            }
            None => return Err(err(format!("unknown key '{key}' in [{}]", section.name()))),
        }
        if let Some(prev) = entries.iter().find(|e| e.key == key) {
            return Err(err(format!(
                "duplicate key '{key}' (first set on line {})",
                prev.line.unwrap_or(0)
            )));
        }
        if value.is_empty() {
            return Err(err(format!("field '{key}' has no value")));
        }
        entries.push(Entry {
            key,
            value,
            line: Some(line),
        });
    }
    Ok(entries)
}

/// Turns `["--snr-db", "10", "--trials=50"]` into override entries.
pub fn parse_overrides(args: &[String]) -> CliResult<Vec<Entry>> {
    let mut out = Vec::new();
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        let flag = arg.strip_prefix("--").ok_or_else(|| {
            CliError::Config(format!(
                "expected an override like --key value, got '{arg}'"
            ))
        })?;
        let (key, value) = match flag.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = iter
                    .next()
                    .ok_or_else(|| CliError::Config(format!("override --{flag} needs a value")))?;
                (flag.to_string(), v.clone())
            }
        };
        let mut key = key.replace('-', "_");
        if key == "out" {
            key = "dir".into();
        }
        if Section::of_key(&key).is_none() {
            return Err(CliError::Config(format!(
                "unknown override --{}",
                key.replace('_', "-")
            )));
        }
        out.push(Entry {
            key,
            value,
            line: None,
        });
    }
    Ok(out)
}

/// Reads and resolves an experiment file; `overrides` win over file values.
pub fn load_run_config(path: &Path, overrides: &[String]) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut entries = parse_entries(path, &text)?;
    for o in parse_overrides(overrides)? {
        entries.retain(|e| e.key != o.key);
        entries.push(o);
    }
    build(path, &entries)
}

fn build(path: &Path, entries: &[Entry]) -> CliResult<RunConfig> {
    let src = Source { path };
    let get = |key: &str| entries.iter().find(|e| e.key == key);
    let require = |key: &str| {
        get(key).ok_or_else(|| {
            CliError::Config(format!(
                "{}: missing required field '{key}'",
                path.display()
            ))
        })
    };

    let scheme_entry = require("scheme")?;
    let scheme: Scheme = src.parsed(scheme_entry)?;
    let nt_entry = require("nt")?;
    let nt: usize = src.value(nt_entry, "a positive integer")?;
    if nt == 0 {
        return Err(src.error(nt_entry, "field 'nt': must be >= 1".into()));
    }
    let snr_db: f64 = src.value(require("snr_db")?, "a number in dB")?;
    let tfb: u32 = src.value(require("tfb")?, "a non-negative integer")?;

    let mut exp = ExperimentConfig::new(scheme, nt, fbsim_core::db_to_linear(snr_db), tfb);
    exp.trials = DEFAULT_TRIALS;
    if let Some(e) = get("trials") {
        exp.trials = src.value(e, "a positive integer")?;
        if exp.trials == 0 {
            return Err(src.error(e, "field 'trials': must be >= 1".into()));
        }
    }
    if let Some(e) = get("seed") {
        exp.seed = src.value(e, "an unsigned 64-bit integer")?;
    }
    if let Some(e) = get("quantizer") {
        exp.quantizer = src.parsed::<QuantizerKind>(e)?;
    }
    if let Some(e) = get("cqi") {
        exp.cqi_kind = src.parsed::<CqiKind>(e)?;
    }
    if let Some(e) = get("cqi_bits") {
        let bits: u32 = src.value(e, "a positive integer")?;
        exp.cqi_bits = (bits > 0).then_some(bits);
    }
    if let Some(e) = get("relaxed") {
        exp.relaxed = src.value(e, "true or false")?;
    }
    if let Some(e) = get("r") {
        exp.r = src.value(e, "a number in [0, 1]")?;
    }
    if let Some(e) = get("mmse_exact") {
        exp.mmse_exact = src.value(e, "true or false")?;
    }
    if let Some(e) = get("beta") {
        exp.csi = match e.value.as_str() {
            "inf" | "perfect" => ReceiverCsi::Perfect,
            _ => ReceiverCsi::Trained {
                beta: src.value(e, "a number >= 0 or 'inf'")?,
            },
        };
    }
    exp.b_values = match get("b_values") {
        None => exp.feasible_b_values(),
        Some(e) if e.value == "all" => exp.feasible_b_values(),
        Some(e) => e
            .value
            .split(',')
            .map(|s| {
                s.trim().parse::<u32>().map_err(|_| {
                    src.error(
                        e,
                        format!(
                            "field 'b_values': expected comma-separated integers, got '{}'",
                            s.trim()
                        ),
                    )
                })
            })
            .collect::<CliResult<_>>()?,
    };
    exp.validate()?;

    let name = get("name")
        .map(|e| e.value.clone())
        .or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .unwrap_or_else(|| "run".into());
    let out_dir = get("dir")
        .map(|e| PathBuf::from(&e.value))
        .unwrap_or_else(|| PathBuf::from("."));
    Ok(RunConfig {
        experiment: exp,
        snr_db,
        name,
        out_dir,
    })
}
