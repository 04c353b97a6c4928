//! The `dyskit` command line: argument parsing, run configuration and the
//! six subcommands. Every command is also callable as a function.

mod config;
mod extract;
mod gop;
mod model;

pub use config::{
    ExtractConfig, GopRunConfig, RunConfig, SelectConfig, SelectMethod, TrainEvalConfig,
    ValidateConfig,
};
pub use extract::cmd_extract;
pub use gop::cmd_gop;
pub use model::{cmd_select, cmd_train_eval, cmd_validate, SelectArgs, TrainEvalArgs, ValidateArgs};

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pipeline::{synth_corpus, AssemblyMode};
use crate::VERSION;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;

/// Files written by a command and the number of inputs that failed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub outputs: Vec<PathBuf>,
    pub failures: usize,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failures > 0 {
            EXIT_PARTIAL
        } else {
            EXIT_OK
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Run(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Run(_) => EXIT_DATA,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dyskit", version, about = "Speech biomarkers and dysarthria severity classification")]
pub struct Cli {
    /// Run configuration (TOML). Defaults are listed below.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "dyskit-out")]
    pub out: PathBuf,
    /// Seed for every randomized step; overrides the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for per-utterance work (0 = all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract the 35 clinical features for every utterance in a manifest.
    Extract {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Score pronunciation from frame logits with every GoP method and normalization.
    Gop {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Statistical and expected-direction validation of a feature table.
    Validate {
        /// Feature table CSV.
        features: PathBuf,
        /// Manifest cross-checked against the table keys.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        language: Option<String>,
    },
    /// Select features from a feature table.
    Select {
        features: PathBuf,
        #[arg(long, value_enum)]
        method: Option<SelectMethod>,
        #[arg(long)]
        language: Option<String>,
    },
    /// Leave-one-speaker-out evaluation and a final model for one assembly mode.
    TrainEval {
        features: PathBuf,
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// INTERSECTION, UNION, PROPOSED or MONOLINGUAL.
        #[arg(long, value_parser = parse_mode)]
        mode: Option<AssemblyMode>,
        /// Language for MONOLINGUAL mode.
        #[arg(long)]
        language: Option<String>,
        /// Directory holding one `<language>.txt` feature set per language.
        #[arg(long, value_name = "DIR")]
        feature_sets: Option<PathBuf>,
    },
    /// Generate a synthetic corpus (audio, TextGrids, phones, logits, manifest).
    Synth,
}

fn parse_mode(s: &str) -> std::result::Result<AssemblyMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn command() -> clap::Command {
    let defaults = format!(
        "Default configuration (any subset may be given with --config):\n\n{}",
        RunConfig::default().to_toml_string()
    );
    Cli::command().after_long_help(defaults)
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match command()
        .try_get_matches_from(args)
        .and_then(|m| Cli::from_arg_matches(&m))
    {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(o) => {
            if o.failures > 0 {
                eprintln!("dyskit: {} input(s) failed; see the error files", o.failures);
            }
            o.exit_code()
        }
        Err(e) => {
            eprintln!("dyskit: {e}");
            e.exit_code()
        }
    }
}

/// Resolves the configuration: file (if any), then command-line overrides.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.set_seed(s);
    }
    if let Some(j) = cli.jobs {
        cfg.jobs = j;
    }
    match &cli.command {
        Command::Select { method, language, .. } => {
            if method.is_some() {
                cfg.select.method = *method;
            }
            if language.is_some() {
                cfg.select.language = language.clone();
            }
        }
        Command::TrainEval { mode, language, .. } => {
            if let Some(m) = mode {
                cfg.train_eval.mode = *m;
            }
            if language.is_some() {
                cfg.train_eval.language = language.clone();
            }
        }
        _ => {}
    }
    Ok(cfg)
}

pub fn run(cli: &Cli) -> std::result::Result<Outcome, CliError> {
    let mut cfg = resolve_config(cli)?;
    let out = cli.out.as_path();
    let o = match &cli.command {
        Command::Extract { manifest } => cmd_extract(manifest, &cfg, out)?,
        Command::Gop { manifest } => cmd_gop(manifest, &cfg, out)?,
        Command::Validate {
            features,
            manifest,
            language,
        } => cmd_validate(
            &ValidateArgs {
                features: features.clone(),
                manifest: manifest.clone(),
                language: language.clone(),
            },
            &cfg,
            out,
        )?,
        Command::Select { features, .. } => {
            if cfg.select.method.is_none() {
                return Err(CliError::Usage(
                    "select needs --method (lasso, elastic_net, cluster, filter, rfe, embedded, iterative)".into(),
                ));
            }
            cmd_select(&SelectArgs { features: features.clone() }, &cfg, out)?
        }
        Command::TrainEval {
            features,
            manifest,
            feature_sets,
            ..
        } => {
            if let Some(dir) = feature_sets {
                cfg.train_eval.feature_sets = feature_sets_in(dir)?;
            }
            if cfg.train_eval.mode == AssemblyMode::Monolingual && cfg.train_eval.language.is_none() {
                return Err(CliError::Usage("MONOLINGUAL mode needs --language".into()));
            }
            cmd_train_eval(
                &TrainEvalArgs {
                    features: features.clone(),
                    manifest: manifest.clone(),
                },
                &cfg,
                out,
            )?
        }
        Command::Synth => cmd_synth(&cfg, out)?,
    };
    for p in &o.outputs {
        println!("wrote {}", p.display());
    }
    Ok(o)
}

/// `<language>.txt` files of a directory, keyed by file stem.
fn feature_sets_in(dir: &Path) -> Result<std::collections::BTreeMap<String, PathBuf>> {
    let mut sets = std::collections::BTreeMap::new();
    for e in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let p = e.map_err(|e| Error::io(dir, e))?.path();
        if p.extension().is_some_and(|x| x == "txt") {
            if let Some(stem) = p.file_stem().and_then(|s| s.to_str()) {
                sets.insert(stem.to_string(), p.clone());
            }
        }
    }
    if sets.is_empty() {
        return Err(Error::Config(format!("no <language>.txt feature sets in {}", dir.display())));
    }
    Ok(sets)
}

/// Generates the configured synthetic corpus into `out`, which must not
/// already hold files. The corpus is built in a sibling directory and moved
/// into place once complete.
pub fn cmd_synth(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    cfg.synth.validate()?;
    if out.exists() {
        let empty = fs::read_dir(out).map_err(|e| Error::io(out, e))?.next().is_none();
        if !empty {
            return Err(Error::InvalidData(format!("{} exists and is not empty", out.display())));
        }
        fs::remove_dir(out).map_err(|e| Error::io(out, e))?;
    }
    let staging = temp_sibling(out);
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
    }
    let result = synth_corpus(&cfg.synth, &staging).and_then(|m| {
        write_report(&staging.join("synth_report.json"), "synth", cfg, &SynthSummary {
            speakers: m.speakers().len(),
            utterances: m.utterances.len(),
        })
    });
    if let Err(e) = result {
        let _ = fs::remove_dir_all(&staging);
        return Err(e);
    }
    fs::rename(&staging, out).map_err(|e| Error::io(out, e))?;
    Ok(Outcome {
        outputs: vec![out.join("manifest.csv")],
        failures: 0,
    })
}

#[derive(Serialize)]
struct SynthSummary {
    speakers: usize,
    utterances: usize,
}

fn temp_sibling(path: &Path) -> PathBuf {
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!(".{name}.tmp{}", std::process::id()))
}

/// Writes through a temporary file in the same directory, then renames.
pub(crate) fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let tmp = temp_sibling(path);
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    version: &'a str,
    command: &'a str,
    config: &'a RunConfig,
    #[serde(flatten)]
    body: &'a T,
}

/// JSON report embedding the tool version and the resolved configuration.
pub(crate) fn write_report<T: Serialize>(path: &Path, command: &str, cfg: &RunConfig, body: &T) -> Result<()> {
    let r = Report {
        version: VERSION,
        command,
        config: cfg,
        body,
    };
    let mut text = serde_json::to_string_pretty(&r).map_err(|e| Error::InvalidData(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Builds a CSV document in memory.
pub(crate) fn csv_text<I, R>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.into_iter().collect::<Vec<_>>())?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidData(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => x.to_string(),
        _ => crate::pipeline::NA.to_string(),
    }
}

/// Thread pool honouring the `jobs` bound.
pub(crate) fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_map_to_64() {
        assert_eq!(run_from_args(["dyskit", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run_from_args(["dyskit", "select", "x.csv", "--method", "magic"]), EXIT_USAGE);
        assert_eq!(run_from_args(["dyskit", "--help"]), EXIT_OK);
    }

    #[test]
    fn long_help_lists_defaults() {
        let help = command().render_long_help().to_string();
        assert!(help.contains("[train_eval.cv]"), "{help}");
        assert!(help.contains("pause_threshold_s"));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
