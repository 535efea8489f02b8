//! Command-line runner for the error-mitigated Hubbard experiments.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use pecsim::characterize::{characterize_circuit, decompose_all, GateCharacterization};
use pecsim::experiment::pipeline::{build_circuit, ResultBundle};
use pecsim::experiment::{
    mitigate, preset, simulate, write_report, ExperimentConfig, ExperimentError, RawData, PRESET_NAMES,
};
use pecsim::hubbard::Components;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

#[derive(Parser)]
#[command(name = "pecsim", version, about = "Noisy Trotter simulation with probabilistic error cancellation")]
struct Cli {
    /// Config file, or `preset:<name>`.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Reseed characterization, PEC and bootstrap from one seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Exact expectations: no shot noise anywhere.
    #[arg(long, global = true)]
    exact: bool,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List presets, or show one.
    Preset {
        name: Option<String>,
        /// Print the full JSON config.
        #[arg(long)]
        dump: bool,
    },
    /// Characterize every distinct entangling gate.
    Characterize,
    /// Quasi-probability decompositions of the characterized gates.
    Decompose {
        /// Characterization JSON from `characterize`; recomputed when absent.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Simulate, mitigate and report.
    Run,
    /// Mitigate recorded raw data and report.
    Mitigate {
        #[arg(long)]
        raw: PathBuf,
    },
    /// Write report files from a result bundle.
    Report {
        #[arg(long)]
        bundle: PathBuf,
    },
}

fn load_config(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let spec = cli.config.as_deref().ok_or_else(|| anyhow!(usage("--config is required for this command")))?;
    let mut cfg = match spec.strip_prefix("preset:") {
        Some(name) => preset(name)?,
        None => {
            let text = fs::read_to_string(spec).with_context(|| format!("reading config {spec}"))?;
            ExperimentConfig::from_json(&text)?
        }
    };
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    if cli.exact {
        cfg = cfg.with_exact();
    }
    Ok(cfg)
}

#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: &str) -> Usage {
    Usage(msg.to_string())
}

fn config_hash(cfg: &ExperimentConfig) -> String {
    let canonical = serde_json::to_string(cfg).expect("config serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

struct Outputs {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Outputs {
    fn new(dir: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        let path = self.dir.join(name);
        let text = serde_json::to_string_pretty(value)? + "\n";
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(path);
        Ok(())
    }

    fn manifest(mut self, command: &str, cfg: Option<&ExperimentConfig>) -> anyhow::Result<()> {
        let names: Vec<String> =
            self.files.iter().filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned())).collect();
        let manifest = json!({
            "command": command,
            "versions": { "pecsim": env!("CARGO_PKG_VERSION") },
            "config_name": cfg.map(|c| c.name.clone()),
            "config_sha256": cfg.map(config_hash),
            "seeds": cfg.map(|c| json!({
                "characterization": c.characterization.seed,
                "pec_master": c.pec.master_seed,
                "bootstrap": c.post.bootstrap_seed,
            })),
            "exact": cfg.map(|c| c.exact),
            "files": names,
        });
        self.json("manifest.json", &manifest)?;
        self.files.pop();
        Ok(())
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn report(out: &mut Outputs, bundle: &ResultBundle) -> anyhow::Result<()> {
    out.files.extend(write_report(bundle, &out.dir)?);
    Ok(())
}

/// Print to stdout; a closed pipe ends output quietly.
fn emit(text: &str) -> anyhow::Result<()> {
    match writeln!(io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn execute(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Preset { name: None, .. } => {
            emit(&PRESET_NAMES.join("\n"))?;
        }
        Command::Preset { name: Some(name), dump } => {
            let cfg = preset(name)?;
            if *dump {
                emit(&cfg.to_json())?;
            } else {
                emit(&format!(
                    "{}: {} {} sites, J={} U={} V={}, {} steps at angle {:.6}, N_s={}",
                    cfg.name,
                    cfg.model.sites,
                    match cfg.model.components {
                        Components::One => "spinless",
                        Components::Two => "spinful",
                    },
                    cfg.model.tunneling,
                    cfg.model.effective_onsite(),
                    cfg.model.neighbor,
                    cfg.trotter.steps,
                    cfg.trotter.angle,
                    cfg.pec.samples
                ))?;
            }
        }
        Command::Characterize => {
            let cfg = load_config(cli)?;
            let circuit = build_circuit(&cfg)?;
            let nm = cfg.noise.build(cfg.model.qubit_count())?;
            let chars = characterize_circuit(&circuit, &nm, cfg.characterization_shots(), cfg.characterization.seed)
                .map_err(ExperimentError::from)?;
            let mut out = Outputs::new(&cli.out)?;
            out.json("characterization.json", &chars)?;
            out.manifest("characterize", Some(&cfg))?;
        }
        Command::Decompose { input } => {
            let (chars, cfg): (Vec<GateCharacterization>, Option<ExperimentConfig>) = match input {
                Some(path) => (read_json(path)?, None),
                None => {
                    let cfg = load_config(cli)?;
                    (pecsim::experiment::pipeline::characterize(&cfg)?, Some(cfg))
                }
            };
            let set = decompose_all(&chars).map_err(ExperimentError::from)?;
            let mut out = Outputs::new(&cli.out)?;
            out.json("decompositions.json", &set)?;
            out.manifest("decompose", cfg.as_ref())?;
        }
        Command::Run => {
            let cfg = load_config(cli)?;
            let raw = simulate(&cfg)?;
            let bundle = mitigate(&raw)?;
            let mut out = Outputs::new(&cli.out)?;
            out.json("config.json", &cfg)?;
            out.json("raw.json", &raw)?;
            out.json("bundle.json", &bundle)?;
            report(&mut out, &bundle)?;
            out.manifest("run", Some(&cfg))?;
        }
        Command::Mitigate { raw } => {
            let raw: RawData = read_json(raw)?;
            let bundle = mitigate(&raw)?;
            let mut out = Outputs::new(&cli.out)?;
            out.json("bundle.json", &bundle)?;
            report(&mut out, &bundle)?;
            out.manifest("mitigate", Some(&raw.config))?;
        }
        Command::Report { bundle } => {
            let bundle: ResultBundle = read_json(bundle)?;
            let mut out = Outputs::new(&cli.out)?;
            report(&mut out, &bundle)?;
            out.manifest("report", None)?;
        }
    }
    Ok(())
}

fn error_kind(e: &anyhow::Error) -> &'static str {
    if let Some(x) = e.downcast_ref::<ExperimentError>() {
        x.kind()
    } else if e.is::<Usage>() {
        "usage"
    } else if e.chain().any(|c| c.is::<std::io::Error>()) {
        "io"
    } else if e.chain().any(|c| c.is::<serde_json::Error>()) {
        "parse"
    } else {
        "error"
    }
}

fn fail(kind: &str, message: String, code: u8) -> ExitCode {
    eprintln!("{}", json!({ "error": { "kind": kind, "message": message } }));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", e.to_string().trim_end().to_string(), 2),
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = error_kind(&e);
            fail(kind, format!("{e:#}"), if kind == "usage" { 2 } else { 1 })
        }
    }
}
