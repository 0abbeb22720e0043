//! `qda`: run discretization pipelines from a config file and rerun the
//! benchmark studies.

mod config;
mod run;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qda_core::experiments::{benchmark, BenchId};
use qda_core::export::CsvMeta;
use sha2::{Digest, Sha256};

use crate::run::{execute, Mode, Settings};

#[derive(Parser)]
#[command(name = "qda", version, about = "Discretization approximation for Bayesian computation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Directory for output files (created if missing).
    #[arg(long, default_value = "qda-out")]
    out_dir: PathBuf,
    /// Master seed; overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: available cores).
    #[arg(long, env = "QDA_THREADS")]
    threads: Option<usize>,
    /// Repetitions for baseline comparisons.
    #[arg(long)]
    repetitions: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Discretize, summarize and write every requested output.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Write representation points only.
    Rp {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Write random draws only.
    Sample {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Rerun a benchmark table: t1, t2, t3-small or t4-small.
    Benchmark {
        table: String,
        #[command(flatten)]
        common: Common,
    },
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn threads(common: &Common) -> Result<usize, String> {
    match common.threads {
        Some(0) => Err("--threads (or QDA_THREADS) must be at least 1".into()),
        Some(t) => Ok(t),
        None => Ok(qda_core::posterior::default_workers()),
    }
}

/// Writes every file under a temporary name first, then renames them into
/// place, so a failure leaves no partial outputs behind.
fn write_atomically(dir: &Path, files: &[(String, Vec<u8>)]) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let pid = std::process::id();
    let mut staged = Vec::new();
    let result = (|| {
        for (name, bytes) in files {
            let tmp = dir.join(format!(".{name}.{pid}.tmp"));
            let mut f = fs::File::create(&tmp)?;
            staged.push(tmp.clone());
            f.write_all(bytes)?;
            f.sync_all()?;
        }
        for (name, _) in files {
            fs::rename(dir.join(format!(".{name}.{pid}.tmp")), dir.join(name))?;
        }
        Ok(())
    })();
    if result.is_err() {
        for tmp in staged {
            let _ = fs::remove_file(tmp);
        }
    }
    result
}

fn run_config(config: &Path, common: &Common, mode: Mode) -> Result<(), String> {
    let text = fs::read(config).map_err(|e| format!("cannot read {}: {e}", config.display()))?;
    let text_str = std::str::from_utf8(&text).map_err(|_| format!("{} is not UTF-8", config.display()))?;
    let cfg = config::parse(text_str).map_err(|e| e.to_string())?;
    if common.repetitions == Some(0) {
        return Err("--repetitions must be at least 1".into());
    }
    let settings = Settings {
        seed: common.seed.unwrap_or(cfg.seed),
        threads: threads(common)?,
        repetitions: common.repetitions,
        config_hash: sha256_hex(&text),
    };
    let (mut files, log) = execute(&cfg, mode, &settings).map_err(|e| e.to_string())?;
    for w in &log.warnings {
        eprintln!("warning: {w}");
    }
    let json = serde_json::to_vec_pretty(&log).map_err(|e| e.to_string())?;
    files.push(("run_log.json".into(), json));
    write_atomically(&common.out_dir, &files).map_err(|e| format!("writing {}: {e}", common.out_dir.display()))?;
    for (name, _) in &files {
        println!("{}", common.out_dir.join(name).display());
    }
    Ok(())
}

/// Exit code 2 marks a failed check.
fn run_benchmark(table: &str, common: &Common) -> Result<bool, String> {
    let id: BenchId = table.parse().map_err(|e: qda_core::Error| e.to_string())?;
    if common.repetitions == Some(0) {
        return Err("--repetitions must be at least 1".into());
    }
    let seed = common.seed.unwrap_or(1);
    let reps = common.repetitions.unwrap_or(id.default_reps());
    let workers = threads(common)?;
    let started = std::time::Instant::now();
    let (t, checks) = benchmark(id, seed, Some(reps), workers).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed().as_secs_f64();

    let mut meta = CsvMeta::new();
    meta.push("config_hash", sha256_hex(format!("benchmark {id} seed={seed} repetitions={reps}").as_bytes()))
        .push("seed", seed)
        .push("repetitions", reps);
    let mut csv = Vec::new();
    t.write_csv(&mut csv, &meta).map_err(|e| e.to_string())?;
    let log = serde_json::json!({
        "engine": qda_core::ENGINE_VERSION,
        "command": "benchmark",
        "table": id.to_string(),
        "seed": seed,
        "repetitions": reps,
        "threads": workers,
        "wall_clock_secs": elapsed,
        "checks": checks,
    });
    let files = vec![
        (format!("benchmark_{id}.csv"), csv),
        ("run_log.json".to_string(), serde_json::to_vec_pretty(&log).map_err(|e| e.to_string())?),
    ];
    write_atomically(&common.out_dir, &files).map_err(|e| format!("writing {}: {e}", common.out_dir.display()))?;
    for c in &checks {
        println!("{c}");
    }
    Ok(checks.iter().all(|c| c.pass))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { config, common } => run_config(config, common, Mode::Run).map(|_| true),
        Command::Rp { config, common } => run_config(config, common, Mode::Rp).map(|_| true),
        Command::Sample { config, common } => run_config(config, common, Mode::Sample).map(|_| true),
        Command::Benchmark { table, common } => run_benchmark(table, common),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(msg) => {
            eprint!("error: {msg}");
            if !msg.ends_with('\n') {
                eprintln!();
            }
            ExitCode::FAILURE
        }
    }
}
