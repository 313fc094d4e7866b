//! `cfclock`: batch runner. Reads a JSON run configuration, executes the
//! experiment and writes CSV/JSON artifacts plus a manifest.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, ValueEnum};
use sha2::{Digest, Sha256};

use config::{Format, RunConfig};
use output::{pretty, Manifest, Output};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Parser)]
#[command(name = "cfclock", version, about = "Coherent-feedback clock simulator")]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `rng.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `output.formats`.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

fn fail(code: u8, kind: &str, message: &str, out_dir: Option<&PathBuf>) -> ExitCode {
    let doc = serde_json::json!({ "status": kind, "exit_code": code, "error": message });
    eprintln!("{}", doc);
    if let Some(dir) = out_dir {
        if std::fs::create_dir_all(dir).is_ok() {
            let _ = std::fs::write(dir.join("error.json"), pretty(&doc));
        }
    }
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let clock = Instant::now();

    let bytes = match std::fs::read(&args.config) {
        Ok(b) => b,
        Err(e) => return fail(2, "schema_violation", &format!("cannot read {}: {e}", args.config.display()), args.out.as_ref()),
    };
    let mut cfg: RunConfig = match serde_json::from_slice(&bytes) {
        Ok(c) => c,
        Err(e) => return fail(2, "schema_violation", &format!("{}: {e}", args.config.display()), args.out.as_ref()),
    };
    if let Some(s) = args.seed {
        cfg.rng.seed = s;
    }
    if let Some(d) = &args.out {
        cfg.output.directory = d.clone();
    }
    if let Some(f) = args.format {
        cfg.output.formats = match f {
            FormatArg::Csv => vec![Format::Csv],
            FormatArg::Json => vec![Format::Json],
            FormatArg::Both => vec![Format::Csv, Format::Json],
        };
    }
    let dir = cfg.output.directory.clone();
    if let Some(n) = args.threads {
        if n == 0 {
            return fail(2, "schema_violation", "--threads must be at least 1", Some(&dir));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(3, "numeric_failure", &e.to_string(), Some(&dir));
        }
    }
    let mut out = match Output::new(&dir, cfg.output.formats.clone()) {
        Ok(o) => o,
        Err(e) => return fail(3, "numeric_failure", &e.to_string(), None),
    };
    if let Err(e) = experiments::run(&cfg, &mut out) {
        let code = experiments::exit_code(&e);
        let kind = if code == 2 { "schema_violation" } else { "numeric_failure" };
        return fail(code as u8, kind, &e.to_string(), Some(&dir));
    }
    let manifest = Manifest {
        tool: "cfclock",
        cli_version: env!("CARGO_PKG_VERSION"),
        core_version: cfclock::VERSION,
        experiment: cfg.experiment.name(),
        config_path: args.config.display().to_string(),
        config_sha256: hex::encode(Sha256::digest(&bytes)),
        seed: cfg.rng.seed,
        threads: rayon::current_num_threads(),
        outputs: out.written(),
        started_unix_s: started,
        wall_time_s: clock.elapsed().as_secs_f64(),
    };
    if let Err(e) = std::fs::write(out.dir().join("manifest.json"), pretty(&manifest)) {
        return fail(3, "numeric_failure", &e.to_string(), None);
    }
    ExitCode::SUCCESS
}
