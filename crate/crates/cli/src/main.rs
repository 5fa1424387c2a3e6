//! `solvmat`: command-line front end for solvmat-core.

mod error;
mod input;
mod report;
mod walk_cmd;

use clap::{Parser, Subcommand, ValueEnum};
use error::CliError;
use input::{ExperimentConfig, MatrixFile, MeasureFile, Overrides};
use report::{displacement_json, float, header, header_comment, sha256_hex, triviality_json};
use serde_json::{json, Value};
use solvmat_core::group::{
    bfs_word_length, factorize, fg_certify, sd_from_matrix, tri_inverse, unitriangular_inverse_paths, GroupError,
};
use solvmat_core::metrics::{adelic_length, length_estimate, sandwich_constants, sd_length_estimate};
use solvmat_core::verify::{run_suite, suite_names};
use solvmat_core::walk::{check_triviality, displacement};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "solvmat",
    version,
    about = "Word metrics, adelic lengths and random walks on FG_n(P)"
)]
struct Cli {
    /// Experiment config for `walk`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run `walk` with this single seed instead of the configured list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides `output.directory`; also receives `factorize` and `invert` results).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Format of the report written to standard output.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Length estimate, adelic length and optional exact word length of a matrix.
    Metrics {
        matrix: PathBuf,
        /// Also search the word-metric ball of this radius for the exact length.
        #[arg(long)]
        bfs_radius: Option<usize>,
    },
    /// Simulate the walk for every configured seed and write trajectories, summary and error series.
    Walk {
        #[arg(value_name = "CONFIG")]
        config_file: Option<PathBuf>,
    },
    /// Write a generator word that evaluates to the matrix.
    Factorize { matrix: PathBuf },
    /// Exact inverse of a matrix, cross-checked against a second inversion route when unitriangular.
    Invert { matrix: PathBuf },
    /// Displacement matrix and sign classification of a measure.
    Displacement { measure: PathBuf },
    /// Decide whether the walk's boundary is trivial.
    CheckTriviality { measure: PathBuf },
    /// Run an acceptance suite ("all" for every suite).
    Verify {
        #[arg(default_value = "all")]
        suite: String,
    },
}

/// Key/value report printed as JSON (with header) or as two-column CSV.
fn emit(format: Format, hash: &str, body: Value) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match format {
        Format::Json => {
            let mut doc = json!({ "header": header(hash) });
            if let Value::Object(m) = body {
                doc.as_object_mut().expect("object").extend(m);
            }
            serde_json::to_writer_pretty(&mut out, &doc)?;
            writeln!(out)?;
        }
        Format::Csv => {
            out.write_all(header_comment(hash).as_bytes())?;
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["field", "value"])?;
            for (k, v) in flatten("", &body) {
                w.write_record([k, v])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn flatten(prefix: &str, v: &Value) -> Vec<(String, String)> {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(m) => m.iter().flat_map(|(k, v)| flatten(&key(k), v)).collect(),
        Value::Array(a) => a
            .iter()
            .enumerate()
            .flat_map(|(i, v)| flatten(&key(&i.to_string()), v))
            .collect(),
        Value::String(s) => vec![(prefix.to_string(), s.clone())],
        Value::Null => vec![(prefix.to_string(), String::new())],
        other => vec![(prefix.to_string(), other.to_string())],
    }
}

fn file_hash(path: &Path) -> Result<String, CliError> {
    Ok(sha256_hex(&input::read(path)?))
}

fn write_out(out: &Option<PathBuf>, name: &str, body: &Value) -> Result<(), CliError> {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let mut f = std::fs::File::create(dir.join(name))?;
        serde_json::to_writer_pretty(&mut f, body)?;
        writeln!(f)?;
    }
    Ok(())
}

fn metrics(cli: &Cli, path: &Path, radius: Option<usize>) -> Result<(), CliError> {
    let (m, primes) = MatrixFile::load(path)?;
    let f = fg_certify(&m, &primes)?;
    let semidirect = if primes.len() == 1 {
        json!(sd_length_estimate(&sd_from_matrix(&f)?))
    } else {
        Value::Null
    };
    let report = adelic_length(&f);
    let mut body = json!({
        "n": m.n(),
        "primes": primes.primes(),
        "length_estimate": length_estimate(&f),
        "semidirect_estimate": semidirect,
        "adelic_length": float(report.adelic),
        "report": report,
    });
    if let Some(r) = radius {
        body["bfs_radius"] = json!(r);
        body["word_length"] = match bfs_word_length(&f, r) {
            Ok(len) => json!(len),
            Err(GroupError::NotWithinRadius(_)) => Value::Null,
            Err(e) => return Err(e.into()),
        };
    }
    emit(cli.format, &file_hash(path)?, body)
}

fn factorize_cmd(cli: &Cli, path: &Path) -> Result<(), CliError> {
    let (m, primes) = MatrixFile::load(path)?;
    let f = fg_certify(&m, &primes)?;
    let word = factorize(&f);
    let bound = sandwich_constants(m.n(), &primes).a_n * length_estimate(&f);
    let hash = file_hash(path)?;
    let body = json!({
        "n": m.n(),
        "primes": primes.primes(),
        "tokens": word.to_tokens(),
        "length": word.len(),
        "bound": bound,
    });
    let mut file_body = json!({ "header": header(&hash) });
    file_body
        .as_object_mut()
        .expect("object")
        .extend(body.as_object().cloned().unwrap_or_default());
    write_out(&cli.out, "word.json", &file_body)?;
    emit(cli.format, &hash, body)
}

fn invert(cli: &Cli, path: &Path) -> Result<(), CliError> {
    let (m, primes) = MatrixFile::load(path)?;
    let f = fg_certify(&m, &primes)?;
    let inv = tri_inverse(f.matrix())?;
    if m.is_unitriangular() && unitriangular_inverse_paths(&m)? != inv {
        return Err(CliError::Failed("inversion routes disagree".into()));
    }
    if !m.mul(&inv)?.is_identity() {
        return Err(CliError::Failed(
            "inverse does not multiply back to the identity".into(),
        ));
    }
    let body = serde_json::to_value(MatrixFile::from_matrix(&inv, &primes))?;
    let hash = file_hash(path)?;
    let mut file_body = json!({ "header": header(&hash) });
    file_body
        .as_object_mut()
        .expect("object")
        .extend(body.as_object().cloned().unwrap_or_default());
    write_out(&cli.out, "inverse.json", &file_body)?;
    emit(cli.format, &hash, body)
}

fn walk(cli: &Cli, positional: &Option<PathBuf>) -> Result<(), CliError> {
    let path = positional
        .as_ref()
        .or(cli.config.as_ref())
        .ok_or_else(|| CliError::Parse("walk needs a config file (positional or --config)".into()))?;
    let overrides = Overrides {
        seed: cli.seed,
        out: cli.out.as_ref().map(|p| p.display().to_string()),
        audit_every: std::env::var("SOLVMAT_AUDIT_EVERY").ok(),
    };
    let (cfg, mu) = ExperimentConfig::load(path, &overrides)?;
    let out = walk_cmd::run(&cfg, &mu)?;
    let hash = out.summary["header"]["config_sha256"]
        .as_str()
        .unwrap_or_default()
        .to_string();
    let seeds = &out.summary["seeds"];
    let converged = seeds
        .as_array()
        .map_or(0, |s| s.iter().filter(|s| s["converged"] == json!(true)).count());
    emit(
        cli.format,
        &hash,
        json!({
            "directory": out.directory.display().to_string(),
            "seeds": cfg.run.seeds.len(),
            "converged": converged,
            "triviality": out.summary["triviality"]["verdict"],
        }),
    )
}

fn verify(cli: &Cli, suite: &str) -> Result<(), CliError> {
    let reports = run_suite(suite).ok_or_else(|| {
        CliError::Parse(format!(
            "unknown suite {suite:?}; expected \"all\" or one of {:?}",
            suite_names()
        ))
    })?;
    match cli.format {
        Format::Json => {
            let rows: Vec<Value> = reports
                .iter()
                .map(|r| json!({ "id": r.id, "suite": r.suite, "passed": r.passed, "seconds": r.seconds, "detail": r.detail }))
                .collect();
            println!("{}", serde_json::to_string_pretty(&rows)?);
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(std::io::stdout().lock());
            w.write_record(["id", "suite", "passed", "seconds", "detail"])?;
            for r in &reports {
                w.write_record([
                    r.id.to_string(),
                    r.suite.into(),
                    r.passed.to_string(),
                    format!("{:.3}", r.seconds),
                    r.detail.clone(),
                ])?;
            }
            w.flush()?;
        }
    }
    for r in &reports {
        eprintln!("{r}");
    }
    let failed: Vec<_> = reports.iter().filter(|r| !r.passed).map(|r| r.suite).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("failed: {}", failed.join(", "))))
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Metrics { matrix, bfs_radius } => metrics(cli, matrix, *bfs_radius),
        Command::Walk { config_file } => walk(cli, config_file),
        Command::Factorize { matrix } => factorize_cmd(cli, matrix),
        Command::Invert { matrix } => invert(cli, matrix),
        Command::Displacement { measure } => {
            let mu = MeasureFile::load(measure)?;
            emit(
                cli.format,
                &file_hash(measure)?,
                json!({ "displacement": displacement_json(&displacement(&mu)) }),
            )
        }
        Command::CheckTriviality { measure } => {
            let mu = MeasureFile::load(measure)?;
            emit(
                cli.format,
                &file_hash(measure)?,
                json!({ "triviality": triviality_json(&check_triviality(&mu)) }),
            )
        }
        Command::Verify { suite } => verify(cli, suite),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("solvmat: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
