//! `solvmat walk`: seed sweep, per-seed trajectory files, summary and error series.

use crate::error::CliError;
use crate::input::ExperimentConfig;
use crate::report::{boundary_json, displacement_json, float, header, header_comment, sha256_hex, triviality_json};
use rayon::prelude::*;
use serde_json::{json, Value};
use solvmat_core::arith::fmt_q;
use solvmat_core::walk::{
    check_triviality, detect_boundary, displacement, drift_deviation, error_series, run_walk, ApproxVariant,
    MeasureSpec, Trajectory, WalkConfig, WalkError, WalkState,
};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

fn state_record(s: &WalkState) -> Value {
    let shadow: Vec<Vec<Value>> = s
        .phi_shadow
        .iter()
        .map(|r| r.iter().map(|&v| float(v)).collect())
        .collect();
    let mut rec = json!({ "m": s.m, "y": s.y });
    if let Some(phi) = &s.phi {
        let exact: Vec<Vec<String>> = phi.entries().iter().map(|r| r.iter().map(fmt_q).collect()).collect();
        rec["phi_exact"] = json!(exact);
    }
    rec["phi_shadow"] = json!(shadow);
    rec["padic_shadows"] = json!(s.padic_shadow);
    rec
}

fn write_trajectory(path: &Path, hdr: &Value, traj: &Trajectory) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    let mut first = hdr.clone();
    first["seed"] = json!(traj.seed);
    writeln!(w, "{}", json!({ "header": first }))?;
    for s in &traj.states {
        writeln!(w, "{}", state_record(s))?;
    }
    w.flush()?;
    Ok(())
}

struct SeedOutcome {
    seed: u64,
    summary: Value,
    errors: Vec<(u64, u64)>,
}

fn variant_name(v: ApproxVariant) -> &'static str {
    match v {
        ApproxVariant::Generic => "generic",
        ApproxVariant::CorrectedN3 => "corrected-n3",
        ApproxVariant::AlternateN3 => "alternate-n3",
        ApproxVariant::GenericFlagged => "generic-flagged",
    }
}

fn analyse(cfg: &ExperimentConfig, mu: &MeasureSpec, traj: &Trajectory) -> Result<SeedOutcome, CliError> {
    let d = displacement(mu);
    let last = traj.last();
    let mut summary = json!({
        "seed": traj.seed,
        "final_m": last.m,
        "final_y": last.y,
        "drift_deviation": drift_deviation(traj, mu).into_iter().map(float).collect::<Vec<_>>(),
    });
    let mut errors = Vec::new();
    match detect_boundary(traj, &d, &cfg.detection.params()) {
        Ok(b) => {
            let series = error_series(traj, &b, mu)?;
            summary["converged"] = json!(true);
            summary["boundary"] = boundary_json(&b);
            summary["approximation"] = json!(variant_name(series.variant));
            errors = series.points;
        }
        Err(e @ WalkError::NotConverged { .. }) => {
            summary["converged"] = json!(false);
            summary["boundary"] = Value::Null;
            summary["diagnostic"] = json!(e.to_string());
        }
        Err(e) => return Err(e.into()),
    }
    Ok(SeedOutcome {
        seed: traj.seed,
        summary,
        errors,
    })
}

pub struct WalkOutput {
    pub directory: PathBuf,
    pub summary: Value,
}

pub fn run(cfg: &ExperimentConfig, mu: &MeasureSpec) -> Result<WalkOutput, CliError> {
    let canonical = serde_json::to_vec(cfg)?;
    let hash = sha256_hex(&canonical);
    let hdr = header(&hash);
    let dir = PathBuf::from(cfg.output.directory.clone().unwrap_or_else(|| "solvmat-out".into()));
    std::fs::create_dir_all(&dir)?;

    let base = WalkConfig::new(cfg.run.steps, 0)
        .with_checkpoints(cfg.run.checkpoints.clone())
        .with_audit_every(cfg.run.audit_every.unwrap_or_default());

    let outcomes: Vec<SeedOutcome> = cfg
        .run
        .seeds
        .par_iter()
        .map(|&seed| {
            let traj = run_walk(mu, &WalkConfig { seed, ..base.clone() })?;
            if cfg.wants("jsonl") {
                write_trajectory(&dir.join(format!("trajectory_seed{seed}.jsonl")), &hdr, &traj)?;
            }
            analyse(cfg, mu, &traj)
        })
        .collect::<Result<_, CliError>>()?;

    if cfg.wants("csv") {
        let mut file = File::create(dir.join("errors.csv"))?;
        file.write_all(header_comment(&hash).as_bytes())?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(["seed", "m", "error_estimate"])?;
        for o in &outcomes {
            for (m, e) in &o.errors {
                w.write_record([o.seed.to_string(), m.to_string(), e.to_string()])?;
            }
        }
        w.flush()?;
    }

    let d = displacement(mu);
    let summary = json!({
        "header": hdr,
        "config": cfg,
        "means": mu.means().iter().map(fmt_q).collect::<Vec<_>>(),
        "displacement": displacement_json(&d),
        "triviality": triviality_json(&check_triviality(mu)),
        "seeds": outcomes.into_iter().map(|o| o.summary).collect::<Vec<_>>(),
    });
    if cfg.wants("json") {
        let mut f = BufWriter::new(File::create(dir.join("summary.json"))?);
        serde_json::to_writer_pretty(&mut f, &summary)?;
        writeln!(f)?;
        f.flush()?;
    }
    Ok(WalkOutput {
        directory: dir,
        summary,
    })
}
