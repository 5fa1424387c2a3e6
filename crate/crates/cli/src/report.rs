//! JSON views of core results and the header every output carries.

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use solvmat_core::arith::fmt_q;
use solvmat_core::walk::{
    BoundaryEntry, BoundaryPoint, DisplacementMatrix, TrivialityReport, Verdict, Witness, RNG_IDENTITY,
};
use std::cmp::Ordering;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn header(config_sha256: &str) -> Value {
    json!({
        "tool": "solvmat",
        "version": VERSION,
        "rng": RNG_IDENTITY,
        "config_sha256": config_sha256,
    })
}

/// The header as `#`-prefixed lines for CSV outputs.
pub fn header_comment(config_sha256: &str) -> String {
    format!("# solvmat {VERSION}\n# rng: {RNG_IDENTITY}\n# config_sha256: {config_sha256}\n")
}

/// Finite floats as numbers, the rest as strings so the JSON stays valid.
pub fn float(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}

fn sign_name(o: Ordering) -> &'static str {
    match o {
        Ordering::Less => "negative",
        Ordering::Equal => "zero",
        Ordering::Greater => "positive",
    }
}

pub fn displacement_json(d: &DisplacementMatrix) -> Value {
    let n = d.n();
    let matrix: Vec<Vec<String>> = (0..n).map(|i| (0..n).map(|j| fmt_q(d.get(i, j))).collect()).collect();
    let one_based: Vec<[usize; 2]> = d
        .column_inconsistencies()
        .iter()
        .map(|&(i, j)| [i + 1, j + 1])
        .collect();
    json!({
        "matrix": matrix,
        "non_zero": d.non_zero,
        "row_homogeneous": d.row_homogeneous,
        "column_homogeneous": d.column_homogeneous,
        "homogeneous": d.homogeneous,
        "homogeneous_sign": d.homogeneous_sign().map(sign_name),
        "column_inconsistencies": one_based,
    })
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Trivial => "Trivial",
        Verdict::NonTrivial => "NonTrivial",
    }
}

fn witness_json(w: &Option<Witness>) -> Value {
    match w {
        None => Value::Null,
        Some(w) => json!({
            "pair": [w.p + 1, w.q + 1],
            "entry": [w.entry.0 + 1, w.entry.1 + 1],
            "support_index": w.support_index,
            "value": fmt_q(w.element.f().get(w.entry.0, w.entry.1)),
        }),
    }
}

pub fn triviality_json(r: &TrivialityReport) -> Value {
    json!({
        "verdict": verdict_name(r.verdict),
        "witness": witness_json(&r.witness),
        "strict_verdict": verdict_name(r.strict_verdict),
        "strict_witness": witness_json(&r.strict_witness),
        "verdicts_differ": r.verdicts_differ,
        "zero_displacement": r.zero_displacement,
        "abelian_support": r.abelian_support,
    })
}

pub fn boundary_json(b: &BoundaryPoint) -> Value {
    let n = b.n();
    let mut entries = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut e = match b.get(i, j) {
                BoundaryEntry::Real {
                    value,
                    error_bound,
                    representative,
                } => json!({
                    "field": "real",
                    "value": float(*value),
                    "error_bound": float(*error_bound),
                    "representative": fmt_q(representative),
                }),
                BoundaryEntry::PAdic { value, representative } => json!({
                    "field": "p-adic",
                    "value": value,
                    "representative": fmt_q(representative),
                }),
                BoundaryEntry::Undefined => json!({ "field": "undefined" }),
            };
            e["entry"] = json!([i + 1, j + 1]);
            entries.push(e);
        }
    }
    let failures: Vec<[usize; 2]> = b.hypothesis_failures.iter().map(|&(i, j)| [i + 1, j + 1]).collect();
    json!({ "prime": b.p, "entries": entries, "hypothesis_failures": failures })
}
