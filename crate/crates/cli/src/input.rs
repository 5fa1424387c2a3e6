//! File formats read by the CLI: matrix files, measure files and experiment configs.

use crate::error::CliError;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use solvmat_core::arith::{fmt_q, parse_q, BigRational, PrimeSet};
use solvmat_core::group::{SemiDirectElement, TriangularMatrix};
use solvmat_core::walk::{DetectionParams, MeasureSpec, DEFAULT_AUDIT_EVERY};
use std::collections::HashSet;
use std::path::Path;

/// Deserializes JSON, reporting the path of the offending field on failure.
pub fn from_json<T: DeserializeOwned>(bytes: &[u8], what: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Parse(format!("{what}: {path}: {}", e.inner()))
    })
}

pub fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn parse_rows(rows: &[Vec<String>], n: usize, field: &str) -> Result<Vec<Vec<BigRational>>, CliError> {
    if rows.len() != n {
        return Err(CliError::Parse(format!(
            "{field}: expected {n} rows, got {}",
            rows.len()
        )));
    }
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            if row.len() != n {
                return Err(CliError::Parse(format!(
                    "{field}[{i}]: expected {n} entries, got {}",
                    row.len()
                )));
            }
            row.iter()
                .enumerate()
                .map(|(j, s)| parse_q(s).map_err(|e| CliError::Parse(format!("{field}[{i}][{j}]: {e}"))))
                .collect()
        })
        .collect()
}

fn to_rows(m: &TriangularMatrix) -> Vec<Vec<String>> {
    m.entries().iter().map(|r| r.iter().map(fmt_q).collect()).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub n: usize,
    pub primes: Vec<u64>,
    pub entries: Vec<Vec<String>>,
}

impl MatrixFile {
    pub fn load(path: &Path) -> Result<(TriangularMatrix, PrimeSet), CliError> {
        let file: MatrixFile = from_json(&read(path)?, &path.display().to_string())?;
        file.parse()
    }

    pub fn parse(&self) -> Result<(TriangularMatrix, PrimeSet), CliError> {
        let primes = PrimeSet::new(self.primes.clone()).map_err(|e| CliError::Parse(format!("primes: {e}")))?;
        let m = TriangularMatrix::new(parse_rows(&self.entries, self.n, "entries")?)
            .map_err(|e| CliError::Parse(format!("entries: {e}")))?;
        Ok((m, primes))
    }

    pub fn from_matrix(m: &TriangularMatrix, primes: &PrimeSet) -> Self {
        MatrixFile {
            n: m.n(),
            primes: primes.primes().to_vec(),
            entries: to_rows(m),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub x: Vec<i64>,
    pub f: Vec<Vec<String>>,
    pub prob: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureFile {
    pub n: usize,
    pub p: u64,
    pub support: Vec<Atom>,
}

impl MeasureFile {
    pub fn load(path: &Path) -> Result<MeasureSpec, CliError> {
        let file: MeasureFile = from_json(&read(path)?, &path.display().to_string())?;
        file.parse("")
    }

    /// `prefix` is prepended to field paths in error messages.
    pub fn parse(&self, prefix: &str) -> Result<MeasureSpec, CliError> {
        let bad = |field: String, msg: String| CliError::Parse(format!("{prefix}{field}: {msg}"));
        let mut support = Vec::with_capacity(self.support.len());
        for (k, atom) in self.support.iter().enumerate() {
            let f = parse_rows(&atom.f, self.n, &format!("{prefix}support[{k}].f"))?;
            let f = TriangularMatrix::new(f).map_err(|e| bad(format!("support[{k}].f"), e.to_string()))?;
            let g = SemiDirectElement::new(self.p, atom.x.clone(), f)
                .map_err(|e| bad(format!("support[{k}]"), e.to_string()))?;
            let w = parse_q(&atom.prob).map_err(|e| bad(format!("support[{k}].prob"), e.to_string()))?;
            support.push((g, w));
        }
        MeasureSpec::new(self.n, self.p, support).map_err(|e| bad("support".into(), e.to_string()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSection {
    pub n: usize,
    pub primes: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub steps: u64,
    pub seeds: Vec<u64>,
    pub checkpoints: Vec<u64>,
    #[serde(default)]
    pub audit_every: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectionSection {
    pub real_tol: f64,
    pub padic_digits: u32,
    pub window: u64,
}

impl Default for DetectionSection {
    fn default() -> Self {
        let d = DetectionParams::default();
        DetectionSection {
            real_tol: d.real_tol,
            padic_digits: d.padic_digits,
            window: d.window,
        }
    }
}

impl DetectionSection {
    pub fn params(&self) -> DetectionParams {
        DetectionParams {
            real_tol: self.real_tol,
            padic_digits: self.padic_digits,
            window: self.window,
        }
    }
}

pub const FORMATS: [&str; 3] = ["jsonl", "json", "csv"];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Left out of the hashed config so results do not depend on where they are written.
    #[serde(skip_serializing)]
    pub directory: Option<String>,
    /// Subset of "jsonl" (trajectories), "json" (summary) and "csv" (error series).
    pub formats: Vec<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            directory: None,
            formats: FORMATS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    group: GroupSection,
    /// Inline measure object, or a path to a measure file relative to the config.
    measure: serde_json::Value,
    run: RunSection,
    #[serde(default)]
    detection: DetectionSection,
    #[serde(default)]
    output: OutputSection,
}

/// A config with the measure resolved and every override applied; this is what gets hashed.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub group: GroupSection,
    pub measure: MeasureFile,
    pub run: RunSection,
    pub detection: DetectionSection,
    pub output: OutputSection,
}

#[derive(Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub audit_every: Option<String>,
}

impl ExperimentConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<(Self, MeasureSpec), CliError> {
        let raw: RawConfig = from_json(&read(path)?, &path.display().to_string())?;
        let measure: MeasureFile = match &raw.measure {
            serde_json::Value::String(rel) => {
                let p = path.parent().unwrap_or(Path::new(".")).join(rel);
                from_json(&read(&p)?, &p.display().to_string())?
            }
            v => from_json(v.to_string().as_bytes(), "measure")?,
        };
        let mut cfg = ExperimentConfig {
            group: raw.group,
            measure,
            run: raw.run,
            detection: raw.detection,
            output: raw.output,
        };
        if let Some(s) = overrides.seed {
            cfg.run.seeds = vec![s];
        }
        if let Some(o) = &overrides.out {
            cfg.output.directory = Some(o.clone());
        }
        if let Some(a) = &overrides.audit_every {
            let v = a
                .trim()
                .parse::<u64>()
                .map_err(|_| CliError::Parse(format!("SOLVMAT_AUDIT_EVERY: not a non-negative integer: {a:?}")))?;
            cfg.run.audit_every = Some(v);
        }
        cfg.run.audit_every.get_or_insert(DEFAULT_AUDIT_EVERY);
        let mu = cfg.validate()?;
        Ok((cfg, mu))
    }

    fn validate(&self) -> Result<MeasureSpec, CliError> {
        let bad = |m: String| Err(CliError::Parse(m));
        if self.group.primes != [self.measure.p] {
            return bad(format!(
                "group.primes: walks need the single prime of the measure ({})",
                self.measure.p
            ));
        }
        if self.group.n != self.measure.n {
            return bad(format!(
                "group.n: {} does not match measure.n = {}",
                self.group.n, self.measure.n
            ));
        }
        if self.run.steps == 0 {
            return bad("run.steps: must be positive".into());
        }
        if self.run.seeds.is_empty() {
            return bad("run.seeds: at least one seed is required".into());
        }
        let mut seen = HashSet::new();
        if let Some(s) = self.run.seeds.iter().find(|s| !seen.insert(**s)) {
            return bad(format!("run.seeds: seed {s} is repeated"));
        }
        if self.run.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return bad("run.checkpoints: must be strictly increasing".into());
        }
        if let Some(c) = self.run.checkpoints.iter().find(|&&c| c > self.run.steps) {
            return bad(format!("run.checkpoints: {c} exceeds run.steps = {}", self.run.steps));
        }
        if !(self.detection.real_tol > 0.0) {
            return bad("detection.real_tol: must be positive".into());
        }
        if let Some(f) = self.output.formats.iter().find(|f| !FORMATS.contains(&f.as_str())) {
            return bad(format!(
                "output.formats: unknown format {f:?} (expected one of {FORMATS:?})"
            ));
        }
        self.measure.parse("measure.")
    }

    pub fn wants(&self, format: &str) -> bool {
        self.output.formats.iter().any(|f| f == format)
    }
}
