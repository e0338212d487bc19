use crate::error::{data, invariant};
use anyhow::{Context, Result};
use happy_core::corpus;
use happy_core::design::{OracleFit, Policy};
use happy_core::forge::{Vocabulary, VOCABULARY_SCHEMA_VERSION};
use happy_core::fragment::key_port_roles;
use happy_core::fragment::PortRole;
use happy_core::molgraph::{check_valence, parse_smiles, write_smiles, MolGraph};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::path::Path;

pub const DATASET_SCHEMA_VERSION: u32 = 1;
pub const PROPERTY_COLUMNS: [&str; 4] = ["tg_K", "tm_K", "eg_eV", "density_gcc"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    /// Canonical SMILES.
    pub smiles: String,
    #[serde(default)]
    pub properties: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub schema_version: u32,
    pub records: Vec<DatasetRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reject {
    pub line: usize,
    pub smiles: String,
    pub reason: String,
}

/// Oracle artifact: the fitted model plus its fit statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleFile {
    pub oracle: happy_core::design::PropertyOracle,
    pub train_r2: f64,
    #[serde(default)]
    pub cv_r2: Option<Vec<f64>>,
}

impl From<OracleFit> for OracleFile {
    fn from(f: OracleFit) -> Self {
        OracleFile {
            oracle: f.oracle,
            train_r2: f.train_r2,
            cv_r2: None,
        }
    }
}

/// Writes `bytes` to a temporary file next to `path`, then renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| invariant(format!("serializing output: {e}")))?;
    v.push(b'\n');
    Ok(v)
}

/// Writes JSON to `path`, or to stdout when `path` is `None`.
pub fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    emit(path, &to_json(value)?)
}

pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| data(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| data(format!("parsing {}: {e}", path.display())))
}

/// Non-empty lines with surrounding whitespace removed.
pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| data(format!("reading {}: {e}", path.display())))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}

pub fn lines_bytes<S: AsRef<str>>(lines: &[S]) -> Vec<u8> {
    let mut out = String::new();
    for l in lines {
        out.push_str(l.as_ref());
        out.push('\n');
    }
    out.into_bytes()
}

/// Loads a vocabulary and checks that every key is a decodable fragment key.
pub fn read_vocabulary(path: &Path) -> Result<Vocabulary> {
    let v: Vocabulary = read_json(path)?;
    if v.schema_version != VOCABULARY_SCHEMA_VERSION {
        return Err(data(format!("{}: schema_version {} is not supported", path.display(), v.schema_version)));
    }
    let mut tokens = HashSet::new();
    for e in &v.entries {
        if !tokens.insert(e.token.as_str()) {
            return Err(data(format!("{}: duplicate token {}", path.display(), e.token)));
        }
        let g = parse_smiles(&e.key).map_err(|err| data(format!("{}: key {} of {}: {err}", path.display(), e.key, e.token)))?;
        let labelled = g
            .wildcards()
            .into_iter()
            .all(|w| g.degree(w) == 1 && PortRole::from_class(g.atom(w).class).is_some());
        if !labelled {
            return Err(data(format!("{}: key {} has unlabelled ports", path.display(), e.key)));
        }
        let roles = key_port_roles(&g);
        let prev = roles.iter().filter(|r| **r == PortRole::Prev).count();
        let next = roles.iter().filter(|r| **r == PortRole::Next).count();
        if prev != 1 || next > 1 {
            return Err(data(format!("{}: key {} has {prev} prev and {next} next ports", path.display(), e.key)));
        }
    }
    Ok(v)
}

pub fn read_oracle(path: &Path) -> Result<OracleFile> {
    read_json(path)
}

pub fn read_policy(path: &Path) -> Result<Policy> {
    let p: Policy = read_json(path)?;
    if p.vocabulary.len() < 2 || p.context_length == 0 {
        return Err(data(format!("{}: malformed policy", path.display())));
    }
    for (ctx, row) in &p.logits {
        if ctx.len() != p.context_length || row.len() != p.vocabulary.len() {
            return Err(data(format!("{}: table row shape mismatch", path.display())));
        }
    }
    Ok(p)
}

/// Parses and validates a repeat unit: valence-valid with exactly two
/// polymerization points.
pub fn parse_repeat_unit(smiles: &str) -> std::result::Result<MolGraph, String> {
    let g = parse_smiles(smiles).map_err(|e| e.to_string())?;
    let report = check_valence(&g);
    if !report.valid {
        return Err(format!("valence: {:?}", report.violations));
    }
    let ends = g.wildcards().len();
    if ends != 2 {
        return Err(format!("expected 2 wildcards, found {ends}"));
    }
    Ok(g)
}

/// Reads a CSV dataset with a `smiles` column. Rejected rows are collected,
/// duplicates by canonical SMILES keep their first occurrence.
pub fn ingest_csv(path: &Path) -> Result<(Dataset, Vec<Reject>)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| data(format!("reading {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| data(format!("{}: {e}", path.display())))?
        .clone();
    if headers.is_empty() {
        return Err(data(format!("{}: empty file", path.display())));
    }
    let smiles_col = headers
        .iter()
        .position(|h| h == "smiles")
        .ok_or_else(|| data(format!("{}: missing `smiles` column", path.display())))?;
    let props: Vec<(usize, &str)> = PROPERTY_COLUMNS
        .iter()
        .filter_map(|p| headers.iter().position(|h| h == *p).map(|i| (i, *p)))
        .collect();

    let mut records = Vec::new();
    let mut rejects = Vec::new();
    let mut seen = HashSet::new();
    let mut rows = 0usize;
    for (i, row) in reader.records().enumerate() {
        let line = i + 2;
        rows += 1;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                rejects.push(Reject {
                    line,
                    smiles: String::new(),
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let smiles = row.get(smiles_col).unwrap_or("").to_string();
        let parsed = parse_repeat_unit(&smiles).and_then(|g| {
            let mut properties = BTreeMap::new();
            for &(col, name) in &props {
                let cell = row.get(col).unwrap_or("");
                if cell.is_empty() {
                    continue;
                }
                let v: f64 = cell.parse().map_err(|_| format!("{name}: `{cell}` is not a number"))?;
                if !v.is_finite() {
                    return Err(format!("{name}: `{cell}` is not finite"));
                }
                properties.insert(name.to_string(), v);
            }
            Ok((write_smiles(&g), properties))
        });
        match parsed {
            Ok((canonical, properties)) => {
                if seen.insert(canonical.clone()) {
                    records.push(DatasetRecord {
                        smiles: canonical,
                        properties,
                    });
                } else {
                    log::warn!("line {line}: duplicate of an earlier record ({canonical}), skipped");
                }
            }
            Err(reason) => {
                log::warn!("line {line}: rejected: {reason}");
                rejects.push(Reject { line, smiles, reason });
            }
        }
    }
    if rows == 0 {
        return Err(data(format!("{}: no data rows", path.display())));
    }
    Ok((
        Dataset {
            schema_version: DATASET_SCHEMA_VERSION,
            records,
        },
        rejects,
    ))
}

pub fn rejects_csv(rejects: &[Reject]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rejects {
        w.serialize(r)?;
    }
    if rejects.is_empty() {
        w.write_record(["line", "smiles", "reason"])?;
    }
    w.into_inner().map_err(|e| invariant(e.to_string()))
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let d: Dataset = read_json(path)?;
    if d.schema_version != DATASET_SCHEMA_VERSION {
        return Err(data(format!(
            "{}: schema_version {} is not supported",
            path.display(),
            d.schema_version
        )));
    }
    Ok(d)
}

/// Repeat units from a dataset JSON, a CSV file or a SMILES-per-line file
/// (first whitespace-separated field); the bundled corpus when `path` is `None`.
pub fn load_corpus(path: Option<&Path>) -> Result<Vec<MolGraph>> {
    let Some(path) = path else {
        return Ok(corpus::bundled());
    };
    let smiles: Vec<String> = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => read_dataset(path)?.records.into_iter().map(|r| r.smiles).collect(),
        Some("csv") => ingest_csv(path)?.0.records.into_iter().map(|r| r.smiles).collect(),
        _ => read_lines(path)?
            .into_iter()
            .filter(|l| !l.starts_with('#'))
            .map(|l| l.split_whitespace().next().unwrap_or_default().to_string())
            .collect(),
    };
    if smiles.is_empty() {
        return Err(data(format!("{}: empty corpus", path.display())));
    }
    smiles
        .iter()
        .enumerate()
        .map(|(i, s)| parse_repeat_unit(s).map_err(|e| data(format!("{}: record {}: {s}: {e}", path.display(), i + 1))))
        .collect()
}
