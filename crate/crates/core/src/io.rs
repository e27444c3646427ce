//! Self-describing output: CSV or JSON tables with a run manifest, and
//! state snapshots for checkpointing.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::states::{JointState, StateOrigin};

#[derive(Debug)]
pub enum IoError {
    Io { path: PathBuf, source: io::Error },
    Parse { path: PathBuf, message: String },
}

impl fmt::Display for IoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IoError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            IoError::Parse { path, message } => write!(f, "{}: {message}", path.display()),
        }
    }
}

impl std::error::Error for IoError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            IoError::Io { source, .. } => Some(source),
            IoError::Parse { .. } => None,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, message: impl Into<String>) -> IoError {
    IoError::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Parameters and provenance of one run. Maps are ordered so serialization is
/// deterministic.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    /// Taken from `SOURCE_DATE_EPOCH` when set; never from the wall clock.
    pub timestamp: Option<String>,
    pub physical: BTreeMap<String, Value>,
    pub numerical: BTreeMap<String, Value>,
    #[serde(default)]
    pub summary: BTreeMap<String, Value>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: std::env::var("SOURCE_DATE_EPOCH").ok(),
            ..Default::default()
        }
    }

    pub fn physical(mut self, key: &str, value: impl Serialize) -> Self {
        self.physical.insert(key.to_string(), to_value(value));
        self
    }

    pub fn numerical(mut self, key: &str, value: impl Serialize) -> Self {
        self.numerical.insert(key.to_string(), to_value(value));
        self
    }

    pub fn set_summary(&mut self, key: &str, value: impl Serialize) {
        self.summary.insert(key.to_string(), to_value(value));
    }
}

fn to_value(value: impl Serialize) -> Value {
    serde_json::to_value(value).expect("manifest values are plain data")
}

/// Column-labelled numeric table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv(writer: &mut impl Write, table: &Table) -> io::Result<()> {
    writeln!(writer, "{}", table.columns.join(","))?;
    for row in &table.rows {
        let line: Vec<String> = row.iter().map(|&x| format_float(x)).collect();
        writeln!(writer, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn parse_csv(text: &str) -> Result<Table, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or("missing header line")?;
    let columns: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| format!("row {}: {e}", i + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        if row.len() != columns.len() {
            return Err(format!("row {} has {} fields, expected {}", i + 1, row.len(), columns.len()));
        }
        rows.push(row);
    }
    Ok(Table { columns, rows })
}

#[derive(Serialize, Deserialize)]
struct JsonDocument {
    manifest: RunManifest,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

pub fn to_json(manifest: &RunManifest, table: &Table) -> String {
    let doc = JsonDocument {
        manifest: manifest.clone(),
        columns: table.columns.clone(),
        rows: table.rows.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("table serializes") + "\n"
}

pub fn parse_json(text: &str) -> Result<(RunManifest, Table), String> {
    let doc: JsonDocument = serde_json::from_str(text).map_err(|e| e.to_string())?;
    Ok((
        doc.manifest,
        Table {
            columns: doc.columns,
            rows: doc.rows,
        },
    ))
}

/// Sibling manifest path used for CSV outputs: `<file>.manifest.json`.
pub fn manifest_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes the table; CSV gets a sibling manifest, JSON embeds it.
pub fn write_output(path: &Path, format: Format, manifest: &RunManifest, table: &Table) -> Result<(), IoError> {
    match format {
        Format::Csv => {
            let file = fs::File::create(path).map_err(io_err(path))?;
            let mut w = BufWriter::new(file);
            write_csv(&mut w, table).and_then(|_| w.flush()).map_err(io_err(path))?;
            let mpath = manifest_path(path);
            let text = serde_json::to_string_pretty(manifest).expect("manifest serializes") + "\n";
            fs::write(&mpath, text).map_err(io_err(&mpath))
        }
        Format::Json => fs::write(path, to_json(manifest, table)).map_err(io_err(path)),
    }
}

pub fn read_output(path: &Path, format: Format) -> Result<(RunManifest, Table), IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    match format {
        Format::Csv => {
            let table = parse_csv(&text).map_err(|m| parse_err(path, m))?;
            let mpath = manifest_path(path);
            let mtext = fs::read_to_string(&mpath).map_err(io_err(&mpath))?;
            let manifest = serde_json::from_str(&mtext).map_err(|e| parse_err(&mpath, e.to_string()))?;
            Ok((manifest, table))
        }
        Format::Json => parse_json(&text).map_err(|m| parse_err(path, m)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SnapshotManifest {
    atoms: usize,
    n_max: usize,
    time: f64,
    norm_residual: f64,
    origin: StateOrigin,
}

/// Writes `(N, M, re, im)` records plus a sibling manifest.
pub fn write_state_snapshot(path: &Path, state: &JointState) -> Result<(), IoError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let body = (|| -> io::Result<()> {
        writeln!(w, "N,M,re,im")?;
        for (n, amps) in state.subspaces.iter().enumerate() {
            for (m, z) in amps.iter().enumerate() {
                writeln!(w, "{n},{m},{},{}", format_float(z.re), format_float(z.im))?;
            }
        }
        w.flush()
    })();
    body.map_err(io_err(path))?;
    let manifest = SnapshotManifest {
        atoms: state.atoms,
        n_max: state.n_max,
        time: state.time,
        norm_residual: state.norm_residual,
        origin: state.origin,
    };
    let mpath = manifest_path(path);
    let text = serde_json::to_string_pretty(&manifest).expect("snapshot manifest serializes") + "\n";
    fs::write(&mpath, text).map_err(io_err(&mpath))
}

pub fn read_state_snapshot(path: &Path) -> Result<JointState, IoError> {
    let mpath = manifest_path(path);
    let mtext = fs::read_to_string(&mpath).map_err(io_err(&mpath))?;
    let manifest: SnapshotManifest = serde_json::from_str(&mtext).map_err(|e| parse_err(&mpath, e.to_string()))?;

    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut records: Vec<(usize, usize, Complex64)> = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(parse_err(path, format!("line {}: expected 4 fields", i + 1)));
        }
        let bad = |e: String| parse_err(path, format!("line {}: {e}", i + 1));
        let n = fields[0].parse::<usize>().map_err(|e| bad(e.to_string()))?;
        let m = fields[1].parse::<usize>().map_err(|e| bad(e.to_string()))?;
        let re = fields[2].parse::<f64>().map_err(|e| bad(e.to_string()))?;
        let im = fields[3].parse::<f64>().map_err(|e| bad(e.to_string()))?;
        records.push((n, m, Complex64::new(re, im)));
    }
    let top = records.iter().map(|r| r.0).max().unwrap_or(0);
    let mut subspaces: Vec<Vec<Complex64>> = (0..=top)
        .map(|n| vec![Complex64::default(); n.min(manifest.atoms) + 1])
        .collect();
    for (n, m, z) in records {
        let slot = subspaces[n]
            .get_mut(m)
            .ok_or_else(|| parse_err(path, format!("record (N={n}, M={m}) outside the subspace")))?;
        *slot = z;
    }
    let mut state = JointState::from_subspaces(manifest.atoms, subspaces, manifest.origin)
        .map_err(|e| parse_err(path, e.to_string()))?;
    state.n_max = manifest.n_max;
    state.time = manifest.time;
    state.norm_residual = manifest.norm_residual;
    Ok(state)
}
