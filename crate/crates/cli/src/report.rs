//! Report tables and their CSV / JSON encodings.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Format;

pub const SCHEMA_VERSION: u32 = 1;
pub const COLUMNS: [&str; 11] =
    ["task", "alpha", "dim", "q", "N", "t", "quantity", "value", "error_bound", "witness", "seed"];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {reason}")]
    Malformed { path: PathBuf, reason: String },
}

/// Finite floats as JSON numbers, `nan`/`inf`/`-inf` as strings.
mod real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&super::format_float(*v))
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
        match Raw::deserialize(de)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) => super::parse_float(&t).ok_or_else(|| serde::de::Error::custom(format!("bad float {t:?}"))),
        }
    }

    pub mod option {
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(x) => super::serialize(x, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Option<f64>, D::Error> {
            #[derive(Deserialize)]
            struct Wrap(#[serde(deserialize_with = "super::deserialize")] f64);
            Ok(Option::<Wrap>::deserialize(de)?.map(|w| w.0))
        }
    }
}

/// 17 significant digits, so every value round-trips exactly.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

pub fn parse_float(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub task: String,
    #[serde(with = "real")]
    pub alpha: f64,
    pub dim: usize,
    #[serde(with = "real::option")]
    pub q: Option<f64>,
    #[serde(rename = "N", with = "real::option")]
    pub n_scale: Option<f64>,
    #[serde(with = "real::option")]
    pub t: Option<f64>,
    pub quantity: String,
    #[serde(with = "real")]
    pub value: f64,
    #[serde(with = "real::option")]
    pub error_bound: Option<f64>,
    pub witness: String,
    pub seed: Option<u64>,
}

impl Row {
    pub fn is_error(&self) -> bool {
        self.quantity == "error"
    }

    /// Rows are compared bitwise so that `NaN` values compare equal.
    pub fn bitwise_eq(&self, other: &Row) -> bool {
        let f = |a: f64, b: f64| a.to_bits() == b.to_bits();
        let o = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(x), Some(y)) => f(x, y),
            (None, None) => true,
            _ => false,
        };
        self.task == other.task
            && f(self.alpha, other.alpha)
            && self.dim == other.dim
            && o(self.q, other.q)
            && o(self.n_scale, other.n_scale)
            && o(self.t, other.t)
            && self.quantity == other.quantity
            && f(self.value, other.value)
            && o(self.error_bound, other.error_bound)
            && self.witness == other.witness
            && self.seed == other.seed
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    /// Littlewood–Paley cut-off used by every spectral projection.
    pub bump: String,
    pub grid_n: Option<usize>,
    pub box_len: Option<f64>,
}

impl Provenance {
    pub fn current(grid_n: Option<usize>, box_len: Option<f64>) -> Self {
        let bump = fracbern::spectral::make_bump(fracbern::spectral::BumpKind::LpPhi);
        Self {
            tool_version: format!("fracbern {}", env!("CARGO_PKG_VERSION")),
            bump: format!("lp_phi[{}, {}] {}", bump.inner_radius, bump.outer_radius, bump.transition.describe()),
            grid_n,
            box_len,
        }
    }

    fn header_lines(&self) -> Vec<String> {
        let grid = match (self.grid_n, self.box_len) {
            (Some(n), Some(l)) => format!("n={n} L={}", format_float(l)),
            _ => "none".into(),
        };
        vec![
            format!("tool: {}", self.tool_version),
            format!("bump: {}", self.bump),
            format!("grid: {grid}"),
        ]
    }

    fn from_header_lines(lines: &[String]) -> Self {
        let field = |key: &str| {
            lines.iter().find_map(|l| l.strip_prefix(key).map(|v| v.trim().to_string())).unwrap_or_default()
        };
        let grid = field("grid:");
        let mut grid_n = None;
        let mut box_len = None;
        for part in grid.split_whitespace() {
            if let Some(v) = part.strip_prefix("n=") {
                grid_n = v.parse().ok();
            } else if let Some(v) = part.strip_prefix("L=") {
                box_len = parse_float(v);
            }
        }
        Self { tool_version: field("tool:"), bump: field("bump:"), grid_n, box_len }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportTable {
    pub provenance: Provenance,
    pub rows: Vec<Row>,
}

#[derive(Serialize, Deserialize)]
struct JsonDocument {
    schema_version: u32,
    provenance: Provenance,
    rows: Vec<Row>,
}

fn opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

impl ReportTable {
    pub fn new(provenance: Provenance) -> Self {
        Self { provenance, rows: Vec::new() }
    }

    pub fn error_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.is_error()).count()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for line in self.provenance.header_lines() {
            writeln!(out, "# {line}")?;
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(COLUMNS)?;
        for r in &self.rows {
            w.write_record([
                r.task.clone(),
                format_float(r.alpha),
                r.dim.to_string(),
                opt(r.q),
                opt(r.n_scale),
                opt(r.t),
                r.quantity.clone(),
                format_float(r.value),
                opt(r.error_bound),
                r.witness.clone(),
                r.seed.map(|s| s.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }

    pub fn to_json_string(&self) -> String {
        let doc = JsonDocument { schema_version: SCHEMA_VERSION, provenance: self.provenance.clone(), rows: self.rows.clone() };
        let mut s = serde_json::to_string_pretty(&doc).expect("report rows serialize");
        s.push('\n');
        s
    }

    pub fn from_json_str(text: &str, path: &Path) -> Result<Self, ReportError> {
        let doc: JsonDocument =
            serde_json::from_str(text).map_err(|source| ReportError::Json { path: path.into(), source })?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(ReportError::Malformed {
                path: path.into(),
                reason: format!("unsupported schema_version {}", doc.schema_version),
            });
        }
        Ok(Self { provenance: doc.provenance, rows: doc.rows })
    }

    pub fn from_csv_str(text: &str, path: &Path) -> Result<Self, ReportError> {
        let malformed = |reason: String| ReportError::Malformed { path: path.into(), reason };
        let mut header = Vec::new();
        let mut body = String::new();
        for line in text.as_bytes().lines() {
            let line = line.map_err(|source| ReportError::Io { path: path.into(), source })?;
            match line.strip_prefix('#') {
                Some(h) if body.is_empty() => header.push(h.trim().to_string()),
                _ => {
                    body.push_str(&line);
                    body.push('\n');
                }
            }
        }
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
        let cols = reader.headers().map_err(|source| ReportError::Csv { path: path.into(), source })?.clone();
        if cols.iter().ne(COLUMNS.iter().copied()) {
            return Err(malformed(format!("unexpected columns {:?}", cols.iter().collect::<Vec<_>>())));
        }
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|source| ReportError::Csv { path: path.into(), source })?;
            let line = i + 1;
            let float = |j: usize| {
                parse_float(&rec[j]).ok_or_else(|| malformed(format!("row {line}: bad {} {:?}", COLUMNS[j], &rec[j])))
            };
            let opt_float = |j: usize| if rec[j].is_empty() { Ok(None) } else { float(j).map(Some) };
            rows.push(Row {
                task: rec[0].to_string(),
                alpha: float(1)?,
                dim: rec[2].parse().map_err(|_| malformed(format!("row {line}: bad dim {:?}", &rec[2])))?,
                q: opt_float(3)?,
                n_scale: opt_float(4)?,
                t: opt_float(5)?,
                quantity: rec[6].to_string(),
                value: float(7)?,
                error_bound: opt_float(8)?,
                witness: rec[9].to_string(),
                seed: if rec[10].is_empty() {
                    None
                } else {
                    Some(rec[10].parse().map_err(|_| malformed(format!("row {line}: bad seed {:?}", &rec[10])))?)
                },
            });
        }
        Ok(Self { provenance: Provenance::from_header_lines(&header), rows })
    }

    pub fn read(path: &Path) -> Result<Self, ReportError> {
        let text = std::fs::read_to_string(path).map_err(|source| ReportError::Io { path: path.into(), source })?;
        match Format::from_path(path) {
            Some(Format::Json) => Self::from_json_str(&text, path),
            Some(Format::Csv) => Self::from_csv_str(&text, path),
            None if text.trim_start().starts_with('{') => Self::from_json_str(&text, path),
            None => Self::from_csv_str(&text, path),
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv_string(),
            Format::Json => self.to_json_string(),
        }
    }
}

/// Write the table to `path` in the requested format.
pub fn emit_report(table: &ReportTable, path: &Path, format: Format) -> Result<(), ReportError> {
    std::fs::write(path, table.render(format)).map_err(|source| ReportError::Io { path: path.into(), source })
}
