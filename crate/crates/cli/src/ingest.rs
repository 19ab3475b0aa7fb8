//! Reading two columns out of a delimiter-separated text file.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use cloud_core::Column;
use serde::{Deserialize, Serialize};

/// Integer columns with at most this many distinct values are typed discrete
/// when the type is `auto`.
pub const DEFAULT_AUTO_THRESHOLD: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Delimiter {
    Comma,
    Tab,
    /// Runs of spaces and tabs.
    Whitespace,
    Char(char),
}

impl Delimiter {
    /// Comma if the first data line has one, else tab, else whitespace.
    pub fn detect(text: &str) -> Self {
        let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
        if line.contains(',') {
            Delimiter::Comma
        } else if line.contains('\t') {
            Delimiter::Tab
        } else {
            Delimiter::Whitespace
        }
    }
}

impl FromStr for Delimiter {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "comma" | "," => Ok(Delimiter::Comma),
            "tab" | "\\t" | "\t" => Ok(Delimiter::Tab),
            "whitespace" | "space" | " " => Ok(Delimiter::Whitespace),
            other => {
                let mut chars = other.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) if c.is_ascii() => Ok(Delimiter::Char(c)),
                    _ => Err(format!("unsupported delimiter `{other}`")),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum HeaderMode {
    /// A first row with any non-numeric field is a header.
    #[default]
    Auto,
    Present,
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DeclaredType {
    #[default]
    Auto,
    Discrete,
    Continuous,
}

/// A column selected by header name or by zero-based position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

impl FromStr for ColumnRef {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnRef::Index(i),
            Err(_) => ColumnRef::Name(s.to_string()),
        })
    }
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnRef::Index(i) => write!(f, "#{i}"),
            ColumnRef::Name(n) => write!(f, "`{n}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub column: ColumnRef,
    pub declared_type: DeclaredType,
    /// Alphabet size of a discrete column, when known.
    pub arity: Option<usize>,
}

/// A parsed table: optional header plus rows of raw fields.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub rows: Vec<Vec<String>>,
    /// One-based line number of the first data row.
    first_line: usize,
}

impl Table {
    pub fn read(path: &Path, delimiter: Option<Delimiter>, header: HeaderMode) -> Result<Self> {
        let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
        let text = String::from_utf8(bytes).with_context(|| format!("{} is not valid UTF-8", path.display()))?;
        Self::parse(&text, delimiter, header)
    }

    pub fn parse(text: &str, delimiter: Option<Delimiter>, header: HeaderMode) -> Result<Self> {
        let delimiter = delimiter.unwrap_or_else(|| Delimiter::detect(text));
        let mut records = split_records(text, delimiter)?;
        let first_is_header = match header {
            HeaderMode::Present => true,
            HeaderMode::Absent => false,
            HeaderMode::Auto => records
                .first()
                .is_some_and(|(_, r)| r.iter().any(|f| f.trim().parse::<f64>().is_err())),
        };
        let header = if first_is_header && !records.is_empty() {
            Some(records.remove(0).1.into_iter().map(|f| f.trim().to_string()).collect())
        } else {
            None
        };
        let first_line = records.first().map_or(1, |(l, _)| *l);
        if records.is_empty() {
            bail!("input has no data rows");
        }
        Ok(Self { header, rows: records.into_iter().map(|(_, r)| r).collect(), first_line })
    }

    fn resolve(&self, col: &ColumnRef) -> Result<usize> {
        let width = self.rows[0].len();
        match col {
            ColumnRef::Index(i) if *i < width => Ok(*i),
            ColumnRef::Index(i) => bail!("column {i} does not exist (rows have {width} fields)"),
            ColumnRef::Name(name) => {
                let Some(header) = &self.header else {
                    bail!("column `{name}` requested by name but the input has no header");
                };
                header
                    .iter()
                    .position(|h| h == name)
                    .with_context(|| format!("no column named `{name}` (header: {})", header.join(", ")))
            }
        }
    }

    fn cells(&self, col: &ColumnRef) -> Result<Vec<(usize, &str)>> {
        let idx = self.resolve(col)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let line = self.first_line + i;
                match row.get(idx).map(|s| s.trim()) {
                    None => bail!("row {line}, column {col}: missing field"),
                    Some("") => bail!("row {line}, column {col}: empty cell (missing values are not supported)"),
                    Some(cell) => Ok((line, cell)),
                }
            })
            .collect()
    }

    /// Extracts and types one column.
    pub fn column(&self, spec: &ColumnSpec, auto_threshold: usize) -> Result<Column> {
        let cells = self.cells(&spec.column)?;
        let col = &spec.column;
        let as_ints = || -> Result<Vec<i64>> {
            cells
                .iter()
                .map(|&(line, c)| {
                    c.parse::<i64>()
                        .map_err(|_| anyhow::anyhow!("row {line}, column {col}: `{c}` is not an integer"))
                })
                .collect()
        };
        let as_reals = || -> Result<Vec<f64>> {
            cells
                .iter()
                .map(|&(line, c)| match c.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => bail!("row {line}, column {col}: `{c}` is not a finite number"),
                })
                .collect()
        };
        match spec.declared_type {
            DeclaredType::Discrete => Ok(Column::Discrete { values: as_ints()?, arity: spec.arity }),
            DeclaredType::Continuous => Ok(Column::Continuous { values: as_reals()? }),
            DeclaredType::Auto => {
                let reals = as_reals()?;
                if let Ok(ints) = as_ints() {
                    let distinct: BTreeSet<i64> = ints.iter().copied().collect();
                    if distinct.len() <= auto_threshold {
                        return Ok(Column::Discrete { values: ints, arity: spec.arity });
                    }
                }
                Ok(Column::Continuous { values: reals })
            }
        }
    }
}

/// Splits `text` into non-blank records, each tagged with its line number.
fn split_records(text: &str, delimiter: Delimiter) -> Result<Vec<(usize, Vec<String>)>> {
    let byte = match delimiter {
        Delimiter::Whitespace => {
            return Ok(text
                .lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
                .map(|(i, l)| (i + 1, l.split_whitespace().map(str::to_string).collect()))
                .collect());
        }
        Delimiter::Comma => b',',
        Delimiter::Tab => b'\t',
        Delimiter::Char(c) => c as u8,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(byte)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.context("malformed delimited input")?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        out.push((line, record.iter().map(str::to_string).collect()));
    }
    Ok(out)
}
