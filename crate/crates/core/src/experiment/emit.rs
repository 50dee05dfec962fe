use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bounds::BoundReport;
use crate::error::{Error, Result};

/// Output encoding of experiment artifacts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    StructuredText,
    Plotdata,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::StructuredText => "toml",
            Format::Plotdata => "dat",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "structured-text" | "toml" => Ok(Format::StructuredText),
            "plotdata" => Ok(Format::Plotdata),
            other => Err(Error::Parse(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn number(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Float(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }

    fn to_toml(&self) -> toml::Value {
        match self {
            Cell::Int(v) => toml::Value::Integer(*v),
            Cell::Float(v) => toml::Value::Float(*v),
            Cell::Text(s) => toml::Value::String(s.clone()),
        }
    }
}

/// A named result table; the first column is the sweep variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    /// Numeric column as `f64`, `None` if absent or textual.
    pub fn numbers(&self, name: &str) -> Option<Vec<f64>> {
        self.column(name)?.into_iter().map(Cell::number).collect()
    }

    /// Reports flattened into a table; parameters become trailing columns.
    pub fn from_reports(reports: &[BoundReport<f64>]) -> Self {
        let names: std::collections::BTreeSet<&str> = reports
            .iter()
            .flat_map(|r| r.params.keys().map(String::as_str))
            .collect();
        let mut columns = vec!["quantity", "computed", "bound", "side", "ratio", "status"];
        columns.extend(names.iter().copied());
        let mut table = Table::new("reports", &columns);
        for r in reports {
            let mut row: Vec<Cell> = vec![
                r.quantity.as_str().into(),
                r.computed.into(),
                r.bound.into(),
                format!("{:?}", r.side).to_lowercase().into(),
                r.ratio.into(),
                r.status.to_string().into(),
            ];
            row.extend(
                names
                    .iter()
                    .map(|n| r.params.get(*n).map_or(Cell::Text(String::new()), |&v| v.into())),
            );
            table.push(row);
        }
        table
    }
}

/// Provenance stamped into every artifact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stamp {
    pub experiment: String,
    pub manifest_hash: String,
    pub version: String,
}

pub fn write_table<W: Write>(table: &Table, stamp: &Stamp, format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => write_csv(table, stamp, out),
        Format::StructuredText => write_toml(table, stamp, out),
        Format::Plotdata => write_plotdata(table, stamp, out),
    }
}

fn write_csv<W: Write>(table: &Table, stamp: &Stamp, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = table.columns.iter().map(String::as_str).collect();
    header.extend(["manifest_hash", "version"]);
    w.write_record(&header)?;
    for row in &table.rows {
        let mut rec: Vec<String> = row.iter().map(Cell::to_string).collect();
        rec.push(stamp.manifest_hash.clone());
        rec.push(stamp.version.clone());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn write_toml<W: Write>(table: &Table, stamp: &Stamp, mut out: W) -> Result<()> {
    let mut doc = toml::Table::new();
    doc.insert("experiment".into(), stamp.experiment.clone().into());
    doc.insert("manifest_hash".into(), stamp.manifest_hash.clone().into());
    doc.insert("version".into(), stamp.version.clone().into());
    doc.insert("table".into(), table.name.clone().into());
    doc.insert(
        "columns".into(),
        toml::Value::Array(table.columns.iter().map(|c| c.clone().into()).collect()),
    );
    let rows = table
        .rows
        .iter()
        .map(|row| {
            toml::Value::Table(
                table
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.clone(), v.to_toml()))
                    .collect(),
            )
        })
        .collect();
    doc.insert("row".into(), toml::Value::Array(rows));
    let text = toml::to_string(&doc).map_err(|e| Error::Parse(e.to_string()))?;
    out.write_all(text.as_bytes())?;
    Ok(())
}

/// One two-column block per numeric series against the first column,
/// blocks separated by two blank lines.
fn write_plotdata<W: Write>(table: &Table, stamp: &Stamp, mut out: W) -> Result<()> {
    writeln!(
        out,
        "# vtresist {} experiment {} manifest {} table {}",
        stamp.version, stamp.experiment, stamp.manifest_hash, table.name
    )?;
    writeln!(out, "# x = {}", table.columns[0])?;
    let xs: Vec<Option<f64>> = table.rows.iter().map(|r| r[0].number()).collect();
    let mut first = true;
    for (i, name) in table.columns.iter().enumerate().skip(1) {
        if table.rows.iter().any(|r| r[i].number().is_none()) {
            continue;
        }
        if !first {
            writeln!(out, "\n")?;
        }
        first = false;
        writeln!(out, "# series {name}")?;
        for (row, x) in table.rows.iter().zip(&xs) {
            match x {
                Some(x) => writeln!(out, "{x} {}", row[i])?,
                None => writeln!(out, "{} {}", row[0], row[i])?,
            }
        }
    }
    Ok(())
}

/// Writes every table plus the report table (if any) into `dir`, returning
/// the created paths.
pub fn emit(
    tables: &[Table],
    reports: &[BoundReport<f64>],
    stamp: &Stamp,
    format: Format,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    if tables.iter().all(|t| t.rows.is_empty()) && reports.is_empty() {
        return Err(Error::BadArguments("nothing to emit".into()));
    }
    std::fs::create_dir_all(dir)?;
    let mut all: Vec<Table> = tables.to_vec();
    if !reports.is_empty() {
        all.push(Table::from_reports(reports));
    }
    let mut paths = Vec::new();
    for t in &all {
        let path = dir.join(format!("{}.{}", t.name, format.extension()));
        let file = std::io::BufWriter::new(std::fs::File::create(&path)?);
        write_table(t, stamp, format, file)?;
        paths.push(path);
    }
    Ok(paths)
}
