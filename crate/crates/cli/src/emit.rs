//! Deterministic CSV/JSON emission with atomic writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::config::Format;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    /// Masked value: empty in CSV, `null` in JSON.
    Missing,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(if x { "true" } else { "false" }.into())
    }
}

/// A header plus rows of equal width.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(csv_field).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let mut m = Map::new();
                    for (k, v) in self.header.iter().zip(row) {
                        m.insert(k.clone(), json_cell(v));
                    }
                    Value::Object(m)
                })
                .collect(),
        )
    }
}

fn csv_field(c: &Cell) -> String {
    match c {
        Cell::Num(x) => fmt_sig12(*x),
        Cell::Int(i) => i.to_string(),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
        Cell::Missing => String::new(),
    }
}

fn json_cell(c: &Cell) -> Value {
    match c {
        Cell::Num(x) => Number::from_f64(*x).map_or(Value::Null, Value::Number),
        Cell::Int(i) => Value::from(*i),
        Cell::Text(s) => Value::from(s.as_str()),
        Cell::Missing => Value::Null,
    }
}

/// Decimal rendering with 12 significant digits, trailing zeros dropped;
/// scientific notation outside `[1e-5, 1e12)`.
pub fn fmt_sig12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// A file committed to the output directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WrittenFile {
    pub name: String,
    /// Data rows (CSV excluding the header, JSON array length, 1 for a
    /// single document).
    pub rows: usize,
}

/// Output directory that removes everything it wrote unless committed.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    written: Vec<WrittenFile>,
    committed: bool,
}

impl OutputSet {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(OutputSet { dir: dir.to_path_buf(), written: Vec::new(), committed: false })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[WrittenFile] {
        &self.written
    }

    pub fn write_table(&mut self, stem: &str, table: &Table, format: Format) -> Result<(), CliError> {
        match format {
            Format::Csv => self.write_raw(&format!("{stem}.csv"), table.to_csv().as_bytes(), table.rows.len()),
            Format::Json => {
                let text = to_json_text(&table.to_json())?;
                self.write_raw(&format!("{stem}.json"), text.as_bytes(), table.rows.len())
            }
        }
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let text = to_json_text(value)?;
        self.write_raw(name, text.as_bytes(), 1)
    }

    /// Writes to a temporary sibling and renames it into place.
    pub fn write_raw(&mut self, name: &str, bytes: &[u8], rows: usize) -> Result<(), CliError> {
        let target = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.tmp"));
        let result = (|| {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(bytes)?;
            f.sync_all()?;
            fs::rename(&tmp, &target)
        })();
        if let Err(e) = result {
            let _ = fs::remove_file(&tmp);
            return Err(CliError::io(&target, e));
        }
        self.written.retain(|w| w.name != name);
        self.written.push(WrittenFile { name: name.to_string(), rows });
        Ok(())
    }

    pub fn commit(mut self) -> Vec<WrittenFile> {
        self.committed = true;
        std::mem::take(&mut self.written)
    }
}

impl Drop for OutputSet {
    fn drop(&mut self) {
        if !self.committed {
            for w in &self.written {
                let _ = fs::remove_file(self.dir.join(&w.name));
            }
        }
    }
}

pub fn to_json_text<T: Serialize + ?Sized>(value: &T) -> Result<String, CliError> {
    let mut s =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Compute(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}
