//! Tabular reports rendered as CSV or JSON.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn parse(raw: &str) -> Option<Self> {
        match raw.trim().to_ascii_lowercase().as_str() {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // Debug formatting of f64 is the shortest round-trip form.
            Cell::Num(v) => write!(f, "{v:?}"),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Bool(b) => write!(f, "{b}"),
            Cell::Empty => Ok(()),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Num(v) if v.is_finite() => s.serialize_f64(*v),
            Cell::Num(v) => s.collect_str(&format_args!("{v:?}")),
            Cell::Int(v) => s.serialize_u64(*v),
            Cell::Text(t) => s.serialize_str(t),
            Cell::Bool(b) => s.serialize_bool(*b),
            Cell::Empty => s.serialize_none(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Summary records written after the rows.
    pub footer: Vec<(String, Cell)>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            footer: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl Into<Cell>) {
        self.footer.push((key.into(), value.into()));
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub version: &'static str,
    pub command: String,
    pub seed: Option<u64>,
    pub scheme: String,
    pub config: BTreeMap<String, String>,
}

struct RowsSer<'a>(&'a Table);
struct RowSer<'a>(&'a [&'static str], &'a [Cell]);
struct FooterSer<'a>(&'a [(String, Cell)]);

impl Serialize for RowsSer<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.rows.len()))?;
        for row in &self.0.rows {
            seq.serialize_element(&RowSer(&self.0.columns, row))?;
        }
        seq.end()
    }
}

impl Serialize for RowSer<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0.iter().zip(self.1) {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl Serialize for FooterSer<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

#[derive(Serialize)]
struct Document<'a> {
    meta: &'a Meta,
    rows: RowsSer<'a>,
    #[serde(skip_serializing_if = "is_empty_footer")]
    footer: FooterSer<'a>,
}

fn is_empty_footer(f: &FooterSer<'_>) -> bool {
    f.0.is_empty()
}

pub fn render(table: &Table, meta: &Meta, format: Format) -> std::io::Result<Vec<u8>> {
    match format {
        Format::Csv => render_csv(table),
        Format::Json => render_json(table, meta),
    }
}

fn render_csv(table: &Table) -> std::io::Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|c| c.to_string()))?;
    }
    let mut out = w.into_inner().map_err(|e| e.into_error())?;
    for (k, v) in &table.footer {
        writeln!(out, "# {k}={v}")?;
    }
    Ok(out)
}

fn render_json(table: &Table, meta: &Meta) -> std::io::Result<Vec<u8>> {
    let doc = Document {
        meta,
        rows: RowsSer(table),
        footer: FooterSer(&table.footer),
    };
    let mut out = serde_json::to_vec_pretty(&doc)?;
    out.push(b'\n');
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> Meta {
        Meta {
            version: "0",
            command: "sweep".into(),
            seed: Some(7),
            scheme: "eq18".into(),
            config: BTreeMap::new(),
        }
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(vec!["x", "label"]);
        t.push(vec![0.1.into(), "a,b".into()]);
        t.push(vec![Cell::Num(1e-300), Cell::Empty]);
        t.note("masked", 3usize);
        let text = String::from_utf8(render(&t, &meta(), Format::Csv).unwrap()).unwrap();
        assert_eq!(text, "x,label\n0.1,\"a,b\"\n1e-300,\n# masked=3\n");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn json_keeps_column_order() {
        let mut t = Table::new(vec!["z", "a"]);
        t.push(vec![2.0.into(), Cell::Empty]);
        let text = String::from_utf8(render(&t, &meta(), Format::Json).unwrap()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["meta"]["seed"], 7);
        assert_eq!(v["rows"][0]["z"], 2.0);
        assert!(v["rows"][0]["a"].is_null());
        assert!(text.find("\"z\"").unwrap() < text.find("\"a\"").unwrap());
        assert!(v.get("footer").is_none());
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.1 + 0.2, 1.0 / 3.0, -2.5e-17, 6.02214076e23, 5e-324] {
            let s = Cell::Num(v).to_string();
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
    }
}
