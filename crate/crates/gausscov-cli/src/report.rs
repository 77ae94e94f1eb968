//! Report assembly and emission.
//!
//! Every subcommand produces a [`Report`]: a list of named tables holding
//! typed cells. The CSV and JSON emitters render the same cells, so the
//! two formats always carry identical numbers.

use std::io::Write;

/// One typed value in a report table.
#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
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

/// A named table: column headers and rows of cells.
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(name: &'static str, columns: Vec<S>) -> Self {
        Table {
            name,
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// The full output of one subcommand run.
pub struct Report {
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(tables: Vec<Table>) -> Self {
        Report { tables }
    }

    /// CSV rendering: each table starts with a `#name` line, then the
    /// header row and the data rows. Tables are separated by a blank line.
    pub fn to_csv(&self) -> String {
        let mut out = Vec::new();
        for (i, table) in self.tables.iter().enumerate() {
            if i > 0 {
                out.push(b'\n');
            }
            writeln!(out, "#{}", table.name).unwrap();
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&table.columns).unwrap();
            for row in &table.rows {
                w.write_record(row.iter().map(|c| match c {
                    Cell::Int(v) => v.to_string(),
                    Cell::Num(v) => format!("{v:?}"),
                    Cell::Text(v) => v.clone(),
                }))
                .unwrap();
            }
            out = w.into_inner().unwrap();
        }
        String::from_utf8(out).unwrap()
    }

    /// JSON rendering: an object keyed by table name, each table an array
    /// of row objects keyed by column name.
    pub fn to_json(&self) -> String {
        let mut root = serde_json::Map::new();
        for table in &self.tables {
            let rows: Vec<serde_json::Value> = table
                .rows
                .iter()
                .map(|row| {
                    let mut obj = serde_json::Map::new();
                    for (col, cell) in table.columns.iter().zip(row) {
                        let v = match cell {
                            Cell::Int(v) => serde_json::Value::from(*v),
                            Cell::Num(v) => serde_json::Number::from_f64(*v)
                                .map(serde_json::Value::Number)
                                .unwrap_or(serde_json::Value::Null),
                            Cell::Text(v) => serde_json::Value::from(v.clone()),
                        };
                        obj.insert(col.clone(), v);
                    }
                    serde_json::Value::Object(obj)
                })
                .collect();
            root.insert(table.name.to_string(), serde_json::Value::Array(rows));
        }
        let mut text = serde_json::to_string_pretty(&root).unwrap();
        text.push('\n');
        text
    }
}
