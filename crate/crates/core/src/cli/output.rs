//! Record serialisation: CSV or JSON lines, each preceded by a schema line.

use std::io::Write;

use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Num(f64),
    Text(String),
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Num(v)
    }
}

impl From<String> for Field {
    fn from(v: String) -> Self {
        Field::Text(v)
    }
}

impl From<&str> for Field {
    fn from(v: &str) -> Self {
        Field::Text(v.into())
    }
}

/// 17 significant digits.
pub fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Rows sharing a column list, tagged with a schema id.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub schema: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Field>>,
}

fn io(e: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("write failed: {e}"))
}

impl Table {
    pub fn new(schema: &str, columns: Vec<&'static str>) -> Self {
        Self { schema: schema.into(), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Field>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        writeln!(out, "# schema: {}", self.schema).map_err(io)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|f| match f {
                Field::Num(v) => format_number(*v),
                Field::Text(s) => s.clone(),
            }))
            .map_err(io)?;
        }
        w.flush().map_err(io)
    }

    /// Numbers use the shortest representation that round-trips; non-finite
    /// values become `null`.
    fn write_json(&self, out: &mut dyn Write) -> Result<()> {
        writeln!(out, "{}", serde_json::json!({ "schema": self.schema })).map_err(io)?;
        for row in &self.rows {
            let obj: Map<String, Value> = self
                .columns
                .iter()
                .zip(row)
                .map(|(k, f)| {
                    let v = match f {
                        Field::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
                        Field::Text(s) => Value::String(s.clone()),
                    };
                    (k.to_string(), v)
                })
                .collect();
            writeln!(out, "{}", Value::Object(obj)).map_err(io)?;
        }
        Ok(())
    }
}
