//! Tabular output: CSV with an optional `# fit` footer line, or a single
//! JSON object with `config`, `columns`, `rows` and `fit`.

use std::io::{self, Write};

use qwalk::output::{num, parse_num};
use qwalk::simulate::AbsorptionRecord;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => num(*x),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            // round to the CSV precision so both formats carry the same numbers
            Cell::Num(x) => parse_num(&num(*x)).and_then(serde_json::Number::from_f64).map_or(Value::Null, Value::Number),
            Cell::Text(s) => json!(s),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub config: Map<String, Value>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub fit: Option<Value>,
}

impl Report {
    pub fn new(config: Map<String, Value>, columns: Vec<&'static str>) -> Self {
        Report { config, columns, rows: Vec::new(), fit: None }
    }

    pub fn write<W: Write>(&self, format: Format, mut w: W) -> io::Result<()> {
        match format {
            Format::Csv => {
                writeln!(w, "{}", self.columns.join(","))?;
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                    writeln!(w, "{}", cells.join(","))?;
                }
                if let Some(fit) = &self.fit {
                    writeln!(w, "# fit {fit}")?;
                }
            }
            Format::Json => {
                let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
                let doc = json!({
                    "config": self.config,
                    "columns": self.columns,
                    "rows": rows,
                    "fit": self.fit.clone().unwrap_or(Value::Null),
                });
                serde_json::to_writer(&mut w, &doc)?;
                writeln!(w)?;
            }
        }
        Ok(())
    }
}

pub const RECORD_COLUMNS: [&str; 4] = ["t", "absorbed_left", "absorbed_right", "remaining"];

pub fn record_rows(rec: &AbsorptionRecord) -> Vec<Vec<Cell>> {
    (1..=rec.steps)
        .map(|t| {
            let (l, r) = rec.absorbed_at(t);
            vec![Cell::Int(t as i64), Cell::Num(l), Cell::Num(r), Cell::Num(rec.remaining[t - 1])]
        })
        .collect()
}
