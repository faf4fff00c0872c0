use serde_json::{Map, Number, Value};

use crate::config::Format;
use crate::error::{CliError, Result};

pub const ERROR_COLUMN: &str = "error";

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub values: Vec<f64>,
    pub error: Option<String>,
}

/// Rows of named real columns plus a per-row error message.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

impl Dataset {
    pub fn new(columns: Vec<String>) -> Self {
        Dataset { columns, rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.values[k]).collect())
    }

    /// Values equal bit for bit, with every NaN treated as equal.
    pub fn same_values(&self, other: &Dataset) -> bool {
        self.columns == other.columns
            && self.rows.len() == other.rows.len()
            && self.rows.iter().zip(&other.rows).all(|(a, b)| {
                a.error == b.error
                    && a.values.len() == b.values.len()
                    && a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits() || x.is_nan() && y.is_nan())
            })
    }

    pub fn from_csv(bytes: &[u8]) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
        let header: Vec<String> = rd.headers().map_err(parse_err)?.iter().map(str::to_string).collect();
        if header.last().map(String::as_str) != Some(ERROR_COLUMN) {
            return Err(CliError::Parse(format!("last column must be `{ERROR_COLUMN}`")));
        }
        let mut ds = Dataset::new(header[..header.len() - 1].to_vec());
        for rec in rd.records() {
            let rec = rec.map_err(parse_err)?;
            let n = ds.columns.len();
            let values = (0..n).map(|k| parse_number(&rec[k])).collect::<Result<Vec<_>>>()?;
            let error = Some(rec[n].to_string()).filter(|e| !e.is_empty());
            ds.rows.push(Row { values, error });
        }
        Ok(ds)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let rows: Vec<Map<String, Value>> = serde_json::from_slice(bytes).map_err(parse_err)?;
        let first = rows.first().ok_or(CliError::EmptyDataset)?;
        let columns: Vec<String> = first.keys().filter(|k| *k != ERROR_COLUMN).cloned().collect();
        let mut ds = Dataset::new(columns);
        for obj in &rows {
            if obj.len() != ds.columns.len() + 1 {
                return Err(CliError::Parse("rows have differing columns".into()));
            }
            let mut values = Vec::with_capacity(ds.columns.len());
            for c in &ds.columns {
                let v = obj.get(c).ok_or_else(|| CliError::Parse(format!("missing column `{c}`")))?;
                values.push(match v {
                    Value::Number(x) => x.as_f64().ok_or_else(|| CliError::Parse(format!("bad number in `{c}`")))?,
                    Value::String(s) => parse_number(s)?,
                    _ => return Err(CliError::Parse(format!("bad value in `{c}`"))),
                });
            }
            let error = match obj.get(ERROR_COLUMN) {
                Some(Value::Null) => None,
                Some(Value::String(s)) => Some(s.clone()),
                _ => return Err(CliError::Parse(format!("bad `{ERROR_COLUMN}` field"))),
            };
            ds.rows.push(Row { values, error });
        }
        Ok(ds)
    }

    pub fn parse(bytes: &[u8], format: Format) -> Result<Self> {
        match format {
            Format::Csv => Dataset::from_csv(bytes),
            Format::Json => Dataset::from_json(bytes),
        }
    }
}

fn parse_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Parse(e.to_string())
}

fn parse_number(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| CliError::Parse(format!("bad number `{s}`")))
}

/// 17 significant digits; non-finite values as `inf`, `-inf`, `nan`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn json_number(x: f64) -> Value {
    match Number::from_f64(x) {
        Some(n) => Value::Number(n),
        None => Value::String(format_number(x)),
    }
}

pub fn emit(ds: &Dataset, format: Format) -> Result<Vec<u8>> {
    if ds.rows.is_empty() {
        return Err(CliError::EmptyDataset);
    }
    match format {
        Format::Csv => {
            let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            wr.write_record(ds.columns.iter().map(String::as_str).chain([ERROR_COLUMN])).map_err(parse_err)?;
            for r in &ds.rows {
                let mut rec: Vec<String> = r.values.iter().map(|&x| format_number(x)).collect();
                rec.push(r.error.clone().unwrap_or_default());
                wr.write_record(&rec).map_err(parse_err)?;
            }
            wr.into_inner().map_err(|e| CliError::Io(e.into_error()))
        }
        Format::Json => {
            let rows: Vec<Value> = ds
                .rows
                .iter()
                .map(|r| {
                    let mut obj = Map::new();
                    for (c, &x) in ds.columns.iter().zip(&r.values) {
                        obj.insert(c.clone(), json_number(x));
                    }
                    obj.insert(ERROR_COLUMN.into(), r.error.clone().map_or(Value::Null, Value::String));
                    Value::Object(obj)
                })
                .collect();
            let mut out = serde_json::to_vec_pretty(&rows).map_err(parse_err)?;
            out.push(b'\n');
            Ok(out)
        }
    }
}
