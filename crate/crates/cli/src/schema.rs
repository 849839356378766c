//! Typed CSV cells, lossless text encoding and schema files.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{invalid, HarnessResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColType {
    Int,
    Float,
    Bool,
    Text,
}

impl ColType {
    pub fn name(self) -> &'static str {
        match self {
            ColType::Int => "int",
            ColType::Float => "float",
            ColType::Bool => "bool",
            ColType::Text => "text",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Column {
    pub name: &'static str,
    pub ty: ColType,
    pub doc: &'static str,
}

pub const fn col(name: &'static str, ty: ColType, doc: &'static str) -> Column {
    Column { name, ty, doc }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    /// Nonnegative integer.
    Int(u64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Value {
    pub fn ty(&self) -> ColType {
        match self {
            Value::Int(_) => ColType::Int,
            Value::Float(_) => ColType::Float,
            Value::Bool(_) => ColType::Bool,
            Value::Text(_) => ColType::Text,
        }
    }

    pub fn parse(ty: ColType, s: &str) -> HarnessResult<Value> {
        fn read<T: std::str::FromStr>(ty: ColType, s: &str) -> HarnessResult<T> {
            s.parse()
                .or_else(|_| invalid(format!("cannot read {s:?} as {}", ty.name())))
        }
        Ok(match ty {
            ColType::Int => Value::Int(read(ty, s)?),
            ColType::Float => Value::Float(read(ty, s)?),
            ColType::Bool => Value::Bool(read(ty, s)?),
            ColType::Text => Value::Text(s.to_string()),
        })
    }

    /// Equality with floats compared bit for bit.
    pub fn same(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Float(a), Value::Float(b)) => {
                a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())
            }
            _ => self == other,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            // 17 significant digits: exact round trip for every f64.
            Value::Float(v) => write!(f, "{v:.16e}"),
            Value::Bool(v) => write!(f, "{v}"),
            Value::Text(v) => write!(f, "{v}"),
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as u64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

/// Path of the schema file written next to `out`.
pub fn schema_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".schema.csv");
    PathBuf::from(s)
}

/// Schema as CSV: `column,type,description`.
pub fn write_schema<W: Write>(w: W, columns: &[Column]) -> HarnessResult<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["column", "type", "description"])?;
    for c in columns {
        out.write_record([c.name, c.ty.name(), c.doc])?;
    }
    out.flush()?;
    Ok(())
}

/// Parse one CSV record against `columns`; empty fields read as `None`.
pub fn parse_record(
    columns: &[Column],
    record: &csv::StringRecord,
) -> HarnessResult<Vec<Option<Value>>> {
    if record.len() != columns.len() {
        return invalid(format!(
            "expected {} fields, found {}",
            columns.len(),
            record.len()
        ));
    }
    columns
        .iter()
        .zip(record.iter())
        .map(|(c, s)| {
            if s.is_empty() {
                Ok(None)
            } else {
                Value::parse(c.ty, s).map(Some)
            }
        })
        .collect()
}
