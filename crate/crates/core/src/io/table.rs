//! Typed CSV tables with fixed schemas.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which round-trips
//! every double exactly.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Float,
    Int,
    Text,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Float(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            Cell::Text(_) => None,
        }
    }

    fn kind(&self) -> Kind {
        match self {
            Cell::Float(_) => Kind::Float,
            Cell::Int(_) => Kind::Int,
            Cell::Text(_) => Kind::Text,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Int(i64::from(v))
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

use Kind::{Float as F, Int as I, Text as T};

/// Every CSV layout the tool writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Schema {
    Exact,
    Mc,
    McNodes,
    Theorem1,
    Figure1,
    OverlapTail,
    ExpMoment,
    Interpolate,
    Stein,
    HopfieldStein,
    Diffrule,
    Concentration,
    Disorder,
}

const ALL: [Schema; 13] = [
    Schema::Exact,
    Schema::Mc,
    Schema::McNodes,
    Schema::Theorem1,
    Schema::Figure1,
    Schema::OverlapTail,
    Schema::ExpMoment,
    Schema::Interpolate,
    Schema::Stein,
    Schema::HopfieldStein,
    Schema::Diffrule,
    Schema::Concentration,
    Schema::Disorder,
];

impl Schema {
    pub fn all() -> &'static [Schema] {
        &ALL
    }

    pub fn columns(&self) -> &'static [(&'static str, Kind)] {
        match self {
            Schema::Exact => &[
                ("n", I),
                ("m", I),
                ("alpha", F),
                ("beta", F),
                ("field", F),
                ("dist", T),
                ("hamiltonian", T),
                ("log_z", F),
                ("free_energy", F),
            ],
            Schema::Mc => &[
                ("n", I),
                ("m", I),
                ("alpha", F),
                ("beta", F),
                ("field", F),
                ("dist", T),
                ("hamiltonian", T),
                ("free_energy_mean", F),
                ("free_energy_se", F),
                ("statistical_se", F),
                ("truncation_se", F),
                ("burn_in", I),
                ("measurement_sweeps", I),
                ("swap_warning", I),
            ],
            Schema::McNodes => &[
                ("node", I),
                ("beta", F),
                ("minus_energy_per_site_mean", F),
                ("minus_energy_per_site_se", F),
                ("swap_acceptance_up", F),
            ],
            Schema::Theorem1 => &[
                ("alpha", F),
                ("f_hop_mean", F),
                ("f_hop_se", F),
                ("f_sk_mean", F),
                ("f_sk_se", F),
                ("residual_mean", F),
                ("residual_se", F),
                ("n_disorder", I),
                ("beta", F),
                ("field", F),
                ("n", I),
                ("m", I),
            ],
            Schema::Figure1 => &[
                ("beta", F),
                ("field", F),
                ("alpha", F),
                ("m", I),
                ("f_hop_mean", F),
                ("f_hop_se", F),
                ("curve", F),
                ("p_hat_mean", F),
                ("p_hat_se", F),
                ("residual_mean", F),
                ("residual_se", F),
                ("n_hop", I),
                ("n_sk", I),
            ],
            Schema::OverlapTail => &[("r", F), ("tail_mean", F), ("tail_se", F), ("n_disorder", I)],
            Schema::ExpMoment => &[
                ("n", I),
                ("m", I),
                ("alpha", F),
                ("beta", F),
                ("c", F),
                ("value_mean", F),
                ("value_se", F),
                ("n_disorder", I),
            ],
            Schema::Interpolate => &[("t", F), ("f_mean", F), ("f_se", F), ("n_disorder", I)],
            Schema::Stein => &[
                ("t", F),
                ("lhs_mean", F),
                ("lhs_se", F),
                ("rhs_mean", F),
                ("rhs_se", F),
                ("diff_mean", F),
                ("diff_se", F),
                ("n_disorder", I),
            ],
            Schema::HopfieldStein => &[
                ("m", I),
                ("lhs_mean", F),
                ("lhs_se", F),
                ("first_term_mean", F),
                ("first_term_se", F),
                ("remainder_mean", F),
                ("remainder_se", F),
                ("scaled_remainder_mean", F),
                ("scaled_remainder_se", F),
                ("n_disorder", I),
            ],
            Schema::Diffrule => &[
                ("kind", T),
                ("t", F),
                ("site", I),
                ("analytic", F),
                ("finite_diff", F),
                ("step", F),
            ],
            Schema::Concentration => &[
                ("n", I),
                ("m", I),
                ("mean_f", F),
                ("moment_mean", F),
                ("moment_se", F),
                ("d", F),
                ("n_disorder", I),
            ],
            Schema::Disorder => &[("kind", T), ("row", I), ("col", I), ("value", F)],
        }
    }

    pub fn header(&self) -> Vec<&'static str> {
        self.columns().iter().map(|(n, _)| *n).collect()
    }

    pub fn index_of(&self, column: &str) -> Option<usize> {
        self.columns().iter().position(|(n, _)| *n == column)
    }

    fn from_header(header: &[String]) -> Option<Schema> {
        ALL.iter().copied().find(|s| s.header().iter().eq(header.iter()))
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Schema::Exact => "exact",
            Schema::Mc => "mc",
            Schema::McNodes => "mc-nodes",
            Schema::Theorem1 => "theorem1",
            Schema::Figure1 => "figure1",
            Schema::OverlapTail => "overlap-tail",
            Schema::ExpMoment => "exp-moment",
            Schema::Interpolate => "interpolate",
            Schema::Stein => "stein",
            Schema::HopfieldStein => "hopfield-stein",
            Schema::Diffrule => "diffrule",
            Schema::Concentration => "concentration",
            Schema::Disorder => "disorder",
        };
        f.write_str(s)
    }
}

impl FromStr for Schema {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ALL.iter()
            .copied()
            .find(|k| k.to_string() == s)
            .ok_or_else(|| Error::Usage(format!("unknown schema '{s}'")))
    }
}

/// Rows of one schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub schema: Schema,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(schema: Schema) -> Self {
        Self {
            schema,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        self.check_row(&row, self.rows.len())?;
        self.rows.push(row);
        Ok(())
    }

    fn check_row(&self, row: &[Cell], index: usize) -> Result<()> {
        let cols = self.schema.columns();
        if row.len() != cols.len() {
            return Err(Error::Schema(format!(
                "row {index} has {} cells but schema {} has {} columns",
                row.len(),
                self.schema,
                cols.len()
            )));
        }
        for (cell, (name, kind)) in row.iter().zip(cols) {
            if cell.kind() != *kind {
                return Err(Error::Schema(format!(
                    "row {index}, column {name}: expected {kind:?}, got {:?}",
                    cell.kind()
                )));
            }
        }
        Ok(())
    }

    /// Numeric column by name.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self
            .schema
            .index_of(name)
            .ok_or_else(|| Error::Schema(format!("schema {} has no column '{name}'", self.schema)))?;
        self.rows
            .iter()
            .map(|r| r[k].as_f64().ok_or_else(|| Error::Schema(format!("column '{name}' is not numeric"))))
            .collect()
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(self.schema.header())?;
        for (i, row) in self.rows.iter().enumerate() {
            self.check_row(row, i)?;
            w.write_record(row.iter().map(Cell::render))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Schema(format!("CSV buffer: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Schema(format!("CSV is not UTF-8: {e}")))
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let schema = Schema::from_header(&header)
            .ok_or_else(|| Error::Schema(format!("header {header:?} matches no known schema")))?;
        let cols = schema.columns();
        let mut table = Table::new(schema);
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .zip(cols)
                .map(|(s, (name, kind))| {
                    let bad = |e: &dyn fmt::Display| Error::Schema(format!("row {i}, column {name}: '{s}': {e}"));
                    Ok(match kind {
                        Kind::Float => Cell::Float(s.parse().map_err(|e| bad(&e))?),
                        Kind::Int => Cell::Int(s.parse().map_err(|e| bad(&e))?),
                        Kind::Text => Cell::Text(s.to_string()),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            table.push(row)?;
        }
        Ok(table)
    }
}

/// Write `table` to `path` as UTF-8 CSV with a header row.
pub fn write_csv(table: &Table, path: &Path) -> Result<()> {
    let text = table.to_csv_string()?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Table::from_csv_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn headers_are_unique_per_schema() {
        for (i, a) in ALL.iter().enumerate() {
            for b in &ALL[i + 1..] {
                assert_ne!(a.header(), b.header(), "{a} and {b}");
            }
            assert_eq!(a.to_string().parse::<Schema>().unwrap(), *a);
        }
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(Schema::Interpolate);
        assert_eq!(t.to_csv_string().unwrap(), "t,f_mean,f_se,n_disorder\n");
    }

    #[test]
    fn mismatched_rows_are_rejected() {
        let mut t = Table::new(Schema::Interpolate);
        assert!(t.push(vec![0.5.into(), 1.0.into()]).is_err());
        assert!(t.push(vec![0.5.into(), 1.0.into(), 0.1.into(), 0.3.into()]).is_err());
        assert!(t.push(vec![0.5.into(), 1.0.into(), 0.1.into(), 3usize.into()]).is_ok());
    }
}
