//! Column-oriented time series and deterministic number formatting shared by
//! every file writer.

use std::io::Write;

use serde::{Deserialize, Serialize};

/// Formats with 17 significant digits so that every `f64` round-trips and
/// identical inputs give byte-identical files.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // avoid "-0e0" style noise from signed zeros
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// JSON object `{columns, rows}` with numbers rendered by [`fmt_f64`];
    /// non-finite values become `null`.
    pub fn to_json(&self) -> serde_json::Value {
        let rows = self
            .rows
            .iter()
            .map(|r| serde_json::Value::Array(r.iter().map(|&x| json_number(x)).collect()))
            .collect();
        serde_json::json!({ "columns": self.columns, "rows": serde_json::Value::Array(rows) })
    }
}

/// Number for JSON output, `null` when not finite.
pub fn json_number(x: f64) -> serde_json::Value {
    if x.is_finite() {
        let parsed: f64 = fmt_f64(x).parse().expect("formatted float parses");
        serde_json::Number::from_f64(parsed).map_or(serde_json::Value::Null, serde_json::Value::Number)
    } else {
        serde_json::Value::Null
    }
}
