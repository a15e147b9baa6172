//! Plot-ready tables and their CSV / JSON encodings.
//!
//! Numbers use `%.9g` formatting (9 significant digits, shortest of fixed
//! or scientific, trailing zeros dropped). CSV uses `,` separators, `.`
//! decimals and LF line endings. Failed cells are written as `error` in CSV
//! and `null` in JSON; non-finite values as `inf`, `-inf`, `nan` in CSV and
//! `null` in JSON.

use serde::Serialize;

const SIGNIFICANT: i32 = 9;

/// Formats like C's `%.9g`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (SIGNIFICANT - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIGNIFICANT).contains(&exp) {
        let decimals = (SIGNIFICANT - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_fraction(mantissa), exp.abs())
    }
}

fn trim_fraction(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Cell {
    Value(f64),
    Error,
}

impl Cell {
    pub fn value(&self) -> Option<f64> {
        match self {
            Cell::Value(v) => Some(*v),
            Cell::Error => None,
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Value(v) => format_number(*v),
            Cell::Error => "error".into(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Value(v) if v.is_finite() => format_number(*v),
            _ => "null".into(),
        }
    }
}

/// A rectangular table: header plus rows of equal width.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// `(row index, message)` for every failed row.
    pub errors: Vec<(usize, String)>,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = self.columns.iter().map(|c| csv_field(c)).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let columns: Vec<String> = self.columns.iter().map(|c| json_string(c)).collect();
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| format!("[{}]", r.iter().map(Cell::json).collect::<Vec<_>>().join(",")))
            .collect();
        let errors: Vec<String> = self
            .errors
            .iter()
            .map(|(i, m)| format!("{{\"row\":{i},\"message\":{}}}", json_string(m)))
            .collect();
        format!(
            "{{\"columns\":[{}],\"rows\":[{}],\"errors\":[{}]}}\n",
            columns.join(","),
            rows.join(","),
            errors.join(",")
        )
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx].value()).collect())
    }
}
