//! CSV rendering with a self-describing config-echo comment line.
//!
//! Schema: one `#` comment line echoing the full run configuration
//! (including the seed, excluding scheduling knobs such as worker count,
//! which never change the numbers), then a header row, then data rows.
//! Cells are printed to a fixed number of significant digits, '.' decimal
//! point, ',' separator. Emitting a non-finite cell is an error: NaN in a
//! result is an infrastructure failure, never data.

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SIG_DIGITS: usize = 6;

/// Formats with `digits` significant digits in plain decimal notation.
pub fn format_sig(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let digits = digits.max(1) as i32;
    let mag = v.abs().log10().floor() as i32;
    let decimals = (digits - 1 - mag).clamp(0, 17) as usize;
    format!("{v:.decimals$}")
}

#[derive(Debug, Clone)]
pub struct CsvReport {
    /// Echo of the run configuration, emitted after `# `.
    pub config_echo: String,
    pub columns: Vec<String>,
    /// Row-major data; every row has one value per column.
    pub rows: Vec<Vec<f64>>,
}

impl CsvReport {
    pub fn render(&self, sig_digits: usize) -> Result<String> {
        let mut out = String::new();
        out.push_str("# ");
        out.push_str(&self.config_echo);
        out.push('\n');
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for (r, row) in self.rows.iter().enumerate() {
            if row.len() != self.columns.len() {
                return Err(Error::GridMismatch(format!(
                    "row {} has {} cells, expected {}",
                    r + 1,
                    row.len(),
                    self.columns.len()
                )));
            }
            let cells: Vec<String> = row
                .iter()
                .map(|&v| {
                    if v.is_finite() {
                        Ok(format_sig(v, sig_digits))
                    } else {
                        Err(Error::NonFiniteOutput(format!(
                            "row {}, value {v}",
                            r + 1
                        )))
                    }
                })
                .collect::<Result<_>>()?;
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        Ok(out)
    }
}
