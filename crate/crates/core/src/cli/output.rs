//! CSV tables with a fixed number of significant digits.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use crate::error::{Error, Result};

const SIGNIFICANT: i32 = 10;

/// Formats `x` with 10 significant digits, in plain decimal notation when
/// the magnitude allows it.
pub fn sig10(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exponent) {
        let decimals = (SIGNIFICANT - 1 - exponent).max(0) as usize;
        let text = format!("{x:.decimals$}");
        // log10 can land one below an exact power of ten
        if text.trim_start_matches('-').replace('.', "").trim_start_matches('0').len() > SIGNIFICANT as usize
            && decimals > 0
        {
            let decimals = decimals - 1;
            return format!("{x:.decimals$}");
        }
        text
    } else {
        format!("{:.*e}", (SIGNIFICANT - 1) as usize, x)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::Config(format!("cannot write CSV: {e}"));
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            writer.write_record(row).map_err(io)?;
        }
        writer.flush().map_err(|e| Error::Config(format!("cannot write CSV: {e}")))
    }

    /// Writes to `path`, or to stdout when no path is given.
    pub fn emit(&self, path: Option<&Path>) -> Result<()> {
        match path {
            Some(path) => {
                let file = File::create(path)
                    .map_err(|e| Error::Config(format!("cannot create {}: {e}", path.display())))?;
                self.write_csv(file)
            }
            None => self.write_csv(io::stdout().lock()),
        }
    }

    /// Space-aligned rendering for the terminal.
    pub fn render(&self) -> String {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        let mut text = line(&self.header);
        for row in &self.rows {
            text.push('\n');
            text.push_str(&line(row));
        }
        text
    }
}
