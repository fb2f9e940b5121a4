//! Plain string tables and their CSV form.

use std::path::Path;

use super::{HarnessError, HarnessResult};

/// Columns of a sweep result table, in output order.
pub const RESULT_COLUMNS: [&str; 18] = [
    "scenario",
    "grid_index",
    "trial",
    "seed",
    "fiber_length_km",
    "tx_linewidth_hz",
    "lo_linewidth_hz",
    "osnr_db",
    "equalizer",
    "cpr",
    "block_size",
    "step_size",
    "effective_linewidth_hz",
    "bit_errors",
    "bits",
    "ber",
    "cycle_slips",
    "lms_diverged",
];

/// Formats a float with 9 significant digits. Infinities are written as
/// `inf` / `-inf`.
pub fn sig9(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.8e}")
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv_string(&self) -> HarnessResult<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| HarnessError::io("<csv>", e);
        w.write_record(&self.columns).map_err(fail)?;
        for r in &self.rows {
            w.write_record(r).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::io("<csv>", e))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn from_csv_str(text: &str) -> HarnessResult<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let fail = |e: csv::Error| HarnessError::io("<csv>", e);
        let columns = r.headers().map_err(fail)?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
            .collect::<Result<_, _>>()
            .map_err(fail)?;
        Ok(Self { columns, rows })
    }
}

/// Writes `table` to `path`, creating parent directories.
pub fn emit_csv(path: impl AsRef<Path>, table: &Table) -> HarnessResult<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    let text = table.to_csv_string()?;
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

pub fn read_csv(path: impl AsRef<Path>) -> HarnessResult<Table> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    Table::from_csv_str(&text).map_err(|e| match e {
        HarnessError::Io { reason, .. } => HarnessError::io(path, reason),
        other => other,
    })
}
