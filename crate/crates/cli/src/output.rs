use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::Format;

/// A fully rendered output document.
pub struct Document {
    pub body: String,
    /// False when the document reports a failed check.
    pub success: bool,
}

pub fn render<J: Serialize>(
    format: Format,
    json: &J,
    csv_rows: impl FnOnce() -> CsvTable,
) -> Result<String> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(json)?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => csv_rows().to_string_checked(),
    }
}

pub struct CsvTable {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    fn to_string_checked(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().context("flushing csv")?;
        Ok(String::from_utf8(bytes)?)
    }
}

/// Writes to `out` through a temporary file in the same directory, so a
/// failed run never leaves a partial file behind; stdout otherwise.
pub fn emit(body: &str, out: Option<&Path>) -> Result<()> {
    let Some(path) = out else {
        let mut stdout = std::io::stdout().lock();
        stdout.write_all(body.as_bytes())?;
        stdout.flush()?;
        return Ok(());
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(body.as_bytes())?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
