//! CSV files stamped with the config hash.

use crate::Result;
use std::fs::File;
use std::io::Write;
use std::path::Path;

pub type CsvWriter = csv::Writer<File>;

/// Opens `path`, writes `# config_sha256=<hash>` and the header row.
pub fn create_csv(path: &Path, hash: &str, header: &[&str]) -> Result<CsvWriter> {
    let mut f = File::create(path)?;
    writeln!(f, "# config_sha256={hash}")?;
    let mut w = csv::Writer::from_writer(f);
    w.write_record(header)?;
    Ok(w)
}

/// Fixed-width scientific notation so identical runs give identical bytes.
pub fn num(v: f64) -> String {
    format!("{v:.10e}")
}

/// Reads a CSV written by [`create_csv`]: `(hash, header, rows)`.
pub fn read_csv(path: &Path) -> Result<(String, Vec<String>, Vec<Vec<String>>)> {
    let text = std::fs::read_to_string(path)?;
    let (first, rest) = text.split_once('\n').unwrap_or((&text, ""));
    let hash = first
        .strip_prefix("# config_sha256=")
        .unwrap_or_default()
        .to_string();
    let mut r = csv::Reader::from_reader(rest.as_bytes());
    let header = r.headers()?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
        .collect::<std::result::Result<_, _>>()?;
    Ok((hash, header, rows))
}
