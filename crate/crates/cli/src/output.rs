use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Hex SHA-256 of the run description.
pub fn config_hash(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(h.finalize())
}

/// Round-trip safe fixed format; `-0` prints as `0`.
pub fn num(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

/// CSV table with the config hash and a units line ahead of the header.
pub struct Table {
    text: String,
    width: usize,
}

impl Table {
    pub fn new(hash: &str, units: &str, columns: &[&str]) -> Self {
        let mut text = String::new();
        writeln!(text, "# config_hash={hash}").unwrap();
        writeln!(text, "# units: {units}").unwrap();
        writeln!(text, "{}", columns.join(",")).unwrap();
        Self { text, width: columns.len() }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.width);
        writeln!(self.text, "{}", cells.join(",")).unwrap();
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// Writes to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
