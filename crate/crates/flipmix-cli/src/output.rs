//! CSV writing and run-identification helpers.
//!
//! Every command stamps its output with a comment line carrying an FNV-1a
//! hash of the canonical config string plus the seed, so a rerun can be
//! matched to its parameters byte for byte.

use anyhow::{Context, Result};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

/// Significant digits used for every decimal rendered into CSV/JSON output.
pub const DECIMAL_SIG: usize = 12;

/// FNV-1a 64-bit hash of the canonical configuration string.
pub fn config_hash(desc: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in desc.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Opens the output sink: a buffered file, or stdout when no path is given.
pub fn open_sink(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(std::io::stdout()))),
    }
}

/// Writes the leading comment line: config hash, seed, decimal precision,
/// plus any command-specific metadata pairs.
pub fn write_run_header<W: Write + ?Sized>(
    w: &mut W,
    desc: &str,
    seed: u64,
    extra: &[(&str, String)],
) -> Result<()> {
    let mut line = format!(
        "# config={:016x} seed={} precision={}",
        config_hash(desc),
        seed,
        DECIMAL_SIG
    );
    for (key, value) in extra {
        line.push_str(&format!(" {key}={value}"));
    }
    writeln!(w, "{line}")?;
    Ok(())
}

/// Quotes a field only when it contains a comma, quote, or line break.
pub fn csv_field(raw: &str) -> String {
    if raw.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

pub fn csv_row<W: Write + ?Sized>(w: &mut W, fields: &[&str]) -> Result<()> {
    let rendered: Vec<String> = fields.iter().map(|f| csv_field(f)).collect();
    writeln!(w, "{}", rendered.join(","))?;
    Ok(())
}
