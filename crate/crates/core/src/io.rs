//! Output helpers: 17-significant-digit float formatting for CSV and JSON,
//! and atomic file writes.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::error::Result;

/// Lossless round-trip representation of a double: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Compact JSON formatter that prints every float with 17 significant digits.
#[derive(Debug, Default, Clone, Copy)]
pub struct Float17Formatter;

impl Formatter for Float17Formatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serialize with [`Float17Formatter`]. Non-finite floats become `null`.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Float17Formatter);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// Write `contents` to a sibling temporary file and rename it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    if let Err(e) = fs::rename(&tmp, path) {
        let _ = fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

/// Build CSV text from a header and rows of floats.
pub fn csv<I, R>(header: &str, rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    let mut out = String::with_capacity(64);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.as_ref().iter().map(|x| fmt_f64(*x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
