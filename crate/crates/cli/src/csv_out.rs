//! CSV emission shared by the subcommands: comma separated, `.` decimals, LF
//! line endings, and shortest round-trip formatting for reals.

use std::io::Write;

use crate::error::CliResult;

pub(crate) fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

pub(crate) fn real(x: f64) -> String {
    x.to_string()
}

pub(crate) fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

pub(crate) fn path(p: &[usize]) -> String {
    p.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("-")
}

/// Serializes `rows` under `header` into a byte buffer.
pub(crate) fn to_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<Vec<u8>> {
    let mut w = writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?)
}
