//! CSV emission with `#` metadata lines.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, Result};

/// `--out` file, or stdout.
pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::io(p, e))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_metadata<W: Write>(w: &mut W, meta: &[(&str, String)]) -> Result<()> {
    for (key, value) in meta {
        writeln!(w, "# {key}={value}")?;
    }
    Ok(())
}

/// Metadata lines, then a header row derived from `R`'s fields, then rows.
pub fn write_csv<W: Write, R: Serialize>(
    mut w: W,
    meta: &[(&str, String)],
    rows: &[R],
) -> Result<()> {
    write_metadata(&mut w, meta)?;
    let mut csv = csv::Writer::from_writer(w);
    for r in rows {
        csv.serialize(r)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn join<T: ToString>(values: &[T]) -> String {
    values
        .iter()
        .map(T::to_string)
        .collect::<Vec<_>>()
        .join(",")
}
