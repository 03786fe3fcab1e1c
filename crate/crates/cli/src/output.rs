//! Writing CSV and JSON to files or stdout.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::args::{Format, OutputFlags};
use crate::error::CliError;

/// Path of the JSON sidecar accompanying a CSV file.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta.json")
}

fn open(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, path: Option<&Path>) -> Result<(), CliError> {
    let mut w = open(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).and_then(|_| w.flush()).map_err(|source| CliError::Io {
        path: path.map(Path::to_path_buf).unwrap_or_else(|| "<stdout>".into()),
        source,
    })
}

pub fn write_csv<T: Serialize>(rows: &[T], path: Option<&Path>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(open(path)?);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Serialize)]
struct JsonTable<'a, M: Serialize, T: Serialize> {
    #[serde(flatten)]
    metadata: &'a M,
    rows: &'a [T],
}

/// Writes a table in the requested format. CSV written to a file gets the
/// metadata as a sidecar; JSON embeds it next to the rows.
pub fn emit_table<M: Serialize, T: Serialize>(
    rows: &[T],
    metadata: &M,
    flags: &OutputFlags,
    default: Format,
) -> Result<(), CliError> {
    let out = flags.out.as_deref();
    match flags.format.unwrap_or(default) {
        Format::Csv => {
            write_csv(rows, out)?;
            if let Some(path) = out {
                write_json(metadata, Some(&sidecar_path(path)))?;
            }
            Ok(())
        }
        Format::Json => write_json(&JsonTable { metadata, rows }, out),
    }
}
