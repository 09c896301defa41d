//! CSV and JSON emission of aggregated cells.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::config::Format;
use super::run::QuantileSummary;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "noise_class,theta_or_p,T,iterate_kind,runs,mean_err,q,quantile_err,base_seed";

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

/// Header plus one LF-terminated row per cell; floats use shortest round-trip form.
pub fn write_csv<W: Write>(summaries: &[QuantileSummary], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    for s in summaries {
        w.serialize(s).map_err(|e| Error::Numerical(format!("csv encoding failed: {e}")))?;
    }
    if summaries.is_empty() {
        w.write_record(CSV_HEADER.split(','))
            .map_err(|e| Error::Numerical(format!("csv encoding failed: {e}")))?;
    }
    w.flush().map_err(|e| Error::Numerical(format!("csv flush failed: {e}")))?;
    Ok(())
}

/// Any serializable rows as header plus LF-terminated records.
pub fn rows_to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Numerical(format!("csv encoding failed: {e}")))?;
    }
    w.into_inner()
        .map_err(|e| Error::Numerical(format!("csv flush failed: {e}")))
}

pub fn write_json<W: Write>(summaries: &[QuantileSummary], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, summaries)
        .map_err(|e| Error::Numerical(format!("json encoding failed: {e}")))?;
    out.write_all(b"\n")
        .map_err(|e| Error::Numerical(format!("json write failed: {e}")))
}

pub fn render(summaries: &[QuantileSummary], format: Format) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(summaries, &mut buf)?,
        Format::Json => write_json(summaries, &mut buf)?,
    }
    Ok(buf)
}

pub fn emit_results(summaries: &[QuantileSummary], format: Format, path: &Path) -> Result<()> {
    if summaries.is_empty() {
        return Err(Error::arg("nothing to write"));
    }
    let bytes = render(summaries, format)?;
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&bytes).map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_csv(path: &Path) -> Result<Vec<QuantileSummary>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    r.deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::run::IterateKind;

    fn row(mean: f64) -> QuantileSummary {
        QuantileSummary {
            noise_class: "weibull".into(),
            theta_or_p: 10.0 / 3.0,
            t: 100,
            iterate_kind: IterateKind::Last,
            runs: 2000,
            mean_err: mean,
            q: 0.99,
            quantile_err: 0.1 + 0.2,
            base_seed: 7,
        }
    }

    #[test]
    fn csv_layout_and_round_trip() {
        let rows = vec![row(0.123_456_789_012_345_68)];
        let text = String::from_utf8(render(&rows, Format::Csv).unwrap()).unwrap();
        let mut lines = text.split('\n');
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(text.matches('\n').count(), 2);
        assert!(!text.contains('\r'));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        emit_results(&rows, Format::Csv, &p).unwrap();
        assert_eq!(read_csv(&p).unwrap(), rows);
    }

    #[test]
    fn json_mirrors_records() {
        let rows = vec![row(1.5), row(2.5)];
        let v: serde_json::Value = serde_json::from_slice(&render(&rows, Format::Json).unwrap()).unwrap();
        assert_eq!(v[1]["T"], 100);
        assert_eq!(v[0]["iterate_kind"], "last");
        assert_eq!(v.as_array().unwrap().len(), 2);
    }

    #[test]
    fn unwritable_path_reports_it() {
        let err = emit_results(&[row(1.0)], Format::Csv, Path::new("/nonexistent/dir/r.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/r.csv"));
    }
}
