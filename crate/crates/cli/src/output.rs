//! File formats and atomic writes.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use faultcurve::curves::{AggregateCurve, FailureEvent};
use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;

use crate::error::{CliError, Result};

/// Six significant digits in mantissa-exponent form, e.g. `1.23457e+03`.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "Inf" } else { "-Inf" }.into();
    }
    let s = format!("{x:.5e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
}

pub fn parse_number(s: &str) -> Option<f64> {
    match s.trim() {
        "NaN" => Some(f64::NAN),
        "Inf" => Some(f64::INFINITY),
        "-Inf" => Some(f64::NEG_INFINITY),
        t => t.parse().ok(),
    }
}

/// Writes `path` through a temporary file in the same directory, renamed
/// into place once complete.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(CliError::io(dir))?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        fill(&mut w).map_err(CliError::io(path))?;
        w.flush().map_err(CliError::io(path))?;
    }
    tmp.persist(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

/// Writes rows of already formatted fields as CSV.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>], footer: &[String]) -> Result<()> {
    write_atomic(path, |w| {
        {
            let mut out = csv::Writer::from_writer(&mut *w);
            out.write_record(header)?;
            for row in rows {
                out.write_record(row)?;
            }
            out.flush()?;
        }
        for line in footer {
            writeln!(w, "# {line}")?;
        }
        Ok(())
    })
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(CliError::csv(path))
}

pub fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    reader(path)?
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(CliError::csv(path))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub subject: String,
    pub sessions: usize,
    pub draws_per_session: usize,
}

pub const MANIFEST: &str = "manifest.csv";
pub const RUN_MANIFEST: &str = "run_manifest.json";
pub const DENSE_CURVE: &str = "curve.csv";

pub fn write_manifest(dir: &Path, rows: &[ManifestRow]) -> Result<()> {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.subject.clone(), r.sessions.to_string(), r.draws_per_session.to_string()])
        .collect();
    write_csv(&dir.join(MANIFEST), &["subject", "sessions", "draws_per_session"], &rows, &[])
}

pub fn read_manifest(dir: &Path) -> Result<Vec<ManifestRow>> {
    read_rows(&dir.join(MANIFEST))
}

pub fn session_file(dir: &Path, subject: &str, session: usize) -> PathBuf {
    dir.join(subject).join(format!("session_{session:03}.csv"))
}

pub fn write_event_log(path: &Path, events: &[FailureEvent]) -> Result<()> {
    let rows: Vec<Vec<String>> = events
        .iter()
        .map(|e| {
            vec![
                e.session_id.to_string(),
                e.test_index.to_string(),
                e.signature.clone(),
                e.counted.to_string(),
            ]
        })
        .collect();
    write_csv(path, &["session_id", "test_index", "signature", "counted"], &rows, &[])
}

#[derive(Deserialize)]
struct EventRow {
    session_id: u64,
    test_index: u64,
    signature: String,
    counted: bool,
}

pub fn read_event_log(path: &Path) -> Result<Vec<FailureEvent>> {
    Ok(read_rows::<EventRow>(path)?
        .into_iter()
        .map(|r| FailureEvent::new(r.session_id, r.test_index, r.signature, r.counted))
        .collect())
}

pub fn write_dense_curve(path: &Path, values: &[f64]) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "k,value")?;
        for (k, v) in values.iter().enumerate() {
            writeln!(w, "{k},{}", sci(*v))?;
        }
        Ok(())
    })
}

pub fn read_dense_curve(path: &Path) -> Result<AggregateCurve> {
    #[derive(Deserialize)]
    struct Point {
        k: usize,
        value: String,
    }
    let points: Vec<Point> = read_rows(path)?;
    let mut values = Vec::with_capacity(points.len());
    for (i, p) in points.into_iter().enumerate() {
        let v = parse_number(&p.value);
        match v {
            Some(v) if p.k == i => values.push(v),
            _ => {
                return Err(CliError::Data(format!(
                    "{}: row {} is not a dense `k,value` point",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    AggregateCurve::new(values).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scientific_format() {
        assert_eq!(sci(1234.5678), "1.23457e+03");
        assert_eq!(sci(-0.000012), "-1.20000e-05");
        assert_eq!(sci(0.0), "0.00000e+00");
        assert_eq!(sci(1e100), "1.00000e+100");
        assert_eq!(sci(f64::NAN), "NaN");
        assert_eq!(sci(f64::NEG_INFINITY), "-Inf");
        assert_eq!(sci(f64::INFINITY), "Inf");
    }

    #[test]
    fn numbers_round_trip() {
        for x in [1234.5678, -1.2e-5, 0.0, f64::INFINITY, f64::NEG_INFINITY] {
            let back = parse_number(&sci(x)).unwrap();
            assert!(back == x || (back - x).abs() <= 1e-5 * x.abs());
        }
        assert!(parse_number("NaN").unwrap().is_nan());
        assert!(parse_number("zero").is_none());
    }

    #[test]
    fn event_log_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s").join("session_000.csv");
        let events = vec![
            FailureEvent::new(0, 3, "a.b:postcondition:c", true),
            FailureEvent::new(0, 9, "a.b:precondition:d", false),
        ];
        write_event_log(&path, &events).unwrap();
        assert_eq!(read_event_log(&path).unwrap(), events);
    }

    #[test]
    fn dense_curve_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(DENSE_CURVE);
        write_dense_curve(&path, &[0.0, 0.5, 1.25]).unwrap();
        assert_eq!(read_dense_curve(&path).unwrap().values(), &[0.0, 0.5, 1.25]);
        fs::write(&path, "k,value\n0,0\n2,1\n").unwrap();
        assert!(read_dense_curve(&path).is_err());
    }

    #[test]
    fn footer_lines_are_comments() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        write_csv(&path, &["subject", "sessions", "draws_per_session"], &[vec!["x".into(), "1".into(), "2".into()]], &["note,1".into()]).unwrap();
        let rows: Vec<ManifestRow> = read_rows(&path).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(fs::read_to_string(&path).unwrap().ends_with("# note,1\n"));
    }
}
