//! CSV tables and the JSON run manifest.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::experiment::{ResultRow, SweepResult};

pub const HEADER: [&str; 7] = ["axis", "beamformer", "mse_db", "epsilon", "lambda", "leak_noise", "leak_interf"];

/// Marker written in the `mse_db` column of a failed point.
pub const ERROR_MARK: &str = "error";

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Twelve significant digits; infinities as `inf`/`-inf`.
pub fn format_float(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.11e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

fn record(row: &ResultRow) -> [String; 7] {
    [
        format_float(row.axis),
        row.beamformer.clone(),
        if row.is_error() { ERROR_MARK.into() } else { opt(row.mse_db) },
        opt(row.epsilon),
        opt(row.lambda),
        opt(row.leak_noise),
        opt(row.leak_interf),
    ]
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for row in rows {
        w.write_record(record(row))?;
    }
    w.flush().map_err(|source| OutputError::Io { path: "<writer>".into(), source })?;
    Ok(())
}

pub fn manifest_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn manifest_json(result: &SweepResult) -> serde_json::Value {
    let m = &result.manifest;
    let errors: Vec<serde_json::Value> = result
        .errors()
        .map(|r| serde_json::json!({ "axis": r.axis, "beamformer": r.beamformer, "message": r.error }))
        .collect();
    serde_json::json!({
        "seed": m.seed,
        "config_hash": m.config_hash,
        "tool_version": m.tool_version,
        "wall_time_s": m.wall_time_s,
        "axis": result.axis.as_str(),
        "rows": result.rows.len(),
        "errors": errors,
        "config": m.config,
    })
}

/// Writes `path` and `<path>.manifest.json`.
pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<(), OutputError> {
    let io_err = |p: &Path| {
        let shown = p.display().to_string();
        move |source| OutputError::Io { path: shown, source }
    };
    let file = File::create(path).map_err(io_err(path))?;
    write_csv(&result.rows, io::BufWriter::new(file))?;
    let mpath = manifest_path(path);
    let text = serde_json::to_string_pretty(&manifest_json(result)).expect("manifest serializes");
    std::fs::write(&mpath, text + "\n").map_err(io_err(&mpath))?;
    Ok(())
}

fn parse_float(s: &str, line: usize, col: &str) -> Result<Option<f64>, OutputError> {
    match s {
        "" => Ok(None),
        "inf" => Ok(Some(f64::INFINITY)),
        "-inf" => Ok(Some(f64::NEG_INFINITY)),
        _ => s
            .parse::<f64>()
            .map(Some)
            .map_err(|e| OutputError::Parse { line, msg: format!("{col} `{s}`: {e}") }),
    }
}

/// Reads a table written by [`write_csv`]. Error rows come back with
/// `error = Some("")` since their message lives in the manifest.
pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<ResultRow>, OutputError> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != HEADER {
        return Err(OutputError::Parse { line: 1, msg: format!("unexpected header {header:?}") });
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let field = |k: usize| rec.get(k).unwrap_or("");
        let num = |k: usize| parse_float(field(k), line, HEADER[k]);
        let is_error = field(2) == ERROR_MARK;
        rows.push(ResultRow {
            axis: num(0)?.ok_or_else(|| OutputError::Parse { line, msg: "missing axis value".into() })?,
            beamformer: field(1).to_string(),
            mse_db: if is_error { None } else { num(2)? },
            epsilon: num(3)?,
            lambda: num(4)?,
            leak_noise: num(5)?,
            leak_interf: num(6)?,
            error: is_error.then(String::new),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_float(1.0), "1.00000000000e0");
        assert_eq!(format_float(-0.000123456789012345), "-1.23456789012e-4");
        assert_eq!(format_float(f64::INFINITY), "inf");
    }

    #[test]
    fn header_only_for_no_rows() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "axis,beamformer,mse_db,epsilon,lambda,leak_noise,leak_interf\n");
    }

    #[test]
    fn error_rows_survive_round_trip() {
        let rows = vec![ResultRow {
            axis: 0.5,
            beamformer: "ZF".into(),
            mse_db: None,
            epsilon: None,
            lambda: None,
            leak_noise: None,
            leak_interf: None,
            error: Some("singular".into()),
        }];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).contains("ZF,error,"));
        let back = read_csv(buf.as_slice()).unwrap();
        assert!(back[0].is_error() && back[0].mse_db.is_none());
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn manifest_sits_next_to_table() {
        assert_eq!(manifest_path(Path::new("out/run.csv")), PathBuf::from("out/run.csv.manifest.json"));
    }
}
