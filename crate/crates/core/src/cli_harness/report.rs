use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::experiment::{Summary, SummaryReport};
use crate::Error;

fn tagged(kind: &str, item: &impl Serialize) -> String {
    let mut v = serde_json::to_value(item).expect("report serializes");
    if let serde_json::Value::Object(map) = &mut v {
        map.insert("type".into(), kind.into());
    }
    let mut line = v.to_string();
    line.push('\n');
    line
}

/// Newline-delimited JSON: a header line, one line per trial, a summary line.
pub fn report_ndjson(report: &SummaryReport) -> String {
    let mut out = tagged("header", &report.header);
    for r in &report.rows {
        out.push_str(&tagged("trial", r));
    }
    out.push_str(&tagged("summary", &report.summary));
    out
}

#[derive(Serialize)]
struct CsvRow {
    trial: u64,
    aborted: Option<u8>,
    failures: Option<u64>,
    bit: Option<u8>,
}

/// Columns `trial,aborted,failures,bit`; `bit` is empty for aborted runs and
/// all three are empty for trials that stopped on a contract violation.
pub fn report_csv(report: &SummaryReport) -> Result<String, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &report.rows {
        w.serialize(CsvRow {
            trial: r.trial,
            aborted: r.aborted.map(u8::from),
            failures: r.failures,
            bit: r.bit.map(u8::from),
        })
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    csv_string(w)
}

fn csv_string(w: csv::Writer<Vec<u8>>) -> Result<String, Error> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Two-column `metric,value` rendering of the aggregates.
pub fn summary_csv(summary: &Summary) -> Result<String, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["metric", "value"])
        .map_err(|e| Error::Io(e.to_string()))?;
    let value = serde_json::to_value(summary).expect("summary serializes");
    let mut flat = Vec::new();
    flatten("", &value, &mut flat);
    for (k, v) in flat {
        w.write_record([k, v])
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    csv_string(w)
}

fn flatten(prefix: &str, v: &serde_json::Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        serde_json::Value::Object(map) => {
            for (k, inner) in map {
                flatten(&key(k), inner, out);
            }
        }
        serde_json::Value::Array(items) => {
            for (i, inner) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), inner, out);
            }
        }
        serde_json::Value::Null => out.push((prefix.to_string(), String::new())),
        serde_json::Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// Writes `contents` next to `path` and renames it into place, so readers
/// never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), Error> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    tmp.write_all(contents)
        .map_err(|e| Error::Io(e.to_string()))?;
    tmp.persist(path)
        .map_err(|e| Error::Io(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}
