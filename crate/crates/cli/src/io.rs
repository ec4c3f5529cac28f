//! Dataset CSV input/output and output headers.

use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use depcens_core::{Dataset, Record};
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("cannot read `{path}`")]
    Io { path: PathBuf, source: io::Error },
    #[error("`{path}`: expected header `y,delta`, found `{found}`")]
    Header { path: PathBuf, found: String },
    #[error("`{path}`: malformed rows\n{}", format_rows(.rows))]
    Malformed { path: PathBuf, rows: Vec<(u64, String)> },
}

fn format_rows(rows: &[(u64, String)]) -> String {
    rows.iter().map(|(line, msg)| format!("  line {line}: {msg}")).collect::<Vec<_>>().join("\n")
}

/// A dataset read from disk, with the number of rows dropped for `y <= 0`.
#[derive(Debug, Clone)]
pub struct LoadedData {
    pub data: Dataset,
    pub excluded_nonpositive: usize,
}

pub fn read_dataset(path: &Path) -> Result<LoadedData, DataError> {
    let file = File::open(path).map_err(|source| DataError::Io { path: path.to_owned(), source })?;
    parse_dataset(BufReader::new(file), path)
}

/// Parse `y,delta` CSV. Lines starting with `#` are skipped.
pub fn parse_dataset<R: Read>(reader: R, path: &Path) -> Result<LoadedData, DataError> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).flexible(true).from_reader(reader);
    let header =
        rdr.headers().map_err(|e| DataError::Io { path: path.to_owned(), source: io::Error::other(e) })?.clone();
    let names: Vec<&str> = header.iter().collect();
    if names != ["y", "delta"] {
        return Err(DataError::Header { path: path.to_owned(), found: names.join(",") });
    }
    let mut records = Vec::new();
    let mut bad = Vec::new();
    let mut excluded = 0;
    for row in rdr.records() {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                bad.push((line, e.to_string()));
                continue;
            }
        };
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != 2 {
            bad.push((line, format!("expected 2 fields, found {}", row.len())));
            continue;
        }
        let y = match row[0].parse::<f64>() {
            Ok(y) if y.is_finite() => y,
            _ => {
                bad.push((line, format!("y `{}` is not a finite number", &row[0])));
                continue;
            }
        };
        let delta = match &row[1] {
            "0" => 0,
            "1" => 1,
            other => {
                bad.push((line, format!("delta `{other}` is not 0 or 1")));
                continue;
            }
        };
        if y <= 0.0 {
            excluded += 1;
            continue;
        }
        records.push(Record { y, delta });
    }
    if !bad.is_empty() {
        return Err(DataError::Malformed { path: path.to_owned(), rows: bad });
    }
    let data = Dataset::new(records).expect("rows were validated while parsing");
    Ok(LoadedData { data, excluded_nonpositive: excluded })
}

/// Metadata written at the top of every output.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
}

impl Meta {
    pub fn new<C: Serialize>(command: &str, seed: Option<u64>, config: &C) -> Self {
        Self {
            tool: "depcens",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_owned(),
            seed,
            config: serde_json::to_value(config).unwrap_or(serde_json::Value::Null),
        }
    }

    /// `#`-prefixed header lines for CSV outputs.
    pub fn comment_lines(&self) -> Vec<String> {
        let mut lines = vec![format!("# {} {} {}", self.tool, self.version, self.command)];
        if let Some(seed) = self.seed {
            lines.push(format!("# seed: {seed}"));
        }
        lines.push(format!("# config: {}", self.config));
        lines
    }
}

/// Output destination: a file or stdout.
pub fn open_output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout())),
    })
}

pub fn write_comment_header(out: &mut dyn Write, meta: &Meta, extra: &[String]) -> io::Result<()> {
    for line in meta.comment_lines() {
        writeln!(out, "{line}")?;
    }
    for line in extra {
        writeln!(out, "# {line}")?;
    }
    Ok(())
}

/// Shortest round-trip text of a float, switching to exponent form for tiny and huge values.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_dataset(out: &mut dyn Write, meta: &Meta, data: &Dataset) -> io::Result<()> {
    write_comment_header(out, meta, &[])?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["y", "delta"])?;
    for r in data.records() {
        w.write_record([num(r.y), r.delta.to_string()])?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<LoadedData, DataError> {
        parse_dataset(text.as_bytes(), Path::new("mem.csv"))
    }

    #[test]
    fn reads_comments_and_excludes_nonpositive() {
        let loaded = parse("# meta\ny,delta\n1.5,1\n0,0\n2.5,0\n-1,1\n").unwrap();
        assert_eq!(loaded.data.len(), 2);
        assert_eq!(loaded.excluded_nonpositive, 2);
        assert_eq!(loaded.data.n_uncensored(), 1);
    }

    #[test]
    fn reports_every_malformed_line() {
        let err = parse("y,delta\n1.0,1\nabc,0\n2.0,2\n3.0\n").unwrap_err();
        let DataError::Malformed { rows, .. } = &err else { panic!("{err}") };
        let lines: Vec<u64> = rows.iter().map(|r| r.0).collect();
        assert_eq!(lines, [3, 4, 5]);
        assert!(err.to_string().contains("line 3"));
    }

    #[test]
    fn rejects_wrong_header() {
        assert!(matches!(parse("time,status\n1,1\n"), Err(DataError::Header { .. })));
    }

    #[test]
    fn roundtrip_through_writer() {
        let data = Dataset::from_pairs(&[(1.25, 1), (0.5, 0)]).unwrap();
        let meta = Meta::new("simulate", Some(3), &serde_json::json!({"n": 2}));
        let mut buf = Vec::new();
        write_dataset(&mut buf, &meta, &data).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# depcens"));
        assert!(text.contains("# seed: 3"));
        assert_eq!(parse(&text).unwrap().data, data);
    }
}
