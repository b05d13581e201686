//! Pieces of the command-line front end that are worth testing on their own:
//! matrix sources, artifact headers and exit codes.

use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::exact::{cat_map, companion, cubic_b, sextic_c, IntMatrix};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const TOOL: &str = "anosov-lab";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_UNDECIDED: i32 = 2;

pub const BUILTINS: [&str; 4] = ["cat", "B3", "C6", "D4"];

/// A named built-in, an inline JSON array of rows, or a file holding one.
pub fn parse_matrix(src: &str) -> Result<IntMatrix> {
    let s = src.trim();
    match s {
        "cat" => return Ok(cat_map()),
        "B3" => return companion(&cubic_b()),
        "C6" => return companion(&sextic_c()),
        "D4" => return Ok(crate::conjugacy::two_rate_example()),
        _ => {}
    }
    if s.starts_with('[') {
        return matrix_from_json(s);
    }
    let path = Path::new(s);
    if path.exists() {
        let text = std::fs::read_to_string(path)?;
        return matrix_from_json(text.trim());
    }
    Err(Error::InvalidInput(format!(
        "matrix {s:?} is neither a built-in ({}), an inline JSON array nor a readable file",
        BUILTINS.join(", ")
    )))
}

fn matrix_from_json(s: &str) -> Result<IntMatrix> {
    let v: Value = serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("malformed matrix JSON: {e}")))?;
    let rows = v.as_array().ok_or_else(|| Error::InvalidInput("matrix must be an array of rows".into()))?;
    let rows = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| Error::InvalidInput("matrix row must be an array".into()))?
                .iter()
                .map(entry)
                .collect::<Result<Vec<BigInt>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    IntMatrix::from_rows(rows)
}

fn entry(v: &Value) -> Result<BigInt> {
    let text = match v {
        Value::Number(n) if n.is_i64() || n.is_u64() => n.to_string(),
        Value::String(s) => s.clone(),
        _ => return Err(Error::InvalidInput(format!("matrix entry {v} is not an integer"))),
    };
    text.parse().map_err(|_| Error::InvalidInput(format!("matrix entry {text:?} is not an integer")))
}

/// Comma-separated list of numbers.
pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<T>().map_err(|_| Error::InvalidInput(format!("bad list entry {t:?}"))))
        .collect()
}

/// Tool, version, subcommand and the fully resolved configuration.
#[derive(Clone, Debug, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: Value,
}

impl Header {
    pub fn new(command: &str, config: Value) -> Self {
        Header { tool: TOOL, version: VERSION, command: command.to_string(), config }
    }

    /// One-line JSON, used as the comment header of CSV artifacts.
    pub fn line(&self) -> String {
        serde_json::to_string(self).expect("header serializes")
    }
}

/// `{"header": …, "result": …}`.
pub fn json_artifact<T: Serialize>(header: &Header, result: &T) -> Result<String> {
    let v = serde_json::json!({ "header": header, "result": result });
    serde_json::to_string_pretty(&v).map_err(|e| Error::Io(e.to_string()))
}

/// CSV body prefixed by `# <header json>`.
pub fn csv_artifact(header: &Header, body: &[u8]) -> Vec<u8> {
    let mut out = format!("# {}\n", header.line()).into_bytes();
    out.extend_from_slice(body);
    out
}

/// Sibling path with a suffix on the stem and a new extension: run.json → run_trace.csv.
pub fn sibling(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_and_inline() {
        assert_eq!(parse_matrix("cat").unwrap(), cat_map());
        assert_eq!(parse_matrix("[[2,1],[1,1]]").unwrap(), cat_map());
        assert_eq!(parse_matrix("[[\"2\",1],[1,1]]").unwrap(), cat_map());
        assert_eq!(parse_matrix("C6").unwrap().dim(), 6);
        assert_eq!(parse_matrix("B3").unwrap().dim(), 3);
        assert_eq!(parse_matrix("D4").unwrap().dim(), 4);
        assert!(parse_matrix("[[1,2],[3]]").is_err());
        assert!(parse_matrix("[[1.5,0],[0,1]]").is_err());
        assert!(parse_matrix("nope").is_err());
    }

    #[test]
    fn matrix_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        std::fs::write(&p, "[[0,1],[1,1]]\n").unwrap();
        assert_eq!(parse_matrix(p.to_str().unwrap()).unwrap().dim(), 2);
    }

    #[test]
    fn artifacts_carry_the_header() {
        let h = Header::new("scan", serde_json::json!({ "dim": 2 }));
        let csv = String::from_utf8(csv_artifact(&h, b"a,b\n1,2\n")).unwrap();
        assert!(csv.starts_with("# {\"tool\":\"anosov-lab\""));
        assert!(csv.contains(VERSION));
        let js: Value = serde_json::from_str(&json_artifact(&h, &3).unwrap()).unwrap();
        assert_eq!(js["header"]["config"]["dim"], 2);
        assert_eq!(js["result"], 3);
        assert_eq!(sibling(Path::new("/t/run.json"), "_trace", "csv"), Path::new("/t/run_trace.csv"));
        assert_eq!(parse_list::<f64>("2, 4,8").unwrap(), vec![2.0, 4.0, 8.0]);
    }
}
