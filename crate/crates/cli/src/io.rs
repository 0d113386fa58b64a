//! JSON-lines input and output.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Parsed lines plus the number of malformed ones, each already reported on
/// stderr with its line number.
#[derive(Debug)]
pub struct Loaded<T> {
    pub items: Vec<T>,
    pub malformed: usize,
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> CliResult<Loaded<T>> {
    let file = File::open(path).map_err(|e| CliError::Config(format!("cannot open {}: {e}", path.display())))?;
    parse_jsonl(BufReader::new(file), &path.display().to_string())
}

pub fn parse_jsonl<T: DeserializeOwned>(reader: impl BufRead, name: &str) -> CliResult<Loaded<T>> {
    let mut items = Vec::new();
    let mut malformed = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CliError::Data(format!("{name}: read failed: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(v) => items.push(v),
            Err(e) => {
                malformed += 1;
                eprintln!("warning: {name}:{}: skipping malformed line: {e}", i + 1);
            }
        }
    }
    Ok(Loaded { items, malformed })
}

pub fn to_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for it in items {
        out.push_str(&serde_json::to_string(it).expect("records serialize"));
        out.push('\n');
    }
    out
}

/// `-` or no path means standard output.
pub fn write_output(path: Option<&Path>, contents: &str) -> CliResult<()> {
    let fail = |e: std::io::Error| CliError::Config(format!("cannot write output: {e}"));
    match path {
        Some(p) if p.as_os_str() != "-" => {
            let mut w = BufWriter::new(File::create(p).map_err(fail)?);
            w.write_all(contents.as_bytes()).map_err(fail)?;
            w.flush().map_err(fail)
        }
        _ => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes()).map_err(fail)
        }
    }
}
