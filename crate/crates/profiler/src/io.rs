// Copyright 2026 The Profiler Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! File input: CSV tables, transaction files, and IND discovery over value
//! streams that may be spilled to disk.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::{Arc, Mutex};

use profiler_core::arm::{ArmError, Layout, TransactionSet};
use profiler_core::ind::{attributes, merge_sorted, sorted_distinct, Ind};
use profiler_core::table::CsvOptions;
use profiler_core::{DatasetError, Table};

/// Decodes UTF-8, reporting the record in which invalid bytes occur.
pub fn decode_utf8(bytes: &[u8]) -> Result<&str, DatasetError> {
    std::str::from_utf8(bytes).map_err(|e| DatasetError::MalformedCsv {
        row: bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count(),
        reason: "invalid UTF-8".to_string(),
    })
}

pub fn parse_csv_bytes(name: &str, bytes: &[u8], options: CsvOptions) -> Result<Table, DatasetError> {
    Table::from_csv_str(name, decode_utf8(bytes)?, options)
}

/// Reads a CSV file. The table is named after the file stem.
pub fn read_table(path: &Path, options: CsvOptions) -> Result<Table, DatasetError> {
    let bytes = std::fs::read(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => DatasetError::FileNotFound(path.display().to_string()),
        _ => DatasetError::FileNotFound(format!("{}: {e}", path.display())),
    })?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset");
    parse_csv_bytes(name, &bytes, options)
}

#[derive(Debug, thiserror::Error)]
pub enum TransactionFileError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Layout(#[from] ArmError),
}

pub fn read_transactions(path: &Path, options: CsvOptions, layout: Layout) -> Result<TransactionSet, TransactionFileError> {
    let table = read_table(path, options)?;
    Ok(TransactionSet::from_table(&table, layout)?)
}

/// Ascending distinct values of one attribute, either held in memory or
/// streamed back from a spill file.
enum ValueStream {
    Memory(std::vec::IntoIter<String>),
    Disk { lines: io::Lines<BufReader<File>>, failure: Arc<Mutex<Option<io::Error>>> },
}

impl Iterator for ValueStream {
    type Item = String;

    fn next(&mut self) -> Option<String> {
        match self {
            ValueStream::Memory(values) => values.next(),
            ValueStream::Disk { lines, failure } => match lines.next()? {
                Ok(line) => Some(unescape_line(&line)),
                Err(e) => {
                    failure.lock().unwrap_or_else(|p| p.into_inner()).get_or_insert(e);
                    None
                }
            },
        }
    }
}

fn escape_line(value: &str) -> String {
    value.replace('\\', "\\\\").replace('\n', "\\n").replace('\r', "\\r")
}

fn unescape_line(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    let mut chars = line.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => out.push(other),
            None => out.push('\\'),
        }
    }
    out
}

/// Unary IND discovery where every attribute with more than
/// `spill_threshold` distinct values is written to a sorted file under
/// `spill_dir` and merged from there.
pub fn discover_inds_spilling(tables: &[&Table], spill_threshold: usize, spill_dir: &Path) -> io::Result<Vec<Ind>> {
    let attrs = attributes(tables);
    let failure = Arc::new(Mutex::new(None));
    let mut sources = Vec::with_capacity(attrs.len());
    for (i, attr) in attrs.iter().enumerate() {
        let table = tables.iter().find(|t| t.name() == attr.table).expect("attribute of a listed table");
        let values = sorted_distinct(table, attr.column).map_err(io::Error::other)?;
        if values.len() > spill_threshold {
            let path = spill_dir.join(format!("attr-{i}.txt"));
            let mut out = BufWriter::new(File::create(&path)?);
            for v in &values {
                writeln!(out, "{}", escape_line(v))?;
            }
            out.flush()?;
            let lines = BufReader::new(File::open(&path)?).lines();
            sources.push(ValueStream::Disk { lines, failure: failure.clone() });
        } else {
            sources.push(ValueStream::Memory(values.into_iter().map(str::to_string).collect::<Vec<_>>().into_iter()));
        }
    }
    let pairs = merge_sorted(sources);
    if let Some(e) = failure.lock().unwrap_or_else(|p| p.into_inner()).take() {
        return Err(e);
    }
    let mut inds: Vec<Ind> = pairs
        .into_iter()
        .map(|(a, b)| Ind { dependent: attrs[a].clone(), referenced: attrs[b].clone() })
        .collect();
    inds.sort();
    Ok(inds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use profiler_core::ind::discover_unary_inds;

    #[test]
    fn missing_file_is_reported() {
        let err = read_table(Path::new("/nonexistent/x.csv"), CsvOptions::default()).unwrap_err();
        assert!(matches!(err, DatasetError::FileNotFound(_)));
    }

    #[test]
    fn invalid_utf8_names_the_record() {
        let err = parse_csv_bytes("t", b"a\nb\n\xff\n", CsvOptions::default()).unwrap_err();
        assert_eq!(err, DatasetError::MalformedCsv { row: 2, reason: "invalid UTF-8".into() });
    }

    #[test]
    fn escaping_round_trips() {
        for v in ["plain", "a\\nb", "line\nbreak", "\\", "cr\r", ""] {
            assert_eq!(unescape_line(&escape_line(v)), v);
        }
    }

    #[test]
    fn spilled_discovery_matches_in_memory() {
        let a = Table::from_csv_str("a", "x,y\n1,a\n2,b\n3,\"multi\nline\"\n", CsvOptions::default()).unwrap();
        let b = Table::from_csv_str("b", "z\n1\n2\n3\n4\n\"multi\nline\"\na\n", CsvOptions::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let tables = [&a, &b];
        for threshold in [0, 2, 100] {
            assert_eq!(discover_inds_spilling(&tables, threshold, dir.path()).unwrap(), discover_unary_inds(&tables));
        }
    }

    #[test]
    fn transaction_file_layouts() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "tid,item\n1,bread\n1,milk\n2,bread\n").unwrap();
        let t = read_transactions(&path, CsvOptions::default(), Layout::Singular).unwrap();
        assert_eq!(t.len(), 2);
        let t = read_transactions(&path, CsvOptions::default(), Layout::Tabular).unwrap();
        assert_eq!(t.len(), 3);
    }
}
