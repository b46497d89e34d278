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

//! Dictionary-encoded, immutable tables.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::csv::{self, CsvError, Record};

/// Code given to a null cell under [`NullMode::NullDistinct`]. Such a cell
/// has no dictionary entry and never equals anything.
pub const UNCODED: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DatasetError {
    #[error("file not found: {0}")]
    FileNotFound(String),
    #[error("malformed CSV at row {row}: {reason}")]
    MalformedCsv { row: usize, reason: String },
    #[error("input has no data rows")]
    EmptyInput,
    #[error("column index {index} out of range ({count} columns)")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("row index {index} out of range ({count} rows)")]
    RowOutOfRange { index: usize, count: usize },
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("invalid separator {0:?}")]
    InvalidSeparator(char),
    #[error("partitions come from tables of {left} and {right} rows")]
    SourceMismatch { left: usize, right: usize },
}

/// How null cells compare for equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum NullMode {
    /// All nulls of a column form one equality class.
    #[default]
    NullEqual,
    /// Every null is unique, so a null row never shares a cluster.
    NullDistinct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ValueType {
    Integer,
    Real,
    Text,
    /// Every cell is null.
    Empty,
}

impl ValueType {
    pub fn is_numeric(self) -> bool {
        matches!(self, ValueType::Integer | ValueType::Real)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ValueType::Integer => "integer",
            ValueType::Real => "real",
            ValueType::Text => "text",
            ValueType::Empty => "empty",
        }
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Options shared by every way of building a [`Table`] from text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvOptions {
    pub separator: char,
    pub has_header: bool,
    pub null_mode: NullMode,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions { separator: ',', has_header: true, null_mode: NullMode::NullEqual }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    name: String,
    inferred_type: ValueType,
    codes: Vec<u32>,
    null_positions: Vec<u32>,
    dictionary: Vec<String>,
    null_code: Option<u32>,
}

impl Column {
    /// Encodes `cells` in first-occurrence order.
    pub fn encode(name: String, cells: &[Option<&str>], null_mode: NullMode) -> Column {
        let mut index: BTreeMap<&str, u32> = BTreeMap::new();
        let mut dictionary: Vec<String> = Vec::new();
        let mut codes = Vec::with_capacity(cells.len());
        let mut null_positions = Vec::new();
        let mut null_code = None;
        for (row, cell) in cells.iter().enumerate() {
            match cell {
                Some(value) => {
                    let code = *index.entry(value).or_insert_with(|| {
                        dictionary.push((*value).to_owned());
                        (dictionary.len() - 1) as u32
                    });
                    codes.push(code);
                }
                None => {
                    null_positions.push(row as u32);
                    match null_mode {
                        NullMode::NullDistinct => codes.push(UNCODED),
                        NullMode::NullEqual => {
                            let code = *null_code.get_or_insert_with(|| {
                                dictionary.push(String::new());
                                (dictionary.len() - 1) as u32
                            });
                            codes.push(code);
                        }
                    }
                }
            }
        }
        let inferred_type = infer_type(cells.iter().copied());
        Column { name, inferred_type, codes, null_positions, dictionary, null_code }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn inferred_type(&self) -> ValueType {
        self.inferred_type
    }

    /// One code per row. Under [`NullMode::NullDistinct`] null rows hold
    /// [`UNCODED`].
    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn null_positions(&self) -> &[u32] {
        &self.null_positions
    }

    pub fn null_count(&self) -> usize {
        self.null_positions.len()
    }

    /// Number of dictionary codes, including the shared null code if any.
    pub fn code_count(&self) -> usize {
        self.dictionary.len()
    }

    pub fn null_code(&self) -> Option<u32> {
        self.null_code
    }

    pub fn is_null_code(&self, code: u32) -> bool {
        code == UNCODED || Some(code) == self.null_code
    }

    /// Raw text for `code`, `None` for null.
    pub fn decode(&self, code: u32) -> Option<&str> {
        if self.is_null_code(code) {
            None
        } else {
            self.dictionary.get(code as usize).map(String::as_str)
        }
    }

    pub fn value(&self, row: usize) -> Option<&str> {
        self.decode(self.codes[row])
    }

    /// Distinct non-null values, in code order.
    pub fn distinct_values(&self) -> impl Iterator<Item = &str> + '_ {
        (0..self.dictionary.len() as u32).filter_map(move |c| self.decode(c))
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

/// An immutable dataset. Columns share one row count.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    name: String,
    columns: Vec<Column>,
    row_count: usize,
    has_header: bool,
    separator: char,
    null_mode: NullMode,
}

impl Table {
    /// Parses CSV text. Column names come from the first record when
    /// `has_header` is set, else they are `col_0 .. col_{n-1}`.
    pub fn from_csv_str(name: &str, text: &str, options: CsvOptions) -> Result<Table, DatasetError> {
        let sep = options.separator;
        if sep == '"' || sep == '\n' || sep == '\r' || sep.is_control() {
            return Err(DatasetError::InvalidSeparator(sep));
        }
        let mut records = csv::read_records(text, sep).map_err(|e| DatasetError::MalformedCsv {
            row: e.record(),
            reason: match e {
                CsvError::UnterminatedQuote { .. } => "unterminated quote".to_string(),
                CsvError::TrailingAfterQuote { found, .. } => {
                    format!("unexpected {found:?} after closing quote")
                }
            },
        })?;
        let header = if options.has_header && !records.is_empty() {
            let first = records.remove(0);
            Some(first.into_iter().map(Option::unwrap_or_default).collect::<Vec<_>>())
        } else {
            None
        };
        let offset = usize::from(header.is_some());
        let width = header
            .as_ref()
            .map(Vec::len)
            .or_else(|| records.first().map(Vec::len))
            .unwrap_or(0);
        for (i, record) in records.iter().enumerate() {
            if record.len() != width {
                return Err(DatasetError::MalformedCsv {
                    row: i + offset,
                    reason: format!("expected {width} fields, found {}", record.len()),
                });
            }
        }
        if records.is_empty() {
            return Err(DatasetError::EmptyInput);
        }
        let names = match header {
            Some(names) => unique_names(names),
            None => (0..width).map(|i| format!("col_{i}")).collect(),
        };
        let mut table = Table::from_records(name, names, &records, options.null_mode)?;
        table.has_header = options.has_header;
        table.separator = sep;
        Ok(table)
    }

    /// Builds a table from decoded rows. Every row must have `names.len()`
    /// fields.
    pub fn from_records(
        name: &str,
        names: Vec<String>,
        rows: &[Record],
        null_mode: NullMode,
    ) -> Result<Table, DatasetError> {
        if rows.is_empty() {
            return Err(DatasetError::EmptyInput);
        }
        if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != names.len()) {
            return Err(DatasetError::MalformedCsv {
                row,
                reason: format!("expected {} fields, found {}", names.len(), r.len()),
            });
        }
        let names = unique_names(names);
        let mut cells: Vec<Option<&str>> = Vec::with_capacity(rows.len());
        let columns = names
            .into_iter()
            .enumerate()
            .map(|(c, col_name)| {
                cells.clear();
                cells.extend(rows.iter().map(|r| r[c].as_deref()));
                Column::encode(col_name, &cells, null_mode)
            })
            .collect();
        Ok(Table {
            name: name.to_string(),
            columns,
            row_count: rows.len(),
            has_header: true,
            separator: ',',
            null_mode,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The same table under another name.
    pub fn with_name(mut self, name: &str) -> Table {
        self.name = name.to_string();
        self
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, index: usize) -> Result<&Column, DatasetError> {
        self.columns
            .get(index)
            .ok_or(DatasetError::IndexOutOfRange { index, count: self.columns.len() })
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn has_header(&self) -> bool {
        self.has_header
    }

    pub fn separator(&self) -> char {
        self.separator
    }

    pub fn null_mode(&self) -> NullMode {
        self.null_mode
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> + '_ {
        self.columns.iter().map(Column::name)
    }

    /// Resolves a column by exact name, or by a decimal index.
    pub fn resolve_column(&self, reference: &str) -> Result<usize, DatasetError> {
        if let Some(i) = self.columns.iter().position(|c| c.name == reference) {
            return Ok(i);
        }
        match reference.parse::<usize>() {
            Ok(i) if i < self.columns.len() => Ok(i),
            _ => Err(DatasetError::UnknownColumn(reference.to_string())),
        }
    }

    pub fn value(&self, row: usize, column: usize) -> Option<&str> {
        self.columns[column].value(row)
    }

    pub fn row(&self, row: usize) -> Record {
        self.columns.iter().map(|c| c.value(row).map(str::to_string)).collect()
    }

    /// Returns a copy with the named cells replaced. `None` writes a null.
    /// Edited columns are re-encoded; untouched columns are cloned.
    pub fn with_cells_replaced(
        &self,
        name: &str,
        edits: &[(usize, usize, Option<String>)],
    ) -> Result<Table, DatasetError> {
        let mut by_column: BTreeMap<usize, Vec<(usize, Option<&str>)>> = BTreeMap::new();
        for (row, col, value) in edits {
            if *row >= self.row_count {
                return Err(DatasetError::RowOutOfRange { index: *row, count: self.row_count });
            }
            self.column(*col)?;
            by_column.entry(*col).or_default().push((*row, value.as_deref()));
        }
        let mut columns = self.columns.clone();
        for (col, changes) in by_column {
            let source = &self.columns[col];
            let mut cells: Vec<Option<&str>> = (0..self.row_count).map(|r| source.value(r)).collect();
            for (row, value) in changes {
                cells[row] = value;
            }
            columns[col] = Column::encode(source.name.clone(), &cells, self.null_mode);
        }
        Ok(Table {
            name: name.to_string(),
            columns,
            row_count: self.row_count,
            has_header: self.has_header,
            separator: self.separator,
            null_mode: self.null_mode,
        })
    }

    /// Serializes back to CSV with this table's separator. A header line is
    /// written when the table was read with one.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        if self.has_header {
            csv::write_record(&mut out, self.column_names().map(Some), self.separator);
        }
        for row in 0..self.row_count {
            csv::write_record(
                &mut out,
                self.columns.iter().map(|c| c.value(row)),
                self.separator,
            );
        }
        out
    }
}

fn unique_names(names: Vec<String>) -> Vec<String> {
    let mut taken: BTreeSet<String> = BTreeSet::new();
    let mut out = Vec::with_capacity(names.len());
    for (i, name) in names.into_iter().enumerate() {
        let name = if name.is_empty() { format!("col_{i}") } else { name };
        let mut candidate = name.clone();
        let mut k = 2;
        while taken.contains(&candidate) {
            candidate = format!("{name}_{k}");
            k += 1;
        }
        taken.insert(candidate.clone());
        out.push(candidate);
    }
    out
}

/// Types a column from its cells: integer if every non-null cell is an
/// integer, else real if every one is a decimal number, else text. A column
/// with no non-null cell is [`ValueType::Empty`].
pub fn infer_type<'a>(cells: impl IntoIterator<Item = Option<&'a str>>) -> ValueType {
    let mut seen = false;
    let mut all_int = true;
    let mut all_real = true;
    for cell in cells.into_iter().flatten() {
        seen = true;
        if all_int && !is_integer(cell) {
            all_int = false;
        }
        if !all_int && !is_decimal(cell) {
            all_real = false;
            break;
        }
    }
    match (seen, all_int, all_real) {
        (false, _, _) => ValueType::Empty,
        (true, true, _) => ValueType::Integer,
        (true, false, true) => ValueType::Real,
        _ => ValueType::Text,
    }
}

/// Re-labels column types of `table`. Types are inferred on construction,
/// so this only reports them.
pub fn infer_types(table: &Table) -> Vec<ValueType> {
    table.columns.iter().map(Column::inferred_type).collect()
}

fn strip_sign(s: &str) -> &str {
    s.strip_prefix(['+', '-']).unwrap_or(s)
}

pub fn is_integer(s: &str) -> bool {
    let digits = strip_sign(s);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) && s.parse::<i64>().is_ok()
}

/// Decimal literal: optional sign, digits with an optional fraction, and an
/// optional exponent. `inf` and `nan` are not numbers here.
pub fn is_decimal(s: &str) -> bool {
    let body = strip_sign(s);
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], Some(&body[i + 1..])),
        None => (body, None),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mantissa, ""),
    };
    let digits_ok = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    if int_part.is_empty() && frac_part.is_empty() {
        return false;
    }
    if !digits_ok(int_part) || !digits_ok(frac_part) {
        return false;
    }
    if let Some(exp) = exponent {
        let exp = strip_sign(exp);
        if exp.is_empty() || !digits_ok(exp) {
            return false;
        }
    }
    true
}

/// Numeric value of a cell, for integer and real columns.
pub fn parse_number(s: &str) -> Option<f64> {
    if is_decimal(s) {
        s.parse::<f64>().ok()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn opts(sep: char, header: bool) -> CsvOptions {
        CsvOptions { separator: sep, has_header: header, null_mode: NullMode::NullEqual }
    }

    #[test]
    fn parses_header_and_rows() {
        let t = Table::from_csv_str("t", "a,b\n1,x\n2,y", opts(',', true)).unwrap();
        assert_eq!(t.column_names().collect::<Vec<_>>(), vec!["a", "b"]);
        assert_eq!(t.row_count(), 2);
        assert_eq!(t.value(1, 1), Some("y"));
    }

    #[test]
    fn headerless_names() {
        let t = Table::from_csv_str("t", "1;x\n2;y", opts(';', false)).unwrap();
        assert_eq!(t.column_names().collect::<Vec<_>>(), vec!["col_0", "col_1"]);
        assert_eq!(t.row_count(), 2);
    }

    #[test]
    fn ragged_row_rejected() {
        let err = Table::from_csv_str("t", "a,b\n1", opts(',', true)).unwrap_err();
        assert!(matches!(err, DatasetError::MalformedCsv { row: 1, .. }), "{err:?}");
    }

    #[test]
    fn unterminated_quote_rejected() {
        let err = Table::from_csv_str("t", "a,b\n1,\"x\n", opts(',', true)).unwrap_err();
        assert!(matches!(err, DatasetError::MalformedCsv { row: 1, .. }), "{err:?}");
    }

    #[test]
    fn header_only_is_empty_input() {
        assert_eq!(
            Table::from_csv_str("t", "a,b\n", opts(',', true)).unwrap_err(),
            DatasetError::EmptyInput
        );
        assert_eq!(Table::from_csv_str("t", "", opts(',', false)).unwrap_err(), DatasetError::EmptyInput);
    }

    #[test]
    fn bad_separator() {
        assert!(matches!(
            Table::from_csv_str("t", "a", opts('"', true)),
            Err(DatasetError::InvalidSeparator('"'))
        ));
    }

    #[test]
    fn duplicate_header_names_are_made_unique() {
        let t = Table::from_csv_str("t", "a,a,a\n1,2,3", opts(',', true)).unwrap();
        assert_eq!(t.column_names().collect::<Vec<_>>(), vec!["a", "a_2", "a_3"]);
    }

    #[test]
    fn type_inference() {
        assert_eq!(infer_type([Some("1"), Some("2"), Some("3")]), ValueType::Integer);
        assert_eq!(infer_type([Some("1"), Some("2.5")]), ValueType::Real);
        assert_eq!(infer_type([Some("1"), Some("x")]), ValueType::Text);
        assert_eq!(infer_type([None, None]), ValueType::Empty);
        assert_eq!(infer_type([Some("-3"), None, Some("1e3")]), ValueType::Real);
        assert_eq!(infer_type([Some("inf")]), ValueType::Text);
        assert_eq!(infer_type([Some("")]), ValueType::Text);
        assert_eq!(infer_type([Some(".5"), Some("5.")]), ValueType::Real);
        assert_eq!(infer_type([Some("99999999999999999999")]), ValueType::Real);
    }

    #[test]
    fn null_modes_encode_differently() {
        let cells = [Some("x"), None, Some("x"), None];
        let eq = Column::encode("c".into(), &cells, NullMode::NullEqual);
        assert_eq!(eq.codes(), &[0, 1, 0, 1]);
        assert_eq!(eq.null_positions(), &[1, 3]);
        assert_eq!(eq.value(1), None);
        let distinct = Column::encode("c".into(), &cells, NullMode::NullDistinct);
        assert_eq!(distinct.codes(), &[0, UNCODED, 0, UNCODED]);
        assert_eq!(distinct.distinct_values().collect::<Vec<_>>(), vec!["x"]);
    }

    #[test]
    fn empty_string_is_not_null() {
        let t = Table::from_csv_str("t", "a\n\"\"\n\n", opts(',', true)).unwrap();
        assert_eq!(t.value(0, 0), Some(""));
        assert_eq!(t.value(1, 0), None);
        assert_eq!(t.columns()[0].codes(), &[0, 1]);
    }

    #[test]
    fn first_occurrence_codes() {
        let c = Column::encode("c".into(), &[Some("z"), Some("a"), Some("z"), Some("m")], NullMode::NullEqual);
        assert_eq!(c.codes(), &[0, 1, 0, 2]);
    }

    #[test]
    fn replacing_cells_creates_a_new_table() {
        let t = Table::from_csv_str("t", "a,c\n1,x\n1,y", opts(',', true)).unwrap();
        let fixed = t.with_cells_replaced("t2", &[(1, 1, Some("x".into()))]).unwrap();
        assert_eq!(fixed.value(1, 1), Some("x"));
        assert_eq!(t.value(1, 1), Some("y"));
        assert_eq!(fixed.columns()[1].codes(), &[0, 0]);
        assert!(matches!(
            t.with_cells_replaced("t3", &[(5, 0, None)]),
            Err(DatasetError::RowOutOfRange { index: 5, .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let text = "a,b\n\"x,1\",\n\"\",\"q\"\"\"\n";
        let t = Table::from_csv_str("t", text, opts(',', true)).unwrap();
        let again = Table::from_csv_str("t", &t.to_csv_string(), opts(',', true)).unwrap();
        assert_eq!(t, again);
    }

    #[test]
    fn resolve_by_name_or_index() {
        let t = Table::from_csv_str("t", "a,b\n1,2", opts(',', true)).unwrap();
        assert_eq!(t.resolve_column("b").unwrap(), 1);
        assert_eq!(t.resolve_column("0").unwrap(), 0);
        assert!(t.resolve_column("zz").is_err());
    }
}
