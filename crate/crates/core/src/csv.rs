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

//! RFC 4180 reading and writing with a configurable separator.
//!
//! An unquoted empty field decodes to `None` (null). A quoted empty field
//! (`""`) decodes to `Some("")`. There is no escape character; a quote inside
//! a quoted field is written as two quotes.

use alloc::string::String;
use alloc::vec::Vec;

/// A decoded record: one entry per field, `None` for null.
pub type Record = Vec<Option<String>>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CsvError {
    #[error("record {record}: unterminated quoted field")]
    UnterminatedQuote { record: usize },
    #[error("record {record}: unexpected character {found:?} after closing quote")]
    TrailingAfterQuote { record: usize, found: char },
}

impl CsvError {
    pub fn record(&self) -> usize {
        match self {
            CsvError::UnterminatedQuote { record } | CsvError::TrailingAfterQuote { record, .. } => {
                *record
            }
        }
    }
}

/// Splits `text` into records.
///
/// Records end at `\n` or `\r\n`. A final line terminator does not start an
/// extra record. Fields keep surrounding whitespace.
pub fn read_records(text: &str, separator: char) -> Result<Vec<Record>, CsvError> {
    let mut records = Vec::new();
    let mut record: Record = Vec::new();
    let mut field = String::new();
    let mut chars = text.chars().peekable();
    // `quoted` tracks whether the current field started with a quote.
    let mut quoted = false;
    let mut at_field_start = true;

    loop {
        let Some(c) = chars.next() else {
            if !at_field_start || !record.is_empty() || quoted {
                record.push(finish_field(&mut field, quoted));
                records.push(core::mem::take(&mut record));
            }
            break;
        };

        if at_field_start && c == '"' {
            quoted = true;
            at_field_start = false;
            let index = records.len();
            loop {
                match chars.next() {
                    None => return Err(CsvError::UnterminatedQuote { record: index }),
                    Some('"') => {
                        if chars.peek() == Some(&'"') {
                            chars.next();
                            field.push('"');
                        } else {
                            break;
                        }
                    }
                    Some(other) => field.push(other),
                }
            }
            match chars.peek().copied() {
                None => {}
                Some(next) if next == separator || next == '\n' || next == '\r' => {}
                Some(found) => {
                    return Err(CsvError::TrailingAfterQuote { record: index, found });
                }
            }
            continue;
        }

        if c == separator {
            record.push(finish_field(&mut field, quoted));
            quoted = false;
            at_field_start = true;
        } else if c == '\n' || c == '\r' {
            if c == '\r' && chars.peek() == Some(&'\n') {
                chars.next();
            }
            record.push(finish_field(&mut field, quoted));
            records.push(core::mem::take(&mut record));
            quoted = false;
            at_field_start = true;
            if chars.peek().is_none() {
                break;
            }
        } else {
            field.push(c);
            at_field_start = false;
        }
    }
    Ok(records)
}

fn finish_field(field: &mut String, quoted: bool) -> Option<String> {
    let value = core::mem::take(field);
    if value.is_empty() && !quoted {
        None
    } else {
        Some(value)
    }
}

/// Appends one record to `out`, quoting only where needed.
pub fn write_record<'a, I>(out: &mut String, fields: I, separator: char)
where
    I: IntoIterator<Item = Option<&'a str>>,
{
    for (i, field) in fields.into_iter().enumerate() {
        if i > 0 {
            out.push(separator);
        }
        let Some(value) = field else { continue };
        let needs_quotes = value.is_empty()
            || value
                .chars()
                .any(|c| c == separator || c == '"' || c == '\n' || c == '\r');
        if needs_quotes {
            out.push('"');
            for c in value.chars() {
                if c == '"' {
                    out.push('"');
                }
                out.push(c);
            }
            out.push('"');
        } else {
            out.push_str(value);
        }
    }
    out.push('\n');
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn s(v: &str) -> Option<String> {
        Some(v.to_string())
    }

    #[test]
    fn plain_records() {
        let r = read_records("a,b\n1,x\n2,y", ',').unwrap();
        assert_eq!(r, vec![vec![s("a"), s("b")], vec![s("1"), s("x")], vec![s("2"), s("y")]]);
    }

    #[test]
    fn trailing_newline_and_crlf() {
        let r = read_records("a;b\r\n1;2\r\n", ';').unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[1], vec![s("1"), s("2")]);
    }

    #[test]
    fn empty_versus_quoted_empty() {
        let r = read_records("a,\"\",\n", ',').unwrap();
        assert_eq!(r, vec![vec![s("a"), s(""), None]]);
    }

    #[test]
    fn quoted_separator_newline_and_quote() {
        let r = read_records("\"x,y\",\"line\nbreak\",\"say \"\"hi\"\"\"\n", ',').unwrap();
        assert_eq!(r, vec![vec![s("x,y"), s("line\nbreak"), s("say \"hi\"")]]);
    }

    #[test]
    fn unterminated_quote_reports_record() {
        let err = read_records("a\n\"open\n", ',').unwrap_err();
        assert_eq!(err, CsvError::UnterminatedQuote { record: 1 });
    }

    #[test]
    fn junk_after_quote() {
        let err = read_records("\"a\"b,c\n", ',').unwrap_err();
        assert_eq!(err.record(), 0);
    }

    #[test]
    fn blank_line_is_a_single_null_field() {
        let r = read_records("a\n\nb\n", ',').unwrap();
        assert_eq!(r, vec![vec![s("a")], vec![None], vec![s("b")]]);
    }

    #[test]
    fn writer_quotes_when_needed() {
        let mut out = String::new();
        write_record(&mut out, [Some("a,b"), None, Some(""), Some("q\"")], ',');
        assert_eq!(out, "\"a,b\",,\"\",\"q\"\"\"\n");
        let back = read_records(&out, ',').unwrap();
        assert_eq!(back, vec![vec![s("a,b"), None, s(""), s("q\"")]]);
    }
}
