//! Line-oriented `key = value` format with `[section]` headers, shared by
//! scenario and data files.
//!
//! Grammar (one construct per line, surrounding whitespace ignored):
//!
//! ```text
//! blank   :=
//! comment := '#' <anything>
//! section := '[' ident ']'
//! pair    := ident ws* '=' ws* value
//! ident   := [A-Za-z_][A-Za-z0-9_]*
//! value   := <non-empty, no '#'>
//! ```
//!
//! Pairs must follow a section header. Sections and keys may not repeat.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
    pub key_column: usize,
    pub value_column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl Entry {
    pub fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.line,
            column: self.value_column,
            message: message.into(),
        }
    }

    pub fn parse_u32(&self) -> Result<u32> {
        self.value.parse().map_err(|_| {
            self.error(format!(
                "{}: expected an unsigned integer, got {:?}",
                self.key, self.value
            ))
        })
    }

    pub fn parse_f64(&self) -> Result<f64> {
        match self.value.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.error(format!("{}: expected a finite number, got {:?}", self.key, self.value))),
        }
    }

    pub fn parse_bool(&self) -> Result<bool> {
        match self.value.as_str() {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(self.error(format!("{}: expected true or false, got {other:?}", self.key))),
        }
    }

    pub fn parse_ident(&self) -> Result<String> {
        if is_ident(&self.value) {
            Ok(self.value.clone())
        } else {
            Err(self.error(format!("{}: expected an identifier, got {:?}", self.key, self.value)))
        }
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

pub(crate) fn parse(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let indent = raw.len() - raw.trim_start().len();
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let col = indent + 1;
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| syntax(line_no, col + line.len(), "expected ']'"))?
                .trim();
            if !is_ident(name) {
                return Err(syntax(line_no, col + 1, format!("invalid section name {name:?}")));
            }
            if sections.iter().any(|s| s.name == name) {
                return Err(syntax(line_no, col, format!("duplicate section [{name}]")));
            }
            sections.push(Section {
                name: name.to_string(),
                line: line_no,
                entries: Vec::new(),
            });
            continue;
        }
        let eq = line
            .find('=')
            .ok_or_else(|| syntax(line_no, col, "expected `key = value` or `[section]`"))?;
        let key = line[..eq].trim_end();
        if !is_ident(key) {
            return Err(syntax(line_no, col, format!("invalid key {key:?}")));
        }
        let after = &line[eq + 1..];
        let value = after.trim();
        let value_column = col + eq + 1 + (after.len() - after.trim_start().len());
        if value.is_empty() {
            return Err(syntax(line_no, value_column, format!("missing value for {key}")));
        }
        if let Some(hash) = value.find('#') {
            return Err(syntax(
                line_no,
                value_column + hash,
                "comments must be on their own line",
            ));
        }
        let section = sections
            .last_mut()
            .ok_or_else(|| syntax(line_no, col, format!("{key} appears before any [section]")))?;
        if section.entries.iter().any(|e| e.key == key) {
            return Err(syntax(
                line_no,
                col,
                format!("duplicate key {key} in [{}]", section.name),
            ));
        }
        section.entries.push(Entry {
            key: key.to_string(),
            value: value.to_string(),
            line: line_no,
            key_column: col,
            value_column,
        });
    }
    Ok(sections)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_positions() {
        let s = parse("# hi\n[done]\n  limit =  45\n\n[reward]\nx=y\n").unwrap();
        assert_eq!(s.len(), 2);
        let e = &s[0].entries[0];
        assert_eq!(
            (e.key.as_str(), e.value.as_str(), e.line, e.key_column, e.value_column),
            ("limit", "45", 3, 3, 12)
        );
    }

    #[test]
    fn reports_line_and_column() {
        match parse("[done]\nlimit 45\n") {
            Err(Error::Syntax { line: 2, column: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse("limit = 4\n") {
            Err(Error::Syntax { line: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(parse("[a]\nk=1\nk=2").is_err());
        assert!(parse("[a]\n[a]").is_err());
        assert!(parse("[a b]").is_err());
    }
}
