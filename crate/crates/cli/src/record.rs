//! Line-oriented `key=value` records.
//!
//! One record per line, fields separated by single spaces, keys in a fixed
//! order per record kind. Values never contain whitespace; lists are comma
//! separated and a missing value is written as `-`.

use std::fmt::{self, Display};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Record {
    fields: Vec<(String, String)>,
}

impl Record {
    pub fn new(kind: &str) -> Self {
        let mut r = Record::default();
        r.push("record", kind);
        r
    }

    pub fn push(&mut self, key: &str, value: impl Display) -> &mut Self {
        debug_assert!(!key.is_empty() && !key.contains(['=', ' ']));
        let mut v = value.to_string();
        if v.is_empty() {
            v.push('-');
        }
        debug_assert!(!v.contains(char::is_whitespace), "value '{v}' has whitespace");
        self.fields.push((key.to_string(), v));
        self
    }

    pub fn kind(&self) -> Option<&str> {
        self.get("record")
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Parsed numeric value; `None` when absent, `-` or malformed.
    pub fn number(&self, key: &str) -> Option<f64> {
        self.get(key).and_then(|v| v.parse().ok())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.fields.iter().map(|(k, _)| k.as_str())
    }

    pub fn parse(line: &str) -> Result<Self, String> {
        let mut fields = Vec::new();
        for tok in line.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| format!("field '{tok}' has no '='"))?;
            if k.is_empty() || v.is_empty() {
                return Err(format!("field '{tok}' has an empty key or value"));
            }
            fields.push((k.to_string(), v.to_string()));
        }
        if fields.first().map(|f| f.0.as_str()) != Some("record") {
            return Err("record must start with 'record='".into());
        }
        Ok(Record { fields })
    }
}

impl Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.fields.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// Comma-joined list, `-` when empty.
pub fn list<T: Display>(items: impl IntoIterator<Item = T>) -> String {
    let s = items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",");
    if s.is_empty() {
        "-".into()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut r = Record::new("query");
        r.push("id", 3).push("vertices", list([2, 4, 5])).push("empty", "");
        let line = r.to_string();
        assert_eq!(line, "record=query id=3 vertices=2,4,5 empty=-");
        assert_eq!(Record::parse(&line).unwrap(), r);
        assert_eq!(r.number("id"), Some(3.0));
        assert_eq!(r.number("empty"), None);
    }

    #[test]
    fn rejects_garbage() {
        assert!(Record::parse("id=3").is_err());
        assert!(Record::parse("record=x novalue").is_err());
        assert!(Record::parse("record=x k=").is_err());
    }
}
