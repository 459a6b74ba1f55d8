use std::fmt::Write as _;

/// One grid point. `values` is `None` when the point was skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub key: Vec<f64>,
    pub values: Option<Vec<f64>>,
    pub note: String,
}

impl Row {
    pub fn ok(key: Vec<f64>, values: Vec<f64>) -> Row {
        Row {
            key,
            values: Some(values),
            note: String::new(),
        }
    }

    pub fn noted(key: Vec<f64>, values: Vec<f64>, note: impl Into<String>) -> Row {
        Row {
            key,
            values: Some(values),
            note: note.into(),
        }
    }

    pub fn skipped(key: Vec<f64>, reason: impl std::fmt::Display) -> Row {
        Row {
            key,
            values: None,
            note: format!("skipped: {reason}"),
        }
    }
}

/// A table with `#` metadata, key columns, value columns and a trailing note column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub id: String,
    pub metadata: Vec<(String, String)>,
    pub keys: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

impl Dataset {
    pub fn new(id: &str, keys: &[&str], columns: Vec<String>) -> Dataset {
        Dataset {
            id: id.to_string(),
            metadata: vec![("id".into(), id.into()), ("version".into(), crate::VERSION.into())],
            keys: keys.iter().map(|k| k.to_string()).collect(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Value of `column` in the first row whose key matches `key` to 1e-12.
    pub fn lookup(&self, key: &[f64], column: &str) -> Option<f64> {
        let col = self.column_index(column)?;
        self.rows
            .iter()
            .find(|r| {
                r.key
                    .iter()
                    .zip(key)
                    .all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs().max(1.0))
            })
            .and_then(|r| r.values.as_ref().map(|v| v[col]))
    }

    pub fn skipped(&self) -> usize {
        self.rows.iter().filter(|r| r.values.is_none()).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}: {v}");
        }
        let header: Vec<&str> = self
            .keys
            .iter()
            .chain(&self.columns)
            .map(String::as_str)
            .chain(std::iter::once("note"))
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut fields: Vec<String> = row.key.iter().map(|k| format!("{k}")).collect();
            match &row.values {
                Some(v) => fields.extend(v.iter().map(|x| fmt_value(*x))),
                None => fields.extend(std::iter::repeat_n(String::new(), self.columns.len())),
            }
            fields.push(row.note.replace([',', '\n'], ";"));
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

/// Shortest round-trip form; NaN marks "not applicable" and prints empty.
pub fn fmt_value(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:e}")
    }
}
