//! Tab-separated count tables: a header `category<TAB>sample1[<TAB>sample2...]`,
//! then one row per category.

use std::collections::HashMap;
use std::path::Path;

use crate::counts::CountVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTableFile {
    pub categories: Vec<String>,
    pub sample_names: Vec<String>,
    /// One column per sample, each of length `categories.len()`.
    pub columns: Vec<Vec<u64>>,
}

impl CountTableFile {
    pub fn column(&self, name: &str) -> Option<&[u64]> {
        self.sample_names.iter().position(|s| s == name).map(|k| self.columns[k].as_slice())
    }

    pub fn counts(&self, k: usize) -> Result<CountVector> {
        CountVector::new(self.columns[k].clone())
            .map_err(|_| Error::domain(format!("sample '{}' has no observations", self.sample_names[k])))
    }

    /// Re-indexes every column onto `universe`; categories missing here count 0.
    pub fn aligned(&self, universe: &[String]) -> Vec<Vec<u64>> {
        let index: HashMap<&str, usize> = self.categories.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
        self.columns
            .iter()
            .map(|col| universe.iter().map(|c| index.get(c.as_str()).map_or(0, |&i| col[i])).collect())
            .collect()
    }
}

pub fn parse_count_table(text: &str) -> Result<CountTableFile> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)));
    let (_, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or(Error::Parse { line: 1, message: "empty count table".into() })?;
    let fields: Vec<&str> = header.split('\t').collect();
    if fields.len() < 2 {
        return Err(Error::Parse { line: 1, message: "header needs a category column and at least one sample".into() });
    }
    let sample_names: Vec<String> = fields[1..].iter().map(|s| s.trim().to_string()).collect();
    let mut table = CountTableFile { categories: Vec::new(), sample_names, columns: vec![Vec::new(); fields.len() - 1] };
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (line, row) in lines {
        if row.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = row.split('\t').collect();
        if cells.len() != fields.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", fields.len(), cells.len()),
            });
        }
        let id = cells[0].trim().to_string();
        if id.is_empty() {
            return Err(Error::Parse { line, message: "empty category id".into() });
        }
        if let Some(first) = seen.insert(id.clone(), line) {
            return Err(Error::Validation {
                line,
                message: format!("duplicate category '{id}' (first seen on line {first})"),
            });
        }
        for (col, cell) in table.columns.iter_mut().zip(&cells[1..]) {
            let cell = cell.trim();
            let value = cell.parse::<u64>().map_err(|_| Error::Parse {
                line,
                message: format!("count '{cell}' is not a non-negative integer"),
            })?;
            col.push(value);
        }
        table.categories.push(id);
    }
    Ok(table)
}

pub fn read_count_table(path: &Path) -> Result<CountTableFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_count_table(&text)
}

pub fn write_count_table(table: &CountTableFile) -> String {
    let mut out = String::from("category");
    for name in &table.sample_names {
        out.push('\t');
        out.push_str(name);
    }
    out.push('\n');
    for (i, id) in table.categories.iter().enumerate() {
        out.push_str(id);
        for col in &table.columns {
            out.push('\t');
            out.push_str(&col[i].to_string());
        }
        out.push('\n');
    }
    out
}
