//! Shipped data files, with an optional directory override.

use std::path::Path;

use thiserror::Error;

pub const GLUE_DATA: &str = include_str!("../data/glue.txt");
pub const DICTIONARY_DATA: &str = include_str!("../data/dictionary.txt");
pub const CONVENTIONS_DATA: &str = include_str!("../data/conventions.txt");
pub const KV_DATA: &str = include_str!("../data/kv.txt");
pub const CASES_DATA: &str = include_str!("../data/cases.txt");
pub const TABLE1_DATA: &str = include_str!("../data/table1.txt");

/// Environment variable naming a directory that overrides the shipped data.
pub const DATA_ENV: &str = "ORBAUT_DATA";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct DataError {
    pub line: usize,
    pub message: String,
}

impl DataError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        DataError { line, message: message.into() }
    }
}

/// The text of every data file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataSet {
    pub glue: String,
    pub dictionary: String,
    pub conventions: String,
    pub kv: String,
    pub cases: String,
    pub table1: String,
}

impl Default for DataSet {
    fn default() -> Self {
        DataSet {
            glue: GLUE_DATA.into(),
            dictionary: DICTIONARY_DATA.into(),
            conventions: CONVENTIONS_DATA.into(),
            kv: KV_DATA.into(),
            cases: CASES_DATA.into(),
            table1: TABLE1_DATA.into(),
        }
    }
}

impl DataSet {
    /// Files present in `dir` replace the shipped ones; missing files fall back.
    pub fn from_dir(dir: &Path) -> std::io::Result<Self> {
        let mut d = DataSet::default();
        let slots: [(&str, &mut String); 6] = [
            ("glue.txt", &mut d.glue),
            ("dictionary.txt", &mut d.dictionary),
            ("conventions.txt", &mut d.conventions),
            ("kv.txt", &mut d.kv),
            ("cases.txt", &mut d.cases),
            ("table1.txt", &mut d.table1),
        ];
        for (name, slot) in slots {
            let path = dir.join(name);
            if path.exists() {
                *slot = std::fs::read_to_string(path)?;
            }
        }
        Ok(d)
    }
}

/// Lines with comments stripped, paired with 1-based line numbers; blank lines dropped.
pub fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}
