//! Line-delimited JSON records: the input corpus and the stage artifacts.

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use ekf_core::wiki::{PageKind, RawPage, WikiPage};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{EkfError, Result};

/// One line of the corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusRecord {
    pub title: String,
    pub lang: String,
    pub kind: PageKind,
    pub wikitext: String,
    /// Groups person pages across languages; defaults to the title.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub person: Option<String>,
}

/// A parsed page as written by `ingest`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageRecord {
    /// Person key of a person page; absent for event pages.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub person: Option<String>,
    #[serde(flatten)]
    pub page: WikiPage,
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| EkfError::io(path, e))
}

/// Parses corpus records, keeping file order. Errors name the line.
pub fn parse_corpus(text: &str, path: &Path) -> Result<Vec<RawPage>> {
    let mut pages = Vec::new();
    let mut seen = BTreeSet::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = n + 1;
        let err = |reason: String| EkfError::Record { path: path.to_path_buf(), line: line_no, reason };
        let rec: CorpusRecord = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        if !seen.insert((rec.title.clone(), rec.lang.clone())) {
            return Err(err(format!("duplicate page ({:?}, {:?})", rec.title, rec.lang)));
        }
        let mut page = RawPage::new(rec.title, rec.lang, rec.kind, rec.wikitext).map_err(|e| err(e.to_string()))?;
        if let Some(key) = rec.person {
            page = page.with_person_key(key);
        }
        pages.push(page);
    }
    Ok(pages)
}

pub fn load_corpus(path: &Path) -> Result<Vec<RawPage>> {
    parse_corpus(&read_text(path)?, path)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = read_text(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str(l).map_err(|e| EkfError::Record {
                path: path.to_path_buf(),
                line: n + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}

/// Reads a stage artifact, pointing at the producing stage when missing.
pub fn read_artifact<T: DeserializeOwned>(path: &Path, stage: &'static str) -> Result<Vec<T>> {
    if !path.exists() {
        return Err(EkfError::MissingArtifact { path: path.to_path_buf(), stage });
    }
    read_jsonl(path)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item).map_err(|e| EkfError::Input { path: path.to_path_buf(), reason: e.to_string() })?;
        out.push(b'\n');
    }
    write_bytes(path, &out)
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| EkfError::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(bytes).and_then(|()| w.flush()).map_err(|e| EkfError::io(path, e))
}
