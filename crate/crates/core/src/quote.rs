//! Quote mentions extracted from person pages.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hash::FieldHasher;
use crate::text::{normalize_heading, normalize_text};
use crate::wiki::{BlockKind, InternalLink, PageKind, Section, WikiPage};

/// Mentions shorter than this many characters after normalization are dropped.
pub const MIN_MENTION_CHARS: usize = 2;

/// Section headings skipped unless configured otherwise.
pub const DEFAULT_STOP_HEADINGS: &[&str] = &["misattributed", "disputed", "about"];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuoteError {
    #[error("person canonical name is empty")]
    EmptyName,
    #[error("person {0:?} has no page titles")]
    NoPages(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PersonId {
    pub canonical_name: String,
    /// language code -> page title
    pub page_titles: BTreeMap<String, String>,
}

impl PersonId {
    pub fn new(
        canonical_name: impl Into<String>,
        page_titles: BTreeMap<String, String>,
    ) -> Result<Self, QuoteError> {
        let canonical_name = canonical_name.into();
        if canonical_name.trim().is_empty() {
            return Err(QuoteError::EmptyName);
        }
        if page_titles.is_empty() {
            return Err(QuoteError::NoPages(canonical_name));
        }
        Ok(Self { canonical_name, page_titles })
    }

    /// Person known by a single page.
    pub fn single(language: &str, title: &str) -> Result<Self, QuoteError> {
        let mut titles = BTreeMap::new();
        titles.insert(String::from(language), String::from(title));
        Self::new(title, titles)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mention {
    pub mention_id: String,
    pub person: PersonId,
    pub language: String,
    pub text: String,
    pub contexts: Vec<String>,
    pub linked_entities: Vec<InternalLink>,
    pub section_path: Vec<String>,
}

impl Mention {
    /// Stable content hash of (person, language, text, section path).
    pub fn compute_id(person: &str, language: &str, text: &str, section_path: &[String]) -> String {
        FieldHasher::new("mention")
            .field(person)
            .field(language)
            .field(text)
            .list(section_path.iter().map(String::as_str))
            .finish_id()
    }

    pub fn has_context(&self) -> bool {
        self.contexts.iter().any(|c| !c.trim().is_empty()) || !self.linked_entities.is_empty()
    }
}

/// Normalized headings whose sections (and subsections) hold no attributed
/// quotes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopList {
    headings: BTreeSet<String>,
}

impl Default for StopList {
    fn default() -> Self {
        Self { headings: DEFAULT_STOP_HEADINGS.iter().map(|h| String::from(*h)).collect() }
    }
}

impl StopList {
    pub fn empty() -> Self {
        Self { headings: BTreeSet::new() }
    }

    /// Adds headings from the plain-text format: one heading per line, `#`
    /// starts a comment line.
    pub fn extend_from_text(&mut self, text: &str) {
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            self.insert(line);
        }
    }

    pub fn insert(&mut self, heading: &str) {
        self.headings.insert(normalize_heading(heading));
    }

    pub fn contains(&self, heading: &str) -> bool {
        self.headings.contains(&normalize_heading(heading))
    }

    pub fn len(&self) -> usize {
        self.headings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.headings.is_empty()
    }
}

/// One mention per quote item in an attributed section, in document order.
///
/// Sub-bullets become contexts and in-quote links become linked entities.
/// Stop-listed sections are skipped with their subsections. Exact duplicates
/// (same mention id) are kept once. Event pages yield nothing.
pub fn extract_mentions(page: &WikiPage, person: &PersonId, stop: &StopList) -> Vec<Mention> {
    let mut out = Vec::new();
    if page.kind != PageKind::Person {
        return out;
    }
    let mut seen = BTreeSet::new();
    let mut path = Vec::new();
    walk(&page.root, page, person, stop, &mut path, &mut seen, &mut out);
    out
}

fn walk(
    section: &Section,
    page: &WikiPage,
    person: &PersonId,
    stop: &StopList,
    path: &mut Vec<String>,
    seen: &mut BTreeSet<String>,
    out: &mut Vec<Mention>,
) {
    for block in section.blocks.iter().filter(|b| b.kind == BlockKind::QuoteItem) {
        let text = normalize_text(&block.text);
        if text.chars().count() < MIN_MENTION_CHARS {
            continue;
        }
        let mention_id = Mention::compute_id(&person.canonical_name, &page.language, &text, path);
        if !seen.insert(mention_id.clone()) {
            continue;
        }
        out.push(Mention {
            mention_id,
            person: person.clone(),
            language: page.language.clone(),
            text,
            contexts: block.sub_items.iter().filter(|s| !s.trim().is_empty()).cloned().collect(),
            linked_entities: block.links.clone(),
            section_path: path.clone(),
        });
    }
    for child in &section.children {
        if stop.contains(&child.heading) {
            continue;
        }
        path.push(child.heading.clone());
        walk(child, page, person, stop, path, seen, out);
        path.pop();
    }
}

/// Number of mentions with at least one nonempty context or linked entity.
pub fn count_contextful(mentions: &[Mention]) -> usize {
    mentions.iter().filter(|m| m.has_context()).count()
}
