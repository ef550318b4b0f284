//! Parsing a pragmatic subset of wiki markup into a section tree.
//!
//! Supported: `=`-headings, `*`/`**` lists, internal links, emphasis,
//! templates (dropped), comments (dropped), `<ref>` elements (dropped).
//! Tables, images and categories are dropped too. Anything else degrades to
//! paragraph text; parsing never fails.

mod markup;

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use markup::MAX_TEMPLATE_DEPTH;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PageKind {
    Person,
    Event,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WikiError {
    #[error("page title is empty")]
    EmptyTitle,
    #[error("invalid language code {0:?}: expected 2-3 lowercase letters")]
    InvalidLanguage(String),
}

/// One page of the input corpus, as read from disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawPage {
    pub title: String,
    pub language: String,
    pub page_kind: PageKind,
    pub wikitext: String,
    /// Groups person pages of different languages; defaults to the title.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub person_key: Option<String>,
}

impl RawPage {
    pub fn new(
        title: impl Into<String>,
        language: impl Into<String>,
        page_kind: PageKind,
        wikitext: impl Into<String>,
    ) -> Result<Self, WikiError> {
        let page = Self {
            title: title.into(),
            language: language.into(),
            page_kind,
            wikitext: wikitext.into(),
            person_key: None,
        };
        page.validate()?;
        Ok(page)
    }

    pub fn with_person_key(mut self, key: impl Into<String>) -> Self {
        self.person_key = Some(key.into());
        self
    }

    pub fn validate(&self) -> Result<(), WikiError> {
        if self.title.trim().is_empty() {
            return Err(WikiError::EmptyTitle);
        }
        if !is_language_code(&self.language) {
            return Err(WikiError::InvalidLanguage(self.language.clone()));
        }
        Ok(())
    }
}

pub fn is_language_code(s: &str) -> bool {
    (2..=3).contains(&s.len()) && s.bytes().all(|b| b.is_ascii_lowercase())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WikiPage {
    pub title: String,
    pub language: String,
    pub kind: PageKind,
    pub root: Section,
}

impl WikiPage {
    /// Depth-first iterator over all sections, root first.
    pub fn sections(&self) -> impl Iterator<Item = &Section> {
        let mut stack = alloc::vec![&self.root];
        core::iter::from_fn(move || {
            let s = stack.pop()?;
            stack.extend(s.children.iter().rev());
            Some(s)
        })
    }

    /// Paragraph blocks in document order.
    pub fn paragraphs(&self) -> impl Iterator<Item = &Block> {
        self.sections()
            .flat_map(|s| s.blocks.iter())
            .filter(|b| b.kind == BlockKind::Paragraph)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub heading: String,
    pub heading_level: u8,
    pub blocks: Vec<Block>,
    pub children: Vec<Section>,
}

impl Section {
    fn new(heading: String, heading_level: u8) -> Self {
        Self { heading, heading_level, blocks: Vec::new(), children: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Paragraph,
    QuoteItem,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub kind: BlockKind,
    pub text: String,
    pub sub_items: Vec<String>,
    pub links: Vec<InternalLink>,
}

/// An internal link; `byte_span` indexes the cleaned text of its block and
/// `surface == text[span]` always holds.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InternalLink {
    pub target: String,
    pub surface: String,
    pub byte_span: (usize, usize),
}

/// Cleans one block of raw markup and extracts its internal links.
///
/// `[[T]]` yields target and surface `T`, `[[T|S]]` target `T` and surface
/// `S`. Spans refer to the returned cleaned text. An unclosed `[[` stays
/// literal.
pub fn extract_links(block_text: &str) -> (String, Vec<InternalLink>) {
    markup::clean_inline(&markup::preprocess(block_text))
}

struct TreeBuilder {
    stack: Vec<Section>,
    /// Whether the last block of the open section is a quote item that can
    /// still take sub-bullets.
    item_open: bool,
}

impl TreeBuilder {
    fn new() -> Self {
        Self { stack: alloc::vec![Section::new(String::new(), 0)], item_open: false }
    }

    fn close_top(&mut self) {
        let done = self.stack.pop().expect("non-root section");
        self.stack.last_mut().expect("root stays").children.push(done);
    }

    fn open_section(&mut self, level: u8, heading: String) {
        while self.stack.len() > 1 && self.current().heading_level >= level {
            self.close_top();
        }
        self.stack.push(Section::new(heading, level));
        self.item_open = false;
    }

    fn current(&mut self) -> &mut Section {
        self.stack.last_mut().expect("root stays")
    }

    fn push_block(&mut self, kind: BlockKind, raw: &str) {
        let (text, links) = markup::clean_inline(raw);
        if text.is_empty() {
            self.item_open = false;
            return;
        }
        self.item_open = kind == BlockKind::QuoteItem;
        self.current().blocks.push(Block { kind, text, sub_items: Vec::new(), links });
    }

    fn push_sub_item(&mut self, raw: &str) {
        if !self.item_open {
            self.push_block(BlockKind::Paragraph, raw);
            return;
        }
        let (text, _) = markup::clean_inline(raw);
        if !text.is_empty() {
            let item = self.current().blocks.last_mut().expect("open item exists");
            item.sub_items.push(text);
        }
    }

    fn finish(mut self) -> Section {
        while self.stack.len() > 1 {
            self.close_top();
        }
        self.stack.pop().expect("root")
    }
}

fn parse_heading(line: &str) -> Option<(u8, String)> {
    let line = line.trim_end();
    let lead = line.bytes().take_while(|&b| b == b'=').count();
    let trail = line.bytes().rev().take_while(|&b| b == b'=').count();
    if lead == 0 || lead == line.len() {
        return None;
    }
    let level = lead.min(trail).min(6);
    if level == 0 {
        return None;
    }
    let inner = &line[level..line.len() - level];
    let (text, _) = markup::clean_inline(inner);
    (!text.is_empty()).then_some((level as u8, text))
}

fn is_rule(trimmed: &str) -> bool {
    trimmed.len() >= 4 && trimmed.bytes().all(|b| b == b'-')
}

/// Index of the line closing the table opened at `start`, honouring nesting.
fn table_end(lines: &[&str], start: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (i, line) in lines.iter().enumerate().skip(start) {
        let t = line.trim_start();
        if t.starts_with("{|") {
            depth += 1;
        } else if t.starts_with("|}") {
            depth -= 1;
            if depth == 0 {
                return Some(i);
            }
        }
    }
    None
}

/// Parses a page into its section tree. Pure and total: malformed markup
/// degrades to paragraph text.
pub fn parse_wikitext(raw: &RawPage) -> WikiPage {
    let text = markup::preprocess(&raw.wikitext);
    let lines: Vec<&str> = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
    let mut tree = TreeBuilder::new();
    let mut paragraph = String::new();
    let flush = |tree: &mut TreeBuilder, paragraph: &mut String| {
        if !paragraph.is_empty() {
            tree.push_block(BlockKind::Paragraph, paragraph);
            paragraph.clear();
        }
    };

    let mut i = 0;
    while i < lines.len() {
        let line = lines[i];
        let trimmed = line.trim();
        if trimmed.starts_with("{|") {
            if let Some(end) = table_end(&lines, i) {
                flush(&mut tree, &mut paragraph);
                tree.item_open = false;
                i = end + 1;
                continue;
            }
        }
        if trimmed.is_empty() || is_rule(trimmed) {
            flush(&mut tree, &mut paragraph);
        } else if let Some((level, heading)) = parse_heading(line) {
            flush(&mut tree, &mut paragraph);
            tree.open_section(level, heading);
        } else if line.starts_with('*') {
            flush(&mut tree, &mut paragraph);
            let depth = line.bytes().take_while(|&b| b == b'*').count();
            let content = &line[depth..];
            if depth == 1 {
                tree.push_block(BlockKind::QuoteItem, content);
            } else {
                tree.push_sub_item(content);
            }
        } else {
            let content = line.trim_start_matches([':', '#', ';']);
            if !paragraph.is_empty() {
                paragraph.push(' ');
            }
            paragraph.push_str(content);
            tree.item_open = false;
        }
        i += 1;
    }
    flush(&mut tree, &mut paragraph);

    WikiPage {
        title: raw.title.clone(),
        language: raw.language.clone(),
        kind: raw.page_kind,
        root: tree.finish(),
    }
}
