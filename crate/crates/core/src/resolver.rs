//! Resolving extracted event mentions to the most specific ontology class.
//!
//! Candidates are the subclass closure of the class the event type maps to.
//! Each candidate gets a set of questions built from templates; a
//! [`QaScorer`] rates each question against the passage and the candidate's
//! score is the mean. The best candidate wins, with ties going to the
//! shallower, then numerically smaller class. Below `score_floor` the mapped
//! base class is kept.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{ClassGraph, OntologyClass, OntologyError, Qid, TypeMapping, DEFAULT_MAX_DEPTH};
use crate::text::{split_sentences, tokens};
use crate::wiki::WikiPage;

pub const DEFAULT_SCORE_FLOOR: f64 = 0.1;

pub const DEFAULT_TEMPLATES: &[&str] = &[
    "Does the text describe a {label}?",
    "Is the {trigger} event an instance of {label}?",
    "Did a {label} take place?",
];

#[derive(Debug, Error, PartialEq)]
pub enum ResolveError {
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error("template line {line}: unknown placeholder {{{name}}}")]
    UnknownPlaceholder { line: usize, name: String },
    #[error("scorer failed: {0}")]
    Scorer(String),
    #[error("scorer returned a non-finite score")]
    NonFiniteScore,
    #[error("invalid event mention: {0}")]
    InvalidMention(String),
    #[error("lexicon line {line}: {reason}")]
    Lexicon { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Argument {
    pub role: String,
    pub surface: String,
}

/// An event mention produced by an upstream extractor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventMention {
    pub sentence: String,
    pub event_type: String,
    pub trigger: String,
    #[serde(default)]
    pub arguments: Vec<Argument>,
    /// Title of the page the sentence comes from.
    pub page: String,
    /// Index of the paragraph within the page, counting paragraph blocks only.
    pub paragraph: usize,
    /// Full paragraph text, used when scoring at paragraph scope.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paragraph_text: Option<String>,
}

impl EventMention {
    pub fn new(
        sentence: impl Into<String>,
        event_type: impl Into<String>,
        trigger: impl Into<String>,
        page: impl Into<String>,
        paragraph: usize,
    ) -> Result<Self, ResolveError> {
        let m = Self {
            sentence: sentence.into(),
            event_type: event_type.into(),
            trigger: trigger.into(),
            arguments: Vec::new(),
            page: page.into(),
            paragraph,
            paragraph_text: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), ResolveError> {
        if self.sentence.trim().is_empty() {
            return Err(ResolveError::InvalidMention("empty sentence".to_string()));
        }
        if !self.sentence.contains(self.trigger.as_str()) {
            return Err(ResolveError::InvalidMention(alloc::format!(
                "trigger {:?} does not occur in sentence",
                self.trigger
            )));
        }
        Ok(())
    }
}

/// Question-answering confidence that a question is supported by a passage.
pub trait QaScorer {
    fn score(&self, question: &str, passage: &str) -> Result<f64, ResolveError>;
}

impl<F> QaScorer for F
where
    F: Fn(&str, &str) -> f64,
{
    fn score(&self, question: &str, passage: &str) -> Result<f64, ResolveError> {
        Ok(self(question, passage))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolutionMethod {
    Qa,
    DirectBaseline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubEventNode {
    pub event_mention: EventMention,
    pub resolved_qid: Qid,
    pub resolved_label: String,
    pub score: f64,
    pub candidates_considered: usize,
    pub method: ResolutionMethod,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece {
    Text(String),
    Label,
    Trigger,
}

/// A question template with `{label}` and `{trigger}` placeholders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pieces: Vec<Piece>,
}

impl Template {
    fn parse(line: &str, line_no: usize) -> Result<Self, ResolveError> {
        let mut pieces = Vec::new();
        let mut text = String::new();
        let mut rest = line;
        while let Some(open) = rest.find('{') {
            text.push_str(&rest[..open]);
            let after = &rest[open + 1..];
            let Some(close) = after.find('}') else {
                text.push_str(&rest[open..]);
                rest = "";
                break;
            };
            let name = &after[..close];
            let piece = match name {
                "label" => Piece::Label,
                "trigger" => Piece::Trigger,
                _ => return Err(ResolveError::UnknownPlaceholder { line: line_no, name: name.to_string() }),
            };
            if !text.is_empty() {
                pieces.push(Piece::Text(core::mem::take(&mut text)));
            }
            pieces.push(piece);
            rest = &after[close + 1..];
        }
        text.push_str(rest);
        if !text.is_empty() {
            pieces.push(Piece::Text(text));
        }
        Ok(Self { pieces })
    }

    pub fn render(&self, label: &str, trigger: &str) -> String {
        self.pieces
            .iter()
            .map(|p| match p {
                Piece::Text(t) => t.as_str(),
                Piece::Label => label,
                Piece::Trigger => trigger,
            })
            .collect()
    }

    /// Recovers the `{label}` value from a question rendered by this
    /// template, if the question matches it.
    pub fn extract_label<'q>(&self, question: &'q str) -> Option<&'q str> {
        let mut pos = 0;
        let mut label = None;
        let mut open: Option<(bool, usize)> = None;
        for piece in &self.pieces {
            match piece {
                Piece::Text(t) => {
                    let found = match open {
                        None => question[pos..].starts_with(t.as_str()).then_some(pos),
                        Some(_) => question[pos..].find(t.as_str()).map(|p| pos + p),
                    }?;
                    if let Some((is_label, start)) = open.take() {
                        if is_label {
                            label = Some(&question[start..found]);
                        }
                    }
                    pos = found + t.len();
                }
                Piece::Label => open = Some((true, pos)),
                Piece::Trigger => open = Some((false, pos)),
            }
        }
        match open {
            Some((true, start)) => label = Some(&question[start..]),
            Some((false, _)) => {}
            None if pos != question.len() => return None,
            None => {}
        }
        label.filter(|l| !l.is_empty())
    }
}

/// Ordered question templates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionTemplates {
    templates: Vec<Template>,
}

impl Default for QuestionTemplates {
    fn default() -> Self {
        Self::from_lines(DEFAULT_TEMPLATES.iter().copied()).expect("default templates are valid")
    }
}

impl QuestionTemplates {
    /// One template per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, ResolveError> {
        let mut templates = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            templates.push(Template::parse(line, n + 1)?);
        }
        Ok(Self { templates })
    }

    fn from_lines<'a>(lines: impl Iterator<Item = &'a str>) -> Result<Self, ResolveError> {
        let templates = lines.enumerate().map(|(n, l)| Template::parse(l, n + 1)).collect::<Result<_, _>>()?;
        Ok(Self { templates })
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Template> {
        self.templates.iter()
    }
}

/// Questions about `candidate`, one per template, in template order.
pub fn generate_questions(templates: &QuestionTemplates, candidate: &OntologyClass, mention: &EventMention) -> Vec<String> {
    templates.iter().map(|t| t.render(&candidate.label, &mention.trigger)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PassageScope {
    Sentence,
    Paragraph,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolverConfig {
    pub max_depth: usize,
    pub score_floor: f64,
    pub scope: PassageScope,
}

impl Default for ResolverConfig {
    fn default() -> Self {
        Self { max_depth: DEFAULT_MAX_DEPTH, score_floor: DEFAULT_SCORE_FLOOR, scope: PassageScope::Sentence }
    }
}

pub struct Resolver<'a> {
    pub graph: &'a ClassGraph,
    pub mapping: &'a TypeMapping,
    pub templates: &'a QuestionTemplates,
    pub config: ResolverConfig,
}

impl<'a> Resolver<'a> {
    pub fn new(
        graph: &'a ClassGraph,
        mapping: &'a TypeMapping,
        templates: &'a QuestionTemplates,
        config: ResolverConfig,
    ) -> Self {
        Self { graph, mapping, templates, config }
    }

    fn passage<'m>(&self, mention: &'m EventMention) -> &'m str {
        match (self.config.scope, &mention.paragraph_text) {
            (PassageScope::Paragraph, Some(p)) => p,
            _ => &mention.sentence,
        }
    }

    /// Mean scorer output over the candidate's questions; 0 without questions.
    pub fn candidate_score<S: QaScorer + ?Sized>(
        &self,
        candidate: &OntologyClass,
        mention: &EventMention,
        scorer: &S,
    ) -> Result<f64, ResolveError> {
        let passage = self.passage(mention);
        let questions = generate_questions(self.templates, candidate, mention);
        if questions.is_empty() {
            return Ok(0.0);
        }
        let mut sum = 0.0;
        for q in &questions {
            let s = scorer.score(q, passage)?;
            if !s.is_finite() {
                return Err(ResolveError::NonFiniteScore);
            }
            sum += s.clamp(0.0, 1.0);
        }
        Ok(sum / questions.len() as f64)
    }

    pub fn resolve<S: QaScorer + ?Sized>(&self, mention: &EventMention, scorer: &S) -> Result<SubEventNode, ResolveError> {
        let base = self.mapping.map_event_type(&mention.event_type)?;
        let candidates = self.graph.closure_levels(base, self.config.max_depth)?;
        let mut best: Option<(f64, Qid)> = None;
        let mut base_score = 0.0;
        // closure order is (depth, qid), so a strict `>` keeps the tie-break
        for &(qid, _) in &candidates {
            let class = self.graph.get(qid).expect("closure members exist");
            let score = self.candidate_score(class, mention, scorer)?;
            if qid == base {
                base_score = score;
            }
            if best.is_none_or(|(b, _)| score > b) {
                best = Some((score, qid));
            }
        }
        let (mut score, mut qid) = best.expect("closure contains the root");
        if score < self.config.score_floor {
            (score, qid) = (base_score, base);
        }
        Ok(SubEventNode {
            event_mention: mention.clone(),
            resolved_qid: qid,
            resolved_label: self.graph.get(qid).expect("known").label.clone(),
            score,
            candidates_considered: candidates.len(),
            method: ResolutionMethod::Qa,
        })
    }
}

/// Ablation: take the mapped class directly, without questions.
pub fn resolve_direct_baseline(
    mention: &EventMention,
    mapping: &TypeMapping,
    graph: &ClassGraph,
) -> Result<SubEventNode, ResolveError> {
    let qid = mapping.map_event_type(&mention.event_type)?;
    let class = graph.get(qid).ok_or(OntologyError::UnknownClass(qid))?;
    Ok(SubEventNode {
        event_mention: mention.clone(),
        resolved_qid: qid,
        resolved_label: class.label.clone(),
        score: 1.0,
        candidates_considered: 1,
        method: ResolutionMethod::DirectBaseline,
    })
}

/// Deterministic stand-in for a QA model: the share of the candidate label's
/// tokens found in the passage.
///
/// The label is recovered from the question by matching it against the
/// templates; questions matching none fall back to all question tokens.
/// Optional prefix pairs `(label_prefix, passage_prefix)` let morphological
/// variants match, e.g. `detent`/`detain`.
#[derive(Debug, Clone)]
pub struct KeywordStubScorer {
    templates: QuestionTemplates,
    prefix_pairs: Vec<(String, String)>,
}

impl KeywordStubScorer {
    pub fn new(templates: QuestionTemplates) -> Self {
        Self { templates, prefix_pairs: Vec::new() }
    }

    pub fn with_prefix_pairs(mut self, pairs: impl IntoIterator<Item = (String, String)>) -> Self {
        self.prefix_pairs = pairs.into_iter().map(|(a, b)| (a.to_lowercase(), b.to_lowercase())).collect();
        self
    }

    /// Parses `label_prefix<TAB>passage_prefix` lines (`#` comments).
    pub fn parse_prefix_pairs(text: &str) -> Result<Vec<(String, String)>, ResolveError> {
        let mut out = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (a, b) = t.split_once('\t').ok_or_else(|| ResolveError::Lexicon {
                line: n + 1,
                reason: "expected label_prefix<TAB>passage_prefix".to_string(),
            })?;
            out.push((a.trim().to_string(), b.trim().to_string()));
        }
        Ok(out)
    }

    fn label_of<'q>(&self, question: &'q str) -> &'q str {
        self.templates.iter().find_map(|t| t.extract_label(question)).unwrap_or(question)
    }

    fn token_matches(&self, label_tok: &str, passage_tok: &str) -> bool {
        label_tok == passage_tok
            || self.prefix_pairs.iter().any(|(lp, pp)| {
                (label_tok.starts_with(lp.as_str()) && passage_tok.starts_with(pp.as_str()))
                    || (label_tok.starts_with(pp.as_str()) && passage_tok.starts_with(lp.as_str()))
            })
    }

    pub fn score_label(&self, label: &str, passage: &str) -> f64 {
        let mut label_tokens = tokens(label);
        label_tokens.sort_unstable();
        label_tokens.dedup();
        if label_tokens.is_empty() {
            return 0.0;
        }
        let passage_tokens = tokens(passage);
        let hits = label_tokens
            .iter()
            .filter(|lt| passage_tokens.iter().any(|pt| self.token_matches(lt, pt)))
            .count();
        hits as f64 / label_tokens.len() as f64
    }
}

pub fn keyword_stub_scorer() -> KeywordStubScorer {
    KeywordStubScorer::new(QuestionTemplates::default())
}

impl QaScorer for KeywordStubScorer {
    fn score(&self, question: &str, passage: &str) -> Result<f64, ResolveError> {
        Ok(self.score_label(self.label_of(question), passage))
    }
}

/// Rule-based trigger lexicon standing in for a neural event extractor.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TriggerLexicon {
    triggers: BTreeMap<String, String>,
}

impl TriggerLexicon {
    /// Parses `trigger<TAB>event_type` lines (`#` comments). Triggers are
    /// single words, matched case-insensitively.
    pub fn parse(text: &str) -> Result<Self, ResolveError> {
        let mut triggers = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let err = |reason: &str| ResolveError::Lexicon { line: n + 1, reason: reason.to_string() };
            let (word, ty) = t.split_once('\t').ok_or_else(|| err("expected trigger<TAB>event_type"))?;
            let word = word.trim().to_lowercase();
            if word.is_empty() || tokens(&word) != [word.clone()] {
                return Err(err("trigger must be a single word"));
            }
            if triggers.insert(word, ty.trim().to_string()).is_some() {
                return Err(err("duplicate trigger"));
            }
        }
        Ok(Self { triggers })
    }

    /// Event mentions for every trigger word in the paragraphs of a page, in
    /// document order. Links in the sentence become `Entity` arguments.
    pub fn extract(&self, page: &WikiPage) -> Vec<EventMention> {
        let mut out = Vec::new();
        let paragraphs = page.paragraphs();
        for (paragraph, block) in paragraphs.enumerate() {
            for range in split_sentences(&block.text) {
                let sentence = &block.text[range.clone()];
                let arguments: Vec<Argument> = block
                    .links
                    .iter()
                    .filter(|l| l.byte_span.0 >= range.start && l.byte_span.1 <= range.end)
                    .map(|l| Argument { role: "Entity".to_string(), surface: l.target.clone() })
                    .collect();
                let mut seen = Vec::new();
                for word in sentence.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()) {
                    let Some(ty) = self.triggers.get(&word.to_lowercase()) else { continue };
                    if seen.contains(&(word, ty)) {
                        continue;
                    }
                    seen.push((word, ty));
                    out.push(EventMention {
                        sentence: sentence.to_string(),
                        event_type: ty.clone(),
                        trigger: word.to_string(),
                        arguments: arguments.clone(),
                        page: page.title.clone(),
                        paragraph,
                        paragraph_text: Some(block.text.clone()),
                    });
                }
            }
        }
        out
    }
}
