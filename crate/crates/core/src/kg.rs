//! RDF terms and the knowledge-graph builder.
//!
//! Minted nodes live under `https://example.org/ekf/{kind}/{hash}`. Quotes
//! and persons reuse schema.org terms; the mention layer uses terms from
//! [`vocab::EKF`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use core::fmt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alignment::QuoteCluster;
use crate::hash::FieldHasher;
use crate::quote::{Mention, PersonId};
use crate::resolver::SubEventNode;

pub const BASE: &str = "https://example.org/ekf/";

pub mod vocab {
    pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const SCHEMA: &str = "https://schema.org/";
    pub const EKF: &str = "https://example.org/ekf/vocab#";
    pub const WD: &str = "http://www.wikidata.org/entity/";

    pub const QUOTATION: &str = "https://schema.org/Quotation";
    pub const PERSON: &str = "https://schema.org/Person";
    pub const EVENT: &str = "https://schema.org/Event";
    pub const CREATOR: &str = "https://schema.org/creator";
    pub const TEXT: &str = "https://schema.org/text";
    pub const NAME: &str = "https://schema.org/name";
    pub const MENTIONS: &str = "https://schema.org/mentions";
    pub const SUPER_EVENT: &str = "https://schema.org/superEvent";

    pub const MENTION: &str = "https://example.org/ekf/vocab#Mention";
    pub const HAS_MENTION: &str = "https://example.org/ekf/vocab#hasMention";
    pub const MENTION_CONTEXT: &str = "https://example.org/ekf/vocab#mentionContext";
    pub const REPRESENTATIVE_MENTION: &str = "https://example.org/ekf/vocab#representativeMention";
    pub const SOURCE_SENTENCE: &str = "https://example.org/ekf/vocab#sourceSentence";
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KgError {
    #[error("invalid IRI {0:?}")]
    InvalidIri(String),
    #[error("invalid language tag {0:?}")]
    InvalidLanguageTag(String),
    #[error("cluster {cluster} references unknown mention {mention}")]
    UnknownMention { cluster: String, mention: String },
    #[error("cluster {cluster} references unknown person {person:?}")]
    UnknownPerson { cluster: String, person: String },
    #[error("cluster {0} has no members")]
    EmptyCluster(String),
}

/// An absolute IRI: a scheme, a colon, and a nonempty remainder free of
/// spaces, control characters and `<>"{}|^`\`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, KgError> {
        let value = value.into();
        if is_absolute_iri(&value) {
            Ok(Self(value))
        } else {
            Err(KgError::InvalidIri(value))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn known(value: &str) -> Self {
        debug_assert!(is_absolute_iri(value), "{value}");
        Self(value.to_string())
    }
}

impl TryFrom<String> for Iri {
    type Error = KgError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<Iri> for String {
    fn from(iri: Iri) -> Self {
        iri.0
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn is_absolute_iri(s: &str) -> bool {
    let Some((scheme, rest)) = s.split_once(':') else {
        return false;
    };
    let mut sc = scheme.chars();
    sc.next().is_some_and(|c| c.is_ascii_alphabetic())
        && sc.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
        && !rest.is_empty()
        && !rest.chars().any(|c| c.is_control() || c == ' ' || "<>\"{}|^`\\".contains(c))
}

pub fn is_language_tag(tag: &str) -> bool {
    let mut parts = tag.split('-');
    let first = parts.next().unwrap_or("");
    (1..=8).contains(&first.len())
        && first.bytes().all(|b| b.is_ascii_alphabetic())
        && parts.all(|p| (1..=8).contains(&p.len()) && p.bytes().all(|b| b.is_ascii_alphanumeric()))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LiteralKind {
    Plain,
    Lang(String),
    Datatype(Iri),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub lexical: String,
    pub kind: LiteralKind,
}

impl Literal {
    pub fn plain(lexical: impl Into<String>) -> Self {
        Self { lexical: lexical.into(), kind: LiteralKind::Plain }
    }

    pub fn lang(lexical: impl Into<String>, tag: &str) -> Result<Self, KgError> {
        if !is_language_tag(tag) {
            return Err(KgError::InvalidLanguageTag(tag.to_string()));
        }
        Ok(Self { lexical: lexical.into(), kind: LiteralKind::Lang(tag.to_ascii_lowercase()) })
    }

    pub fn typed(lexical: impl Into<String>, datatype: Iri) -> Self {
        Self { lexical: lexical.into(), kind: LiteralKind::Datatype(datatype) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<Literal> for Term {
    fn from(lit: Literal) -> Self {
        Term::Literal(lit)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Iri, predicate: Iri, object: impl Into<Term>) -> Self {
        Self { subject, predicate, object: object.into() }
    }
}

/// A set of triples; inserting a duplicate is a no-op.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TripleSet {
    triples: BTreeSet<Triple>,
}

impl TripleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, triple: Triple) -> bool {
        self.triples.insert(triple)
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    /// Triples with the given subject and predicate.
    pub fn objects<'a>(&'a self, subject: &'a Iri, predicate: &'a str) -> impl Iterator<Item = &'a Term> + 'a {
        self.triples
            .iter()
            .filter(move |t| &t.subject == subject && t.predicate.as_str() == predicate)
            .map(|t| &t.object)
    }

    /// Subjects carrying `rdf:type <class>`.
    pub fn instances_of<'a>(&'a self, class: &'a str) -> impl Iterator<Item = &'a Iri> + 'a {
        self.triples
            .iter()
            .filter(move |t| t.predicate.as_str() == vocab::RDF_TYPE && matches!(&t.object, Term::Iri(o) if o.as_str() == class))
            .map(|t| &t.subject)
    }
}

impl FromIterator<Triple> for TripleSet {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        Self { triples: iter.into_iter().collect() }
    }
}

impl Extend<Triple> for TripleSet {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        self.triples.extend(iter);
    }
}

fn mint(kind: &str, hash: &str) -> Iri {
    Iri::known(&format!("{BASE}{kind}/{hash}"))
}

pub fn person_iri(canonical_name: &str) -> Iri {
    mint("person", &FieldHasher::new("person").field(canonical_name).finish_id())
}

pub fn quote_iri(cluster_id: &str) -> Iri {
    mint("quote", cluster_id)
}

pub fn mention_iri(mention_id: &str) -> Iri {
    mint("mention", mention_id)
}

/// Node of the named event a page describes.
pub fn named_event_iri(page_title: &str) -> Iri {
    mint("event", &FieldHasher::new("named-event").field(page_title).finish_id())
}

pub fn subevent_iri(node: &SubEventNode) -> Iri {
    let m = &node.event_mention;
    let paragraph = m.paragraph.to_string();
    let hash = FieldHasher::new("sub-event")
        .field(&m.page)
        .field(&paragraph)
        .field(&m.sentence)
        .field(&m.trigger)
        .field(&m.event_type)
        .finish_id();
    mint("event", &hash)
}

pub fn wikidata_iri(qid: crate::ontology::Qid) -> Iri {
    Iri::known(&format!("{}{qid}", vocab::WD))
}

/// IRI of a link target: `w:` targets point at Wikipedia, others at
/// Wikiquote, both in the mention's language.
pub fn link_iri(language: &str, target: &str) -> Option<Iri> {
    let (site, title) = match target.strip_prefix("w:") {
        Some(rest) => ("wikipedia", rest),
        None => ("wikiquote", target),
    };
    let title = title.trim();
    if title.is_empty() {
        return None;
    }
    let mut path = String::new();
    for b in title.replace(' ', "_").bytes() {
        if b.is_ascii_alphanumeric() || b"-._~!$&'()*+,;=:@/".contains(&b) {
            path.push(b as char);
        } else {
            path.push_str(&format!("%{b:02X}"));
        }
    }
    Iri::new(format!("https://{language}.{site}.org/wiki/{path}")).ok()
}

/// Materializes persons, quote clusters and resolved sub-events.
///
/// Every quote node gets exactly one creator and at least one `hasMention`
/// link; every mention node exactly one language-tagged `schema:text`.
pub fn build_kg(
    clusters: &[QuoteCluster],
    mentions: &[Mention],
    persons: &[PersonId],
    subevents: &[SubEventNode],
) -> Result<TripleSet, KgError> {
    let iri = Iri::known;
    let rdf_type = iri(vocab::RDF_TYPE);
    let mut kg = TripleSet::new();

    let mut person_nodes = BTreeMap::new();
    for p in persons.iter().chain(mentions.iter().map(|m| &m.person)) {
        person_nodes.entry(p.canonical_name.as_str()).or_insert_with(|| person_iri(&p.canonical_name));
    }
    for (name, node) in &person_nodes {
        kg.insert(Triple::new(node.clone(), rdf_type.clone(), iri(vocab::PERSON)));
        kg.insert(Triple::new(node.clone(), iri(vocab::NAME), Literal::plain(*name)));
    }

    let by_id: BTreeMap<&str, &Mention> = mentions.iter().map(|m| (m.mention_id.as_str(), m)).collect();
    for cluster in clusters {
        if cluster.members.is_empty() {
            return Err(KgError::EmptyCluster(cluster.cluster_id.clone()));
        }
        let creator = person_nodes.get(cluster.person.as_str()).ok_or_else(|| KgError::UnknownPerson {
            cluster: cluster.cluster_id.clone(),
            person: cluster.person.clone(),
        })?;
        let q = quote_iri(&cluster.cluster_id);
        kg.insert(Triple::new(q.clone(), rdf_type.clone(), iri(vocab::QUOTATION)));
        kg.insert(Triple::new(q.clone(), iri(vocab::CREATOR), creator.clone()));
        for id in cluster.members.iter().chain([&cluster.representative]) {
            if !by_id.contains_key(id.as_str()) {
                return Err(KgError::UnknownMention { cluster: cluster.cluster_id.clone(), mention: id.clone() });
            }
        }
        kg.insert(Triple::new(q.clone(), iri(vocab::REPRESENTATIVE_MENTION), mention_iri(&cluster.representative)));
        for id in &cluster.members {
            let m = by_id[id.as_str()];
            let node = mention_iri(id);
            kg.insert(Triple::new(q.clone(), iri(vocab::HAS_MENTION), node.clone()));
            kg.insert(Triple::new(node.clone(), rdf_type.clone(), iri(vocab::MENTION)));
            kg.insert(Triple::new(node.clone(), iri(vocab::TEXT), Literal::lang(m.text.clone(), &m.language)?));
            for ctx in m.contexts.iter().filter(|c| !c.trim().is_empty()) {
                kg.insert(Triple::new(node.clone(), iri(vocab::MENTION_CONTEXT), Literal::plain(ctx.clone())));
            }
            for link in &m.linked_entities {
                if let Some(target) = link_iri(&m.language, &link.target) {
                    kg.insert(Triple::new(node.clone(), iri(vocab::MENTIONS), target));
                }
            }
        }
    }

    for node in subevents {
        let e = subevent_iri(node);
        let page = &node.event_mention.page;
        let parent = named_event_iri(page);
        kg.insert(Triple::new(parent.clone(), rdf_type.clone(), iri(vocab::EVENT)));
        kg.insert(Triple::new(parent.clone(), iri(vocab::NAME), Literal::plain(page.clone())));
        kg.insert(Triple::new(e.clone(), rdf_type.clone(), wikidata_iri(node.resolved_qid)));
        kg.insert(Triple::new(e.clone(), iri(vocab::SUPER_EVENT), parent));
        kg.insert(Triple::new(e, iri(vocab::SOURCE_SENTENCE), Literal::plain(node.event_mention.sentence.clone())));
    }
    Ok(kg)
}
