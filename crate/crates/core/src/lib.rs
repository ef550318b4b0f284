//! Core algorithms for building an event- and quote-centric knowledge graph
//! from wiki-markup corpora.
//!
//! Everything in this crate is pure and allocation-only (`no_std` + `alloc`):
//! parsing markup, extracting quote mentions, clustering them across
//! languages, resolving event mentions against a class taxonomy, building and
//! serializing the RDF graph, and scoring predictions. File IO, record formats
//! and the command-line interface live in the `ekf` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod alignment;
pub mod embedding;
pub mod eval;
pub mod hash;
pub mod kg;
pub mod ntriples;
pub mod ontology;
pub mod quote;
pub mod resolver;
pub mod stats;
pub mod text;
pub mod vecfile;
pub mod wiki;

pub use alignment::{cluster_person, select_representative, AlignmentConfig, QuoteCluster};
pub use embedding::{cosine, hash_provider, EmbeddingProvider, EmbeddingVector, HashProvider, StoredVectors};
pub use eval::{evaluate, generate_testset, EvalOptions, EvalReport, GoldRecord, GoldSnapshot};
pub use kg::{build_kg, Iri, Literal, Term, Triple, TripleSet};
pub use ntriples::{parse_ntriples, serialize_ntriples};
pub use ontology::{ClassGraph, OntologyClass, Qid, TypeMapping};
pub use quote::{count_contextful, extract_mentions, Mention, PersonId, StopList};
pub use resolver::{
    keyword_stub_scorer, resolve_direct_baseline, EventMention, QaScorer, QuestionTemplates, Resolver, ResolverConfig,
    SubEventNode,
};
pub use stats::{compute_stats, LanguageStats, StatsReport};
pub use wiki::{extract_links, parse_wikitext, Block, BlockKind, InternalLink, PageKind, RawPage, Section, WikiPage};
