//! Per-language statistics over quote clusters and their mentions.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alignment::QuoteCluster;
use crate::quote::Mention;

pub const TOTAL_LABEL: &str = "All Languages";
pub const STATS_HEADER: [&str; 5] = ["Language", "Persons", "Quotes", "Mentions", "Mentions with Contexts"];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("cluster {cluster} references unknown mention {mention}")]
    UnknownMention { cluster: String, mention: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageStats {
    pub language: String,
    pub persons: usize,
    pub quotes: usize,
    pub mentions: usize,
    pub mentions_with_contexts: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsReport {
    /// Sorted by language code.
    pub languages: Vec<LanguageStats>,
    pub total: LanguageStats,
}

#[derive(Default)]
struct Acc<'a> {
    persons: BTreeSet<&'a str>,
    quotes: BTreeSet<&'a str>,
    mentions: usize,
    contextful: usize,
}

impl Acc<'_> {
    fn finish(&self, language: &str) -> LanguageStats {
        LanguageStats {
            language: language.to_string(),
            persons: self.persons.len(),
            quotes: self.quotes.len(),
            mentions: self.mentions,
            mentions_with_contexts: self.contextful,
        }
    }
}

/// Counts persons and quotes with at least one mention per language, plus
/// mentions and mentions with context. The total row deduplicates persons
/// and quotes across languages. Mentions outside every cluster still count
/// as mentions and toward their person.
pub fn compute_stats(clusters: &[QuoteCluster], mentions: &[Mention]) -> Result<StatsReport, StatsError> {
    let by_id: BTreeMap<&str, &Mention> = mentions.iter().map(|m| (m.mention_id.as_str(), m)).collect();
    let mut per_lang: BTreeMap<&str, Acc> = BTreeMap::new();
    let mut total = Acc::default();

    for m in by_id.values() {
        let acc = per_lang.entry(m.language.as_str()).or_default();
        let contextful = usize::from(m.has_context());
        for a in [&mut *acc, &mut total] {
            a.persons.insert(&m.person.canonical_name);
            a.mentions += 1;
            a.contextful += contextful;
        }
    }
    for c in clusters {
        for id in &c.members {
            let m = by_id.get(id.as_str()).ok_or_else(|| StatsError::UnknownMention {
                cluster: c.cluster_id.clone(),
                mention: id.clone(),
            })?;
            per_lang.entry(m.language.as_str()).or_default().quotes.insert(&c.cluster_id);
            total.quotes.insert(&c.cluster_id);
        }
    }

    Ok(StatsReport {
        languages: per_lang.iter().map(|(lang, acc)| acc.finish(lang)).collect(),
        total: total.finish(TOTAL_LABEL),
    })
}

impl StatsReport {
    /// Tab-separated table with a header, one row per language, and the
    /// total row last.
    pub fn to_tsv(&self) -> String {
        let mut out = STATS_HEADER.join("\t");
        out.push('\n');
        for s in self.languages.iter().chain([&self.total]) {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                s.language, s.persons, s.quotes, s.mentions, s.mentions_with_contexts
            );
        }
        out
    }
}
