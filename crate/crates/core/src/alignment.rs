//! Cross-lingual alignment of one person's quote mentions.
//!
//! Threshold community detection: every mention's θ-neighbourhood is a
//! candidate community; candidates are taken largest first and each claims
//! the members not yet assigned. Leftovers become singletons. Mentions are
//! put in a canonical order first, so the result does not depend on input
//! order.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Reverse;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{cosine, EmbeddingError, EmbeddingProvider, EmbeddingVector};
use crate::hash::FieldHasher;
use crate::quote::Mention;
use crate::text::normalize_text;

pub const DEFAULT_THRESHOLD: f64 = 0.8;
pub const DEFAULT_MIN_COMMUNITY_SIZE: usize = 2;

#[derive(Debug, Error, PartialEq)]
pub enum AlignError {
    #[error("threshold must lie in (0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("min_community_size must be at least 1")]
    InvalidMinSize,
    #[error("mentions belong to different persons: {0:?} and {1:?}")]
    MixedPersons(String, String),
    #[error("mention id {0} appears twice")]
    DuplicateMention(String),
    #[error("cluster has no members")]
    EmptyCluster,
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentConfig {
    pub threshold: f64,
    pub min_community_size: usize,
}

impl Default for AlignmentConfig {
    fn default() -> Self {
        Self { threshold: DEFAULT_THRESHOLD, min_community_size: DEFAULT_MIN_COMMUNITY_SIZE }
    }
}

impl AlignmentConfig {
    pub fn new(threshold: f64, min_community_size: usize) -> Result<Self, AlignError> {
        let cfg = Self { threshold, min_community_size };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), AlignError> {
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(AlignError::InvalidThreshold(self.threshold));
        }
        if self.min_community_size == 0 {
            return Err(AlignError::InvalidMinSize);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuoteCluster {
    pub cluster_id: String,
    /// Canonical name of the person all members belong to.
    pub person: String,
    /// Member mention ids in canonical order.
    pub members: Vec<String>,
    pub seed: String,
    pub representative: String,
}

/// Indices of `mentions` sorted by (language, normalized text, mention id).
pub fn canonical_order(mentions: &[Mention]) -> Vec<usize> {
    let keys: Vec<(&str, String, &str)> = mentions
        .iter()
        .map(|m| (m.language.as_str(), normalize_text(&m.text), m.mention_id.as_str()))
        .collect();
    let mut order: Vec<usize> = (0..mentions.len()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    order
}

/// Community detection over vectors already in canonical order. Returns
/// `(seed, members)` pairs of positions; members ascend.
pub fn detect_communities(
    vectors: &[EmbeddingVector],
    cfg: &AlignmentConfig,
) -> Result<Vec<(usize, Vec<usize>)>, AlignError> {
    cfg.validate()?;
    let n = vectors.len();
    let mut neighbourhoods: Vec<Vec<usize>> = (0..n).map(|i| alloc::vec![i]).collect();
    for i in 0..n {
        for j in i + 1..n {
            if cosine(&vectors[i], &vectors[j])? >= cfg.threshold {
                neighbourhoods[i].push(j);
                neighbourhoods[j].push(i);
            }
        }
    }
    for nb in &mut neighbourhoods {
        nb.sort_unstable();
    }

    let mut candidates: Vec<usize> =
        (0..n).filter(|&i| neighbourhoods[i].len() >= cfg.min_community_size).collect();
    candidates.sort_by_key(|&i| (Reverse(neighbourhoods[i].len()), i));

    let mut assigned = alloc::vec![false; n];
    let mut out = Vec::new();
    for seed in candidates {
        if assigned[seed] {
            continue;
        }
        let members: Vec<usize> = neighbourhoods[seed].iter().copied().filter(|&m| !assigned[m]).collect();
        for &m in &members {
            assigned[m] = true;
        }
        out.push((seed, members));
    }
    out.extend((0..n).filter(|&i| !assigned[i]).map(|i| (i, alloc::vec![i])));
    Ok(out)
}

/// Clusters one person's mentions into quotes.
pub fn cluster_person<P: EmbeddingProvider + ?Sized>(
    mentions: &[Mention],
    provider: &P,
    cfg: &AlignmentConfig,
) -> Result<Vec<QuoteCluster>, AlignError> {
    cfg.validate()?;
    let Some(first) = mentions.first() else {
        return Ok(Vec::new());
    };
    let person = &first.person.canonical_name;
    let mut ids = BTreeSet::new();
    for m in mentions {
        if &m.person.canonical_name != person {
            return Err(AlignError::MixedPersons(person.clone(), m.person.canonical_name.clone()));
        }
        if !ids.insert(m.mention_id.as_str()) {
            return Err(AlignError::DuplicateMention(m.mention_id.clone()));
        }
    }

    let order = canonical_order(mentions);
    let vectors = order
        .iter()
        .map(|&i| provider.embed(&mentions[i].text))
        .collect::<Result<Vec<_>, _>>()?;
    let by_id: BTreeMap<&str, &Mention> = mentions.iter().map(|m| (m.mention_id.as_str(), m)).collect();

    detect_communities(&vectors, cfg)?
        .into_iter()
        .map(|(seed, members)| {
            let members: Vec<String> =
                members.into_iter().map(|p| mentions[order[p]].mention_id.clone()).collect();
            let seed = mentions[order[seed]].mention_id.clone();
            let representative = select_representative(&members, &by_id)?;
            Ok(QuoteCluster { cluster_id: cluster_id(person, &members), person: person.clone(), members, seed, representative })
        })
        .collect()
}

/// Stable id of a cluster: hash of the person and the sorted member ids.
pub fn cluster_id(person: &str, members: &[String]) -> String {
    let mut sorted: Vec<&str> = members.iter().map(String::as_str).collect();
    sorted.sort_unstable();
    FieldHasher::new("quote").field(person).list(sorted).finish_id()
}

/// The member with the most contexts; ties prefer English, then canonical
/// order. Unknown ids rank last.
pub fn select_representative(
    members: &[String],
    mentions_by_id: &BTreeMap<&str, &Mention>,
) -> Result<String, AlignError> {
    members
        .iter()
        .min_by_key(|id| match mentions_by_id.get(id.as_str()) {
            Some(m) => (
                0u8,
                Reverse(m.contexts.len()),
                m.language != "en",
                m.language.clone(),
                normalize_text(&m.text),
                m.mention_id.clone(),
            ),
            None => (1, Reverse(0), true, String::new(), String::new(), (*id).clone()),
        })
        .cloned()
        .ok_or(AlignError::EmptyCluster)
}
