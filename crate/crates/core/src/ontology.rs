//! Class taxonomy with subclass-of edges and the event-type mapping table.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub const DEFAULT_MAX_DEPTH: usize = 5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OntologyError {
    #[error("invalid qid {0:?}")]
    InvalidQid(String),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("duplicate class {0}")]
    DuplicateClass(Qid),
    #[error("class {child} has dangling parent {parent}")]
    DanglingParent { child: Qid, parent: Qid },
    #[error("unknown class {0}")]
    UnknownClass(Qid),
    #[error("event type {0:?} is not mapped")]
    UnmappedType(String),
    #[error("event type {0:?} mapped twice")]
    DuplicateType(String),
}

/// Wikidata item id (`Q` followed by digits). Orders numerically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Qid(u64);

impl Qid {
    pub const fn new(n: u64) -> Self {
        Self(n)
    }

    pub fn number(self) -> u64 {
        self.0
    }
}

impl FromStr for Qid {
    type Err = OntologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || OntologyError::InvalidQid(s.to_string());
        let digits = s.strip_prefix('Q').ok_or_else(bad)?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || (digits.len() > 1 && digits.starts_with('0')) {
            return Err(bad());
        }
        digits.parse().map(Qid).map_err(|_| bad())
    }
}

impl fmt::Display for Qid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q{}", self.0)
    }
}

impl Serialize for Qid {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Qid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologyClass {
    pub qid: Qid,
    pub label: String,
    pub parents: Vec<Qid>,
}

/// Immutable class graph; every parent reference resolves.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassGraph {
    classes: BTreeMap<Qid, OntologyClass>,
    children: BTreeMap<Qid, Vec<Qid>>,
}

impl ClassGraph {
    pub fn new(classes: impl IntoIterator<Item = OntologyClass>) -> Result<Self, OntologyError> {
        let mut map = BTreeMap::new();
        for c in classes {
            if map.contains_key(&c.qid) {
                return Err(OntologyError::DuplicateClass(c.qid));
            }
            map.insert(c.qid, c);
        }
        let mut children: BTreeMap<Qid, Vec<Qid>> = BTreeMap::new();
        for c in map.values() {
            for &p in &c.parents {
                if !map.contains_key(&p) {
                    return Err(OntologyError::DanglingParent { child: c.qid, parent: p });
                }
                children.entry(p).or_default().push(c.qid);
            }
        }
        for kids in children.values_mut() {
            kids.sort_unstable();
            kids.dedup();
        }
        Ok(Self { classes: map, children })
    }

    /// Parses the taxonomy format: `qid<TAB>label<TAB>parent1,parent2,...`.
    /// Blank lines and `#` comments are skipped.
    pub fn from_tsv(text: &str) -> Result<Self, OntologyError> {
        let mut rows = Vec::new();
        let mut seen = BTreeSet::new();
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |reason: &str| OntologyError::Malformed { line: line_no, reason: reason.to_string() };
            let mut cols = line.split('\t');
            let (Some(qid), Some(label)) = (cols.next(), cols.next()) else {
                return Err(malformed("expected qid<TAB>label<TAB>parents"));
            };
            let parents_col = cols.next().unwrap_or("");
            if cols.next().is_some() {
                return Err(malformed("too many columns"));
            }
            let qid: Qid = qid.trim().parse().map_err(|_| malformed("invalid qid"))?;
            let label = label.trim();
            if label.is_empty() {
                return Err(malformed("empty label"));
            }
            let parents = parents_col
                .split(',')
                .map(str::trim)
                .filter(|p| !p.is_empty())
                .map(|p| p.parse::<Qid>().map_err(|_| malformed("invalid parent qid")))
                .collect::<Result<Vec<_>, _>>()?;
            if !seen.insert(qid) {
                return Err(OntologyError::DuplicateClass(qid));
            }
            rows.push(OntologyClass { qid, label: label.to_string(), parents });
        }
        Self::new(rows)
    }

    pub fn get(&self, qid: Qid) -> Option<&OntologyClass> {
        self.classes.get(&qid)
    }

    pub fn contains(&self, qid: Qid) -> bool {
        self.classes.contains_key(&qid)
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn classes(&self) -> impl Iterator<Item = &OntologyClass> {
        self.classes.values()
    }

    /// Direct subclasses, ascending.
    pub fn subclasses(&self, qid: Qid) -> &[Qid] {
        self.children.get(&qid).map_or(&[], Vec::as_slice)
    }

    /// Breadth-first subclass closure with depths: root at depth 0, each class
    /// once at its shortest depth, ordered by (depth, qid), capped at
    /// `max_depth`.
    pub fn closure_levels(&self, root: Qid, max_depth: usize) -> Result<Vec<(Qid, usize)>, OntologyError> {
        if !self.contains(root) {
            return Err(OntologyError::UnknownClass(root));
        }
        let mut visited = BTreeSet::from([root]);
        let mut out = alloc::vec![(root, 0)];
        let mut frontier = alloc::vec![root];
        let mut depth = 0;
        while !frontier.is_empty() && depth < max_depth {
            depth += 1;
            let mut next = BTreeSet::new();
            for q in &frontier {
                for &child in self.subclasses(*q) {
                    if visited.insert(child) {
                        next.insert(child);
                    }
                }
            }
            out.extend(next.iter().map(|&q| (q, depth)));
            frontier = next.into_iter().collect();
        }
        Ok(out)
    }

    /// Qids of [`Self::closure_levels`].
    pub fn subclass_closure(&self, root: Qid, max_depth: usize) -> Result<Vec<Qid>, OntologyError> {
        Ok(self.closure_levels(root, max_depth)?.into_iter().map(|(q, _)| q).collect())
    }

    /// Whether `class` equals `ancestor` or reaches it via subclass-of edges
    /// (no depth bound).
    pub fn is_subclass_of(&self, class: Qid, ancestor: Qid) -> bool {
        let mut stack = alloc::vec![class];
        let mut seen = BTreeSet::new();
        while let Some(q) = stack.pop() {
            if q == ancestor {
                return true;
            }
            if seen.insert(q) {
                if let Some(c) = self.get(q) {
                    stack.extend(c.parents.iter().copied());
                }
            }
        }
        false
    }
}

/// Extractor event type (e.g. an ACE type such as `Die`) to ontology class.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeMapping {
    entries: BTreeMap<String, Qid>,
}

impl TypeMapping {
    pub fn new(entries: impl IntoIterator<Item = (String, Qid)>, graph: &ClassGraph) -> Result<Self, OntologyError> {
        let mut map = BTreeMap::new();
        for (ty, qid) in entries {
            if !graph.contains(qid) {
                return Err(OntologyError::UnknownClass(qid));
            }
            if map.insert(ty.clone(), qid).is_some() {
                return Err(OntologyError::DuplicateType(ty));
            }
        }
        Ok(Self { entries: map })
    }

    /// Parses `event_type<TAB>qid` lines; `#` starts a comment line.
    pub fn from_tsv(text: &str, graph: &ClassGraph) -> Result<Self, OntologyError> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let malformed = |reason: &str| OntologyError::Malformed { line: n + 1, reason: reason.to_string() };
            let (ty, qid) = line.split_once('\t').ok_or_else(|| malformed("expected event_type<TAB>qid"))?;
            let ty = ty.trim();
            if ty.is_empty() {
                return Err(malformed("empty event type"));
            }
            let qid = qid.trim().parse().map_err(|_| malformed("invalid qid"))?;
            entries.push((ty.to_string(), qid));
        }
        Self::new(entries, graph)
    }

    pub fn map_event_type(&self, type_name: &str) -> Result<Qid, OntologyError> {
        self.entries
            .get(type_name)
            .copied()
            .ok_or_else(|| OntologyError::UnmappedType(type_name.to_string()))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, Qid)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }
}
