//! Gold test-set generation from event links, and precision/recall scoring
//! of resolved sub-events.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{ClassGraph, OntologyError, Qid};
use crate::resolver::{ResolutionMethod, SubEventNode};
use crate::text::split_sentences;
use crate::wiki::{PageKind, WikiPage};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("gold snapshot line {line}: {reason}")]
    Snapshot { line: usize, reason: String },
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error("two predictions for page {page:?}, paragraph {paragraph}, sentence {sentence:?}")]
    DuplicatePrediction { page: String, paragraph: usize, sentence: String },
    #[error("two gold records for page {page:?}, paragraph {paragraph}, sentence {sentence:?}")]
    DuplicateGold { page: String, paragraph: usize, sentence: String },
    #[error("predictions mix resolution methods")]
    MixedMethods,
}

/// One row of the gold snapshot: an item, its class, and its properties.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldEntry {
    pub page_title: String,
    pub qid: Qid,
    pub type_qid: Qid,
    pub properties: BTreeMap<String, String>,
}

/// Frozen knowledge-base extract keyed by page title.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GoldSnapshot {
    entries: BTreeMap<String, GoldEntry>,
}

impl GoldSnapshot {
    /// Parses `page_title<TAB>qid<TAB>type_qid<TAB>prop=value;prop=value`.
    /// The property column may be empty or missing. `#` lines are comments.
    pub fn from_tsv(text: &str) -> Result<Self, EvalError> {
        let mut entries = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let err = |reason: &str| EvalError::Snapshot { line: n + 1, reason: reason.to_string() };
            let cols: Vec<&str> = line.split('\t').collect();
            if !(3..=4).contains(&cols.len()) {
                return Err(err("expected 3 or 4 tab-separated columns"));
            }
            let title = cols[0].trim();
            if title.is_empty() {
                return Err(err("empty page title"));
            }
            let qid: Qid = cols[1].trim().parse().map_err(|_| err("bad qid"))?;
            let type_qid: Qid = cols[2].trim().parse().map_err(|_| err("bad type qid"))?;
            let mut properties = BTreeMap::new();
            for pair in cols.get(3).copied().unwrap_or("").split(';').map(str::trim).filter(|p| !p.is_empty()) {
                let (k, v) = pair.split_once('=').ok_or_else(|| err("property must be prop=value"))?;
                if properties.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                    return Err(err("property listed twice"));
                }
            }
            let entry = GoldEntry { page_title: title.to_string(), qid, type_qid, properties };
            if entries.insert(title.to_string(), entry).is_some() {
                return Err(err("duplicate page title"));
            }
        }
        Ok(Self { entries })
    }

    /// Looks up a link target; underscores count as spaces.
    pub fn get(&self, title: &str) -> Option<&GoldEntry> {
        let t = title.trim();
        self.entries.get(t).or_else(|| self.entries.get(&t.replace('_', " ")))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldRecord {
    pub page: String,
    pub paragraph: usize,
    pub sentence: String,
    pub linked_event_qid: Qid,
    pub gold_type_qid: Qid,
    #[serde(default)]
    pub gold_properties: BTreeMap<String, String>,
}

/// One record per sentence of an event page that links to a snapshot item
/// whose type is a class of `events`. The first qualifying link wins.
pub fn generate_testset(pages: &[WikiPage], snapshot: &GoldSnapshot, events: &ClassGraph) -> Vec<GoldRecord> {
    let mut out = Vec::new();
    for page in pages.iter().filter(|p| p.kind == PageKind::Event) {
        for (paragraph, block) in page.paragraphs().enumerate() {
            for range in split_sentences(&block.text) {
                let hit = block
                    .links
                    .iter()
                    .filter(|l| l.byte_span.0 >= range.start && l.byte_span.1 <= range.end)
                    .filter_map(|l| snapshot.get(&l.target))
                    .find(|e| events.contains(e.type_qid));
                if let Some(e) = hit {
                    out.push(GoldRecord {
                        page: page.title.clone(),
                        paragraph,
                        sentence: block.text[range].to_string(),
                        linked_event_qid: e.qid,
                        gold_type_qid: e.type_qid,
                        gold_properties: e.properties.clone(),
                    });
                }
            }
        }
    }
    out
}

/// Argument role to gold property name.
pub const DEFAULT_ROLE_PROPERTIES: &[(&str, &str)] =
    &[("Place", "location"), ("Country", "country"), ("Time", "point in time")];

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    /// Micro scores from counts; any 0/0 ratio is 0.
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        Self { tp, fp, fn_, precision, recall, f1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Shared method of the predictions; `None` when there are none.
    pub method: Option<ResolutionMethod>,
    pub strict: bool,
    pub types: Prf,
    pub properties: BTreeMap<String, Prf>,
}

#[derive(Debug, Clone, Copy)]
pub struct EvalOptions<'a> {
    /// Require exact class equality instead of accepting subclasses.
    pub strict: bool,
    pub graph: &'a ClassGraph,
    pub role_properties: &'a [(&'a str, &'a str)],
}

type Key<'a> = (&'a str, usize, &'a str);

/// Scores predictions against gold, matching on (page, paragraph, sentence).
///
/// A matched prediction with the right class is a true positive; with the
/// wrong class it is both a false positive and a false negative. Unmatched
/// predictions are false positives and unpredicted gold records false
/// negatives. Properties are scored the same way from the arguments whose
/// role maps to a property, with exact value comparison.
pub fn evaluate(predictions: &[SubEventNode], gold: &[GoldRecord], opts: &EvalOptions) -> Result<EvalReport, EvalError> {
    let mut method = None;
    let mut preds: BTreeMap<Key, &SubEventNode> = BTreeMap::new();
    for p in predictions {
        if method.is_some_and(|m| m != p.method) {
            return Err(EvalError::MixedMethods);
        }
        method = Some(p.method);
        let m = &p.event_mention;
        if preds.insert((m.page.as_str(), m.paragraph, m.sentence.as_str()), p).is_some() {
            return Err(EvalError::DuplicatePrediction {
                page: m.page.clone(),
                paragraph: m.paragraph,
                sentence: m.sentence.clone(),
            });
        }
    }
    let mut golds: BTreeMap<Key, &GoldRecord> = BTreeMap::new();
    for g in gold {
        if golds.insert((g.page.as_str(), g.paragraph, g.sentence.as_str()), g).is_some() {
            return Err(EvalError::DuplicateGold { page: g.page.clone(), paragraph: g.paragraph, sentence: g.sentence.clone() });
        }
    }

    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    let mut props: BTreeMap<&str, (usize, usize, usize)> =
        opts.role_properties.iter().map(|&(_, prop)| (prop, (0, 0, 0))).collect();

    for (key, p) in &preds {
        let Some(g) = golds.get(key) else {
            fp += 1;
            for (prop, _) in predicted_properties(p, opts) {
                props.entry(prop).or_default().1 += 1;
            }
            continue;
        };
        let correct = p.resolved_qid == g.gold_type_qid
            || (!opts.strict && opts.graph.is_subclass_of(p.resolved_qid, g.gold_type_qid));
        if correct {
            tp += 1;
        } else {
            fp += 1;
            fn_ += 1;
        }
        let predicted = predicted_properties(p, opts);
        for (prop, counts) in props.iter_mut() {
            let guess = predicted.get(prop);
            match (guess, g.gold_properties.get(*prop)) {
                (Some(v), Some(gv)) if *v == gv.as_str() => counts.0 += 1,
                (Some(_), Some(_)) => {
                    counts.1 += 1;
                    counts.2 += 1;
                }
                (Some(_), None) => counts.1 += 1,
                (None, Some(_)) => counts.2 += 1,
                (None, None) => {}
            }
        }
    }
    for (key, g) in &golds {
        if !preds.contains_key(key) {
            fn_ += 1;
            for (prop, counts) in props.iter_mut() {
                if g.gold_properties.contains_key(*prop) {
                    counts.2 += 1;
                }
            }
        }
    }

    Ok(EvalReport {
        method,
        strict: opts.strict,
        types: Prf::from_counts(tp, fp, fn_),
        properties: props.into_iter().map(|(k, (a, b, c))| (k.to_string(), Prf::from_counts(a, b, c))).collect(),
    })
}

/// Keeps the highest-scoring prediction per (page, paragraph, sentence);
/// the earliest wins a tie. Output follows first appearance.
pub fn best_per_sentence(nodes: &[SubEventNode]) -> Vec<SubEventNode> {
    let mut slot: BTreeMap<Key, usize> = BTreeMap::new();
    let mut out: Vec<SubEventNode> = Vec::new();
    for n in nodes {
        let m = &n.event_mention;
        match slot.get(&(m.page.as_str(), m.paragraph, m.sentence.as_str())) {
            Some(&i) if n.score > out[i].score => out[i] = n.clone(),
            Some(_) => {}
            None => {
                slot.insert((m.page.as_str(), m.paragraph, m.sentence.as_str()), out.len());
                out.push(n.clone());
            }
        }
    }
    out
}

/// First argument surface per mapped property.
fn predicted_properties<'a>(p: &'a SubEventNode, opts: &EvalOptions<'a>) -> BTreeMap<&'a str, &'a str> {
    let mut out = BTreeMap::new();
    for arg in &p.event_mention.arguments {
        if let Some(&(_, prop)) = opts.role_properties.iter().find(|(role, _)| *role == arg.role) {
            out.entry(prop).or_insert(arg.surface.as_str());
        }
    }
    out
}

pub const EVAL_HEADER: &str = "method\tmetric\ttp\tfp\tfn\tprecision\trecall\tf1";

impl EvalReport {
    pub fn method_name(&self) -> &'static str {
        match self.method {
            Some(ResolutionMethod::Qa) => "qa",
            Some(ResolutionMethod::DirectBaseline) => "direct_baseline",
            None => "none",
        }
    }

    /// Data rows under [`EVAL_HEADER`]: the type row, then one row per
    /// property.
    pub fn tsv_rows(&self) -> String {
        let mut out = String::new();
        let method = self.method_name();
        let rows = core::iter::once(("type", &self.types)).chain(self.properties.iter().map(|(k, v)| (k.as_str(), v)));
        for (name, s) in rows {
            let _ = writeln!(
                out,
                "{method}\t{name}\t{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}",
                s.tp, s.fp, s.fn_, s.precision, s.recall, s.f1
            );
        }
        out
    }

    pub fn to_tsv(&self) -> String {
        alloc::format!("{EVAL_HEADER}\n{}", self.tsv_rows())
    }

    pub fn summary(&self) -> String {
        let mode = if self.strict { "strict" } else { "lenient" };
        let t = &self.types;
        alloc::format!(
            "{} ({mode}): type P={:.4} R={:.4} F1={:.4} (tp={} fp={} fn={})",
            self.method_name(),
            t.precision,
            t.recall,
            t.f1,
            t.tp,
            t.fp,
            t.fn_
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resolver::{Argument, EventMention};
    use crate::wiki::{parse_wikitext, RawPage};
    use alloc::vec;

    const CONVENTION_SENTENCE: &str = "On July 19, the second night of the [[2016 Republican National Convention]], [[Mike Pence|Pence]] won the Republican vice presidential nomination by acclamation.";

    fn graph() -> ClassGraph {
        ClassGraph::from_tsv("Q1\tevent\t\nQ2\tconvention\tQ1\nQ3\tnominating convention\tQ2\n").unwrap()
    }

    fn snapshot() -> GoldSnapshot {
        GoldSnapshot::from_tsv("# title\tqid\ttype\tprops\n2016 Republican National Convention\tQ24\tQ3\n").unwrap()
    }

    fn node(sentence: &str, qid: u64) -> SubEventNode {
        SubEventNode {
            event_mention: EventMention::new(sentence, "Nominate", sentence.split(' ').next().unwrap(), "P", 0).unwrap(),
            resolved_qid: Qid::new(qid),
            resolved_label: String::new(),
            score: 1.0,
            candidates_considered: 1,
            method: ResolutionMethod::Qa,
        }
    }

    fn gold(sentence: &str, qid: u64) -> GoldRecord {
        GoldRecord {
            page: "P".into(),
            paragraph: 0,
            sentence: sentence.into(),
            linked_event_qid: Qid::new(99),
            gold_type_qid: Qid::new(qid),
            gold_properties: BTreeMap::new(),
        }
    }

    fn opts(g: &ClassGraph, strict: bool) -> EvalOptions<'_> {
        EvalOptions { strict, graph: g, role_properties: DEFAULT_ROLE_PROPERTIES }
    }

    #[test]
    fn snapshot_parsing() {
        let s = GoldSnapshot::from_tsv("A\tQ1\tQ2\tlocation=Q3; point in time=2016-07-19\nB_c\tQ4\tQ5\n").unwrap();
        assert_eq!(s.get("A").unwrap().properties["point in time"], "2016-07-19");
        assert!(s.get("B_c").is_some());
        assert!(s.get("A ").is_some());
        assert!(matches!(GoldSnapshot::from_tsv("A\tQ1"), Err(EvalError::Snapshot { line: 1, .. })));
        assert!(GoldSnapshot::from_tsv("A\tQ1\tQ2\nA\tQ1\tQ2").is_err());
        assert!(GoldSnapshot::from_tsv("A\tQ1\tQ2\tnoequals").is_err());
    }

    #[test]
    fn convention_sentence_yields_one_record() {
        let raw = RawPage::new("2016 Republican Party vice presidential candidate selection", "en", PageKind::Event, CONVENTION_SENTENCE).unwrap();
        let recs = generate_testset(&[parse_wikitext(&raw)], &snapshot(), &graph());
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].linked_event_qid, Qid::new(24));
        assert!(recs[0].sentence.starts_with("On July 19"));
    }

    #[test]
    fn non_event_links_yield_nothing() {
        let raw = RawPage::new("X", "en", PageKind::Event, "Visited [[Cleveland]]. Then [[2016 Republican National Convention]].").unwrap();
        let snap = GoldSnapshot::from_tsv("Cleveland\tQ37320\tQ515\n").unwrap();
        assert!(generate_testset(&[parse_wikitext(&raw)], &snap, &graph()).is_empty());
        let person_page = RawPage::new("X", "en", PageKind::Person, CONVENTION_SENTENCE).unwrap();
        assert!(generate_testset(&[parse_wikitext(&person_page)], &snapshot(), &graph()).is_empty());
    }

    #[test]
    fn hand_computed_scores() {
        let g = graph();
        let golds = [gold("a b", 2), gold("c d", 2)];
        let same = [node("a b", 2), node("c d", 2)];
        let r = evaluate(&same, &golds, &opts(&g, true)).unwrap();
        assert_eq!((r.types.precision, r.types.recall, r.types.f1), (1.0, 1.0, 1.0));

        let disjoint = [node("x y", 2)];
        let r = evaluate(&disjoint, &golds, &opts(&g, true)).unwrap();
        assert_eq!((r.types.precision, r.types.recall, r.types.f1), (0.0, 0.0, 0.0));

        let half = [node("a b", 2), node("c d", 1)];
        let r = evaluate(&half, &golds, &opts(&g, true)).unwrap();
        assert_eq!((r.types.tp, r.types.fp, r.types.fn_), (1, 1, 1));
        assert_eq!((r.types.precision, r.types.recall, r.types.f1), (0.5, 0.5, 0.5));

        let r = evaluate(&[], &[], &opts(&g, true)).unwrap();
        assert_eq!(r.types, Prf::default());
        assert_eq!(r.method, None);
    }

    #[test]
    fn lenient_accepts_subclasses() {
        let g = graph();
        let golds = [gold("a b", 2)];
        let deeper = [node("a b", 3)];
        assert_eq!(evaluate(&deeper, &golds, &opts(&g, false)).unwrap().types.tp, 1);
        assert_eq!(evaluate(&deeper, &golds, &opts(&g, true)).unwrap().types.tp, 0);
        let shallower = [node("a b", 1)];
        assert_eq!(evaluate(&shallower, &golds, &opts(&g, false)).unwrap().types.tp, 0);
    }

    #[test]
    fn duplicate_keys_and_mixed_methods_error() {
        let g = graph();
        let dup = [node("a b", 2), node("a b", 3)];
        assert!(matches!(evaluate(&dup, &[], &opts(&g, true)), Err(EvalError::DuplicatePrediction { .. })));
        let mut other = node("c d", 2);
        other.method = ResolutionMethod::DirectBaseline;
        assert_eq!(evaluate(&[node("a b", 2), other], &[], &opts(&g, true)), Err(EvalError::MixedMethods));
    }

    #[test]
    fn property_scores() {
        let g = graph();
        let mut gr = gold("a b", 2);
        gr.gold_properties.insert("location".into(), "Q37320".into());
        gr.gold_properties.insert("point in time".into(), "2016-07-19".into());
        let mut p = node("a b", 2);
        p.event_mention.arguments = vec![
            Argument { role: "Place".into(), surface: "Q37320".into() },
            Argument { role: "Time".into(), surface: "July 19".into() },
        ];
        let r = evaluate(&[p], &[gr], &opts(&g, true)).unwrap();
        assert_eq!(r.properties["location"].f1, 1.0);
        assert_eq!((r.properties["point in time"].fp, r.properties["point in time"].fn_), (1, 1));
        assert_eq!(r.properties["country"], Prf::default());
        assert!(r.to_tsv().starts_with("method\tmetric\ttp\tfp\tfn\tprecision\trecall\tf1\nqa\ttype\t1\t0\t0\t1.0000"));
    }

    #[test]
    fn best_prediction_per_sentence() {
        let mut low = node("a b", 1);
        low.score = 0.2;
        let mut high = node("a b", 2);
        high.score = 0.9;
        let other = node("c d", 3);
        let picked = best_per_sentence(&[low.clone(), other.clone(), high.clone()]);
        assert_eq!(picked, vec![high.clone(), other]);
        let mut tie = high.clone();
        tie.resolved_qid = Qid::new(3);
        assert_eq!(best_per_sentence(&[high.clone(), tie])[0], high);
    }

    #[test]
    fn permutation_symmetric() {
        let g = graph();
        let golds = [gold("a b", 2), gold("c d", 3), gold("e f", 1)];
        let mut preds = vec![node("a b", 2), node("c d", 2), node("g h", 1)];
        let r1 = evaluate(&preds, &golds, &opts(&g, false)).unwrap();
        preds.reverse();
        assert_eq!(evaluate(&preds, &golds, &opts(&g, false)).unwrap(), r1);
    }
}
