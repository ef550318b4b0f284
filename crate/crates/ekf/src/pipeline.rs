//! Pipeline stages. Each stage reads earlier artifacts from the output
//! directory and writes its own; reruns on unchanged inputs are
//! byte-identical.
//!
//! Per-page and per-person work runs on the current rayon pool.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ekf_core::alignment::{cluster_person, QuoteCluster};
use ekf_core::embedding::{EmbeddingProvider, HashProvider};
use ekf_core::eval::{best_per_sentence, evaluate, generate_testset, EvalOptions, GoldRecord, DEFAULT_ROLE_PROPERTIES, EVAL_HEADER};
use ekf_core::kg::build_kg;
use ekf_core::ntriples::serialize_ntriples;
use ekf_core::quote::{extract_mentions, Mention, PersonId};
use ekf_core::resolver::{resolve_direct_baseline, EventMention, Resolver, SubEventNode};
use ekf_core::stats::compute_stats;
use ekf_core::wiki::{parse_wikitext, PageKind, WikiPage};
use rayon::prelude::*;

use crate::config::{PipelineConfig, ProviderConfig};
use crate::error::{EkfError, Result};
use crate::files;
use crate::records::{load_corpus, read_artifact, read_jsonl, write_bytes, write_jsonl, PageRecord};

pub const PAGES: &str = "pages.jsonl";
pub const MENTIONS: &str = "mentions.jsonl";
pub const PERSONS: &str = "persons.jsonl";
pub const CLUSTERS: &str = "clusters.jsonl";
pub const EVENT_MENTIONS: &str = "event_mentions.jsonl";
pub const SUBEVENTS: &str = "subevents.jsonl";
pub const KG: &str = "kg.nt";
pub const STATS: &str = "stats.tsv";
pub const TESTSET: &str = "testset.jsonl";
pub const EVAL: &str = "eval.tsv";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Quotes,
    Align,
    Resolve,
    Emit,
    Stats,
    Eval,
}

impl Stage {
    pub const ALL: [Stage; 7] =
        [Stage::Ingest, Stage::Quotes, Stage::Align, Stage::Resolve, Stage::Emit, Stage::Stats, Stage::Eval];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Quotes => "quotes",
            Stage::Align => "align",
            Stage::Resolve => "resolve",
            Stage::Emit => "emit",
            Stage::Stats => "stats",
            Stage::Eval => "eval",
        }
    }
}

/// Runs one stage and returns its report for standard output.
pub fn run_stage(stage: Stage, cfg: &PipelineConfig) -> Result<String> {
    fs::create_dir_all(&cfg.output_dir).map_err(|e| EkfError::io(&cfg.output_dir, e))?;
    match stage {
        Stage::Ingest => ingest(cfg),
        Stage::Quotes => quotes(cfg),
        Stage::Align => align(cfg),
        Stage::Resolve => resolve(cfg),
        Stage::Emit => emit(cfg),
        Stage::Stats => stats(cfg),
        Stage::Eval => eval(cfg),
    }
}

pub fn ingest(cfg: &PipelineConfig) -> Result<String> {
    let raw = load_corpus(&cfg.corpus)?;
    let records: Vec<PageRecord> = raw
        .par_iter()
        .map(|r| PageRecord {
            person: (r.page_kind == PageKind::Person).then(|| r.person_key.clone().unwrap_or_else(|| r.title.clone())),
            page: parse_wikitext(r),
        })
        .collect();
    write_jsonl(&cfg.artifact(PAGES), &records)?;
    Ok(format!("ingest: {} pages", records.len()))
}

fn read_pages(cfg: &PipelineConfig) -> Result<Vec<PageRecord>> {
    read_artifact(&cfg.artifact(PAGES), "ingest")
}

/// Person pages grouped by person key, each group ordered by language.
fn group_persons(pages: &[PageRecord]) -> Result<Vec<(PersonId, Vec<&WikiPage>)>> {
    let mut groups: BTreeMap<&str, BTreeMap<&str, &WikiPage>> = BTreeMap::new();
    for rec in pages {
        let Some(key) = rec.person.as_deref() else { continue };
        let by_lang = groups.entry(key).or_default();
        if by_lang.insert(rec.page.language.as_str(), &rec.page).is_some() {
            return Err(EkfError::Input {
                path: PAGES.into(),
                reason: format!("person {key:?} has two {} pages", rec.page.language),
            });
        }
    }
    groups
        .into_iter()
        .map(|(key, by_lang)| {
            let titles = by_lang.iter().map(|(l, p)| (l.to_string(), p.title.clone())).collect();
            Ok((PersonId::new(key, titles)?, by_lang.into_values().collect()))
        })
        .collect()
}

pub fn quotes(cfg: &PipelineConfig) -> Result<String> {
    let pages = read_pages(cfg)?;
    let stop = files::load_stoplist(cfg.stoplist.as_deref())?;
    let groups = group_persons(&pages)?;
    let mentions: Vec<Mention> = groups
        .par_iter()
        .flat_map_iter(|(person, pages)| pages.iter().flat_map(|p| extract_mentions(p, person, &stop)).collect::<Vec<_>>())
        .collect();
    let persons: Vec<&PersonId> = groups.iter().map(|(p, _)| p).collect();
    write_jsonl(&cfg.artifact(PERSONS), &persons)?;
    write_jsonl(&cfg.artifact(MENTIONS), &mentions)?;
    Ok(format!("quotes: {} persons, {} mentions", persons.len(), mentions.len()))
}

fn provider(cfg: &PipelineConfig) -> Result<Box<dyn EmbeddingProvider + Sync>> {
    Ok(match &cfg.provider {
        ProviderConfig::Hash { dim, seed } => Box::new(HashProvider::with_seed(*dim, *seed)?),
        ProviderConfig::File { vectors, index } => Box::new(files::file_provider(vectors, index)?),
    })
}

pub fn align(cfg: &PipelineConfig) -> Result<String> {
    let mentions: Vec<Mention> = read_artifact(&cfg.artifact(MENTIONS), "quotes")?;
    let provider = provider(cfg)?;
    let mut by_person: BTreeMap<&str, Vec<Mention>> = BTreeMap::new();
    for m in &mentions {
        by_person.entry(m.person.canonical_name.as_str()).or_default().push(m.clone());
    }
    let per_person = by_person
        .par_iter()
        .map(|(_, ms)| cluster_person(ms, provider.as_ref(), &cfg.alignment))
        .collect::<Result<Vec<_>, _>>()?;
    let clusters: Vec<QuoteCluster> = per_person.into_iter().flatten().collect();
    write_jsonl(&cfg.artifact(CLUSTERS), &clusters)?;
    let multi = clusters.iter().filter(|c| c.members.len() > 1).count();
    Ok(format!("align: {} quotes from {} mentions ({multi} cross-mention clusters)", clusters.len(), mentions.len()))
}

fn event_pages(pages: &[PageRecord]) -> Vec<WikiPage> {
    pages.iter().filter(|r| r.page.kind == PageKind::Event).map(|r| r.page.clone()).collect()
}

fn load_event_mentions(cfg: &PipelineConfig) -> Result<Vec<EventMention>> {
    if let Some(path) = &cfg.event_mentions {
        let ms: Vec<EventMention> = read_jsonl(path)?;
        for (i, m) in ms.iter().enumerate() {
            m.validate().map_err(|e| EkfError::Record { path: path.clone(), line: i + 1, reason: e.to_string() })?;
        }
        return Ok(ms);
    }
    let Some(triggers) = &cfg.triggers else {
        return Err(EkfError::config("triggers", "resolve needs `event_mentions` or `triggers`"));
    };
    let lexicon = files::load_triggers(triggers)?;
    let pages = event_pages(&read_pages(cfg)?);
    Ok(pages.par_iter().flat_map_iter(|p| lexicon.extract(p)).collect())
}

pub fn resolve(cfg: &PipelineConfig) -> Result<String> {
    let graph = files::load_taxonomy(&cfg.taxonomy)?;
    let mapping = files::load_mapping(&cfg.mapping, &graph)?;
    let templates = files::load_templates(cfg.templates.as_deref())?;
    let scorer = files::load_stub_scorer(templates.clone(), cfg.morph_prefixes.as_deref())?;
    let mentions = load_event_mentions(cfg)?;
    write_jsonl(&cfg.artifact(EVENT_MENTIONS), &mentions)?;
    let resolver = Resolver::new(&graph, &mapping, &templates, cfg.resolver);
    let nodes = mentions.par_iter().map(|m| resolver.resolve(m, &scorer)).collect::<Result<Vec<_>, _>>()?;
    write_jsonl(&cfg.artifact(SUBEVENTS), &nodes)?;
    Ok(format!("resolve: {} sub-events", nodes.len()))
}

pub fn emit(cfg: &PipelineConfig) -> Result<String> {
    let clusters: Vec<QuoteCluster> = read_artifact(&cfg.artifact(CLUSTERS), "align")?;
    let mentions: Vec<Mention> = read_artifact(&cfg.artifact(MENTIONS), "quotes")?;
    let persons: Vec<PersonId> = read_artifact(&cfg.artifact(PERSONS), "quotes")?;
    let sub_path = cfg.artifact(SUBEVENTS);
    let subevents: Vec<SubEventNode> = if sub_path.exists() { read_jsonl(&sub_path)? } else { Vec::new() };
    let kg = build_kg(&clusters, &mentions, &persons, &subevents)?;
    write_bytes(&cfg.artifact(KG), serialize_ntriples(&kg).as_bytes())?;
    Ok(format!("emit: {} triples", kg.len()))
}

pub fn stats(cfg: &PipelineConfig) -> Result<String> {
    let clusters: Vec<QuoteCluster> = read_artifact(&cfg.artifact(CLUSTERS), "align")?;
    let mentions: Vec<Mention> = read_artifact(&cfg.artifact(MENTIONS), "quotes")?;
    let tsv = compute_stats(&clusters, &mentions)?.to_tsv();
    write_bytes(&cfg.artifact(STATS), tsv.as_bytes())?;
    Ok(tsv.trim_end().to_string())
}

fn testset(cfg: &PipelineConfig, snapshot: &Path, graph: &ekf_core::ontology::ClassGraph) -> Result<Vec<GoldRecord>> {
    let snapshot = files::load_gold_snapshot(snapshot)?;
    let pages = event_pages(&read_pages(cfg)?);
    let mut gold = generate_testset(&pages, &snapshot, graph);
    if let Some(path) = &cfg.gold_records {
        gold.extend(read_jsonl::<GoldRecord>(path)?);
    }
    Ok(gold)
}

/// Writes the gold test set and scores the QA resolver and the direct
/// baseline against it.
pub fn eval(cfg: &PipelineConfig) -> Result<String> {
    let Some(snapshot) = &cfg.gold_snapshot else {
        return Err(EkfError::config("gold_snapshot", "eval needs a gold snapshot"));
    };
    let graph = files::load_taxonomy(&cfg.taxonomy)?;
    let mapping = files::load_mapping(&cfg.mapping, &graph)?;
    let gold = testset(cfg, snapshot, &graph)?;
    write_jsonl(&cfg.artifact(TESTSET), &gold)?;

    let qa: Vec<SubEventNode> = read_artifact(&cfg.artifact(SUBEVENTS), "resolve")?;
    let mentions: Vec<EventMention> = read_artifact(&cfg.artifact(EVENT_MENTIONS), "resolve")?;
    let baseline = mentions
        .iter()
        .map(|m| resolve_direct_baseline(m, &mapping, &graph))
        .collect::<Result<Vec<_>, _>>()?;

    let opts = EvalOptions { strict: cfg.strict_eval, graph: &graph, role_properties: DEFAULT_ROLE_PROPERTIES };
    let mut tsv = format!("{EVAL_HEADER}\n");
    let mut summary = format!("eval: {} gold records", gold.len());
    for preds in [qa, baseline] {
        let report = evaluate(&best_per_sentence(&preds), &gold, &opts)?;
        tsv.push_str(&report.tsv_rows());
        summary.push('\n');
        summary.push_str(&report.summary());
    }
    write_bytes(&cfg.artifact(EVAL), tsv.as_bytes())?;
    Ok(summary)
}
