//! Acceptance checks, one PASS/FAIL line per criterion. Exits nonzero when
//! any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{fixture_config, fixtures, read, run_stages, BUILD_STAGES};
use ekf::ekf_core::alignment::{cluster_person, AlignmentConfig, QuoteCluster};
use ekf::ekf_core::embedding::{cosine, EmbeddingProvider, EmbeddingVector, StoredVectors};
use ekf::ekf_core::eval::{evaluate, generate_testset, EvalOptions, GoldRecord, Prf, DEFAULT_ROLE_PROPERTIES};
use ekf::ekf_core::kg::{build_kg, Iri, Literal, Term, Triple, TripleSet};
use ekf::ekf_core::ntriples::{parse_ntriples, serialize_ntriples};
use ekf::ekf_core::ontology::{ClassGraph, Qid, TypeMapping, DEFAULT_MAX_DEPTH};
use ekf::ekf_core::quote::{Mention, PersonId};
use ekf::ekf_core::resolver::{EventMention, QuestionTemplates, ResolutionMethod, Resolver, ResolverConfig, SubEventNode};
use ekf::ekf_core::stats::STATS_HEADER;
use ekf::ekf_core::wiki::WikiPage;
use ekf::files::{load_gold_snapshot, load_mapping, load_taxonomy};
use ekf::pipeline::{CLUSTERS, KG, MENTIONS, PAGES, PERSONS, STATS};
use ekf::records::{read_jsonl, PageRecord};
use ekf::Stage;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

const PROTEST_SENTENCE: &str = "As of 20 January 2022, at least 1,488 protesters and bystanders, have been shot and killed by police forces and at least 8,702 people detained.";
const CONVENTION_PAGE: &str = "2016 Republican Party vice presidential candidate selection";

fn fixture_graph() -> (ClassGraph, TypeMapping) {
    let graph = load_taxonomy(&fixtures().join("taxonomy.tsv")).unwrap();
    let mapping = load_mapping(&fixtures().join("mapping.tsv"), &graph).unwrap();
    (graph, mapping)
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let took = start.elapsed();
    if took < limit {
        Ok(took)
    } else {
        Err(format!("took {took:?}, limit {limit:?}"))
    }
}

fn ontology_facts() -> Check {
    let start = Instant::now();
    let (graph, _) = fixture_graph();
    for (root, member) in [(4, 2717573), (2135540, 1071447)] {
        let closure = graph.subclass_closure(Qid::new(root), DEFAULT_MAX_DEPTH).map_err(|e| e.to_string())?;
        ensure!(closure.contains(&Qid::new(member)), "closure of Q{root} lacks Q{member}: {closure:?}");
    }
    let took = within(Duration::from_secs(1), start)?;
    Ok(format!("Q4 covers Q2717573, Q2135540 covers Q1071447 in {took:?}"))
}

struct Instance {
    mentions: Vec<Mention>,
    store: StoredVectors,
    cfg: AlignmentConfig,
}

fn random_instance(rng: &mut ChaCha8Rng, threshold: f64) -> Instance {
    let n = rng.random_range(1..=8);
    let dim = rng.random_range(2..=8);
    let person = PersonId::single("en", "P").unwrap();
    let mut seen = BTreeSet::new();
    let mut mentions = Vec::new();
    while mentions.len() < n {
        let lang = ["de", "en", "hr"][rng.random_range(0..3)];
        let text = format!("quote {}", rng.random_range(0..n));
        if !seen.insert((lang, text.clone())) {
            continue;
        }
        mentions.push(Mention {
            mention_id: Mention::compute_id("P", lang, &text, &[]),
            person: person.clone(),
            language: lang.to_string(),
            text,
            contexts: vec![],
            linked_entities: vec![],
            section_path: vec![],
        });
    }
    let vectors: Vec<(String, Vec<f32>)> = (0..n)
        .map(|k| {
            let raw: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-9);
            (format!("quote {k}"), raw.iter().map(|v| (v / norm) as f32).collect())
        })
        .collect();
    let store = StoredVectors::from_texts(dim, vectors.iter().map(|(t, v)| (t.as_str(), &v[..]))).unwrap();
    let cfg = AlignmentConfig::new(threshold, rng.random_range(1..=3)).unwrap();
    Instance { mentions, store, cfg }
}

/// Literal simulation of the greedy rule: neighbourhoods by comparing every
/// pair, then repeatedly scanning for the largest unvisited candidate.
fn oracle_partition(inst: &Instance) -> Vec<(String, Vec<String>)> {
    let mut order: Vec<&Mention> = inst.mentions.iter().collect();
    order.sort_by(|a, b| (&a.language, &a.text, &a.mention_id).cmp(&(&b.language, &b.text, &b.mention_id)));
    let n = order.len();
    let vecs: Vec<EmbeddingVector> = order.iter().map(|m| inst.store.embed(&m.text).unwrap()).collect();
    let hood: Vec<Vec<usize>> =
        (0..n).map(|i| (0..n).filter(|&j| cosine(&vecs[i], &vecs[j]).unwrap() >= inst.cfg.threshold).collect()).collect();

    let mut visited = vec![false; n];
    let mut assigned = vec![false; n];
    let mut out = Vec::new();
    loop {
        let mut pick: Option<usize> = None;
        for i in 0..n {
            if visited[i] || hood[i].len() < inst.cfg.min_community_size {
                continue;
            }
            if pick.is_none_or(|p| hood[i].len() > hood[p].len()) {
                pick = Some(i);
            }
        }
        let Some(seed) = pick else { break };
        visited[seed] = true;
        if assigned[seed] {
            continue;
        }
        let members: Vec<usize> = hood[seed].iter().copied().filter(|&j| !assigned[j]).collect();
        for &j in &members {
            assigned[j] = true;
        }
        out.push((seed, members));
    }
    for (i, _) in assigned.iter().enumerate().filter(|(_, a)| !**a) {
        out.push((i, vec![i]));
    }
    out.into_iter()
        .map(|(s, ms)| (order[s].mention_id.clone(), ms.into_iter().map(|j| order[j].mention_id.clone()).collect()))
        .collect()
}

const TRIALS_PER_THRESHOLD: usize = 200;
const THRESHOLDS: [f64; 3] = [0.5, 0.7, 0.9];

fn random_instances() -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    THRESHOLDS
        .iter()
        .flat_map(|&t| (0..TRIALS_PER_THRESHOLD).map(move |_| t))
        .map(|t| random_instance(&mut rng, t))
        .collect()
}

fn clustering_oracle() -> Check {
    let start = Instant::now();
    let instances = random_instances();
    let mut merged = 0;
    for (k, inst) in instances.iter().enumerate() {
        let got = cluster_person(&inst.mentions, &inst.store, &inst.cfg).map_err(|e| e.to_string())?;
        let got: Vec<(String, Vec<String>)> = got.into_iter().map(|c| (c.seed, c.members)).collect();
        let want = oracle_partition(inst);
        ensure!(got == want, "instance {k}: got {got:?}, oracle {want:?}");
        merged += got.iter().filter(|(_, m)| m.len() > 1).count();
    }
    let took = within(Duration::from_secs(30), start)?;
    Ok(format!("{} instances equal the oracle ({merged} multi-member clusters) in {took:?}", instances.len()))
}

fn check_invariants(inst: &Instance, clusters: &[QuoteCluster], rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mut seen = BTreeSet::new();
    for c in clusters {
        for id in &c.members {
            ensure!(seen.insert(id.clone()), "mention {id} in two clusters");
        }
    }
    let all: BTreeSet<String> = inst.mentions.iter().map(|m| m.mention_id.clone()).collect();
    ensure!(seen == all, "clusters do not cover the input");

    let text: BTreeMap<&str, &str> = inst.mentions.iter().map(|m| (m.mention_id.as_str(), m.text.as_str())).collect();
    for c in clusters {
        let seed = inst.store.embed(text[c.seed.as_str()]).unwrap();
        for id in &c.members {
            let sim = cosine(&inst.store.embed(text[id.as_str()]).unwrap(), &seed).unwrap();
            ensure!(sim >= inst.cfg.threshold, "member {id} at cosine {sim} from its seed");
        }
    }

    let mut shuffled = inst.mentions.clone();
    shuffled.shuffle(rng);
    let again = cluster_person(&shuffled, &inst.store, &inst.cfg).map_err(|e| e.to_string())?;
    ensure!(again == clusters, "permuted input changed the clusters");
    Ok(())
}

fn clustering_invariants() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let instances = random_instances();
    for (k, inst) in instances.iter().enumerate() {
        let clusters = cluster_person(&inst.mentions, &inst.store, &inst.cfg).map_err(|e| e.to_string())?;
        check_invariants(inst, &clusters, &mut rng).map_err(|e| format!("instance {k}: {e}"))?;
    }
    Ok(format!("partition, seed radius and permutation hold on {} instances", instances.len()))
}

fn cosine_properties() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for dim in [8, 64, 384] {
        for _ in 0..1000 {
            let mut draw = || EmbeddingVector::new((0..dim).map(|_| rng.random_range(-1.0f32..1.0)).collect()).unwrap();
            let (a, b) = (draw(), draw());
            let k = 10f32.powf(rng.random_range(-3.0f32..3.0));
            let scaled = EmbeddingVector::new(a.values().iter().map(|v| v * k).collect()).unwrap();
            let ab = cosine(&a, &b).unwrap();
            ensure!(ab == cosine(&b, &a).unwrap(), "asymmetric at dim {dim}");
            let scale_err = (cosine(&scaled, &b).unwrap() - ab).abs();
            let self_err = (cosine(&a, &a).unwrap() - 1.0).abs();
            ensure!(scale_err <= 1e-6, "scale error {scale_err} at dim {dim}, factor {k}");
            ensure!(self_err <= 1e-6, "self similarity error {self_err} at dim {dim}");
            worst = worst.max(scale_err).max(self_err);
        }
    }
    Ok(format!("3000 pairs, worst deviation {worst:.1e}"))
}

fn random_table_argmax(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = rng.random_range(2..=8);
    let mut tsv = String::from("Q1\tc0\t\n");
    for i in 1..n {
        let parent = rng.random_range(0..i) + 1;
        tsv.push_str(&format!("Q{}\tc{i}\tQ{parent}\n", i + 1));
    }
    let graph = ClassGraph::from_tsv(&tsv).unwrap();
    let mapping = TypeMapping::from_tsv("T\tQ1\n", &graph).unwrap();
    let templates = QuestionTemplates::parse("{label}").unwrap();
    let cfg = ResolverConfig { score_floor: 0.0, ..ResolverConfig::default() };
    let resolver = Resolver::new(&graph, &mapping, &templates, cfg);
    let table: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0u8..=10)) / 10.0).collect();
    let factor = rng.random_range(0.01..=1.0);
    let score = |q: &str| table[q[1..].parse::<usize>().unwrap()];
    let mention = EventMention::new("x happened", "T", "x", "p", 0).unwrap();
    let a = resolver.resolve(&mention, &|q: &str, _: &str| score(q)).map_err(|e| e.to_string())?;
    let b = resolver.resolve(&mention, &|q: &str, _: &str| score(q) * factor).map_err(|e| e.to_string())?;
    ensure!(a.resolved_qid == b.resolved_qid, "scaling by {factor} moved the argmax for {table:?}");

    let levels = graph.closure_levels(Qid::new(1), DEFAULT_MAX_DEPTH).unwrap();
    let best = levels
        .iter()
        .map(|&(q, _)| q)
        .fold(None::<Qid>, |acc, q| match acc {
            Some(b) if table[b.number() as usize - 1] >= table[q.number() as usize - 1] => Some(b),
            _ => Some(q),
        })
        .unwrap();
    ensure!(a.resolved_qid == best, "picked {} but the table maximum is {best} for {table:?}", a.resolved_qid);
    Ok(())
}

fn resolver_contract() -> Check {
    let (graph, mapping) = fixture_graph();
    let templates = QuestionTemplates::default();
    let resolver = Resolver::new(&graph, &mapping, &templates, ResolverConfig::default());
    let arrest = EventMention::new(PROTEST_SENTENCE, "Arrest", "detained", "2021–2022 Myanmar protests", 1).unwrap();
    let forced = |q: &str, _: &str| if q.contains("detention") { 1.0 } else { 0.0 };
    let node = resolver.resolve(&arrest, &forced).map_err(|e| e.to_string())?;
    ensure!(node.resolved_qid == Qid::new(1071447), "forced scorer gave {}", node.resolved_qid);
    let zero = |_: &str, _: &str| 0.0;
    for (m, base) in [(&arrest, 2135540), (&EventMention::new(PROTEST_SENTENCE, "Die", "killed", "p", 1).unwrap(), 4)] {
        let node = resolver.resolve(m, &zero).map_err(|e| e.to_string())?;
        ensure!(node.resolved_qid == Qid::new(base), "zero scorer gave {} for {}", node.resolved_qid, m.event_type);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in 0..100 {
        random_table_argmax(&mut rng).map_err(|e| format!("table {k}: {e}"))?;
    }
    Ok("forced scorer picks Q1071447, zero scorer keeps the base class, 100 scaled tables agree".into())
}

const HAND_COUNT: &str = "Language\tPersons\tQuotes\tMentions\tMentions with Contexts
de\t3\t6\t6\t3
en\t3\t8\t8\t7
hr\t1\t2\t2\t0
All Languages\t3\t12\t16\t10
";

fn end_to_end() -> Check {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let cfg = fixture_config(first.path());
    run_stages(&cfg, &BUILD_STAGES);
    let took = within(Duration::from_secs(10), start)?;
    let cfg2 = fixture_config(second.path());
    run_stages(&cfg2, &BUILD_STAGES);

    let pages: Vec<PageRecord> = read_jsonl(&cfg.artifact(PAGES)).unwrap();
    let mentions: Vec<Mention> = read_jsonl(&cfg.artifact(MENTIONS)).unwrap();
    let persons: Vec<PersonId> = read_jsonl(&cfg.artifact(PERSONS)).unwrap();
    let langs: BTreeSet<&str> = mentions.iter().map(|m| m.language.as_str()).collect();
    let events = pages.iter().filter(|p| p.person.is_none()).count();
    ensure!(
        persons.len() >= 3 && langs.len() >= 3 && mentions.len() >= 12 && events >= 2,
        "fixture too small: {} persons, {} languages, {} mentions, {events} event pages",
        persons.len(),
        langs.len(),
        mentions.len()
    );

    let golden = fixtures().join("golden");
    for name in [KG, STATS] {
        ensure!(read(cfg.artifact(name)) == read(golden.join(name)), "{name} differs from the golden copy");
        ensure!(read(cfg.artifact(name)) == read(cfg2.artifact(name)), "{name} differs between runs");
    }
    let stats = String::from_utf8(read(cfg.artifact(STATS))).unwrap();
    ensure!(stats.lines().next() == Some(STATS_HEADER.join("\t").as_str()), "bad header");
    ensure!(STATS_HEADER == ["Language", "Persons", "Quotes", "Mentions", "Mentions with Contexts"], "header drift");
    ensure!(stats == HAND_COUNT, "stats differ from the hand count:\n{stats}");
    Ok(format!("{} triples, stats match the hand count, runs identical, {took:?}", read(cfg.artifact(KG)).split(|&b| b == b'\n').filter(|l| !l.is_empty()).count()))
}

fn node(sentence: &str, qid: u64, graph: &ClassGraph) -> SubEventNode {
    SubEventNode {
        event_mention: EventMention::new(sentence, "T", "x", "page", 0).unwrap(),
        resolved_qid: Qid::new(qid),
        resolved_label: graph.get(Qid::new(qid)).unwrap().label.clone(),
        score: 1.0,
        candidates_considered: 1,
        method: ResolutionMethod::Qa,
    }
}

fn gold(sentence: &str, qid: u64) -> GoldRecord {
    GoldRecord {
        page: "page".into(),
        paragraph: 0,
        sentence: sentence.into(),
        linked_event_qid: Qid::new(1),
        gold_type_qid: Qid::new(qid),
        gold_properties: BTreeMap::new(),
    }
}

fn close(p: &Prf, tp: usize, fp: usize, fn_: usize, prf: [f64; 3]) -> bool {
    (p.tp, p.fp, p.fn_) == (tp, fp, fn_)
        && [p.precision, p.recall, p.f1].iter().zip(prf).all(|(a, b)| (a - b).abs() < 1e-12)
}

fn eval_harness() -> Check {
    let (graph, _) = fixture_graph();
    // a x: right class; b x: wrong class; c x: subclass of the gold class;
    // e x: no gold; d x: never predicted
    let preds = [node("a x", 1071447, &graph), node("b x", 4, &graph), node("c x", 1261499, &graph), node("e x", 4, &graph)];
    let gold_set = [gold("a x", 1071447), gold("b x", 2717573), gold("c x", 9000000110), gold("d x", 9000000101)];
    let strict = EvalOptions { strict: true, graph: &graph, role_properties: DEFAULT_ROLE_PROPERTIES };
    let lenient = EvalOptions { strict: false, ..strict };
    let s = evaluate(&preds, &gold_set, &strict).map_err(|e| e.to_string())?;
    let l = evaluate(&preds, &gold_set, &lenient).map_err(|e| e.to_string())?;
    ensure!(close(&s.types, 1, 3, 3, [0.25, 0.25, 0.25]), "strict: {:?}", s.types);
    ensure!(close(&l.types, 2, 2, 2, [0.5, 0.5, 0.5]), "lenient: {:?}", l.types);
    let empty = evaluate(&[], &[], &strict).map_err(|e| e.to_string())?;
    ensure!(close(&empty.types, 0, 0, 0, [0.0; 3]), "empty: {:?}", empty.types);
    let none = evaluate(&[], &gold_set, &strict).map_err(|e| e.to_string())?;
    ensure!(close(&none.types, 0, 0, 4, [0.0; 3]), "no predictions: {:?}", none.types);

    let pages = convention_pages();
    ensure!(pages.len() == 1, "fixture has {} pages titled {CONVENTION_PAGE:?}", pages.len());
    let snapshot = load_gold_snapshot(&fixtures().join("gold.tsv")).unwrap();
    let records = generate_testset(&pages, &snapshot, &graph);
    ensure!(records.len() == 1, "convention page gave {} gold records", records.len());
    ensure!(records[0].gold_type_qid == Qid::new(9000000121), "wrong gold type {}", records[0].gold_type_qid);
    Ok("strict P/R/F1 = 0.25, lenient 0.5, 0/0 gives 0, convention page yields 1 record".into())
}

fn convention_pages() -> Vec<WikiPage> {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture_config(dir.path());
    run_stages(&cfg, &[Stage::Ingest]);
    read_jsonl::<PageRecord>(&cfg.artifact(PAGES))
        .unwrap()
        .into_iter()
        .map(|r| r.page)
        .filter(|p| p.title == CONVENTION_PAGE)
        .collect()
}

fn random_term(rng: &mut ChaCha8Rng, iris: &[Iri]) -> Term {
    const ALPHABET: &[char] = &['a', 'Z', '7', ' ', '"', '\\', '\n', '\r', '\t', '\u{7}', '\u{7f}', 'é', 'ž', '中', '\u{1F600}', '<', '>', '@', '^', '.'];
    let lexical: String = (0..rng.random_range(0..12)).map(|_| ALPHABET[rng.random_range(0..ALPHABET.len())]).collect();
    match rng.random_range(0..4) {
        0 => Term::Iri(iris[rng.random_range(0..iris.len())].clone()),
        1 => Literal::plain(lexical).into(),
        2 => Literal::lang(lexical, ["en", "de-AT", "hr", "zh-Hant-TW"][rng.random_range(0..4)]).unwrap().into(),
        _ => Literal::typed(lexical, iris[rng.random_range(0..iris.len())].clone()).into(),
    }
}

fn round_trip() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture_config(dir.path());
    run_stages(&cfg, &[Stage::Ingest, Stage::Quotes, Stage::Align]);
    let clusters: Vec<QuoteCluster> = read_jsonl(&cfg.artifact(CLUSTERS)).unwrap();
    let mentions: Vec<Mention> = read_jsonl(&cfg.artifact(MENTIONS)).unwrap();
    let persons: Vec<PersonId> = read_jsonl(&cfg.artifact(PERSONS)).unwrap();
    let kg = build_kg(&clusters, &mentions, &persons, &[]).map_err(|e| e.to_string())?;
    let parsed = parse_ntriples(&serialize_ntriples(&kg)).map_err(|e| e.to_string())?;
    ensure!(parsed == kg, "fixture KG changed in a round trip");

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let iris: Vec<Iri> = ["http://ex.org/a", "https://ex.org/ü/b#c", "urn:x:1", "http://ex.org/%20?q=1"]
        .iter()
        .map(|s| Iri::new(*s).unwrap())
        .collect();
    for k in 0..100 {
        let set: TripleSet = (0..rng.random_range(0..15))
            .map(|_| {
                let s = iris[rng.random_range(0..iris.len())].clone();
                let p = iris[rng.random_range(0..iris.len())].clone();
                Triple::new(s, p, random_term(&mut rng, &iris))
            })
            .collect();
        let text = serialize_ntriples(&set);
        let back = parse_ntriples(&text).map_err(|e| format!("set {k}: {e}\n{text}"))?;
        ensure!(back == set, "set {k} changed in a round trip:\n{text}");
    }
    Ok(format!("fixture KG ({} triples) and 100 random sets round-trip", kg.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("ontology facts", ontology_facts),
        ("clustering oracle equivalence", clustering_oracle),
        ("clustering invariants", clustering_invariants),
        ("cosine properties", cosine_properties),
        ("resolver contract", resolver_contract),
        ("end-to-end golden run", end_to_end),
        ("eval harness", eval_harness),
        ("serialization round trip", round_trip),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {}. {name}: {detail}", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why}", n + 1);
            }
        }
    }
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
