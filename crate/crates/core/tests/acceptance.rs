//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any fails.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scholarkg::eval::{check_gold_universe, evaluate, fmeasure, load_memberships, GoldStandard};
use scholarkg::ingest::{
    load_background_counts, load_embeddings, load_gold_standard, load_label_list, load_lexical_taxonomy,
    load_sentence_annotations, load_topic_ontology, ClassifierParams, EmbeddingTable, PipelineConfig, TopicOntology,
};
use scholarkg::kg::{enhance_with_supertopics, parse_ntriples};
use scholarkg::lexicon::default_stopwords;
use scholarkg::pipeline::Pipeline;
use scholarkg::refine::{genericity_filter, split_entity, AcronymMap, Refiner};
use scholarkg::relation::{build_relation_map, cluster_relations, cluster_representative, select_centroid_verb, LabelCounts};
use scholarkg::select::{compose_valid, train_consistency_classifier, validate_invalid, Gate, GateVerdict};
use scholarkg::{normalize_label, Provenance, SupportedTriple, TripleKey};

type Outcome = Result<String, String>;
type Check<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, started: Instant) -> Result<(), String> {
    let took = started.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn corpus_config() -> Result<PipelineConfig, String> {
    PipelineConfig::load(fixtures().join("corpus/pipeline.conf")).map_err(|e| e.to_string())
}

fn read_triples(path: &Path) -> Result<Vec<SupportedTriple>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| format!("{}: {e}", path.display())))
        .collect()
}

fn keys(triples: &[SupportedTriple]) -> BTreeSet<TripleKey> {
    triples.iter().map(SupportedTriple::key).collect()
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

// ------------------------------------------------------------------ shared run

/// Two full pipeline runs on the fixture corpus, in separate directories.
struct CorpusRuns {
    _tmp: tempfile::TempDir,
    cfg: PipelineConfig,
    dirs: [PathBuf; 2],
}

impl CorpusRuns {
    fn start() -> Result<Self, String> {
        let tmp = tempfile::tempdir().map_err(err)?;
        let cfg = corpus_config()?;
        let dirs = [tmp.path().join("a"), tmp.path().join("b")];
        for d in &dirs {
            let mut c = cfg.clone();
            c.output_dir = d.clone();
            Pipeline::new(c).run().map_err(err)?;
        }
        Ok(CorpusRuns { _tmp: tmp, cfg, dirs })
    }

    fn checkpoint(&self, name: &str) -> PathBuf {
        self.dirs[0].join("checkpoints").join(name)
    }
}

// ------------------------------------------------------------------ 1

const PUBLISHED: [(&str, f64, f64, f64); 8] = [
    ("EF", 0.8429, 0.5443, 0.6615),
    ("OpenIE", 0.7843, 0.1288, 0.2213),
    ("PoS", 0.8000, 0.0773, 0.1410),
    ("PoS+Cons", 0.8471, 0.2319, 0.3641),
    ("EF+OpenIE", 0.8279, 0.6506, 0.7286),
    ("EF+PoS+Cons", 0.8349, 0.7166, 0.7712),
    ("OpenIE+PoS+Cons", 0.8145, 0.3253, 0.4649),
    ("OpenIE+EF+PoS+Cons", 0.7871, 0.8019, 0.8117),
];

fn fmeasure_table() -> Outcome {
    let t0 = Instant::now();
    for (name, p, r, printed) in &PUBLISHED[..7] {
        let f = fmeasure(*p, *r);
        ensure((f - printed).abs() <= 5e-4, || format!("{name}: computed {f:.4}, printed {printed}"))?;
    }
    let (name, p, r, printed) = PUBLISHED[7];
    let f = fmeasure(p, r);
    ensure((f - 0.7944).abs() <= 5e-4, || format!("{name}: computed {f:.4}, expected 0.7944"))?;
    ensure((f - printed).abs() > 5e-4, || format!("{name}: printed {printed} unexpectedly consistent"))?;
    within(Duration::from_secs(1), t0)?;
    Ok(format!("7/7 rows within 0.0005; last row computes {f:.4}, printed {printed} is inconsistent"))
}

// ------------------------------------------------------------------ 2

fn gold_universe() -> Outcome {
    let dir = fixtures();
    let gold = GoldStandard::new(&load_gold_standard(dir.join("gold_818.tsv")).map_err(err)?).map_err(err)?;
    let m = load_memberships(&dir.join("memberships_818.tsv")).map_err(err)?;
    let s = check_gold_universe(&gold, &m).map_err(err)?;
    ensure(s.unique == 818, || format!("{} unique triples", s.unique))?;
    ensure(s.memberships == 885, || format!("{} memberships", s.memberships))?;
    let expected: BTreeMap<String, usize> = [("EF", 401), ("OIE", 102), ("POS", 60), ("CONS", 110), ("DISCARDED", 212)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    ensure(s.per_method == expected, || format!("sizes {:?}", s.per_method))?;
    Ok(format!("818 unique triples, 885 memberships, {} annotated true", gold.true_count()))
}

// ------------------------------------------------------------------ 3

fn brute_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Mean silhouette over every label, singletons scoring 0.
fn brute_silhouette(clusters: &[Vec<String>], vec_of: &dyn Fn(&str) -> Vec<f64>) -> f64 {
    let d = |a: &str, b: &str| 1.0 - brute_cosine(&vec_of(a), &vec_of(b));
    let mut total = 0.0;
    let mut n = 0;
    for (ci, c) in clusters.iter().enumerate() {
        for x in c {
            n += 1;
            if c.len() < 2 {
                continue;
            }
            let a = c.iter().filter(|y| *y != x).map(|y| d(x, y)).sum::<f64>() / (c.len() - 1) as f64;
            let b = clusters
                .iter()
                .enumerate()
                .filter(|(cj, _)| *cj != ci)
                .map(|(_, o)| o.iter().map(|y| d(x, y)).sum::<f64>() / o.len() as f64)
                .fold(f64::INFINITY, f64::min);
            let m = a.max(b);
            total += if m == 0.0 { 0.0 } else { (b - a) / m };
        }
    }
    total / n as f64
}

fn as_sets(clusters: &[Vec<String>]) -> BTreeSet<BTreeSet<String>> {
    clusters.iter().map(|c| c.iter().cloned().collect()).collect()
}

fn set_of(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn clustering() -> Outcome {
    let t0 = Instant::now();
    let target = corpus_config()?.silhouette_target;

    let rows: Vec<(&str, Vec<f64>)> = vec![
        ("uses", vec![1.0, 0.05, 0.0]),
        ("utilizes", vec![1.0, -0.04, 0.03]),
        ("employs", vec![1.0, 0.02, -0.05]),
        ("improves", vec![0.04, 1.0, 0.0]),
        ("enhances", vec![-0.03, 1.0, 0.05]),
        ("boosts", vec![0.02, 1.0, -0.04]),
        ("limits", vec![-1.0, -1.0, 0.2]),
    ];
    let table = EmbeddingTable::from_entries(3, rows.iter().map(|(l, v)| (l.to_string(), v.clone()))).map_err(err)?;
    let labels: Vec<String> = rows.iter().map(|(l, _)| l.to_string()).collect();
    let part = cluster_relations(&labels, &table, target);
    let planted: BTreeSet<BTreeSet<String>> = [
        set_of(&["uses", "utilizes", "employs"]),
        set_of(&["improves", "enhances", "boosts"]),
        set_of(&["limits"]),
    ]
    .into();
    ensure(as_sets(&part.clusters) == planted, || format!("synthetic partition {:?}", part.clusters))?;
    let lookup: HashMap<&str, Vec<f64>> = rows.iter().cloned().collect();
    let brute = brute_silhouette(&part.clusters, &|l| lookup[l].clone());
    let avg = part.average_silhouette.ok_or("no silhouette")?;
    ensure((avg - brute).abs() < 1e-9, || format!("silhouette {avg} vs brute force {brute}"))?;

    let cfg = corpus_config()?;
    let table = load_embeddings(&cfg.embeddings).map_err(err)?;
    let groups = [
        set_of(&["uses", "utilizes", "adopts", "employs"]),
        set_of(&["produces", "builds", "creates", "develops", "makes", "constructs"]),
        set_of(&["improves", "enhances", "boosts", "increases"]),
    ];
    let verbs: Vec<String> = groups.iter().flatten().cloned().collect();
    let fixture = cluster_relations(&verbs, &table, target);
    let produce = fixture
        .clusters
        .iter()
        .find(|c| c.iter().any(|v| v == "produces"))
        .ok_or("produces not clustered")?;
    let produce_set: BTreeSet<String> = produce.iter().cloned().collect();
    ensure(produce_set == groups[1], || format!("produce cluster {produce:?}"))?;
    let rep = cluster_representative(produce, &table);
    ensure(rep == Some("produces"), || format!("representative {rep:?}"))?;
    let map = build_relation_map(&fixture, &table, &BTreeMap::new(), &BTreeMap::new()).map_err(err)?;
    for v in &groups[1] {
        ensure(map.get(v) == Some("produces"), || format!("{v} maps to {:?}", map.get(v)))?;
    }
    within(Duration::from_secs(5), t0)?;
    Ok(format!(
        "planted 3-way partition recovered, silhouette {avg:.6} = brute force; fixture verbs form {} clusters, produce group -> produces",
        fixture.clusters.len()
    ))
}

// ------------------------------------------------------------------ 4

const VERB_NAMES: [&str; 26] = [
    "adopts", "builds", "creates", "develops", "employs", "enhances", "fits", "gets", "helps", "improves", "joins",
    "keeps", "limits", "makes", "needs", "obtains", "produces", "queries", "reduces", "supports", "tests", "uses",
    "validates", "weights", "xors", "yields",
];

/// Exhaustive scan: weighted mean of the embeddable labels, then the best
/// cosine with ties to the smallest label; most frequent label otherwise.
fn centroid_oracle(counts: &LabelCounts, vectors: &BTreeMap<String, Vec<f64>>, dim: usize) -> Option<(String, bool)> {
    let most_frequent = || {
        let max = counts.values().max()?;
        counts.iter().find(|(_, n)| *n == max).map(|(l, _)| (l.clone(), false))
    };
    let embedded: Vec<(&String, &Vec<f64>, f64)> = counts
        .iter()
        .filter_map(|(l, n)| vectors.get(l).map(|v| (l, v, *n as f64)))
        .collect();
    if embedded.is_empty() {
        return most_frequent();
    }
    let mut mean = vec![0.0; dim];
    let mut total = 0.0;
    for (_, v, w) in &embedded {
        for (m, x) in mean.iter_mut().zip(v.iter()) {
            *m += w * x;
        }
        total += w;
    }
    mean.iter_mut().for_each(|m| *m /= total);
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nm = norm(&mean);
    let mut scored: Vec<(&String, f64)> = Vec::new();
    for (l, v, _) in &embedded {
        let nv = norm(v);
        if nm == 0.0 || nv == 0.0 {
            continue;
        }
        let dot: f64 = v.iter().zip(&mean).map(|(a, b)| a * b).sum();
        scored.push((l, (dot / (nv * nm)).clamp(-1.0, 1.0)));
    }
    let best = scored.iter().map(|(_, c)| *c).fold(f64::NEG_INFINITY, f64::max);
    let winners: Vec<&String> = scored.iter().filter(|(_, c)| *c == best).map(|(l, _)| *l).collect();
    match winners.iter().min() {
        Some(l) => Some(((*l).clone(), winners.len() > 1)),
        None => most_frequent(),
    }
}

fn centroid() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let (mut ties, mut fallbacks) = (0, 0);
    for case in 0..1000 {
        let dim = rng.gen_range(1..=10);
        let n = rng.gen_range(1..=8);
        let mut names = VERB_NAMES.to_vec();
        names.shuffle(&mut rng);
        let mut counts = LabelCounts::new();
        let mut vectors: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        let mut pool: Vec<Vec<f64>> = Vec::new();
        for name in names.into_iter().take(n) {
            counts.insert(name.to_string(), rng.gen_range(1..=4));
            if rng.gen_bool(0.1) {
                continue;
            }
            let v = if !pool.is_empty() && rng.gen_bool(0.3) {
                pool[rng.gen_range(0..pool.len())].clone()
            } else {
                (0..dim).map(|_| rng.gen_range(-3i32..=3) as f64).collect()
            };
            pool.push(v.clone());
            vectors.insert(name.to_string(), v);
        }
        let table = EmbeddingTable::from_entries(dim, vectors.clone()).map_err(err)?;
        let expected = centroid_oracle(&counts, &vectors, dim);
        let got = select_centroid_verb(&counts, &table);
        let got_label = got.as_ref().map(|c| c.label().to_owned());
        ensure(got_label == expected.as_ref().map(|(l, _)| l.clone()), || {
            format!("case {case}: got {got:?}, oracle {expected:?}, counts {counts:?}, vectors {vectors:?}")
        })?;
        if expected.is_some_and(|(_, tie)| tie) {
            ties += 1;
        }
        if matches!(got, Some(scholarkg::relation::CentroidChoice::MostFrequent(_))) {
            fallbacks += 1;
        }
    }
    ensure(ties > 0, || "no tie was exercised".into())?;
    within(Duration::from_secs(5), t0)?;
    Ok(format!("1000/1000 agree ({ties} ties, {fallbacks} most-frequent fallbacks)"))
}

// ------------------------------------------------------------------ 5

/// Taxonomy read straight from the TSV, for the gate oracle.
struct OracleTaxonomy {
    parents: BTreeMap<String, Vec<String>>,
    senses: BTreeMap<String, BTreeSet<String>>,
    depth: RefCell<HashMap<String, usize>>,
}

impl OracleTaxonomy {
    fn read(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(err)?;
        let mut parents: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut senses: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for line in text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
            let f: Vec<&str> = line.split('\t').collect();
            match f[1] {
                "hypernym" => parents.entry(f[0].into()).or_default().push(f[2].into()),
                "sense" => {
                    senses.entry(f[0].into()).or_default().insert(f[2].into());
                }
                other => return Err(format!("bad taxonomy row kind {other}")),
            }
        }
        Ok(OracleTaxonomy { parents, senses, depth: RefCell::default() })
    }

    /// Longest path to the root, root = 1.
    fn depth(&self, s: &str) -> usize {
        if let Some(d) = self.depth.borrow().get(s) {
            return *d;
        }
        let d = 1 + self.parents.get(s).map_or(0, |ps| ps.iter().map(|p| self.depth(p)).max().unwrap_or(0));
        self.depth.borrow_mut().insert(s.to_owned(), d);
        d
    }

    fn ancestors(&self, s: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::from([s.to_owned()]);
        for p in self.parents.get(s).into_iter().flatten() {
            out.extend(self.ancestors(p));
        }
        out
    }

    fn senses_of(&self, word: &str) -> BTreeSet<String> {
        if let Some(s) = self.senses.get(word) {
            return s.clone();
        }
        let irregular = [("is", "be"), ("has", "have"), ("does", "do"), ("goes", "go")];
        if let Some((_, base)) = irregular.iter().find(|(w, _)| *w == word) {
            if let Some(s) = self.senses.get(*base) {
                return s.clone();
            }
        }
        let rules = [("s", ""), ("ies", "y"), ("es", "e"), ("es", ""), ("ed", "e"), ("ed", ""), ("ing", "e"), ("ing", "")];
        let mut out = BTreeSet::new();
        for (suffix, repl) in rules {
            if let Some(stem) = word.strip_suffix(suffix).filter(|s| !s.is_empty()) {
                out.extend(self.senses.get(&format!("{stem}{repl}")).into_iter().flatten().cloned());
            }
        }
        out
    }

    fn wu_palmer(&self, a: &str, b: &str) -> f64 {
        if a == b {
            return 1.0;
        }
        let mut best: f64 = 0.0;
        for x in self.senses_of(a) {
            let ax = self.ancestors(&x);
            for y in self.senses_of(b) {
                let lcs = self.ancestors(&y).intersection(&ax).map(|s| self.depth(s)).max().unwrap_or(0);
                best = best.max(2.0 * lcs as f64 / (self.depth(&x) + self.depth(&y)) as f64);
            }
        }
        best
    }
}

fn oracle_embed(label: &str, table: &EmbeddingTable) -> Option<Vec<f64>> {
    if let Some(v) = table.get(label) {
        return Some(v.to_vec());
    }
    let words: Vec<&[f64]> = label.split(' ').filter_map(|w| table.get(w)).collect();
    if words.is_empty() {
        return None;
    }
    let mut mean = vec![0.0; table.dimension()];
    for w in &words {
        for (m, x) in mean.iter_mut().zip(w.iter()) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= words.len() as f64);
    Some(mean)
}

fn selection_gate(runs: &Result<CorpusRuns, String>) -> Outcome {
    let runs = runs.as_ref().map_err(|e| format!("pipeline run failed: {e}"))?;
    let mapped = read_triples(&runs.checkpoint("06-map.jsonl"))?;

    let mut previous: Option<BTreeSet<TripleKey>> = None;
    let mut sizes = Vec::new();
    for m in 1..=15 {
        let p = compose_valid(&mapped, m);
        ensure(p.valid.len() + p.invalid.len() == mapped.len(), || format!("min_support {m} loses triples"))?;
        let valid = keys(&p.valid);
        ensure(keys(&p.invalid).is_disjoint(&valid), || format!("min_support {m} overlaps"))?;
        if let Some(prev) = &previous {
            ensure(valid.is_subset(prev), || format!("valid set grows at min_support {m}"))?;
        }
        sizes.push(valid.len());
        previous = Some(valid);
    }
    ensure(sizes[0] > sizes[14], || "min_support never changes the valid set".into())?;

    let pos = mapped
        .iter()
        .find(|t| t.sources == BTreeSet::from([Provenance::Pos]))
        .ok_or("no PoS-only triple")?;
    let with_support = |s| SupportedTriple { support: s, ..pos.clone() };
    ensure(compose_valid(&[with_support(9)], 10).invalid.len() == 1, || "support 9 not invalid".into())?;
    ensure(compose_valid(&[with_support(10)], 10).valid.len() == 1, || "support 10 not valid".into())?;

    let cfg = &runs.cfg;
    let table = load_embeddings(&cfg.embeddings).map_err(err)?;
    let taxonomy = load_lexical_taxonomy(&cfg.taxonomy).map_err(err)?;
    let train = compose_valid(&mapped, cfg.min_support).valid;
    let classifier = train_consistency_classifier(&train, &table, &cfg.classifier).map_err(err)?;
    let text = fs::read_to_string(fixtures().join("gate_triples.tsv")).map_err(err)?;
    let candidates: Vec<SupportedTriple> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            SupportedTriple {
                subject: f[0].into(),
                relation: f[1].into(),
                object: f[2].into(),
                support: 1,
                sources: [Provenance::Pos].into(),
                doc_ids: ["gate".to_string()].into(),
            }
        })
        .collect();
    ensure(candidates.len() == 50, || format!("{} gate triples", candidates.len()))?;
    let gate = Gate { classifier: &classifier, table: &table, taxonomy: &taxonomy, threshold: 0.5 };
    let (admitted, verdicts) = validate_invalid(&candidates, &gate);

    let oracle_tax = OracleTaxonomy::read(&cfg.taxonomy)?;
    let mut expected = BTreeSet::new();
    let mut by_rule = [0usize; 4];
    for t in &candidates {
        let (Some(mut x), Some(y)) = (oracle_embed(&t.subject, &table), oracle_embed(&t.object, &table)) else {
            by_rule[3] += 1;
            continue;
        };
        x.extend(y);
        let predicted = classifier.predict(&x).map_err(err)?;
        if predicted == t.relation {
            by_rule[0] += 1;
            expected.insert(t.key());
            continue;
        }
        let cos = match (oracle_embed(&t.relation, &table), oracle_embed(predicted, &table)) {
            (Some(a), Some(b)) => brute_cosine(&a, &b),
            _ => 0.0,
        };
        let wup = oracle_tax.wu_palmer(&t.relation, predicted);
        if (cos + wup) / 2.0 > 0.5 {
            by_rule[1] += 1;
            expected.insert(t.key());
        } else {
            by_rule[2] += 1;
        }
    }
    let got = keys(&admitted);
    ensure(got == expected, || {
        format!(
            "admitted {} vs oracle {}; only library: {:?}; only oracle: {:?}",
            got.len(),
            expected.len(),
            got.difference(&expected).collect::<Vec<_>>(),
            expected.difference(&got).collect::<Vec<_>>()
        )
    })?;
    ensure(admitted.iter().all(|t| t.has_source(Provenance::Cons)), || "admitted triple lacks CONS".into())?;
    let library_counts = [
        verdicts.iter().filter(|v| matches!(v, GateVerdict::ExactMatch)).count(),
        verdicts.iter().filter(|v| matches!(v, GateVerdict::Similar { .. })).count(),
        verdicts.iter().filter(|v| matches!(v, GateVerdict::Rejected { .. })).count(),
        verdicts.iter().filter(|v| matches!(v, GateVerdict::Unembeddable)).count(),
    ];
    ensure(library_counts == by_rule, || format!("verdict mix {library_counts:?} vs oracle {by_rule:?}"))?;
    ensure(by_rule.iter().all(|n| *n > 0), || format!("oracle did not exercise every rule: {by_rule:?}"))?;
    Ok(format!(
        "valid set shrinks {}->{} over min_support 1..15; support 9/10 boundary holds; gate admits {} of 50 \
         (exact {}, similar {}, rejected {}, unembeddable {}), same as oracle",
        sizes[0], sizes[14], got.len(), by_rule[0], by_rule[1], by_rule[2], by_rule[3]
    ))
}

// ------------------------------------------------------------------ 6

fn classifier() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(300);
    let dim = 300;
    let mut dir: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    dir.iter_mut().for_each(|x| *x /= n);
    // Noise orthogonal to `dir`, so the classes are separated by a margin.
    let noise = |rng: &mut ChaCha8Rng| {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let p: f64 = v.iter().zip(&dir).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(&dir).for_each(|(a, b)| *a -= p * b);
        v
    };
    let mut rows = Vec::new();
    let mut triples = Vec::new();
    for i in 0..500 {
        let class = if i % 2 == 0 { 1.0 } else { -1.0 };
        let mut s = noise(&mut rng);
        s.iter_mut().zip(&dir).for_each(|(a, b)| *a += 2.0 * class * b);
        rows.push((format!("subject{i}"), s));
        rows.push((format!("object{i}"), noise(&mut rng)));
        triples.push(SupportedTriple {
            subject: format!("subject{i}"),
            relation: if class > 0.0 { "uses" } else { "limits" }.into(),
            object: format!("object{i}"),
            support: 10,
            sources: [Provenance::Pos].into(),
            doc_ids: BTreeSet::new(),
        });
    }
    let table = EmbeddingTable::from_entries(dim, rows).map_err(err)?;
    let params = ClassifierParams { hidden_width: 32, seed: 17, ..ClassifierParams::default() };
    let a = train_consistency_classifier(&triples, &table, &params).map_err(err)?;
    let b = train_consistency_classifier(&triples, &table, &params).map_err(err)?;
    let examples = scholarkg::select::training_examples(&triples, &table);
    ensure(examples.len() == 500 && examples[0].0.len() == 600, || "unexpected training rows".into())?;
    let acc = a.accuracy(&examples).map_err(err)?;
    ensure(acc >= 0.95, || format!("training accuracy {acc}"))?;
    ensure(a == b && a.to_checkpoint() == b.to_checkpoint(), || "seeded runs differ".into())?;
    Ok(format!("accuracy {acc:.4} after {} epochs; two seeded runs bit-identical", a.epochs_run()))
}

// ------------------------------------------------------------------ 7

/// One inference round over `from`, blocked by the original input.
fn infer_round(
    from: &[SupportedTriple],
    input_keys: &BTreeSet<TripleKey>,
    input_pairs: &BTreeSet<(String, String)>,
    parents: &BTreeMap<String, Vec<String>>,
    blocked: &mut [usize; 2],
) -> BTreeMap<TripleKey, BTreeSet<String>> {
    let mut out: BTreeMap<TripleKey, BTreeSet<String>> = BTreeMap::new();
    for t in from {
        for e3 in parents.get(&t.object).into_iter().flatten() {
            if *e3 == t.subject {
                continue;
            }
            if input_pairs.contains(&(t.subject.clone(), e3.clone())) {
                blocked[0] += 1;
                continue;
            }
            if input_pairs.contains(&(e3.clone(), t.subject.clone())) {
                blocked[1] += 1;
                continue;
            }
            let key = TripleKey::new(&t.subject, &t.relation, e3);
            if input_keys.contains(&key) {
                continue;
            }
            out.entry(key).or_default().extend(t.doc_ids.iter().cloned());
        }
    }
    out
}

fn as_inferred(m: &BTreeMap<TripleKey, BTreeSet<String>>) -> Vec<SupportedTriple> {
    m.iter()
        .map(|(k, docs)| SupportedTriple {
            subject: k.subject.clone(),
            relation: k.relation.clone(),
            object: k.object.clone(),
            support: 0,
            sources: [Provenance::Inferred].into(),
            doc_ids: docs.clone(),
        })
        .collect()
}

fn enhancement() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let topic = |i: usize| format!("topic {i:03}");
    let mut parents: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut edges = Vec::new();
    for i in 3..100 {
        let k = rng.gen_range(1..=3.min(i));
        let mut ps: Vec<usize> = (0..i).collect();
        ps.shuffle(&mut rng);
        for p in ps.into_iter().take(k) {
            edges.push((topic(i), topic(p)));
            parents.entry(topic(i)).or_default().push(topic(p));
        }
    }
    let ontology = TopicOntology::new(edges.iter().map(|(c, p)| (c.as_str(), p.as_str())), []).map_err(err)?;
    let node = |rng: &mut ChaCha8Rng| {
        if rng.gen_bool(0.15) {
            format!("entity {}", rng.gen_range(0..20))
        } else {
            topic(rng.gen_range(0..100))
        }
    };
    let mut triples: Vec<SupportedTriple> = Vec::new();
    let mut seen = BTreeSet::new();
    while triples.len() < 500 {
        let (s, o) = (node(&mut rng), node(&mut rng));
        let r = ["uses", "improves", "includes"][rng.gen_range(0..3)];
        if s == o || !seen.insert(TripleKey::new(&s, r, &o)) {
            continue;
        }
        let docs: BTreeSet<String> = (0..rng.gen_range(1..=2)).map(|_| format!("d{}", rng.gen_range(0..60))).collect();
        triples.push(SupportedTriple {
            subject: s,
            relation: r.into(),
            object: o,
            support: docs.len(),
            sources: [Provenance::Pos].into(),
            doc_ids: docs,
        });
    }
    let input_keys = keys(&triples);
    let input_pairs: BTreeSet<(String, String)> = triples.iter().map(|t| (t.subject.clone(), t.object.clone())).collect();

    let mut blocked = [0usize; 2];
    let single = infer_round(&triples, &input_keys, &input_pairs, &parents, &mut blocked);
    let got = enhance_with_supertopics(&triples, &ontology, false);
    ensure(got == as_inferred(&single), || format!("single round: {} vs oracle {}", got.len(), single.len()))?;

    // Closure: re-derive from input plus everything inferred until stable.
    let mut closure = single.clone();
    loop {
        let mut all = triples.clone();
        all.extend(as_inferred(&closure));
        let next = infer_round(&all, &input_keys, &input_pairs, &parents, &mut [0; 2]);
        if next == closure {
            break;
        }
        closure = next;
    }
    let got_fix = enhance_with_supertopics(&triples, &ontology, true);
    ensure(got_fix == as_inferred(&closure), || format!("fixpoint: {} vs oracle {}", got_fix.len(), closure.len()))?;
    ensure(blocked[0] > 0 && blocked[1] > 0, || format!("blocking exercised {blocked:?}"))?;
    within(Duration::from_secs(2), t0)?;
    Ok(format!(
        "{} inferred in one round, {} at fixpoint; blocked {} forward and {} reverse",
        single.len(),
        closure.len(),
        blocked[0],
        blocked[1]
    ))
}

// ------------------------------------------------------------------ 8

fn end_to_end(runs: &Result<CorpusRuns, String>) -> Outcome {
    let runs = runs.as_ref().map_err(|e| format!("pipeline run failed: {e}"))?;
    for file in ["graph.nt", "graph.provenance.jsonl"] {
        let a = fs::read(runs.dirs[0].join(file)).map_err(err)?;
        let b = fs::read(runs.dirs[1].join(file)).map_err(err)?;
        ensure(!a.is_empty() && a == b, || format!("{file} differs between runs"))?;
    }
    let gold_path = runs.cfg.gold.as_ref().ok_or("fixture config has no gold")?;
    let gold = GoldStandard::new(&load_gold_standard(gold_path).map_err(err)?).map_err(err)?;
    let nt = fs::read_to_string(runs.dirs[0].join("graph.nt")).map_err(err)?;
    let graph = parse_ntriples(&nt, &runs.cfg.namespace).map_err(err)?;
    let r = evaluate(&graph, &gold);
    // Hand count over gold.tsv: 8 true triples found, 3 false ones, 2 true ones missed.
    let (p, rc) = (8.0 / 11.0, 8.0 / 10.0);
    ensure((r.tp, r.fp, r.fn_) == (8, 3, 2), || format!("counts {}/{}/{}", r.tp, r.fp, r.fn_))?;
    ensure(r.precision == p && r.recall == rc, || format!("P {} R {}", r.precision, r.recall))?;
    ensure(r.fmeasure == 2.0 * p * rc / (p + rc) && (r.fmeasure - 16.0 / 21.0).abs() < 1e-12, || {
        format!("F {}", r.fmeasure)
    })?;
    Ok(format!(
        "graph.nt ({} triples) and sidecar byte-identical; gold P={:.4} R={:.4} F={:.4}",
        graph.len(),
        r.precision,
        r.recall,
        r.fmeasure
    ))
}

// ------------------------------------------------------------------ 9

fn refiner(runs: &Result<CorpusRuns, String>) -> Outcome {
    let runs = runs.as_ref().map_err(|e| format!("pipeline run failed: {e}"))?;
    let cfg = &runs.cfg;

    let raw = normalize_label("Machine Learning and Data Mining").ok_or("empty label")?;
    let parts = split_entity(&raw);
    ensure(parts == ["machine learning", "data mining"], || format!("split into {parts:?}"))?;

    let sentences = load_sentence_annotations(&cfg.annotations).map_err(err)?;
    let acronyms = AcronymMap::build(&sentences, &default_stopwords());
    let d03 = acronyms.for_doc("d03").and_then(|m| m.get("owl"));
    ensure(d03.map(String::as_str) == Some("web ontology language"), || format!("d03 owl -> {d03:?}"))?;
    ensure(acronyms.for_doc("d04").is_none_or(|m| !m.contains_key("owl")), || "owl defined in d04".into())?;
    let refined = fs::read_to_string(runs.checkpoint("03-refine.triples.jsonl")).map_err(err)?;
    let owl_docs: Vec<&str> = refined.lines().filter(|l| l.contains("\"owl\"")).collect();
    ensure(
        !owl_docs.is_empty() && owl_docs.iter().all(|l| l.contains("\"d04\"") && !l.contains("\"d03\"")),
        || format!("unexpanded owl rows {owl_docs:?}"),
    )?;
    ensure(
        refined.lines().any(|l| l.contains("\"web ontology language\"") && l.contains("\"d03\"")),
        || "no expanded d03 triple".into(),
    )?;

    let ontology = load_topic_ontology(&cfg.ontology).map_err(err)?;
    ensure(ontology.contains("machine learning"), || "machine learning is not a topic".into())?;
    let counts = match (&cfg.background_in, &cfg.background_sibling, &cfg.background_out) {
        (Some(i), Some(s), Some(o)) => load_background_counts(i, s, o).map_err(err)?,
        _ => return Err("fixture config lacks background counts".into()),
    };
    let whitelist = load_label_list(cfg.whitelist.as_ref().ok_or("no whitelist")?).map_err(err)?;
    let (ts, to) = (cfg.generic_sibling_ratio, cfg.generic_out_ratio);
    ensure(!genericity_filter("machine learning", &counts, &BTreeSet::new(), ts, to), || {
        "machine learning passes the filter on its own".into()
    })?;
    ensure(genericity_filter("machine learning", &counts, &whitelist, ts, to), || "whitelist ignored".into())?;
    let mut refiner = Refiner {
        counts: Some(counts),
        stopwords: default_stopwords(),
        sibling_threshold: ts,
        out_threshold: to,
        ..Refiner::default()
    };
    ensure(refiner.refine_label("machine learning", None).is_empty(), || "not dropped without whitelist".into())?;
    refiner.whitelist = whitelist;
    ensure(refiner.refine_label("machine learning", None) == ["machine learning"], || "whitelisted topic dropped".into())?;

    let collapsed = keys(&read_triples(&runs.checkpoint("05-collapse.jsonl"))?);
    let mapped = keys(&read_triples(&runs.checkpoint("06-map.jsonl"))?);
    let before = TripleKey::new("knowledge construction", "creates", "knowledge graphs");
    let after = TripleKey::new("knowledge construction", "produces", "knowledge graphs");
    ensure(collapsed.contains(&before) && !collapsed.contains(&after), || "collapse checkpoint lacks creates".into())?;
    ensure(mapped.contains(&after) && !mapped.contains(&before), || "map checkpoint lacks produces".into())?;
    Ok("conjunction split, OWL expanded in d03 only, whitelist keeps machine learning, creates -> produces".into())
}

// ------------------------------------------------------------------ main

fn main() -> ExitCode {
    let runs = CorpusRuns::start();
    let checks: Vec<Check> = vec![
        ("F-measure arithmetic", Box::new(fmeasure_table)),
        ("gold-standard composition", Box::new(gold_universe)),
        ("clustering oracle", Box::new(clustering)),
        ("centroid-verb oracle", Box::new(centroid)),
        ("selection gate", Box::new(|| selection_gate(&runs))),
        ("consistency classifier", Box::new(classifier)),
        ("enhancement oracle", Box::new(enhancement)),
        ("end-to-end determinism", Box::new(|| end_to_end(&runs))),
        ("refiner examples", Box::new(|| refiner(&runs))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = check();
        let ms = t0.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("PASS {}. {name}: {detail} [{ms} ms]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why} [{ms} ms]", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
