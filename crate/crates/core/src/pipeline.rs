//! Stage-by-stage driver with on-disk checkpoints.
//!
//! Every stage reads the previous stage's checkpoint shape and writes its
//! own under `<output_dir>/checkpoints`. Checkpoints are line-delimited
//! (JSONL mirroring the annotation and triple schemas, or TSV), so any of
//! them can be inspected or edited by hand and a run resumed from there.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{evaluate_combinations, method_memberships, report_row, GoldStandard};
use crate::ingest::{
    load_background_counts, load_embeddings, load_gold_standard, load_label_list, load_lexical_taxonomy,
    load_relation_pairs, load_sentence_annotations, load_topic_ontology, parse_sentence_annotations,
    BackgroundCounts, EmbeddingTable, LexicalTaxonomy, PipelineConfig, TopicOntology,
};
use crate::integrate::{aggregate_corpus, CorpusTriples, Integrator, PairDocumentIndex};
use crate::kg::{
    enhance_with_supertopics, provenance_sidecar, serialize_ntriples, support_histogram, KnowledgeGraph,
    SupportHistogram,
};
use crate::lexicon::{default_auxiliaries, default_stopwords};
use crate::merge::{apply_merging, write_merge_log, Lemmatizer, Merger};
use crate::model::{CandidateTriple, Provenance, SentenceAnnotation, SupportedTriple, TripleSource};
use crate::refine::{AcronymMap, Refiner};
use crate::relation::{
    apply_relation_map, build_relation_map, cluster_relations, collapse_relations, default_ef_static_map,
    export_relation_clusters, import_curated_map, ClusterPartition, RelationMap,
};
use crate::select::{compose_valid, train_consistency_classifier, validate_invalid, Gate, GateVerdict};

/// The pipeline stages, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Ingest,
    Integrate,
    Refine,
    Merge,
    Collapse,
    Map,
    Select,
    Enhance,
    Serialize,
}

impl Stage {
    pub const ALL: [Stage; 9] = [
        Stage::Ingest,
        Stage::Integrate,
        Stage::Refine,
        Stage::Merge,
        Stage::Collapse,
        Stage::Map,
        Stage::Select,
        Stage::Enhance,
        Stage::Serialize,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Integrate => "integrate",
            Stage::Refine => "refine",
            Stage::Merge => "merge",
            Stage::Collapse => "collapse",
            Stage::Map => "map",
            Stage::Select => "select",
            Stage::Enhance => "enhance",
            Stage::Serialize => "serialize",
        }
    }

    fn index(self) -> usize {
        Stage::ALL.iter().position(|s| *s == self).unwrap()
    }

    pub fn previous(self) -> Option<Stage> {
        self.index().checked_sub(1).map(|i| Stage::ALL[i])
    }

    /// Main checkpoint file name, e.g. `03-refine.triples.jsonl`.
    pub fn checkpoint_file(self) -> String {
        let ext = match self {
            Stage::Ingest => "jsonl",
            Stage::Integrate | Stage::Refine | Stage::Merge => "triples.jsonl",
            Stage::Serialize => "summary.json",
            _ => "jsonl",
        };
        format!("{:02}-{}.{ext}", self.index() + 1, self.name())
    }

    fn pairs_file(self) -> String {
        format!("{:02}-{}.pairs.jsonl", self.index() + 1, self.name())
    }

    fn aux_file(self, what: &str) -> String {
        format!("{:02}-{}.{what}", self.index() + 1, self.name())
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Stage::ALL.iter().map(|s| s.name()).collect();
                format!("unknown stage `{s}` (expected one of {})", names.join(", "))
            })
    }
}

/// What flows from one stage into the next.
#[derive(Debug, Clone)]
pub enum StageData {
    Annotations(Vec<SentenceAnnotation>),
    Corpus { triples: CorpusTriples, pairs: PairDocumentIndex },
    Triples(Vec<SupportedTriple>),
    Summary(RunSummary),
}

/// Counts printed at the end of a run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub entities: usize,
    pub triples: usize,
    /// Triples carrying each provenance tag; a triple can count under several.
    pub by_source: BTreeMap<Provenance, usize>,
    pub support_histogram: SupportHistogram,
}

impl RunSummary {
    pub fn of(kg: &KnowledgeGraph) -> Self {
        let mut by_source = BTreeMap::new();
        for t in kg.triples() {
            for p in &t.sources {
                *by_source.entry(*p).or_default() += 1;
            }
        }
        RunSummary {
            entities: kg.entities().len(),
            triples: kg.len(),
            by_source,
            support_histogram: support_histogram(kg.triples()),
        }
    }
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "entities\t{}", self.entities)?;
        writeln!(f, "triples\t{}", self.triples)?;
        for (p, n) in &self.by_source {
            writeln!(f, "source {}\t{n}", p.as_str())?;
        }
        for (g, hist) in &self.support_histogram.groups {
            let cells: Vec<String> = hist.iter().map(|(s, n)| format!("{s}:{n}")).collect();
            writeln!(f, "support {}\t{}", g.as_str(), cells.join(" "))?;
        }
        Ok(())
    }
}

/// Inputs shared by the stages, loaded once per run.
pub struct Resources {
    pub embeddings: EmbeddingTable,
    pub ontology: TopicOntology,
    pub taxonomy: LexicalTaxonomy,
    pub stopwords: BTreeSet<String>,
    pub auxiliaries: BTreeSet<String>,
    pub blacklist: BTreeSet<String>,
    pub whitelist: BTreeSet<String>,
    pub counts: Option<BackgroundCounts>,
    pub ef_static: BTreeMap<String, String>,
}

impl Resources {
    pub fn load(cfg: &PipelineConfig) -> Result<Self> {
        let list = |p: &Option<PathBuf>, default: fn() -> BTreeSet<String>| match p {
            Some(p) => load_label_list(p),
            None => Ok(default()),
        };
        let blacklist = list(&cfg.blacklist, BTreeSet::new)?;
        let whitelist = list(&cfg.whitelist, BTreeSet::new)?;
        if let Some(both) = blacklist.intersection(&whitelist).next() {
            return Err(Error::Config(format!("`{both}` is both blacklisted and whitelisted")));
        }
        let counts = match (&cfg.background_in, &cfg.background_sibling, &cfg.background_out) {
            (Some(i), Some(s), Some(o)) => Some(load_background_counts(i, s, o)?),
            _ => None,
        };
        let ef_static = match &cfg.ef_static_map {
            Some(p) => load_relation_pairs(p)?,
            None => default_ef_static_map(),
        };
        Ok(Resources {
            embeddings: load_embeddings(&cfg.embeddings)?,
            ontology: load_topic_ontology(&cfg.ontology)?,
            taxonomy: load_lexical_taxonomy(&cfg.taxonomy)?,
            stopwords: list(&cfg.stopwords, default_stopwords)?,
            auxiliaries: list(&cfg.auxiliaries, default_auxiliaries)?,
            blacklist,
            whitelist,
            counts,
            ef_static,
        })
    }
}

/// One configured run. Stages write checkpoints into
/// [`Pipeline::checkpoint_dir`] and read their predecessor's from
/// `resume_dir` (the same directory unless resuming elsewhere).
pub struct Pipeline {
    cfg: PipelineConfig,
    resources: Option<Resources>,
    annotations: Option<Vec<SentenceAnnotation>>,
    resume_dir: PathBuf,
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig) -> Self {
        let resume_dir = cfg.output_dir.join("checkpoints");
        Pipeline {
            cfg,
            resources: None,
            annotations: None,
            resume_dir,
        }
    }

    /// Reads predecessor checkpoints from `dir` instead of this run's own.
    pub fn resume_from(mut self, dir: impl Into<PathBuf>) -> Self {
        self.resume_dir = dir.into();
        self
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn checkpoint_dir(&self) -> PathBuf {
        self.cfg.output_dir.join("checkpoints")
    }

    /// Runs every stage.
    pub fn run(&mut self) -> Result<RunSummary> {
        self.run_range(Stage::Ingest, Stage::Serialize)
    }

    /// Runs `first..=last`, loading the input of `first` from the resume
    /// directory when `first` is not the ingest stage.
    pub fn run_range(&mut self, first: Stage, last: Stage) -> Result<RunSummary> {
        if first > last {
            return Err(Error::Config(format!("stage `{first}` comes after `{last}`")));
        }
        let mut data = match first.previous() {
            None => None,
            Some(prev) => Some(wrap(first, self.load_checkpoint(prev))?),
        };
        let dir = self.checkpoint_dir();
        wrap(first, fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e)))?;
        for stage in Stage::ALL.into_iter().filter(|s| (first..=last).contains(s)) {
            log::info!("stage {stage}");
            let out = wrap(stage, self.run_stage(stage, data.take()))?;
            wrap(stage, self.write_checkpoint(stage, &out))?;
            data = Some(out);
        }
        match data {
            Some(StageData::Summary(s)) => Ok(s),
            Some(other) => Ok(self.partial_summary(&other)),
            None => Ok(RunSummary::default()),
        }
    }

    fn partial_summary(&self, data: &StageData) -> RunSummary {
        let triples: Vec<SupportedTriple> = match data {
            StageData::Triples(t) => t.clone(),
            _ => return RunSummary::default(),
        };
        KnowledgeGraph::new(&self.cfg.namespace, triples)
            .map(|kg| RunSummary::of(&kg))
            .unwrap_or_default()
    }

    fn resources(&mut self) -> Result<&Resources> {
        if self.resources.is_none() {
            self.resources = Some(Resources::load(&self.cfg)?);
        }
        Ok(self.resources.as_ref().unwrap())
    }

    /// Annotations from this run's ingest stage, or from the ingest
    /// checkpoint when resuming.
    fn annotations(&mut self) -> Result<&[SentenceAnnotation]> {
        if self.annotations.is_none() {
            let path = self.resume_dir.join(Stage::Ingest.checkpoint_file());
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            self.annotations = Some(parse_sentence_annotations(&path, &text)?);
        }
        Ok(self.annotations.as_deref().unwrap())
    }

    /// Executes one stage on its predecessor's output.
    pub fn run_stage(&mut self, stage: Stage, input: Option<StageData>) -> Result<StageData> {
        let missing = || Error::Checkpoint(format!("stage `{stage}` got the wrong input"));
        match stage {
            Stage::Ingest => {
                // Resources load here so that bad inputs fail the ingest stage.
                self.resources()?;
                let sentences = load_sentence_annotations(&self.cfg.annotations)?;
                self.annotations = Some(sentences.clone());
                Ok(StageData::Annotations(sentences))
            }
            Stage::Integrate => {
                let Some(StageData::Annotations(sentences)) = input else {
                    return Err(missing());
                };
                let r = self.resources()?;
                let integrator = Integrator {
                    ontology: &r.ontology,
                    stopwords: &r.stopwords,
                    auxiliaries: &r.auxiliaries,
                };
                let extractions: Vec<_> = sentences.iter().map(|s| integrator.extract(s)).collect();
                let (triples, pairs) = aggregate_corpus(&extractions);
                Ok(StageData::Corpus { triples, pairs })
            }
            Stage::Refine => {
                let Some(StageData::Corpus { triples, pairs }) = input else {
                    return Err(missing());
                };
                self.resources()?;
                let acronyms = {
                    let stopwords = self.resources.as_ref().unwrap().stopwords.clone();
                    AcronymMap::build(self.annotations()?, &stopwords)
                };
                let r = self.resources.as_ref().unwrap();
                let refiner = Refiner {
                    blacklist: r.blacklist.clone(),
                    whitelist: r.whitelist.clone(),
                    stopwords: r.stopwords.clone(),
                    counts: r.counts.clone(),
                    sibling_threshold: self.cfg.generic_sibling_ratio,
                    out_threshold: self.cfg.generic_out_ratio,
                };
                let out = refiner.refine_corpus(&triples, &pairs, &acronyms);
                log::info!(
                    "refine: {} labels removed, {} generic",
                    out.removed.len(),
                    out.generic.len()
                );
                let removed: String = out.removed.iter().chain(&out.generic).map(|l| format!("{l}\n")).collect();
                write_file(&self.checkpoint_dir().join(stage.aux_file("dropped.txt")), &removed)?;
                Ok(StageData::Corpus {
                    triples: out.triples,
                    pairs: out.pairs,
                })
            }
            Stage::Merge => {
                let Some(StageData::Corpus { triples, pairs }) = input else {
                    return Err(missing());
                };
                self.resources()?;
                let lemmatizer = Lemmatizer::from_annotations(self.annotations()?);
                let r = self.resources.as_ref().unwrap();
                let merger = Merger {
                    lemmatizer: &lemmatizer,
                    ontology: &r.ontology,
                };
                let out = apply_merging(&triples, &pairs, &merger);
                write_merge_log(&self.checkpoint_dir().join(stage.aux_file("log.tsv")), &out.decisions)?;
                Ok(StageData::Corpus {
                    triples: out.triples,
                    pairs: out.pairs,
                })
            }
            Stage::Collapse => {
                let Some(StageData::Corpus { triples, pairs }) = input else {
                    return Err(missing());
                };
                let r = self.resources()?;
                Ok(StageData::Triples(collapse_relations(&triples, &pairs, &r.embeddings)))
            }
            Stage::Map => {
                let Some(StageData::Triples(triples)) = input else {
                    return Err(missing());
                };
                let (partition, map) = self.relation_map(&triples)?;
                let clusters = export_relation_clusters(&partition, &map);
                let (mapped, unmapped) = apply_relation_map(&triples, &map);
                if !unmapped.is_empty() {
                    log::info!("map: {} relation labels kept as-is", unmapped.len());
                }
                let dir = self.checkpoint_dir();
                write_file(&dir.join(stage.aux_file("clusters.tsv")), &clusters)?;
                write_file(&dir.join(stage.aux_file("relation_map.tsv")), &map.to_tsv())?;
                Ok(StageData::Triples(mapped))
            }
            Stage::Select => {
                let Some(StageData::Triples(triples)) = input else {
                    return Err(missing());
                };
                let (min_support, threshold, params) =
                    (self.cfg.min_support, self.cfg.gate_threshold, self.cfg.classifier.clone());
                let dir = self.checkpoint_dir();
                let r = self.resources()?;
                let partition = compose_valid(&triples, min_support);
                let mut selected = partition.valid.clone();
                match train_consistency_classifier(&partition.valid, &r.embeddings, &params) {
                    Ok(classifier) => {
                        let gate = Gate {
                            classifier: &classifier,
                            table: &r.embeddings,
                            taxonomy: &r.taxonomy,
                            threshold,
                        };
                        let (admitted, verdicts) = validate_invalid(&partition.invalid, &gate);
                        log::info!(
                            "select: {} valid, {} of {} invalid admitted",
                            partition.valid.len(),
                            admitted.len(),
                            partition.invalid.len()
                        );
                        write_file(&dir.join(stage.aux_file("classifier.txt")), &classifier.to_checkpoint())?;
                        write_file(&dir.join(stage.aux_file("verdicts.tsv")), &verdict_rows(&partition.invalid, &verdicts))?;
                        selected.extend(admitted);
                    }
                    Err(Error::TooFewClasses(n)) => {
                        log::warn!("select: {n} relation classes among valid triples, no classifier trained");
                    }
                    Err(e) => return Err(e),
                }
                selected.sort_by_key(|t| t.key());
                Ok(StageData::Triples(selected))
            }
            Stage::Enhance => {
                let Some(StageData::Triples(mut triples)) = input else {
                    return Err(missing());
                };
                let fixpoint = self.cfg.infer_to_fixpoint;
                let r = self.resources()?;
                let inferred = enhance_with_supertopics(&triples, &r.ontology, fixpoint);
                log::info!("enhance: {} triples inferred", inferred.len());
                triples.extend(inferred);
                triples.sort_by_key(|t| t.key());
                Ok(StageData::Triples(triples))
            }
            Stage::Serialize => {
                let Some(StageData::Triples(triples)) = input else {
                    return Err(missing());
                };
                let kg = KnowledgeGraph::new(&self.cfg.namespace, triples)?;
                let out = &self.cfg.output_dir;
                write_file(&out.join("graph.nt"), &serialize_ntriples(&kg))?;
                write_file(&out.join("graph.provenance.jsonl"), &provenance_sidecar(&kg))?;
                let summary = RunSummary::of(&kg);
                write_file(&out.join("summary.txt"), &summary.to_string())?;
                if let Some(gold) = &self.cfg.gold {
                    let gold = GoldStandard::new(&load_gold_standard(gold)?)?;
                    let members = method_memberships(kg.triples(), self.cfg.min_support);
                    let mut table = String::from("method\tP\tR\tF\tTP\tFP\tFN\n");
                    for (name, report) in evaluate_combinations(&members, &gold) {
                        table.push_str(&report_row(&name, &report));
                        table.push('\n');
                    }
                    write_file(&out.join("evaluation.tsv"), &table)?;
                }
                Ok(StageData::Summary(summary))
            }
        }
    }

    /// Clusters the verb relations of `triples` and builds the relation map,
    /// applying the configured curated overrides.
    pub fn relation_map(&mut self, triples: &[SupportedTriple]) -> Result<(ClusterPartition, RelationMap)> {
        let target = self.cfg.silhouette_target;
        let curated_path = self.cfg.curated_map.clone();
        let r = self.resources()?;
        let known: BTreeSet<String> = triples.iter().map(|t| t.relation.clone()).collect();
        let partition = cluster_verb_relations(triples, &r.embeddings, target);
        let curated = match &curated_path {
            Some(p) => import_curated_map(p, &known)?,
            None => BTreeMap::new(),
        };
        let map = build_relation_map(&partition, &r.embeddings, &curated, &r.ef_static)?;
        Ok((partition, map))
    }

    /// The curation file for the relation clusters, computed from the
    /// collapse checkpoint.
    pub fn export_clusters(&mut self) -> Result<String> {
        let StageData::Triples(triples) = wrap(Stage::Collapse, self.load_checkpoint(Stage::Collapse))? else {
            unreachable!("collapse checkpoints hold triples")
        };
        let (partition, map) = wrap(Stage::Map, self.relation_map(&triples))?;
        Ok(export_relation_clusters(&partition, &map))
    }

    /// Relation labels present in the collapse checkpoint.
    pub fn known_relations(&mut self) -> Result<BTreeSet<String>> {
        match self.load_checkpoint(Stage::Collapse)? {
            StageData::Triples(t) => Ok(t.into_iter().map(|t| t.relation).collect()),
            _ => unreachable!("collapse checkpoints hold triples"),
        }
    }

    /// Reads the checkpoint `stage` wrote.
    pub fn load_checkpoint(&mut self, stage: Stage) -> Result<StageData> {
        let dir = self.resume_dir.clone();
        let main = dir.join(stage.checkpoint_file());
        match stage {
            Stage::Ingest => Ok(StageData::Annotations(self.annotations()?.to_vec())),
            Stage::Integrate | Stage::Refine | Stage::Merge => Ok(StageData::Corpus {
                triples: CorpusTriples::from_triples(read_jsonl::<CandidateTriple>(&main)?),
                pairs: read_pairs(&dir.join(stage.pairs_file()))?,
            }),
            Stage::Collapse | Stage::Map | Stage::Select | Stage::Enhance => {
                Ok(StageData::Triples(read_jsonl::<SupportedTriple>(&main)?))
            }
            Stage::Serialize => {
                let text = fs::read_to_string(&main).map_err(|e| Error::io(&main, e))?;
                let summary = serde_json::from_str(&text).map_err(|e| Error::parse(&main, 1, e.to_string()))?;
                Ok(StageData::Summary(summary))
            }
        }
    }

    fn write_checkpoint(&self, stage: Stage, data: &StageData) -> Result<()> {
        let dir = self.checkpoint_dir();
        let main = dir.join(stage.checkpoint_file());
        match data {
            StageData::Annotations(a) => write_file(&main, &to_jsonl(a)),
            StageData::Corpus { triples, pairs } => {
                let rows: Vec<&CandidateTriple> = triples.iter().collect();
                write_file(&main, &to_jsonl(&rows))?;
                write_file(&dir.join(stage.pairs_file()), &pairs_jsonl(pairs))
            }
            StageData::Triples(t) => write_file(&main, &to_jsonl(t)),
            StageData::Summary(s) => write_file(&main, &(serde_json::to_string_pretty(s).expect("summary serializes") + "\n")),
        }
    }
}

/// Clusters the verb relations only; EF labels go through the static map.
fn cluster_verb_relations(triples: &[SupportedTriple], table: &EmbeddingTable, target: f64) -> ClusterPartition {
    let labels: BTreeSet<String> = triples
        .iter()
        .filter(|t| t.has_source(Provenance::Oie) || t.has_source(Provenance::Pos))
        .map(|t| t.relation.clone())
        .collect();
    let labels: Vec<String> = labels.into_iter().collect();
    cluster_relations(&labels, table, target)
}

fn verdict_rows(invalid: &[SupportedTriple], verdicts: &[GateVerdict]) -> String {
    let mut out = String::from("s\tp\to\tverdict\tpredicted\tcosine\twup\n");
    for (t, v) in invalid.iter().zip(verdicts) {
        let (name, rest) = match v {
            GateVerdict::ExactMatch => ("EXACT", format!("{}\t1.0000\t1.0000", t.relation)),
            GateVerdict::Similar { predicted, cosine, wup } => ("SIMILAR", format!("{predicted}\t{cosine:.4}\t{wup:.4}")),
            GateVerdict::Rejected { predicted, cosine, wup } => ("REJECTED", format!("{predicted}\t{cosine:.4}\t{wup:.4}")),
            GateVerdict::Unembeddable => ("UNEMBEDDABLE", "\t\t".to_owned()),
        };
        let _ = writeln!(out, "{}\t{}\t{}\t{name}\t{rest}", t.subject, t.relation, t.object);
    }
    out
}

fn wrap<T>(stage: Stage, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage: stage.name(),
        source: Box::new(e),
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn to_jsonl<T: Serialize>(rows: &[T]) -> String {
    let mut out = String::new();
    for r in rows {
        out.push_str(&serde_json::to_string(r).expect("checkpoint rows serialize"));
        out.push('\n');
    }
    out
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::parse(path, i + 1, e.to_string())))
        .collect()
}

#[derive(Serialize, Deserialize)]
struct PairRow {
    s: String,
    o: String,
    doc_ids: BTreeSet<String>,
}

fn pairs_jsonl(pairs: &PairDocumentIndex) -> String {
    let rows: Vec<PairRow> = pairs
        .iter()
        .map(|(s, o, d)| PairRow {
            s: s.to_owned(),
            o: o.to_owned(),
            doc_ids: d.clone(),
        })
        .collect();
    to_jsonl(&rows)
}

fn read_pairs(path: &Path) -> Result<PairDocumentIndex> {
    let mut index = PairDocumentIndex::new();
    for row in read_jsonl::<PairRow>(path)? {
        for d in &row.doc_ids {
            index.insert(&row.s, &row.o, d);
        }
    }
    Ok(index)
}

/// Triples per extraction source in a corpus checkpoint.
pub fn corpus_counts(triples: &CorpusTriples) -> BTreeMap<TripleSource, usize> {
    TripleSource::ALL
        .into_iter()
        .map(|s| (s, triples.by_source(s).len()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_names_round_trip() {
        for s in Stage::ALL {
            assert_eq!(s.name().parse::<Stage>().unwrap(), s);
        }
        assert!("nope".parse::<Stage>().is_err());
        assert_eq!(Stage::Refine.previous(), Some(Stage::Integrate));
        assert_eq!(Stage::Ingest.previous(), None);
        assert_eq!(Stage::Refine.checkpoint_file(), "03-refine.triples.jsonl");
    }

    #[test]
    fn pairs_round_trip() {
        let mut p = PairDocumentIndex::new();
        p.insert("a", "b", "d1");
        p.insert("a", "b", "d2");
        p.insert("b", "c", "d1");
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.jsonl");
        write_file(&path, &pairs_jsonl(&p)).unwrap();
        assert_eq!(read_pairs(&path).unwrap(), p);
    }

    #[test]
    fn missing_embeddings_fail_ingest() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = PipelineConfig::with_inputs(
            dir.path().join("a.jsonl"),
            dir.path().join("missing.vec"),
            dir.path().join("o.tsv"),
            dir.path().join("t.tsv"),
        );
        cfg.output_dir = dir.path().join("out");
        let err = Pipeline::new(cfg).run().unwrap_err();
        assert!(matches!(err, Error::Stage { stage: "ingest", .. }), "{err}");
    }
}
