use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use scholarkg::eval::{check_gold_universe, evaluate, evaluate_combinations, load_memberships, method_memberships, report_row, GoldStandard};
use scholarkg::ingest::{load_gold_standard, load_sentence_annotations, PipelineConfig};
use scholarkg::kg::{export_underscored_corpus, parse_ntriples};
use scholarkg::pipeline::{Pipeline, Stage};
use scholarkg::relation::import_curated_map;
use scholarkg::SupportedTriple;

#[derive(Parser)]
#[command(name = "scholarkg", version, about = "Build a scholarly knowledge graph from annotated abstracts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline, or a range of its stages.
    Run(RunArgs),
    /// Print the relation clusters as an editable `verb<TAB>representative` file.
    ExportClusters {
        #[command(flatten)]
        common: ConfigArgs,
        /// Write here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Validate a curated relation map and re-run from the map stage with it.
    ImportMap {
        #[command(flatten)]
        common: ConfigArgs,
        /// Curated `verb<TAB>representative` file.
        #[arg(long)]
        map: PathBuf,
    },
    /// Score triples against a gold standard.
    Evaluate(EvaluateArgs),
    /// Write the sentences with multi-word entities joined by underscores.
    ExportCorpus {
        #[command(flatten)]
        common: ConfigArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// `key = value` pipeline configuration.
    #[arg(long)]
    config: PathBuf,
    /// Read earlier checkpoints from this directory.
    #[arg(long)]
    from_checkpoint: Option<PathBuf>,
    /// Override the configured output directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: ConfigArgs,
    /// First stage to run; earlier stages are read from checkpoints.
    #[arg(long)]
    stage: Option<Stage>,
    /// Last stage to run (default: serialize).
    #[arg(long)]
    until: Option<Stage>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    min_support: Option<usize>,
    #[arg(long)]
    silhouette_target: Option<f64>,
    #[arg(long)]
    gate_threshold: Option<f64>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// `subject<TAB>relation<TAB>object<TAB>true|false` rows.
    #[arg(long)]
    gold: PathBuf,
    /// Score a serialized graph as a whole.
    #[arg(long, conflicts_with_all = ["memberships", "sidecar"])]
    graph: Option<PathBuf>,
    /// Namespace the graph was written under.
    #[arg(long, requires = "graph")]
    namespace: Option<String>,
    /// Score each method combination from a `method<TAB>s<TAB>p<TAB>o` file.
    #[arg(long, conflicts_with = "sidecar")]
    memberships: Option<PathBuf>,
    /// Score each method combination from a provenance sidecar.
    #[arg(long)]
    sidecar: Option<PathBuf>,
    /// Support threshold deciding PoS membership when reading a sidecar.
    #[arg(long, default_value_t = 10)]
    min_support: usize,
}

fn load_config(args: &ConfigArgs) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::load(&args.config).with_context(|| format!("loading {}", args.config.display()))?;
    if let Some(dir) = &args.output_dir {
        cfg.output_dir = dir.clone();
    }
    Ok(cfg)
}

fn pipeline(args: &ConfigArgs, cfg: PipelineConfig) -> Pipeline {
    let p = Pipeline::new(cfg);
    match &args.from_checkpoint {
        Some(dir) => p.resume_from(dir),
        None => p,
    }
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = load_config(&args.common)?;
    if let Some(seed) = args.seed {
        cfg.classifier.seed = seed;
    }
    if let Some(n) = args.min_support {
        cfg.min_support = n;
    }
    if let Some(t) = args.silhouette_target {
        cfg.silhouette_target = t;
    }
    if let Some(t) = args.gate_threshold {
        cfg.gate_threshold = t;
    }
    cfg.validate()?;
    let first = args.stage.unwrap_or(Stage::Ingest);
    let last = args.until.unwrap_or(Stage::Serialize);
    let summary = pipeline(&args.common, cfg).run_range(first, last)?;
    print!("{summary}");
    Ok(())
}

fn import_map(common: ConfigArgs, map: &Path) -> Result<()> {
    let mut cfg = load_config(&common)?;
    let mut probe = pipeline(&common, cfg.clone());
    let known = probe.known_relations().context("reading the collapse checkpoint")?;
    import_curated_map(map, &known)?;
    cfg.curated_map = Some(map.to_path_buf());
    let summary = pipeline(&common, cfg).run_range(Stage::Map, Stage::Serialize)?;
    print!("{summary}");
    Ok(())
}

fn evaluate_cmd(args: EvaluateArgs) -> Result<()> {
    let gold = GoldStandard::new(&load_gold_standard(&args.gold)?)?;
    println!("method\tP\tR\tF\tTP\tFP\tFN");
    if let Some(graph) = &args.graph {
        let Some(ns) = &args.namespace else {
            bail!("--graph needs --namespace");
        };
        let text = fs::read_to_string(graph).with_context(|| format!("reading {}", graph.display()))?;
        let keys = parse_ntriples(&text, ns)?;
        println!("{}", report_row("graph", &evaluate(&keys, &gold)));
        return Ok(());
    }
    let memberships = if let Some(m) = &args.memberships {
        let m = load_memberships(m)?;
        let summary = check_gold_universe(&gold, &m)?;
        log::info!("{} unique triples over {} memberships", summary.unique, summary.memberships);
        m
    } else if let Some(s) = &args.sidecar {
        let text = fs::read_to_string(s).with_context(|| format!("reading {}", s.display()))?;
        let triples = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str::<SupportedTriple>)
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("parsing {}", s.display()))?;
        method_memberships(&triples, args.min_support)
    } else {
        bail!("one of --graph, --memberships or --sidecar is required");
    };
    for (name, report) in evaluate_combinations(&memberships, &gold) {
        println!("{}", report_row(&name, &report));
    }
    Ok(())
}

fn export_corpus(common: ConfigArgs, output: &Path) -> Result<()> {
    let cfg = load_config(&common)?;
    let sentences = load_sentence_annotations(&cfg.annotations)?;
    let entities: BTreeSet<&str> = sentences
        .iter()
        .flat_map(|s| s.entities.iter().map(|e| e.label.as_str()))
        .collect();
    fs::write(output, export_underscored_corpus(&sentences, entities))
        .with_context(|| format!("writing {}", output.display()))?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::ExportClusters { common, output } => {
            load_config(&common).and_then(|cfg| {
                let text = pipeline(&common, cfg).export_clusters()?;
                match output {
                    Some(p) => fs::write(&p, text).with_context(|| format!("writing {}", p.display())),
                    None => {
                        print!("{text}");
                        Ok(())
                    }
                }
            })
        }
        Command::ImportMap { common, map } => import_map(common, &map),
        Command::Evaluate(args) => evaluate_cmd(args),
        Command::ExportCorpus { common, output } => export_corpus(common, &output),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
