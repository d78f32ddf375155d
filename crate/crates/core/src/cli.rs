//! Command line front end. Every subcommand writes its outputs atomically
//! into `--out` together with the `run_config.json` that produced them.

use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use tracing::{info, warn};

use crate::config::{RunConfig, ThresholdSource};
use crate::corpus::{bucket_key, load_mentions, partition_by_window, MentionRecord};
use crate::coref::{
    assignments_from_rows, clustering_metrics, coref_corpus, embed_mentions, read_clusters, singleton_assignment,
    write_clusters, write_prototypes, ClusterAssignment,
};
use crate::disambig::{
    accuracy, read_decisions, resolve_corpus, sweep_no_match_threshold, write_decisions, AccuracyScope, Decision,
    MentionDecision, SweepResult,
};
use crate::encode::{bridge::serve_hash_bridge, EmbeddingVector, EncoderHandle, EncoderKind};
use crate::error::{Error, Result};
use crate::io::{read_json, read_jsonl, write_atomic, write_json_pretty, write_jsonl};
use crate::kb::{build_index, load_qrank, prune_kb, EntityCandidate, EntityTemplate, KbIndex, QrankTable};
use crate::mine::{
    entity_universe, load_families, load_groups, load_link_records, mine_coref_pairs, mine_disambig_pairs, write_pairs,
    PairExample,
};

pub const TEMPLATES_FILE: &str = "templates.jsonl";
pub const PRUNE_REPORT_FILE: &str = "prune_report.json";
pub const INDEX_FILE: &str = "index.bin";
pub const INDEX_META_FILE: &str = "index_meta.json";
pub const CLUSTERS_FILE: &str = "clusters.tsv";
pub const PROTOTYPES_FILE: &str = "prototypes.tsv";
pub const DECISIONS_FILE: &str = "decisions.tsv";
pub const EVAL_REPORT_FILE: &str = "eval_report.json";
pub const THRESHOLD_FILE: &str = "threshold.json";

#[derive(Debug, Parser)]
#[command(name = "histlink", version, about = "Link person mentions in dated text to a knowledgebase")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Start from a saved run_config.json; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub encoder: Option<EncoderKind>,
    /// host:port, tcp://host:port or exec:COMMAND.
    #[arg(long, global = true, env = "HISTLINK_BRIDGE_ENDPOINT")]
    pub bridge_endpoint: Option<String>,
    #[arg(long, global = true)]
    pub bridge_retries: Option<u32>,
    /// Hash encoder dimension [default: 256].
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    #[arg(long, global = true)]
    pub marker_open: Option<String>,
    #[arg(long, global = true)]
    pub marker_close: Option<String>,
    /// Encoder window in whitespace tokens [default: 256].
    #[arg(long, global = true)]
    pub window_tokens: Option<usize>,
    /// Date partition width in days; 0 = single day [default: 0].
    #[arg(long, global = true)]
    pub window_days: Option<u32>,
    /// Average-linkage cosine distance cut [default: 0.15].
    #[arg(long, global = true)]
    pub cluster_threshold: Option<f64>,
    /// Minimum top-1 cosine similarity for a link.
    #[arg(long, global = true, conflicts_with = "threshold_file")]
    pub no_match_threshold: Option<f64>,
    /// Take the no-match threshold from a `sweep` output.
    #[arg(long, global = true)]
    pub threshold_file: Option<PathBuf>,
    /// Near-tie band in cosine distance [default: 0.01].
    #[arg(long, global = true)]
    pub margin: Option<f64>,
    /// Neighbours retrieved per query [default: 16].
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Resolve every mention on its own instead of per cluster.
    #[arg(long, global = true)]
    pub no_coref: bool,
    /// Link near-ties to the nearest neighbour instead of the most popular.
    #[arg(long, global = true)]
    pub no_qrank: bool,
    /// Keep people born after the end of the corpus.
    #[arg(long, global = true)]
    pub no_birth_filter: bool,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mine contrastive training pairs from hyperlink records.
    Mine {
        #[arg(long)]
        links: Option<PathBuf>,
        #[arg(long)]
        groups: Option<PathBuf>,
        #[arg(long)]
        families: Option<PathBuf>,
        /// Templates for mention-template pairs; without them only mention pairs are mined.
        #[arg(long)]
        templates: Option<PathBuf>,
        #[arg(long)]
        positives: Option<usize>,
        #[arg(long)]
        negatives: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Prune knowledgebase candidates and render their templates.
    BuildKb {
        #[arg(long)]
        candidates: Option<PathBuf>,
        #[arg(long)]
        qrank: Option<PathBuf>,
        /// Last date of the corpus; defaults to the latest mention date in --mentions.
        #[arg(long)]
        corpus_end: Option<NaiveDate>,
        #[arg(long)]
        mentions: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Embed templates into a flat inner-product index.
    Index {
        #[arg(long)]
        templates: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cluster mentions within date partitions.
    Coref {
        #[arg(long)]
        mentions: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Link clusters (or single mentions) to the knowledgebase.
    Resolve {
        #[arg(long)]
        mentions: Option<PathBuf>,
        #[arg(long)]
        clusters: Option<PathBuf>,
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        qrank: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score decisions and clusters against gold labels.
    Eval {
        #[arg(long)]
        mentions: Option<PathBuf>,
        #[arg(long)]
        decisions: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pick the no-match threshold on labelled validation mentions.
    Sweep {
        #[arg(long)]
        mentions: Option<PathBuf>,
        #[arg(long)]
        clusters: Option<PathBuf>,
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        qrank: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the hash encoder over the bridge protocol on stdin/stdout.
    #[command(hide = true)]
    BridgeStub,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Mine { .. } => "mine",
            Command::BuildKb { .. } => "build-kb",
            Command::Index { .. } => "index",
            Command::Coref { .. } => "coref",
            Command::Resolve { .. } => "resolve",
            Command::Eval { .. } => "eval",
            Command::Sweep { .. } => "sweep",
            Command::BridgeStub => "bridge-stub",
        }
    }
}

/// Merges the config file (if any), the global flags and the subcommand's paths.
pub fn configure(cli: &Cli) -> Result<RunConfig> {
    let g = &cli.global;
    let mut cfg = match &g.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.command = cli.command.name().to_string();
    macro_rules! set {
        ($($field:ident),*) => {$(
            if let Some(v) = g.$field.clone() {
                cfg.$field = v;
            }
        )*};
    }
    set!(encoder, bridge_retries, dim, window_tokens, window_days, cluster_threshold, margin, k, seed);
    if let Some(ep) = &g.bridge_endpoint {
        cfg.bridge_endpoint = Some(ep.clone());
    }
    if let Some(m) = &g.marker_open {
        cfg.markers.open = m.clone();
    }
    if let Some(m) = &g.marker_close {
        cfg.markers.close = m.clone();
    }
    if let Some(t) = g.no_match_threshold {
        cfg.no_match_threshold = Some(t);
        cfg.threshold_source = ThresholdSource::Flag;
    }
    if let Some(p) = &g.threshold_file {
        let sweep: SweepReport = read_json(p)?;
        cfg.no_match_threshold = Some(sweep.result.threshold);
        cfg.threshold_source = ThresholdSource::Sweep { path: p.clone() };
    }
    cfg.use_coref &= !g.no_coref;
    cfg.use_qrank &= !g.no_qrank;
    cfg.use_birth_filter &= !g.no_birth_filter;

    match &cli.command {
        Command::Mine { links, groups, families, templates, positives, negatives, out } => {
            cfg.set_path("links", links.clone());
            cfg.set_path("groups", groups.clone());
            cfg.set_path("families", families.clone());
            cfg.set_path("templates", templates.clone());
            cfg.set_path("out", out.clone());
            if let Some(n) = positives {
                cfg.positives = *n;
            }
            if let Some(n) = negatives {
                cfg.negatives = *n;
            }
        }
        Command::BuildKb { candidates, qrank, corpus_end, mentions, out } => {
            cfg.set_path("candidates", candidates.clone());
            cfg.set_path("qrank", qrank.clone());
            cfg.set_path("mentions", mentions.clone());
            cfg.set_path("out", out.clone());
            if corpus_end.is_some() {
                cfg.corpus_end = *corpus_end;
            }
        }
        Command::Index { templates, out } => {
            cfg.set_path("templates", templates.clone());
            cfg.set_path("out", out.clone());
        }
        Command::Coref { mentions, out } => {
            cfg.set_path("mentions", mentions.clone());
            cfg.set_path("out", out.clone());
        }
        Command::Resolve { mentions, clusters, index, qrank, out }
        | Command::Sweep { mentions, clusters, index, qrank, out } => {
            cfg.set_path("mentions", mentions.clone());
            cfg.set_path("clusters", clusters.clone());
            cfg.set_path("index", index.clone());
            cfg.set_path("qrank", qrank.clone());
            cfg.set_path("out", out.clone());
        }
        Command::Eval { mentions, decisions, out } => {
            cfg.set_path("mentions", mentions.clone());
            cfg.set_path("decisions", decisions.clone());
            cfg.set_path("out", out.clone());
        }
        Command::BridgeStub => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.global.jobs {
        if jobs == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        // a second call in the same process (tests) keeps the first pool
        if rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().is_err() {
            warn!(jobs, "worker pool already initialised");
        }
    }
    let cfg = configure(&cli)?;
    match cli.command {
        Command::Mine { .. } => cmd_mine(&cfg),
        Command::BuildKb { .. } => cmd_build_kb(&cfg),
        Command::Index { .. } => cmd_index(&cfg),
        Command::Coref { .. } => cmd_coref(&cfg),
        Command::Resolve { .. } => cmd_resolve(&cfg),
        Command::Eval { .. } => cmd_eval(&cfg).map(|_| ()),
        Command::Sweep { .. } => cmd_sweep(&cfg).map(|_| ()),
        Command::BridgeStub => {
            let stdin = std::io::stdin();
            serve_hash_bridge(stdin.lock(), std::io::stdout().lock(), cfg.dim).map_err(|e| Error::io("<stdio>", e))
        }
    }
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let out = cfg.require_path("out")?.to_path_buf();
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    Ok(out)
}

fn load_corpus(cfg: &RunConfig) -> Result<Vec<MentionRecord>> {
    let ms = load_mentions(cfg.require_path("mentions")?)?;
    info!(mentions = ms.len(), "corpus loaded");
    Ok(ms)
}

fn load_qrank_opt(cfg: &RunConfig) -> Result<QrankTable> {
    match cfg.path("qrank") {
        Some(p) => {
            let t = load_qrank(p)?;
            info!(entries = t.len(), "qrank loaded");
            Ok(t)
        }
        None => {
            if cfg.use_qrank {
                warn!("no qrank table given; every entity has rank 0");
            }
            Ok(QrankTable::default())
        }
    }
}

pub fn cmd_mine(cfg: &RunConfig) -> Result<()> {
    let out = out_dir(cfg)?;
    let records = load_link_records(cfg.require_path("links")?)?;
    let groups = cfg.path("groups").map(load_groups).transpose()?.unwrap_or_default();
    let families = cfg.path("families").map(load_families).transpose()?.unwrap_or_default();
    let templates: BTreeMap<String, EntityTemplate> = match cfg.path("templates") {
        Some(p) => read_jsonl::<EntityTemplate>(p)?.into_iter().map(|t| (t.qid.clone(), t)).collect(),
        None => BTreeMap::new(),
    };
    info!(records = records.len(), groups = groups.len(), families = families.len(), templates = templates.len(), "mining inputs loaded");
    let mcfg = cfg.mine()?;
    let universe = entity_universe(&records, &groups, &families, templates.keys());
    let splits = crate::mine::split_by_entity(&universe, mcfg.split_ratios, mcfg.seed)?;

    let (coref_pairs, coref_report) = mine_coref_pairs(&records, &groups, &families, &splits, &mcfg)?;
    write_pairs(&out.join("coref_pairs.tsv"), &coref_pairs)?;
    write_jsonl(&out.join("coref_pairs.meta.jsonl"), &pair_meta(&coref_pairs))?;
    let mut reports = BTreeMap::from([("coref", coref_report)]);
    if !templates.is_empty() {
        let (pairs, report) = mine_disambig_pairs(&records, &templates, &groups, &families, &splits, &mcfg)?;
        write_pairs(&out.join("disambig_pairs.tsv"), &pairs)?;
        write_jsonl(&out.join("disambig_pairs.meta.jsonl"), &pair_meta(&pairs))?;
        reports.insert("disambig", report);
    }
    write_atomic(&out.join("splits.tsv"), |w| {
        writeln!(w, "qid\tsplit")?;
        for (q, s) in &splits {
            writeln!(w, "{q}\t{s}")?;
        }
        Ok(())
    })?;
    write_json_pretty(&out.join("mine_report.json"), &reports)?;
    cfg.save_in(&out)
}

#[derive(Serialize)]
struct PairMeta<'a> {
    kind: crate::mine::PairKind,
    split: crate::mine::Split,
    qid_a: &'a str,
    qid_b: &'a str,
}

fn pair_meta(pairs: &[PairExample]) -> Vec<PairMeta<'_>> {
    pairs
        .iter()
        .map(|p| PairMeta { kind: p.kind, split: p.split, qid_a: &p.qid_a, qid_b: &p.qid_b })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PruneReport {
    pub corpus_end: NaiveDate,
    pub birth_filter: bool,
    pub candidates: usize,
    pub kept: usize,
    pub rejected: BTreeMap<String, String>,
}

pub fn cmd_build_kb(cfg: &RunConfig) -> Result<()> {
    let out = out_dir(cfg)?;
    let corpus_end = match (cfg.corpus_end, cfg.path("mentions")) {
        (Some(d), _) => d,
        (None, Some(p)) => load_mentions(p)?
            .iter()
            .filter_map(|m| m.date)
            .max()
            .ok_or_else(|| Error::Config("no dated mentions to infer --corpus-end from".into()))?,
        (None, None) => return Err(Error::Config("build-kb needs --corpus-end or --mentions".into())),
    };
    let candidates: Vec<EntityCandidate> = read_jsonl(cfg.require_path("candidates")?)?;
    let qrank = load_qrank_opt(cfg)?;
    let outcome = prune_kb(&candidates, &cfg.prune(corpus_end));
    let mut templates = outcome.kept;
    for t in &mut templates {
        t.qrank = qrank.rank(&t.qid);
    }
    info!(candidates = candidates.len(), kept = templates.len(), rejected = outcome.rejected.len(), %corpus_end, "knowledgebase pruned");
    write_jsonl(&out.join(TEMPLATES_FILE), &templates)?;
    let report = PruneReport {
        corpus_end,
        birth_filter: cfg.use_birth_filter,
        candidates: candidates.len(),
        kept: templates.len(),
        rejected: outcome.rejected.iter().map(|(q, r)| (q.clone(), r.to_string())).collect(),
    };
    write_json_pretty(&out.join(PRUNE_REPORT_FILE), &report)?;
    let mut saved = cfg.clone();
    saved.corpus_end = Some(corpus_end);
    saved.save_in(&out)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct IndexMeta {
    pub model_name: String,
    pub dim: usize,
    pub entries: usize,
}

pub fn cmd_index(cfg: &RunConfig) -> Result<()> {
    let out = out_dir(cfg)?;
    let templates: Vec<EntityTemplate> = read_jsonl(cfg.require_path("templates")?)?;
    info!(templates = templates.len(), "templates loaded");
    let enc = cfg.encoder()?;
    let idx = build_index(&templates, &enc)?;
    idx.save(&out.join(INDEX_FILE))?;
    write_json_pretty(
        &out.join(INDEX_META_FILE),
        &IndexMeta { model_name: enc.model_name(), dim: idx.dim(), entries: idx.len() },
    )?;
    cfg.save_in(&out)
}

pub fn cmd_coref(cfg: &RunConfig) -> Result<()> {
    let out = out_dir(cfg)?;
    let ms = load_corpus(cfg)?;
    let enc = cfg.encoder()?;
    let assignments = coref_corpus(&ms, &enc, &cfg.coref(), cfg.window_days)?;
    write_clusters(&out.join(CLUSTERS_FILE), &assignments)?;
    write_prototypes(&out.join(PROTOTYPES_FILE), &assignments)?;
    cfg.save_in(&out)
}

fn load_index(cfg: &RunConfig, enc: &EncoderHandle) -> Result<KbIndex> {
    let idx = KbIndex::load(cfg.require_path("index")?)?;
    if idx.dim() != enc.dim() {
        return Err(Error::Config(format!(
            "index has dim {} but the encoder produces dim {}",
            idx.dim(),
            enc.dim()
        )));
    }
    Ok(idx)
}

/// Embeds every mention with the disambiguation encoder and builds the
/// clusters to resolve: the coreference clusters re-pooled over those
/// embeddings, or singletons when coreference is off.
fn resolution_inputs(
    cfg: &RunConfig,
    ms: &[MentionRecord],
    enc: &EncoderHandle,
) -> Result<(Vec<ClusterAssignment>, BTreeMap<String, EmbeddingVector>)> {
    let refs: Vec<&MentionRecord> = ms.iter().collect();
    let vectors: BTreeMap<String, EmbeddingVector> = if refs.is_empty() {
        BTreeMap::new()
    } else {
        refs.iter().map(|m| m.mention_id.clone()).zip(embed_mentions(&refs, enc, &cfg.coref())?).collect()
    };
    let assignments = if cfg.use_coref {
        let rows = read_clusters(cfg.require_path("clusters")?)?;
        let mut seen = HashSet::with_capacity(rows.len());
        for r in &rows {
            if !seen.insert(r.mention_id.as_str()) {
                return Err(Error::Validation(format!("mention {} appears twice in the cluster file", r.mention_id)));
            }
            if !vectors.contains_key(&r.mention_id) {
                return Err(Error::Validation(format!("clustered mention {} is not in the corpus", r.mention_id)));
            }
        }
        if let Some(m) = ms.iter().find(|m| !seen.contains(m.mention_id.as_str())) {
            return Err(Error::Validation(format!("mention {} has no cluster", m.mention_id)));
        }
        let mut a = assignments_from_rows(&rows, None)?;
        for x in &mut a {
            x.repool(&vectors, true)?;
        }
        a
    } else {
        partition_by_window(ms, cfg.window_days)
            .into_iter()
            .map(|(date, part)| {
                let vs: Vec<EmbeddingVector> = part.iter().map(|m| vectors[&m.mention_id].clone()).collect();
                singleton_assignment(date, &part, &vs, true)
            })
            .collect::<Result<Vec<_>>>()?
    };
    info!(
        clusters = assignments.iter().map(|a| a.clusters.len()).sum::<usize>(),
        mentions = vectors.len(),
        coref = cfg.use_coref,
        "resolution queries ready"
    );
    Ok((assignments, vectors))
}

pub fn cmd_resolve(cfg: &RunConfig) -> Result<()> {
    let dcfg = cfg.disambig()?;
    let out = out_dir(cfg)?;
    let ms = load_corpus(cfg)?;
    let enc = cfg.encoder()?;
    let idx = load_index(cfg, &enc)?;
    let qrank = load_qrank_opt(cfg)?;
    let (assignments, vectors) = resolution_inputs(cfg, &ms, &enc)?;
    let decisions = resolve_corpus(&assignments, &idx, &dcfg, &qrank, Some(&vectors))?;
    write_decisions(&out.join(DECISIONS_FILE), &decisions)?;
    cfg.save_in(&out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mentions: usize,
    pub in_kb_mentions: usize,
    pub accuracy_all: f64,
    pub accuracy_in_kb: f64,
    pub ari: f64,
    pub pairwise_precision: f64,
    pub pairwise_recall: f64,
    pub pairwise_f1: f64,
}

fn gold_decisions(ms: &[MentionRecord]) -> Result<BTreeMap<String, Decision>> {
    ms.iter()
        .map(|m| {
            let g = m
                .gold_qid
                .as_deref()
                .ok_or_else(|| Error::Validation(format!("mention {} has no gold label", m.mention_id)))?;
            Ok((m.mention_id.clone(), Decision::parse(g)))
        })
        .collect()
}

/// Accuracy against gold qids and clustering agreement against gold
/// identities within date partitions.
pub fn evaluate(ms: &[MentionRecord], decisions: &BTreeMap<String, MentionDecision>, window_days: u32) -> Result<EvalReport> {
    let gold = gold_decisions(ms)?;
    let predicted: BTreeMap<String, Decision> = decisions.iter().map(|(k, d)| (k.clone(), d.decision.clone())).collect();
    let accuracy_all = accuracy(&predicted, &gold, AccuracyScope::All)?;
    let accuracy_in_kb = accuracy(&predicted, &gold, AccuracyScope::InKb)?;

    let mut pred_labels = Vec::with_capacity(ms.len());
    let mut gold_labels = Vec::with_capacity(ms.len());
    for m in ms {
        pred_labels.push(decisions[&m.mention_id].cluster_id.as_str());
        let identity = m.gold_identity().expect("gold checked above");
        gold_labels.push((bucket_key(m.date, i64::from(window_days)), identity));
    }
    let cm = clustering_metrics(&pred_labels, &gold_labels)?;
    let report = EvalReport {
        mentions: gold.len(),
        in_kb_mentions: gold.values().filter(|g| **g != Decision::NotInKb).count(),
        accuracy_all,
        accuracy_in_kb,
        ari: cm.ari,
        pairwise_precision: cm.pairwise_precision,
        pairwise_recall: cm.pairwise_recall,
        pairwise_f1: cm.pairwise_f1,
    };
    info!(?report, "evaluation done");
    Ok(report)
}

pub fn cmd_eval(cfg: &RunConfig) -> Result<EvalReport> {
    let ms = load_corpus(cfg)?;
    let decisions = read_decisions(cfg.require_path("decisions")?)?;
    let report = evaluate(&ms, &decisions, cfg.window_days)?;
    println!("accuracy_all\t{:.4}", report.accuracy_all);
    println!("accuracy_in_kb\t{:.4}", report.accuracy_in_kb);
    println!("ari\t{:.4}", report.ari);
    println!("pairwise_precision\t{:.4}", report.pairwise_precision);
    println!("pairwise_recall\t{:.4}", report.pairwise_recall);
    println!("pairwise_f1\t{:.4}", report.pairwise_f1);
    if cfg.path("out").is_some() {
        let out = out_dir(cfg)?;
        write_json_pretty(&out.join(EVAL_REPORT_FILE), &report)?;
        cfg.save_in(&out)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    #[serde(flatten)]
    pub result: SweepResult,
    pub mentions: usize,
}

/// Resolves labelled mentions with no threshold and picks the cut-off on
/// top similarity that best separates correct links from wrong ones.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<SweepReport> {
    let out = out_dir(cfg)?;
    let ms = load_corpus(cfg)?;
    let gold = gold_decisions(&ms)?;
    let enc = cfg.encoder()?;
    let idx = load_index(cfg, &enc)?;
    let qrank = load_qrank_opt(cfg)?;
    let (assignments, vectors) = resolution_inputs(cfg, &ms, &enc)?;
    let mut open = cfg.clone();
    open.no_match_threshold = Some(-1.0);
    let decisions = resolve_corpus(&assignments, &idx, &open.disambig()?, &qrank, Some(&vectors))?;
    let labelled: Vec<(f64, bool)> = decisions
        .values()
        .map(|d| (d.top_similarity, d.decision == gold[&d.mention_id]))
        .collect();
    let result = sweep_no_match_threshold(&labelled)?;
    info!(threshold = result.threshold, precision = result.precision, recall = result.recall, "threshold chosen");
    let report = SweepReport { result, mentions: labelled.len() };
    write_json_pretty(&out.join(THRESHOLD_FILE), &report)?;
    cfg.save_in(&out)?;
    Ok(report)
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 3 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            tracing::error!("{e}");
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
