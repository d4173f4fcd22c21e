//! Operator surface: subcommands for ingesting triples, deriving networks,
//! precomputing summaries, running queries and benchmark workloads, and the
//! bookmark-prediction evaluation. Benchmarks emit plot-ready CSV; one row
//! per query, order preserved, deterministic apart from wall-clock times.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::approx::{
    build_summaries, write_histogram_file, write_summary_file, BoundEstimator, EstimatorKind,
    SummaryStore,
};
use crate::engine::{self, CostModel, EngineConfig, QueryOutcome};
use crate::graph::{ProximityFunction, SocialNetwork};
use crate::ids::Vocab;
use crate::netgen::{self, SimilaritySpec};
use crate::scoring::{QueryContext, RankingFunction, Semantics, DEFAULT_BM15_K1};
use crate::store::TaggingStore;
use crate::synth;
use crate::{Error, Result};

/// Fixed CSV column set for workload reports. Everything except `wall_ms`
/// is deterministic for a given seed and input.
pub const CSV_HEADER: &str = "algorithm,seeker,tags,k,alpha,delta,users_visited,seqitems,cost,wall_ms,results,precision_vs_exact,speedup_vs_exact";

/// Canonical workload file header (tab-separated).
pub const WORKLOAD_HEADER: &str =
    "algorithm\tseeker\ttags\tk\talpha\tdelta\tranking\tproximity\tsemantics";

#[derive(Parser, Debug)]
#[command(
    name = "tagseek",
    version,
    about = "Network-aware top-k retrieval over social tagging data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Load a tagging triple file and print corpus statistics.
    Ingest {
        /// TSV file of user, item, tag triples (optional fourth column is
        /// ignored).
        triples: PathBuf,
    },
    /// Derive a similarity network from tagging behaviour and write it as
    /// an edge file.
    GenNetwork {
        triples: PathBuf,
        /// Where to write the edge file.
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        basis: BasisArg,
        /// Tags basis: exclude users with fewer distinct tags than this.
        #[arg(long, default_value_t = 10)]
        min_distinct_tags: usize,
        /// Drop edges whose Dice weight does not exceed this.
        #[arg(long, default_value_t = 0.0)]
        weight_floor: f64,
    },
    /// Precompute per-seeker proximity summaries and histograms for
    /// approximate search.
    BuildSummaries {
        /// Network edge file.
        network: PathBuf,
        /// Where to write the moment summaries.
        #[arg(long)]
        summaries: PathBuf,
        /// Where to write the histograms.
        #[arg(long)]
        histograms: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        proximity: ProximityArg,
        /// Path-length penalty for pow proximity.
        #[arg(long, default_value_t = 2.0)]
        lambda: f64,
        /// Positive-range bucket count; default scales with sqrt of the
        /// reachable-user count.
        #[arg(long)]
        buckets: Option<usize>,
    },
    /// Run one query and print the ranked items.
    Query {
        #[arg(long)]
        triples: PathBuf,
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        seeker: String,
        /// Query tags, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        tags: Vec<String>,
        #[arg(short, long, default_value_t = 10)]
        k: usize,
        /// Textual-social blend: 0 is purely social, 1 purely textual.
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t)]
        algorithm: AlgorithmArg,
        /// Failure budget for approximate algorithms; 0 means exact.
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        /// Moment summary file (needed by mvar with delta > 0).
        #[arg(long)]
        summaries: Option<PathBuf>,
        /// Histogram file (needed by hist with delta > 0).
        #[arg(long)]
        histograms: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        ranking: RankingArg,
        /// Saturation constant for bm15 ranking.
        #[arg(long, default_value_t = DEFAULT_BM15_K1)]
        bm15_k1: f64,
        /// Clamp negative idf values to zero.
        #[arg(long)]
        idf_floor: bool,
        #[arg(long, value_enum, default_value_t)]
        proximity: ProximityArg,
        #[arg(long, default_value_t = 2.0)]
        lambda: f64,
        #[arg(long, value_enum, default_value_t)]
        semantics: SemanticsArg,
        /// Keep refining until every returned score is exact.
        #[arg(long)]
        exact_scores: bool,
        /// Count the seeker's own taggings into social frequency.
        #[arg(long)]
        include_seeker_sf: bool,
    },
    /// Execute a workload file against a dataset, or a seeded synthetic
    /// benchmark, and write the CSV report.
    Bench {
        /// Workload TSV; omit to run the synthetic benchmark instead.
        #[arg(long)]
        workload: Option<PathBuf>,
        #[arg(long, required_unless_present = "workload")]
        seed: Option<u64>,
        #[arg(long)]
        triples: Option<PathBuf>,
        #[arg(long)]
        network: Option<PathBuf>,
        #[arg(long)]
        summaries: Option<PathBuf>,
        #[arg(long)]
        histograms: Option<PathBuf>,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Synthetic mode: number of users.
        #[arg(long, default_value_t = 2000)]
        users: usize,
        #[arg(long, default_value_t = 1200)]
        items: usize,
        #[arg(long, default_value_t = 60)]
        tags: usize,
        #[arg(long, default_value_t = 45)]
        max_user_activity: usize,
        /// Synthetic mode: number of distinct queries.
        #[arg(long, default_value_t = 20)]
        queries: usize,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        /// Synthetic mode: failure budget for the approximate rows.
        #[arg(long, default_value_t = 0.9)]
        delta: f64,
        /// Clamp negative idf values to zero (tfidf and bm15 rows).
        #[arg(long)]
        idf_floor: bool,
    },
    /// Sample (user, tag) pairs and measure how often personalized search
    /// retrieves an item the seeker actually tagged, against a
    /// popularity-only baseline.
    PredictEval {
        #[arg(long)]
        triples: PathBuf,
        #[arg(long)]
        network: PathBuf,
        /// How many (user, tag) pairs to sample.
        #[arg(long, default_value_t = 200)]
        pairs: usize,
        /// Result sizes to evaluate, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 3, 5])]
        k: Vec<usize>,
        /// Popularity band: only tags applied to at least this many items.
        #[arg(long, default_value_t = 1)]
        min_tag_items: usize,
        /// Popularity band upper end; 0 means unbounded.
        #[arg(long, default_value_t = 0)]
        max_tag_items: usize,
        /// Proximity functions to evaluate, comma separated.
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [ProximityArg::Mul])]
        proximity: Vec<ProximityArg>,
        #[arg(long, default_value_t = 2.0)]
        lambda: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Report destination; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

// ---- argument vocabularies ----

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AlgorithmArg {
    /// Lazy exact search.
    #[default]
    Topks,
    /// Materialised-baseline exact search.
    Contextmerge,
    /// Approximate search with moment estimates.
    Mvar,
    /// Approximate search with histogram estimates.
    Hist,
    /// Full-scan reference.
    Oracle,
}

impl AlgorithmArg {
    pub fn token(self) -> &'static str {
        match self {
            AlgorithmArg::Topks => "topks",
            AlgorithmArg::Contextmerge => "contextmerge",
            AlgorithmArg::Mvar => "mvar",
            AlgorithmArg::Hist => "hist",
            AlgorithmArg::Oracle => "oracle",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RankingArg {
    #[default]
    Identity,
    Tfidf,
    Bm15,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ProximityArg {
    #[default]
    Mul,
    Min,
    Pow,
}

impl ProximityArg {
    pub fn to_function(self, lambda: f64) -> ProximityFunction {
        match self {
            ProximityArg::Mul => ProximityFunction::Mul,
            ProximityArg::Min => ProximityFunction::Min,
            ProximityArg::Pow => ProximityFunction::Pow { lambda },
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SemanticsArg {
    #[default]
    Disjunctive,
    Conjunctive,
}

impl From<SemanticsArg> for Semantics {
    fn from(s: SemanticsArg) -> Semantics {
        match s {
            SemanticsArg::Disjunctive => Semantics::Disjunctive,
            SemanticsArg::Conjunctive => Semantics::Conjunctive,
        }
    }
}

fn value_enum_from_str<T: ValueEnum>(s: &str, what: &str) -> Result<T> {
    T::from_str(s, true).map_err(|_| Error::domain(format!("unknown {what} `{s}`")))
}

// ---- workload ----

/// One workload line, names unresolved.
#[derive(Debug, Clone)]
pub struct WorkloadRecord {
    pub algorithm: AlgorithmArg,
    pub seeker: String,
    pub tags: Vec<String>,
    pub k: usize,
    pub alpha: f64,
    pub delta: f64,
    pub ranking: RankingArg,
    pub bm15_k1: f64,
    pub proximity: ProximityArg,
    pub lambda: f64,
    pub semantics: SemanticsArg,
}

impl WorkloadRecord {
    /// Identity of the underlying query, ignoring algorithm and delta:
    /// rows sharing a key answer the same question different ways.
    fn query_key(&self) -> String {
        format!(
            "{}|{}|{}|{}|{:?}|{:?}:{}|{:?}",
            self.seeker,
            self.tags.join(","),
            self.k,
            self.alpha,
            self.ranking,
            self.proximity,
            self.lambda,
            self.semantics
        )
    }

    fn workload_line(&self) -> String {
        let proximity = match self.proximity {
            ProximityArg::Pow => format!("pow:{}", self.lambda),
            p => p
                .to_possible_value()
                .expect("no skipped variants")
                .get_name()
                .to_string(),
        };
        let ranking = match self.ranking {
            RankingArg::Bm15 => format!("bm15:{}", self.bm15_k1),
            r => r
                .to_possible_value()
                .expect("no skipped variants")
                .get_name()
                .to_string(),
        };
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.algorithm.token(),
            self.seeker,
            self.tags.join(","),
            self.k,
            self.alpha,
            self.delta,
            ranking,
            proximity,
            self.semantics
                .to_possible_value()
                .expect("no skipped variants")
                .get_name()
        )
    }
}

/// Parses a workload file: tab-separated with the canonical header line.
pub fn parse_workload(path: &Path) -> Result<Vec<WorkloadRecord>> {
    let text = fs::read_to_string(path).map_err(|e| {
        Error::config(format!("cannot read workload file {}: {e}", path.display()))
    })?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == WORKLOAD_HEADER => {}
        _ => {
            return Err(Error::parse(
                path,
                1,
                format!("expected header `{WORKLOAD_HEADER}`"),
            ))
        }
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 9 {
            return Err(Error::parse(path, lineno, "expected 9 tab-separated fields"));
        }
        let bad = |what: &str, val: &str| Error::parse(path, lineno, format!("bad {what} `{val}`"));
        let (ranking, bm15_k1) = match fields[6].split_once(':') {
            Some((name, k1)) => (
                value_enum_from_str::<RankingArg>(name, "ranking")
                    .map_err(|_| bad("ranking", fields[6]))?,
                k1.parse().map_err(|_| bad("bm15 constant", k1))?,
            ),
            None => (
                value_enum_from_str::<RankingArg>(fields[6], "ranking")
                    .map_err(|_| bad("ranking", fields[6]))?,
                DEFAULT_BM15_K1,
            ),
        };
        let (proximity, lambda) = match fields[7].split_once(':') {
            Some((name, l)) => (
                value_enum_from_str::<ProximityArg>(name, "proximity")
                    .map_err(|_| bad("proximity", fields[7]))?,
                l.parse().map_err(|_| bad("lambda", l))?,
            ),
            None => (
                value_enum_from_str::<ProximityArg>(fields[7], "proximity")
                    .map_err(|_| bad("proximity", fields[7]))?,
                2.0,
            ),
        };
        records.push(WorkloadRecord {
            algorithm: value_enum_from_str(fields[0], "algorithm")
                .map_err(|_| bad("algorithm", fields[0]))?,
            seeker: fields[1].to_string(),
            tags: fields[2].split(',').map(str::to_string).collect(),
            k: fields[3].parse().map_err(|_| bad("k", fields[3]))?,
            alpha: fields[4].parse().map_err(|_| bad("alpha", fields[4]))?,
            delta: fields[5].parse().map_err(|_| bad("delta", fields[5]))?,
            ranking,
            bm15_k1,
            proximity,
            lambda,
            semantics: value_enum_from_str(fields[8], "semantics")
                .map_err(|_| bad("semantics", fields[8]))?,
        });
    }
    Ok(records)
}

pub fn write_workload(path: &Path, records: &[WorkloadRecord]) -> Result<()> {
    let mut out = fs::File::create(path)?;
    writeln!(out, "{WORKLOAD_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.workload_line())?;
    }
    Ok(())
}

/// Everything a workload run reads.
pub struct Dataset<'a> {
    pub network: &'a SocialNetwork,
    pub store: &'a TaggingStore,
    pub vocab: &'a Vocab,
    pub summaries: Option<&'a SummaryStore>,
}

fn ranking_for(store: &TaggingStore, r: RankingArg, bm15_k1: f64, idf_floor: bool) -> Result<RankingFunction> {
    Ok(match r {
        RankingArg::Identity => RankingFunction::identity(),
        RankingArg::Tfidf => RankingFunction::tf_idf(store, idf_floor),
        RankingArg::Bm15 => RankingFunction::bm15(store, bm15_k1, idf_floor)?,
    })
}

fn run_record(
    data: &Dataset<'_>,
    record: &WorkloadRecord,
    idf_floor: bool,
) -> Result<QueryOutcome> {
    let seeker = data
        .vocab
        .lookup_user(&record.seeker)
        .ok_or_else(|| Error::NotFound {
            kind: "user",
            name: record.seeker.clone(),
        })?;
    let mut tags = Vec::with_capacity(record.tags.len());
    for t in &record.tags {
        tags.push(data.vocab.lookup_tag(t).ok_or_else(|| Error::NotFound {
            kind: "tag",
            name: t.clone(),
        })?);
    }
    let ranking = ranking_for(data.store, record.ranking, record.bm15_k1, idf_floor)?;
    let ctx = QueryContext::new(
        seeker,
        tags,
        record.k,
        record.alpha,
        ranking,
        record.semantics.into(),
    )?;
    let cfg = EngineConfig {
        proximity: record.proximity.to_function(record.lambda),
        ..EngineConfig::default()
    };
    match record.algorithm {
        AlgorithmArg::Topks => engine::top_k(data.network, data.store, &ctx, &cfg),
        AlgorithmArg::Contextmerge => {
            engine::top_k_materialized(data.network, data.store, &ctx, &cfg)
        }
        AlgorithmArg::Mvar | AlgorithmArg::Hist => {
            if record.delta > 0.0 && data.summaries.is_none() {
                return Err(Error::config(format!(
                    "algorithm {} with delta {} needs the --summaries and --histograms files",
                    record.algorithm.token(),
                    record.delta
                )));
            }
            let kind = if record.algorithm == AlgorithmArg::Mvar {
                EstimatorKind::Mvar
            } else {
                EstimatorKind::Hist
            };
            let est = BoundEstimator::for_query(
                kind,
                data.summaries,
                seeker,
                record.delta,
                ctx.tags.len(),
            )?;
            engine::top_k_estimated(data.network, data.store, &ctx, &cfg, est)
        }
        AlgorithmArg::Oracle => engine::oracle::full_scan(data.network, data.store, &ctx, &cfg),
    }
}

/// Runs every record in order and writes the CSV report. Precision and
/// speedup columns compare each row against the exact run of the same
/// query elsewhere in the workload (a topks row, or an oracle row if no
/// topks row exists); they stay empty when there is none.
pub fn run_workload(
    data: &Dataset<'_>,
    records: &[WorkloadRecord],
    idf_floor: bool,
    out: &mut dyn Write,
) -> Result<()> {
    let cost_model = CostModel::default();
    let mut outcomes = Vec::with_capacity(records.len());
    for record in records {
        outcomes.push(run_record(data, record, idf_floor)?);
    }

    // Pick each query's exact reference row.
    let mut reference: HashMap<String, usize> = HashMap::new();
    for (i, record) in records.iter().enumerate() {
        let key = record.query_key();
        match record.algorithm {
            AlgorithmArg::Topks => {
                let slot = reference.entry(key).or_insert(i);
                if records[*slot].algorithm != AlgorithmArg::Topks {
                    *slot = i;
                }
            }
            AlgorithmArg::Oracle => {
                reference.entry(key).or_insert(i);
            }
            _ => {}
        }
    }

    writeln!(out, "{CSV_HEADER}")?;
    for (i, (record, outcome)) in records.iter().zip(&outcomes).enumerate() {
        let cost = cost_model.cost(&outcome.stats);
        let results = outcome
            .items
            .iter()
            .map(|s| format!("{}:{}", data.vocab.item_name(s.item), s.score))
            .collect::<Vec<_>>()
            .join(";");
        let (precision, speedup) = match reference.get(&record.query_key()) {
            None => (String::new(), String::new()),
            Some(&r) => {
                let exact_items: std::collections::BTreeSet<_> =
                    outcomes[r].items.iter().map(|s| s.item).collect();
                let got: std::collections::BTreeSet<_> =
                    outcome.items.iter().map(|s| s.item).collect();
                let precision = if exact_items.is_empty() {
                    if got.is_empty() {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    got.intersection(&exact_items).count() as f64 / exact_items.len() as f64
                };
                let ref_cost = cost_model.cost(&outcomes[r].stats);
                let speedup = if cost == 0 {
                    if ref_cost == 0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    ref_cost as f64 / cost as f64 - 1.0
                };
                let _ = i;
                (precision.to_string(), speedup.to_string())
            }
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{:.3},{},{},{}",
            record.algorithm.token(),
            record.seeker,
            record.tags.join(";"),
            record.k,
            record.alpha,
            record.delta,
            outcome.stats.users_visited,
            outcome.stats.seqitems,
            cost,
            outcome.stats.wall.as_secs_f64() * 1e3,
            results,
            precision,
            speedup
        )?;
    }
    Ok(())
}

// ---- synthetic benchmark ----

/// Fully seeded benchmark: corpus, network, summaries, and workload are all
/// derived from `seed`, so two runs produce identical CSV apart from wall
/// times.
#[derive(Debug, Clone)]
pub struct SyntheticBench {
    pub users: usize,
    pub items: usize,
    pub tags: usize,
    pub max_user_activity: usize,
    pub queries: usize,
    pub k: usize,
    pub alpha: f64,
    pub delta: f64,
    pub seed: u64,
    pub idf_floor: bool,
}

impl Default for SyntheticBench {
    fn default() -> Self {
        SyntheticBench {
            users: 2000,
            items: 1200,
            tags: 60,
            max_user_activity: 45,
            queries: 20,
            k: 5,
            alpha: 0.0,
            delta: 0.9,
            seed: 7,
            idf_floor: false,
        }
    }
}

/// Builds the seeded corpus and the four-way workload (exact lazy, exact
/// materialised, both approximate variants per query).
pub fn synthetic_workload(
    cfg: &SyntheticBench,
) -> Result<(SocialNetwork, TaggingStore, Vocab, SummaryStore, Vec<WorkloadRecord>)> {
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let (store, vocab) = synth::power_law_corpus(
        &mut rng,
        cfg.users,
        cfg.items,
        cfg.tags,
        cfg.max_user_activity,
    );
    let (network, _) = netgen::build_network(&store, &SimilaritySpec::default())?;

    // Candidate seekers need both taggings and a network presence.
    let mut seekers: Vec<_> = store
        .users()
        .filter(|&u| network.contains(u) && store.tags_of_user(u).next().is_some())
        .collect();
    seekers.sort_unstable();
    let mut tags: Vec<_> = store.tags().collect();
    tags.sort_unstable();
    if seekers.is_empty() || tags.is_empty() {
        return Err(Error::domain(
            "synthetic corpus produced no usable seekers; raise activity or sizes",
        ));
    }

    let mut records = Vec::new();
    let mut sampled = Vec::new();
    for _ in 0..cfg.queries {
        let seeker = seekers[rng.gen_range(0..seekers.len())];
        let own: Vec<_> = store.tags_of_user(seeker).collect();
        let mut chosen = vec![own[rng.gen_range(0..own.len())]];
        if rng.gen_bool(0.5) {
            let extra = tags[rng.gen_range(0..tags.len())];
            if !chosen.contains(&extra) {
                chosen.push(extra);
            }
        }
        sampled.push(seeker);
        let base = WorkloadRecord {
            algorithm: AlgorithmArg::Topks,
            seeker: vocab.user_name(seeker).to_string(),
            tags: chosen.iter().map(|&t| vocab.tag_name(t).to_string()).collect(),
            k: cfg.k,
            alpha: cfg.alpha,
            delta: 0.0,
            ranking: RankingArg::Identity,
            bm15_k1: DEFAULT_BM15_K1,
            proximity: ProximityArg::Mul,
            lambda: 2.0,
            semantics: SemanticsArg::Disjunctive,
        };
        records.push(base.clone());
        records.push(WorkloadRecord {
            algorithm: AlgorithmArg::Contextmerge,
            ..base.clone()
        });
        records.push(WorkloadRecord {
            algorithm: AlgorithmArg::Mvar,
            delta: cfg.delta,
            ..base.clone()
        });
        records.push(WorkloadRecord {
            algorithm: AlgorithmArg::Hist,
            delta: cfg.delta,
            ..base
        });
    }

    sampled.sort_unstable();
    sampled.dedup();
    let summaries = SummaryStore::from_parts(build_summaries(
        &network,
        ProximityFunction::Mul,
        sampled,
        None,
    )?);
    Ok((network, store, vocab, summaries, records))
}

pub fn run_synthetic_bench(cfg: &SyntheticBench, out: &mut dyn Write) -> Result<()> {
    let (network, store, vocab, summaries, records) = synthetic_workload(cfg)?;
    let data = Dataset {
        network: &network,
        store: &store,
        vocab: &vocab,
        summaries: Some(&summaries),
    };
    run_workload(&data, &records, cfg.idf_floor, out)
}

// ---- prediction evaluation ----

#[derive(Debug, Clone)]
pub struct PredictParams {
    pub pairs: usize,
    pub ks: Vec<usize>,
    /// Popularity band over the tag's distinct-item count; `max = 0` means
    /// unbounded above.
    pub min_tag_items: usize,
    pub max_tag_items: usize,
    pub proximities: Vec<(String, ProximityFunction)>,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct PredictRow {
    pub proximity: String,
    pub k: usize,
    pub pairs: usize,
    pub hits: usize,
    pub baseline_hits: usize,
}

impl PredictRow {
    pub fn hit_rate(&self) -> f64 {
        if self.pairs == 0 {
            0.0
        } else {
            self.hits as f64 / self.pairs as f64
        }
    }

    pub fn baseline_rate(&self) -> f64 {
        if self.pairs == 0 {
            0.0
        } else {
            self.baseline_hits as f64 / self.pairs as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct PredictReport {
    pub requested: usize,
    pub sampled: usize,
    pub warning: Option<String>,
    pub rows: Vec<PredictRow>,
}

/// Measures, per proximity function and k, how often a purely social query
/// for a (user, tag) pair retrieves an item that user really tagged with
/// that tag. The seeker's own taggings never contribute score mass, so a
/// hit means the neighbourhood pointed back at the seeker's bookmark. The
/// baseline ranks by global frequency alone.
pub fn predict_eval(
    network: &SocialNetwork,
    store: &TaggingStore,
    params: &PredictParams,
) -> Result<PredictReport> {
    let mut candidates: Vec<(crate::ids::UserId, crate::ids::TagId)> = Vec::new();
    let mut users: Vec<_> = store.users().collect();
    users.sort_unstable();
    for &u in &users {
        let mut tags: Vec<_> = store.tags_of_user(u).collect();
        tags.sort_unstable();
        for t in tags {
            let spread = store.tag_item_count(t);
            if spread < params.min_tag_items {
                continue;
            }
            if params.max_tag_items > 0 && spread > params.max_tag_items {
                continue;
            }
            candidates.push((u, t));
        }
    }
    let mut rng = ChaCha20Rng::seed_from_u64(params.seed);
    candidates.shuffle(&mut rng);
    let sampled: Vec<_> = candidates.iter().take(params.pairs).copied().collect();
    let warning = (sampled.len() < params.pairs).then(|| {
        format!(
            "only {} of {} requested pairs qualify for the popularity band",
            sampled.len(),
            params.pairs
        )
    });

    let mut rows = Vec::new();
    for (label, function) in &params.proximities {
        for &k in &params.ks {
            let mut hits = 0;
            let mut baseline_hits = 0;
            for &(seeker, tag) in &sampled {
                let own = store.user_list(seeker, tag);
                let ctx = QueryContext::new(
                    seeker,
                    vec![tag],
                    k,
                    0.0,
                    RankingFunction::identity(),
                    Semantics::Disjunctive,
                )?;
                let cfg = EngineConfig {
                    proximity: *function,
                    ..EngineConfig::default()
                };
                let out = engine::top_k(network, store, &ctx, &cfg)?;
                if out.items.iter().any(|s| own.contains(&s.item)) {
                    hits += 1;
                }
                // Popularity baseline: the k globally most-tagged items.
                let mut cursor = store.cursor(tag);
                let mut hit = false;
                for _ in 0..k {
                    match cursor.advance() {
                        Some((item, _)) if own.contains(&item) => {
                            hit = true;
                            break;
                        }
                        Some(_) => {}
                        None => break,
                    }
                }
                if hit {
                    baseline_hits += 1;
                }
            }
            rows.push(PredictRow {
                proximity: label.clone(),
                k,
                pairs: sampled.len(),
                hits,
                baseline_hits,
            });
        }
    }
    Ok(PredictReport {
        requested: params.pairs,
        sampled: sampled.len(),
        warning,
        rows,
    })
}

fn write_predict_report(report: &PredictReport, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "proximity\tk\tpairs\thits\thit_rate\tbaseline_hits\tbaseline_rate")?;
    for row in &report.rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{:.4}\t{}\t{:.4}",
            row.proximity,
            row.k,
            row.pairs,
            row.hits,
            row.hit_rate(),
            row.baseline_hits,
            row.baseline_rate()
        )?;
    }
    Ok(())
}

// ---- dispatch ----

fn load_store(path: &Path, vocab: &mut Vocab) -> Result<TaggingStore> {
    TaggingStore::from_triple_file(path, vocab)
}

fn load_network(path: &Path, vocab: &mut Vocab) -> Result<SocialNetwork> {
    SocialNetwork::from_edge_file(path, &mut vocab.users)
}

fn out_writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(fs::File::create(p)?),
        None => Box::new(std::io::stdout()),
    })
}

/// Runs one parsed invocation. Errors bubble up for the binary to print.
pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { triples } => {
            let mut vocab = Vocab::new();
            let store = load_store(&triples, &mut vocab)?;
            let s = store.stats();
            println!("triples\t{}", s.triples_read);
            println!("duplicates_dropped\t{}", s.duplicates_dropped);
            println!("users\t{}", s.users);
            println!("items\t{}", s.items);
            println!("tags\t{}", s.tags);
        }
        Command::GenNetwork {
            triples,
            output,
            basis,
            min_distinct_tags,
            weight_floor,
        } => {
            let mut vocab = Vocab::new();
            let store = load_store(&triples, &mut vocab)?;
            let spec = SimilaritySpec {
                basis: match basis {
                    BasisArg::Items => netgen::Basis::Items,
                    BasisArg::Tags => netgen::Basis::Tags,
                    BasisArg::ItemsAndTags => netgen::Basis::ItemsAndTags,
                },
                min_distinct_tags,
                weight_floor,
            };
            let (net, report) = netgen::build_network(&store, &spec)?;
            net.write_edge_file(&output, &vocab.users)?;
            println!("users_with_features\t{}", report.users_with_features);
            println!("features\t{}", report.features);
            println!("pairs_examined\t{}", report.pairs_examined);
            println!("unique_pairs\t{}", report.unique_pairs);
            println!("edges\t{}", report.edges_added);
        }
        Command::BuildSummaries {
            network,
            summaries,
            histograms,
            proximity,
            lambda,
            buckets,
        } => {
            let mut vocab = Vocab::new();
            let net = load_network(&network, &mut vocab)?;
            let members: Vec<_> = net.members().collect();
            let entries = build_summaries(
                &net,
                proximity.to_function(lambda),
                members,
                buckets,
            )?;
            let s: Vec<_> = entries.iter().map(|(s, _)| *s).collect();
            let h: Vec<_> = entries.iter().map(|(_, h)| h.clone()).collect();
            write_summary_file(&summaries, &s, &vocab.users)?;
            write_histogram_file(&histograms, &h, &vocab.users)?;
            println!("seekers\t{}", s.len());
        }
        Command::Query {
            triples,
            network,
            seeker,
            tags,
            k,
            alpha,
            algorithm,
            delta,
            summaries,
            histograms,
            ranking,
            bm15_k1,
            idf_floor,
            proximity,
            lambda,
            semantics,
            exact_scores,
            include_seeker_sf,
        } => {
            let mut vocab = Vocab::new();
            let store = load_store(&triples, &mut vocab)?;
            let net = load_network(&network, &mut vocab)?;
            let summary_store = match (&summaries, &histograms) {
                (None, None) => None,
                _ => {
                    let (Some(s), Some(h)) = (&summaries, &histograms) else {
                        return Err(Error::config(
                            "--summaries and --histograms must be given together",
                        ));
                    };
                    Some(SummaryStore::load(s, h, &mut vocab.users)?)
                }
            };
            let seeker_id = vocab
                .lookup_user(&seeker)
                .ok_or_else(|| Error::NotFound {
                    kind: "user",
                    name: seeker.clone(),
                })?;
            let mut tag_ids = Vec::new();
            for t in &tags {
                tag_ids.push(vocab.lookup_tag(t).ok_or_else(|| Error::NotFound {
                    kind: "tag",
                    name: t.clone(),
                })?);
            }
            let ctx = QueryContext::new(
                seeker_id,
                tag_ids,
                k,
                alpha,
                ranking_for(&store, ranking, bm15_k1, idf_floor)?,
                semantics.into(),
            )?;
            let cfg = EngineConfig {
                proximity: proximity.to_function(lambda),
                include_seeker_sf,
                exact_scores,
            };
            let out = match algorithm {
                AlgorithmArg::Topks => engine::top_k(&net, &store, &ctx, &cfg)?,
                AlgorithmArg::Contextmerge => {
                    engine::top_k_materialized(&net, &store, &ctx, &cfg)?
                }
                AlgorithmArg::Mvar | AlgorithmArg::Hist => {
                    if delta > 0.0 && summary_store.is_none() {
                        return Err(Error::config(format!(
                            "algorithm {} with delta {delta} needs the --summaries and --histograms files",
                            algorithm.token()
                        )));
                    }
                    let kind = if algorithm == AlgorithmArg::Mvar {
                        EstimatorKind::Mvar
                    } else {
                        EstimatorKind::Hist
                    };
                    let est = BoundEstimator::for_query(
                        kind,
                        summary_store.as_ref(),
                        seeker_id,
                        delta,
                        ctx.tags.len(),
                    )?;
                    engine::top_k_estimated(&net, &store, &ctx, &cfg, est)?
                }
                AlgorithmArg::Oracle => engine::oracle::full_scan(&net, &store, &ctx, &cfg)?,
            };
            for (rank, s) in out.items.iter().enumerate() {
                println!("{}\t{}\t{}", rank + 1, vocab.item_name(s.item), s.score);
            }
            let cost = CostModel::default().cost(&out.stats);
            eprintln!(
                "users_visited={} seqitems={} cost={} wall_ms={:.3}{}{}",
                out.stats.users_visited,
                out.stats.seqitems,
                cost,
                out.stats.wall.as_secs_f64() * 1e3,
                if out.short { " short" } else { "" },
                if out.partial { " partial" } else { "" },
            );
        }
        Command::Bench {
            workload,
            seed,
            triples,
            network,
            summaries,
            histograms,
            output,
            users,
            items,
            tags,
            max_user_activity,
            queries,
            k,
            alpha,
            delta,
            idf_floor,
        } => {
            let mut out = out_writer(output.as_deref())?;
            match workload {
                Some(workload) => {
                    let (Some(triples), Some(network)) = (&triples, &network) else {
                        return Err(Error::config(
                            "--triples and --network are required with --workload",
                        ));
                    };
                    let mut vocab = Vocab::new();
                    let store = load_store(triples, &mut vocab)?;
                    let net = load_network(network, &mut vocab)?;
                    let summary_store = match (&summaries, &histograms) {
                        (None, None) => None,
                        (Some(s), Some(h)) => Some(SummaryStore::load(s, h, &mut vocab.users)?),
                        _ => {
                            return Err(Error::config(
                                "--summaries and --histograms must be given together",
                            ))
                        }
                    };
                    let records = parse_workload(&workload)?;
                    let data = Dataset {
                        network: &net,
                        store: &store,
                        vocab: &vocab,
                        summaries: summary_store.as_ref(),
                    };
                    run_workload(&data, &records, idf_floor, &mut out)?;
                }
                None => {
                    let cfg = SyntheticBench {
                        users,
                        items,
                        tags,
                        max_user_activity,
                        queries,
                        k,
                        alpha,
                        delta,
                        seed: seed.expect("clap enforces --seed without --workload"),
                        idf_floor,
                    };
                    run_synthetic_bench(&cfg, &mut out)?;
                }
            }
        }
        Command::PredictEval {
            triples,
            network,
            pairs,
            k,
            min_tag_items,
            max_tag_items,
            proximity,
            lambda,
            seed,
            output,
        } => {
            let mut vocab = Vocab::new();
            let store = load_store(&triples, &mut vocab)?;
            let net = load_network(&network, &mut vocab)?;
            let proximities = proximity
                .iter()
                .map(|p| {
                    let name = p
                        .to_possible_value()
                        .expect("no skipped variants")
                        .get_name()
                        .to_string();
                    (name, p.to_function(lambda))
                })
                .collect();
            let params = PredictParams {
                pairs,
                ks: k,
                min_tag_items,
                max_tag_items,
                proximities,
                seed,
            };
            let report = predict_eval(&net, &store, &params)?;
            if let Some(w) = &report.warning {
                eprintln!("warning: {w}");
            }
            let mut out = out_writer(output.as_deref())?;
            write_predict_report(&report, &mut out)?;
        }
    }
    Ok(())
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BasisArg {
    #[default]
    Items,
    Tags,
    ItemsAndTags,
}
