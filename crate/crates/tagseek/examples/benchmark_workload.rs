//! Running a benchmark workload in process: each record names an
//! algorithm and a query; the report is one CSV row per record with
//! visit/read counters, the abstract cost, and precision and speedup
//! against the exact run of the same query.
//!
//!     cargo run --example benchmark_workload

use tagseek::cli::{
    run_workload, AlgorithmArg, Dataset, ProximityArg, RankingArg, SemanticsArg, WorkloadRecord,
};
use tagseek::graph::SocialNetwork;
use tagseek::ids::Vocab;
use tagseek::scoring::DEFAULT_BM15_K1;
use tagseek::store::TaggingStore;

fn main() -> tagseek::Result<()> {
    let mut vocab = Vocab::new();
    let mut net = SocialNetwork::new();
    let [a, b, c, d, e] = ["alice", "bob", "carol", "dave", "erin"].map(|n| vocab.user(n));
    net.add_edge(a, b, 0.9)?;
    net.add_edge(a, c, 0.6)?;
    net.add_edge(b, d, 0.8)?;
    net.add_edge(c, e, 0.5)?;
    net.add_edge(d, e, 0.4)?;
    let rust = vocab.tag("rust");
    let tokio = vocab.tag("tokio");
    let parser = vocab.item("parser-kit");
    let runtime = vocab.item("runtime-lib");
    let store = TaggingStore::ingest([
        (b, parser, rust),
        (d, parser, rust),
        (c, runtime, rust),
        (e, runtime, rust),
        (b, runtime, tokio),
        (e, parser, tokio),
    ]);

    let base = WorkloadRecord {
        algorithm: AlgorithmArg::Oracle,
        seeker: "alice".into(),
        tags: vec!["rust".into()],
        k: 2,
        alpha: 0.0,
        delta: 0.0,
        ranking: RankingArg::Identity,
        bm15_k1: DEFAULT_BM15_K1,
        proximity: ProximityArg::Mul,
        lambda: 2.0,
        semantics: SemanticsArg::Disjunctive,
    };
    let records = vec![
        base.clone(),
        WorkloadRecord {
            algorithm: AlgorithmArg::Topks,
            ..base.clone()
        },
        WorkloadRecord {
            algorithm: AlgorithmArg::Contextmerge,
            ..base.clone()
        },
        WorkloadRecord {
            algorithm: AlgorithmArg::Topks,
            alpha: 0.5,
            tags: vec!["rust".into(), "tokio".into()],
            ..base
        },
    ];

    let data = Dataset {
        network: &net,
        store: &store,
        vocab: &vocab,
        summaries: None,
    };
    let mut csv = Vec::new();
    run_workload(&data, &records, false, &mut csv)?;
    print!("{}", String::from_utf8(csv).expect("report is utf-8"));
    Ok(())
}
