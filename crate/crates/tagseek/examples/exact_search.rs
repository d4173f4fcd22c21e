//! Exact top-k search at several blend factors. At alpha 0 the ranking is
//! purely social (items tagged by users near the seeker win); at alpha 1
//! it is purely textual (global tag frequency wins); in between the engine
//! mixes both and still terminates as soon as its score bounds prove the
//! answer.
//!
//!     cargo run --example exact_search

use tagseek::engine::{self, CostModel, EngineConfig};
use tagseek::graph::SocialNetwork;
use tagseek::ids::Vocab;
use tagseek::scoring::{QueryContext, RankingFunction, Semantics};
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

    let cost_model = CostModel::default();
    for alpha in [0.0, 0.5, 1.0] {
        let ctx = QueryContext::new(
            a,
            vec![rust, tokio],
            2,
            alpha,
            RankingFunction::identity(),
            Semantics::Disjunctive,
        )?;
        // exact_scores keeps refining until returned scores are final;
        // without it the engine may stop earlier with proven lower bounds.
        let cfg = EngineConfig {
            exact_scores: true,
            ..EngineConfig::default()
        };
        let out = engine::top_k(&net, &store, &ctx, &cfg)?;
        println!("alpha {alpha}");
        for (rank, s) in out.items.iter().enumerate() {
            println!("  {} {:10} {:.4}", rank + 1, vocab.item_name(s.item), s.score);
        }
        println!(
            "  visited {} users, read {} list entries, cost {}\n",
            out.stats.users_visited,
            out.stats.seqitems,
            cost_model.cost(&out.stats)
        );
    }
    Ok(())
}
