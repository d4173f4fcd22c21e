//! Deriving a similarity network from tagging behaviour alone: users who
//! bookmarked overlapping item sets get an edge weighted by the Dice
//! coefficient of those sets. Useful when no explicit social graph exists.
//!
//!     cargo run --example network_from_tags

use tagseek::ids::Vocab;
use tagseek::netgen::{build_network, Basis, SimilaritySpec};
use tagseek::store::TaggingStore;

fn main() -> tagseek::Result<()> {
    let mut vocab = Vocab::new();
    let mut triples = Vec::new();
    // Three crawler fans, two database fans, one generalist bridging both.
    let corpus: &[(&str, &[&str])] = &[
        ("ann", &["scrapy", "requests", "lxml"]),
        ("ben", &["scrapy", "requests"]),
        ("cal", &["scrapy", "lxml"]),
        ("dia", &["postgres", "sqlite"]),
        ("eve", &["postgres", "sqlite", "duckdb"]),
        ("fox", &["lxml", "duckdb"]),
    ];
    let tool = vocab.tag("tool");
    for (user, items) in corpus {
        let u = vocab.user(user);
        for item in *items {
            triples.push((u, vocab.item(item), tool));
        }
    }
    let store = TaggingStore::ingest(triples);

    let spec = SimilaritySpec {
        basis: Basis::Items,
        weight_floor: 0.3, // drop weak accidental overlap
        ..SimilaritySpec::default()
    };
    let (network, report) = build_network(&store, &spec)?;

    println!(
        "{} users with features, {} features, {} candidate pairs, {} edges\n",
        report.users_with_features, report.features, report.unique_pairs, report.edges_added
    );
    let mut members: Vec<_> = network.members().collect();
    members.sort_unstable();
    for u in members {
        for &(v, w) in network.neighbors(u) {
            if u < v {
                println!("{:4} -- {:4}  {:.3}", vocab.user_name(u), vocab.user_name(v), w);
            }
        }
    }
    Ok(())
}
