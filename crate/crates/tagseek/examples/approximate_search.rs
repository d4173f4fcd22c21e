//! Approximate search: per-seeker proximity summaries let the engine
//! replace the true next-best proximity with a statistical estimate,
//! trading a bounded failure probability (delta) for earlier termination.
//! delta 0 degenerates to the exact run, bit for bit.
//!
//!     cargo run --example approximate_search

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use tagseek::approx::{build_summaries, BoundEstimator, EstimatorKind, SummaryStore};
use tagseek::engine::{self, CostModel, EngineConfig};
use tagseek::graph::ProximityFunction;
use tagseek::netgen::{build_network, SimilaritySpec};
use tagseek::scoring::{QueryContext, RankingFunction, Semantics};
use tagseek::synth;

fn main() -> tagseek::Result<()> {
    // A mid-sized synthetic corpus: power-law tagging, Dice similarity net.
    let mut rng = ChaCha20Rng::seed_from_u64(42);
    let (store, vocab) = synth::power_law_corpus(&mut rng, 400, 300, 30, 25);
    let (network, _) = build_network(&store, &SimilaritySpec::default())?;

    let seeker = store
        .users()
        .find(|&u| network.contains(u) && store.tags_of_user(u).next().is_some())
        .expect("corpus has connected taggers");
    let tag = store.tags_of_user(seeker).next().expect("seeker tags");

    // Offline step: one pass over the seeker's reachable users.
    let summaries = SummaryStore::from_parts(build_summaries(
        &network,
        ProximityFunction::Mul,
        [seeker],
        None,
    )?);

    let ctx = QueryContext::new(
        seeker,
        vec![tag],
        5,
        0.0,
        RankingFunction::identity(),
        Semantics::Disjunctive,
    )?;
    let cfg = EngineConfig::default();
    let cost_model = CostModel::default();

    let exact = engine::top_k(&network, &store, &ctx, &cfg)?;
    let exact_cost = cost_model.cost(&exact.stats);
    println!(
        "exact: {} items, cost {exact_cost}",
        exact.items.len()
    );

    for kind in [EstimatorKind::Mvar, EstimatorKind::Hist] {
        for delta in [0.0, 0.5, 0.9] {
            let est = BoundEstimator::for_query(kind, Some(&summaries), seeker, delta, 1)?;
            let out = engine::top_k_estimated(&network, &store, &ctx, &cfg, est)?;
            let cost = cost_model.cost(&out.stats);
            let overlap = out
                .items
                .iter()
                .filter(|s| exact.items.iter().any(|e| e.item == s.item))
                .count();
            println!(
                "{kind:?} delta {delta:>3}: cost {cost:>6}, speedup {:>5.2}, {} of {} exact items kept",
                exact_cost as f64 / cost as f64 - 1.0,
                overlap,
                exact.items.len()
            );
        }
    }
    println!(
        "\nquery: seeker {} tag {:?}",
        vocab.user_name(seeker),
        vocab.tag_name(tag)
    );
    Ok(())
}
