//! Leave-out prediction: for sampled (user, tag) pairs, run a purely
//! social query and check whether the result set contains an item that
//! user really tagged. The seeker's own taggings contribute no score, so
//! hits mean the neighbourhood predicted the bookmark. Compared against a
//! popularity-only baseline.
//!
//!     cargo run --example bookmark_prediction

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use tagseek::cli::{predict_eval, PredictParams};
use tagseek::graph::ProximityFunction;
use tagseek::synth;

fn main() -> tagseek::Result<()> {
    // Pairs of tightly linked users sharing a private bookmark, plus noise
    // users who tag only the globally popular items.
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let inst = synth::prediction_dataset(&mut rng, 40, 15);

    let params = PredictParams {
        pairs: 60,
        ks: vec![1, 3, 5],
        min_tag_items: 1,
        max_tag_items: 0,
        proximities: vec![
            ("mul".into(), ProximityFunction::Mul),
            ("min".into(), ProximityFunction::Min),
        ],
        seed: 3,
    };
    let report = predict_eval(&inst.network, &inst.store, &params)?;
    if let Some(w) = &report.warning {
        println!("note: {w}");
    }
    println!("proximity  k  hit_rate  baseline");
    for row in &report.rows {
        println!(
            "{:9} {:2}  {:7.3}  {:7.3}",
            row.proximity,
            row.k,
            row.hit_rate(),
            row.baseline_rate()
        );
    }
    Ok(())
}
