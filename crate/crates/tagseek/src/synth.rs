//! Seeded synthetic data: random instances for equivalence testing, heavier
//! power-law corpora for cost benchmarks, and a neighbourhood-structured
//! dataset for the bookmark-prediction evaluation. Everything is driven by
//! a caller-supplied RNG, so a fixed seed reproduces a corpus exactly.

use std::ops::RangeInclusive;

use rand::Rng;
use rand_distr::{Distribution, Zipf};

use crate::graph::SocialNetwork;
use crate::ids::{TagId, UserId, Vocab};
use crate::store::TaggingStore;

/// One self-contained dataset.
pub struct Instance {
    pub network: SocialNetwork,
    pub store: TaggingStore,
    pub vocab: Vocab,
}

/// Size and shape ranges for [`random_instance`]; each draw picks uniform
/// values inside them.
#[derive(Debug, Clone)]
pub struct InstanceParams {
    pub users: RangeInclusive<usize>,
    pub items: RangeInclusive<usize>,
    pub tags: RangeInclusive<usize>,
    /// Probability of an edge between any two users.
    pub edge_prob: RangeInclusive<f64>,
    /// Edge weight range; must stay inside (0, 1].
    pub weight: RangeInclusive<f64>,
    pub taggings_per_user: RangeInclusive<usize>,
}

impl Default for InstanceParams {
    fn default() -> Self {
        InstanceParams {
            users: 5..=100,
            items: 2..=30,
            tags: 1..=6,
            edge_prob: 0.02..=0.2,
            weight: 0.05..=1.0,
            taggings_per_user: 0..=8,
        }
    }
}

fn user_names(vocab: &mut Vocab, n: usize) -> Vec<UserId> {
    (0..n).map(|i| vocab.user(&format!("u{i}"))).collect()
}

/// Random Erdos-Renyi style network over `users` with uniform weights.
pub fn random_network(
    rng: &mut impl Rng,
    users: &[UserId],
    edge_prob: f64,
    weight: RangeInclusive<f64>,
) -> SocialNetwork {
    let mut net = SocialNetwork::new();
    for i in 0..users.len() {
        for j in i + 1..users.len() {
            if rng.gen_bool(edge_prob) {
                let w = rng.gen_range(weight.clone());
                net.add_edge(users[i], users[j], w)
                    .expect("generated edges are unique and in range");
            }
        }
    }
    net
}

/// Draws a full instance: network, taggings, and the vocabulary naming
/// them. Degenerate corners (isolated users, empty tag lists, items nobody
/// tagged) are left in on purpose; the engine must handle them.
pub fn random_instance(rng: &mut impl Rng, params: &InstanceParams) -> Instance {
    let n_users = rng.gen_range(params.users.clone());
    let n_items = rng.gen_range(params.items.clone());
    let n_tags = rng.gen_range(params.tags.clone());
    let edge_prob = rng.gen_range(params.edge_prob.clone());

    let mut vocab = Vocab::new();
    let users = user_names(&mut vocab, n_users);
    let items: Vec<_> = (0..n_items).map(|i| vocab.item(&format!("i{i}"))).collect();
    let tags: Vec<_> = (0..n_tags).map(|i| vocab.tag(&format!("t{i}"))).collect();

    let network = random_network(rng, &users, edge_prob, params.weight.clone());

    let mut triples = Vec::new();
    for &u in &users {
        let count = rng.gen_range(params.taggings_per_user.clone());
        for _ in 0..count {
            let item = items[rng.gen_range(0..items.len())];
            let tag = tags[rng.gen_range(0..tags.len())];
            triples.push((u, item, tag));
        }
    }
    let store = TaggingStore::ingest(triples);
    Instance {
        network,
        store,
        vocab,
    }
}

/// Power-law tagging corpus: item and tag popularity are Zipf-distributed,
/// per-user activity is skewed the same way. Pair it with
/// [`crate::netgen::build_network`] to derive the similarity network.
pub fn power_law_corpus(
    rng: &mut impl Rng,
    n_users: usize,
    n_items: usize,
    n_tags: usize,
    max_taggings_per_user: usize,
) -> (TaggingStore, Vocab) {
    let mut vocab = Vocab::new();
    let users = user_names(&mut vocab, n_users);
    let items: Vec<_> = (0..n_items).map(|i| vocab.item(&format!("i{i}"))).collect();
    let tags: Vec<_> = (0..n_tags).map(|i| vocab.tag(&format!("t{i}"))).collect();

    let item_dist = Zipf::new(n_items as u64, 1.05).expect("valid Zipf support");
    let tag_dist = Zipf::new(n_tags as u64, 1.1).expect("valid Zipf support");
    let activity_dist =
        Zipf::new(max_taggings_per_user.max(1) as u64, 0.9).expect("valid Zipf support");

    let mut triples = Vec::new();
    for &u in &users {
        let activity = activity_dist.sample(rng) as usize;
        for _ in 0..activity {
            let item = items[item_dist.sample(rng) as usize - 1];
            let tag = tags[tag_dist.sample(rng) as usize - 1];
            triples.push((u, item, tag));
        }
    }
    (TaggingStore::ingest(triples), vocab)
}

/// Dataset where social signal beats global popularity: paired users tag a
/// private shared item, while separate noise users pile onto globally
/// popular items. Querying a paired user's tag with social weighting should
/// surface the private item; pure frequency ranking surfaces the global
/// ones instead.
pub fn prediction_dataset(rng: &mut impl Rng, pairs: usize, noise_users: usize) -> Instance {
    let mut vocab = Vocab::new();
    let mut net = SocialNetwork::new();
    let tag_pool: Vec<TagId> = (0..4).map(|i| vocab.tag(&format!("t{i}"))).collect();
    let globals: Vec<_> = (0..3).map(|i| vocab.item(&format!("g{i}"))).collect();

    let mut triples = Vec::new();
    let noise: Vec<UserId> = (0..noise_users)
        .map(|i| vocab.user(&format!("n{i}")))
        .collect();
    for &nu in &noise {
        for &g in &globals {
            for &t in &tag_pool {
                triples.push((nu, g, t));
            }
        }
    }

    for p in 0..pairs {
        let a = vocab.user(&format!("a{p}"));
        let b = vocab.user(&format!("b{p}"));
        let item = vocab.item(&format!("s{p}"));
        let tag = tag_pool[p % tag_pool.len()];
        triples.push((a, item, tag));
        triples.push((b, item, tag));
        net.add_edge(a, b, 0.9).expect("pair edges are unique");
        // Weak ties into the noise crowd keep the network connected
        // without letting global items outscore the pair's shared one.
        if !noise.is_empty() {
            for &end in &[a, b] {
                let nu = noise[rng.gen_range(0..noise.len())];
                let _ = net.add_edge(end, nu, 0.2);
            }
        }
    }
    Instance {
        network: net,
        store: TaggingStore::ingest(triples),
        vocab,
    }
}
