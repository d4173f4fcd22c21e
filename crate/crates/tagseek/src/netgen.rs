//! Deriving a social network from tagging behaviour.
//!
//! When no explicit network exists, users who tag alike are linked: the
//! edge weight is the Dice coefficient of their feature sets (items used,
//! tags used, or both). Enumeration goes through an inverted feature index,
//! so only users who actually share a feature are ever paired; disjoint
//! users cost nothing and zero-similarity edges are never materialised.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::SocialNetwork;
use crate::ids::UserId;
use crate::store::TaggingStore;
use crate::Result;

/// Which side of the tagging triples describes a user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Basis {
    /// The set of items the user tagged.
    #[default]
    Items,
    /// The set of distinct tags the user applied.
    Tags,
    /// Union of both, namespaced so item and tag ids cannot collide.
    ItemsAndTags,
}

#[derive(Debug, Clone, Copy)]
pub struct SimilaritySpec {
    pub basis: Basis,
    /// Tags basis only: users applying fewer distinct tags than this are
    /// left out (too little signal to compare tag vocabularies).
    pub min_distinct_tags: usize,
    /// Keep an edge only when its Dice weight strictly exceeds this.
    pub weight_floor: f64,
}

impl Default for SimilaritySpec {
    fn default() -> Self {
        SimilaritySpec {
            basis: Basis::Items,
            min_distinct_tags: 10,
            weight_floor: 0.0,
        }
    }
}

/// What the build did, for sizing and for asserting the enumeration never
/// degenerates to all-pairs.
#[derive(Debug, Clone, Copy, Default)]
pub struct BuildReport {
    pub users_with_features: usize,
    pub features: usize,
    /// Within-feature pair enumerations (with multiplicity).
    pub pairs_examined: u64,
    /// Distinct co-occurring pairs scored.
    pub unique_pairs: usize,
    pub edges_added: usize,
}

/// Dice coefficient `2|X n Y| / (|X| + |Y|)`; `None` when both sets are
/// empty (similarity undefined).
pub fn dice<T: Ord>(x: &BTreeSet<T>, y: &BTreeSet<T>) -> Option<f64> {
    if x.is_empty() && y.is_empty() {
        return None;
    }
    let common = x.intersection(y).count();
    Some(2.0 * common as f64 / (x.len() + y.len()) as f64)
}

/// Namespaced feature key: items and tags live in disjoint ranges.
type Feature = (u8, u32);

fn feature_set(store: &TaggingStore, user: UserId, spec: &SimilaritySpec) -> BTreeSet<Feature> {
    let mut set = BTreeSet::new();
    match spec.basis {
        Basis::Items => {
            set.extend(store.items_of_user(user).map(|i| (0u8, i.0)));
        }
        Basis::Tags => {
            let tags: BTreeSet<Feature> = store.tags_of_user(user).map(|t| (1u8, t.0)).collect();
            if tags.len() >= spec.min_distinct_tags {
                set = tags;
            }
        }
        Basis::ItemsAndTags => {
            set.extend(store.items_of_user(user).map(|i| (0u8, i.0)));
            set.extend(store.tags_of_user(user).map(|t| (1u8, t.0)));
        }
    }
    set
}

/// Builds the similarity network over every user in the store with a
/// non-empty feature set.
pub fn build_network(
    store: &TaggingStore,
    spec: &SimilaritySpec,
) -> Result<(SocialNetwork, BuildReport)> {
    let mut feats: BTreeMap<UserId, BTreeSet<Feature>> = BTreeMap::new();
    for user in store.users() {
        let set = feature_set(store, user, spec);
        if !set.is_empty() {
            feats.insert(user, set);
        }
    }

    let mut inverted: BTreeMap<Feature, Vec<UserId>> = BTreeMap::new();
    for (&user, set) in &feats {
        for &f in set {
            inverted.entry(f).or_default().push(user);
        }
    }

    let mut report = BuildReport {
        users_with_features: feats.len(),
        features: inverted.len(),
        ..BuildReport::default()
    };

    let mut pairs: BTreeSet<(UserId, UserId)> = BTreeSet::new();
    for users in inverted.values() {
        for i in 0..users.len() {
            for j in i + 1..users.len() {
                report.pairs_examined += 1;
                pairs.insert((users[i], users[j]));
            }
        }
    }
    report.unique_pairs = pairs.len();

    let mut net = SocialNetwork::new();
    for &(u, v) in &pairs {
        // Co-occurring pairs always intersect, so the weight is positive.
        let w = dice(&feats[&u], &feats[&v]).expect("co-occurring users have features");
        if w > spec.weight_floor {
            net.add_edge(u, v, w)?;
            report.edges_added += 1;
        }
    }
    Ok((net, report))
}
