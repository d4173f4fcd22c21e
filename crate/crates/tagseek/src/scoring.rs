//! Item relevance scoring.
//!
//! Per query tag `t`, an item's raw relevance for seeker `s` blends textual
//! and social evidence:
//!
//! ```text
//! fr(i | s, t) = alpha * tf(t, i) + (1 - alpha) * sf(i | s, t)
//! ```
//!
//! where `tf` is the item's tag frequency and `sf` sums the seeker's
//! proximity to every user who tagged `(i, t)`. A ranking function `h` maps
//! `fr` to a per-tag score (identity, IDF-weighted, or BM15-saturated), and
//! per-tag scores are summed over the query. `h` is monotone in `fr`; with a
//! negative IDF weight it is monotonically decreasing, which the engine's
//! bound arithmetic accounts for by evaluating `h` at both ends of the
//! feasible `fr` interval.

use std::collections::HashMap;

use crate::ids::{TagId, UserId};
use crate::store::TaggingStore;
use crate::{Error, Result};

/// How per-tag scores combine into a query score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Semantics {
    /// Sum over tags; evidence on any query tag qualifies an item.
    #[default]
    Disjunctive,
    /// Sum over tags, but an item only qualifies with evidence on every
    /// query tag; until then its pessimistic score is pinned to 0.
    Conjunctive,
}

/// Sum of the seeker's proximities to the users who tagged the item.
pub fn social_frequency(tagger_proximities: &[f64]) -> f64 {
    tagger_proximities.iter().sum()
}

/// Blend of textual and social evidence for one tag.
pub fn overall_frequency(tf: u32, sf: f64, alpha: f64) -> f64 {
    alpha * tf as f64 + (1.0 - alpha) * sf
}

/// Inverse document frequency with the usual half-shift, natural log:
/// `ln((|I| - n_t + 0.5) / (n_t + 0.5))`. Negative for tags on more than
/// half the items; callers opt into flooring at 0.
pub fn idf_value(items_total: usize, n_t: usize) -> f64 {
    ((items_total as f64 - n_t as f64 + 0.5) / (n_t as f64 + 0.5)).ln()
}

/// Sums per-tag scores. Both semantics aggregate by summation; the
/// conjunctive evidence rule is enforced by the engine and oracle, not here.
pub fn aggregate_query(per_tag_scores: &[f64], _semantics: Semantics) -> f64 {
    per_tag_scores.iter().sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum RankKind {
    Identity,
    TfIdf,
    Bm15 { k1: f64 },
}

/// Maps raw relevance `fr` to a per-tag score. Immutable once built; IDF
/// weights are precomputed from the store at construction.
#[derive(Debug, Clone)]
pub struct RankingFunction {
    kind: RankKind,
    idf: HashMap<TagId, f64>,
    items_total: usize,
    floor: bool,
}

pub const DEFAULT_BM15_K1: f64 = 1.2;

impl RankingFunction {
    /// `h(fr) = fr`.
    pub fn identity() -> Self {
        RankingFunction {
            kind: RankKind::Identity,
            idf: HashMap::new(),
            items_total: 0,
            floor: false,
        }
    }

    /// `h(fr) = fr * idf(t)`. With `floor`, negative IDF values are raised
    /// to 0 (tags on most items then contribute nothing instead of
    /// penalising).
    pub fn tf_idf(store: &TaggingStore, floor: bool) -> Self {
        Self::weighted(RankKind::TfIdf, store, floor)
    }

    /// `h(fr) = ((k1 + 1) * fr / (k1 + fr)) * idf(t)`: BM15 saturation, so
    /// repeated evidence on one tag has diminishing returns.
    pub fn bm15(store: &TaggingStore, k1: f64, floor: bool) -> Result<Self> {
        if !(k1 > 0.0) {
            return Err(Error::domain(format!("bm15 k1 {k1} must be > 0")));
        }
        Ok(Self::weighted(RankKind::Bm15 { k1 }, store, floor))
    }

    fn weighted(kind: RankKind, store: &TaggingStore, floor: bool) -> Self {
        let items_total = store.item_count();
        let idf = store
            .tags()
            .map(|t| (t, idf_value(items_total, store.tag_item_count(t))))
            .collect();
        RankingFunction {
            kind,
            idf,
            items_total,
            floor,
        }
    }

    /// IDF weight for a tag; tags absent from the corpus get the `n_t = 0`
    /// value. Identity ranking weighs every tag at 1.
    pub fn idf(&self, tag: TagId) -> f64 {
        if matches!(self.kind, RankKind::Identity) {
            return 1.0;
        }
        let raw = self
            .idf
            .get(&tag)
            .copied()
            .unwrap_or_else(|| idf_value(self.items_total, 0));
        if self.floor {
            raw.max(0.0)
        } else {
            raw
        }
    }

    /// Per-tag score for a raw relevance value.
    pub fn value(&self, fr: f64, tag: TagId) -> f64 {
        match self.kind {
            RankKind::Identity => fr,
            RankKind::TfIdf => fr * self.idf(tag),
            RankKind::Bm15 { k1 } => ((k1 + 1.0) * fr / (k1 + fr)) * self.idf(tag),
        }
    }

    /// True when `h` is strictly concave in `fr` (BM15). The approximate
    /// engine then skips optimistic lower-bound substitution and keeps the
    /// exact pessimistic bound.
    pub fn concave(&self) -> bool {
        matches!(self.kind, RankKind::Bm15 { .. })
    }

    #[cfg(test)]
    fn with_idf_scale(mut self, scale: f64) -> Self {
        for v in self.idf.values_mut() {
            *v *= scale;
        }
        self
    }
}

/// Applies the ranking function: per-tag score of a raw relevance value.
pub fn apply_h(ranking: &RankingFunction, fr: f64, tag: TagId) -> f64 {
    ranking.value(fr, tag)
}

/// A validated query: who asks, for what, and how scores blend.
#[derive(Debug, Clone)]
pub struct QueryContext {
    pub seeker: UserId,
    pub tags: Vec<TagId>,
    pub k: usize,
    pub alpha: f64,
    pub ranking: RankingFunction,
    pub semantics: Semantics,
}

impl QueryContext {
    pub fn new(
        seeker: UserId,
        tags: Vec<TagId>,
        k: usize,
        alpha: f64,
        ranking: RankingFunction,
        semantics: Semantics,
    ) -> Result<Self> {
        if tags.is_empty() {
            return Err(Error::domain("query needs at least one tag"));
        }
        let mut dedup = tags.clone();
        dedup.sort();
        dedup.dedup();
        if dedup.len() != tags.len() {
            return Err(Error::domain("query tags must be distinct"));
        }
        if k == 0 {
            return Err(Error::domain("k must be at least 1"));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::domain(format!("alpha {alpha} outside [0, 1]")));
        }
        Ok(QueryContext {
            seeker,
            tags,
            k,
            alpha,
            ranking,
            semantics,
        })
    }
}
