//! The early-terminating top-k retrieval engine.
//!
//! A run interleaves two kinds of work until the top-k answer is provably
//! settled:
//!
//! * **social steps** visit users in non-increasing proximity order and pull
//!   the items they tagged with query tags into the candidate buffer;
//! * **textual steps** consume heads of the per-tag inverted lists, fixing
//!   exact tag frequencies for the consumed items.
//!
//! Each candidate carries per-tag lower/upper score bounds. The run stops as
//! soon as the k-th best lower bound strictly beats every other candidate's
//! upper bound and the ceiling for items never seen at all, or when no
//! further step can move any bound.
//!
//! Two traversal modes share the scoring, bookkeeping, and stop rule:
//! [`TraversalMode::OnTheFly`] discovers proximities lazily and additionally
//! consumes inverted-list heads that social steps have already surfaced;
//! [`TraversalMode::Materialized`] is the baseline that precomputes the
//! whole proximity vector and alternates branches per query tag round-robin,
//! without the consumption refinement.
//!
//! [`oracle`] holds the slow full-scan reference implementation used to
//! validate both modes.

pub mod oracle;
mod run;

use std::time::Duration;

use crate::approx::BoundEstimator;
use crate::graph::SocialNetwork;
use crate::ids::ItemId;
use crate::scoring::QueryContext;
use crate::store::TaggingStore;
use crate::{Error, Result};

pub use run::{BoundsSnapshot, CandidateBounds, TopkRun};

#[cfg(test)]
pub(crate) use run::tests_support;

/// How a run obtains user proximities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraversalMode {
    /// Lazy best-first proximity traversal plus inverted-list consumption.
    #[default]
    OnTheFly,
    /// Proximity vector materialised up front; no consumption refinement;
    /// branch choice alternates over query tags.
    Materialized,
}

/// Per-run knobs that do not vary per query.
#[derive(Debug, Clone, Copy)]
pub struct EngineConfig {
    pub proximity: crate::graph::ProximityFunction,
    /// Count the seeker's own taggings into social frequency. Off by
    /// default: recommendations should reflect the neighbourhood, not echo
    /// the seeker's own bookmarks.
    pub include_seeker_sf: bool,
    /// Keep stepping after the top-k set is settled until every returned
    /// score is exact, not just a lower bound.
    pub exact_scores: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            proximity: crate::graph::ProximityFunction::Mul,
            include_seeker_sf: false,
            exact_scores: false,
        }
    }
}

/// Work counters for one run. `wall` is informational; every other field is
/// deterministic for a fixed input.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunStats {
    /// Social steps taken: users whose tagging lists were read.
    pub users_visited: u64,
    /// Sequential inverted-list reads (head consumptions).
    pub seqitems: u64,
    /// Branch steps executed.
    pub steps: u64,
    /// True when the stop rule fired before the data ran out.
    pub terminated_early: bool,
    pub wall: Duration,
}

impl RunStats {
    /// The deterministic counters, for equality checks that must ignore
    /// wall time.
    pub fn counts(&self) -> (u64, u64, u64, bool) {
        (
            self.users_visited,
            self.seqitems,
            self.steps,
            self.terminated_early,
        )
    }
}

/// Linear access-cost model over the run counters.
#[derive(Debug, Clone, Copy)]
pub struct CostModel {
    pub user_visit: u64,
    pub seq_item: u64,
}

impl Default for CostModel {
    /// Visiting a user is two orders of magnitude more expensive than one
    /// sequential list read.
    fn default() -> Self {
        CostModel {
            user_visit: 100,
            seq_item: 1,
        }
    }
}

impl CostModel {
    pub fn cost(&self, stats: &RunStats) -> u64 {
        self.user_visit * stats.users_visited + self.seq_item * stats.seqitems
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredItem {
    pub item: ItemId,
    pub score: f64,
}

/// Result of one run.
#[derive(Debug, Clone)]
pub struct QueryOutcome {
    /// Best-first items, at most k. Scores are current lower bounds; exact
    /// once `partial` is false.
    pub items: Vec<ScoredItem>,
    /// Fewer than k items qualified.
    pub short: bool,
    /// Some returned score is still an open interval, not a final value.
    pub partial: bool,
    pub stats: RunStats,
}

/// Exact search, lazy traversal.
pub fn top_k(
    network: &SocialNetwork,
    store: &TaggingStore,
    ctx: &QueryContext,
    cfg: &EngineConfig,
) -> Result<QueryOutcome> {
    TopkRun::new(
        network,
        store,
        ctx,
        cfg,
        TraversalMode::OnTheFly,
        BoundEstimator::Exact,
    )
    .map(TopkRun::run)
}

/// Exact search over the materialised baseline traversal.
pub fn top_k_materialized(
    network: &SocialNetwork,
    store: &TaggingStore,
    ctx: &QueryContext,
    cfg: &EngineConfig,
) -> Result<QueryOutcome> {
    TopkRun::new(
        network,
        store,
        ctx,
        cfg,
        TraversalMode::Materialized,
        BoundEstimator::Exact,
    )
    .map(TopkRun::run)
}

/// Approximate search: lazy traversal with an estimator in place of the
/// exact queue-head bounds. Passing [`BoundEstimator::Exact`] reproduces
/// [`top_k`] bit for bit.
pub fn top_k_estimated(
    network: &SocialNetwork,
    store: &TaggingStore,
    ctx: &QueryContext,
    cfg: &EngineConfig,
    estimator: BoundEstimator,
) -> Result<QueryOutcome> {
    TopkRun::new(network, store, ctx, cfg, TraversalMode::OnTheFly, estimator).map(TopkRun::run)
}

/// Purely social search: the alpha = 0 specialisation of [`top_k`], where
/// textual steps can never help and the run walks the network alone.
pub fn top_k_social(
    network: &SocialNetwork,
    store: &TaggingStore,
    ctx: &QueryContext,
    cfg: &EngineConfig,
) -> Result<QueryOutcome> {
    if ctx.alpha != 0.0 {
        return Err(Error::domain(format!(
            "social-only search requires alpha = 0, got {}",
            ctx.alpha
        )));
    }
    top_k(network, store, ctx, cfg)
}
