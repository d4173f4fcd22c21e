//! Slow reference scoring: exhaust the proximity traversal, score every
//! item carrying a query tag by direct lookup, rank, and truncate. No
//! bounds, no early termination; the engine's fast paths are validated
//! against this.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::time::Instant;

use crate::graph::SocialNetwork;
use crate::ids::{ItemId, UserId};
use crate::scoring::{apply_h, overall_frequency, QueryContext, Semantics};
use crate::store::TaggingStore;
use crate::Result;

use super::{EngineConfig, QueryOutcome, RunStats, ScoredItem};

/// Exact scores for every item that carries at least one query tag.
/// Unqualified items are present with score 0, matching what the blend
/// assigns an item with no counted evidence.
#[derive(Debug, Clone)]
pub struct ScoreTable {
    pub scores: HashMap<ItemId, f64>,
    pub qualified: HashSet<ItemId>,
    /// Users the proximity traversal emitted (the whole reachable set).
    pub users_scanned: u64,
}

/// Scores the full candidate universe by random access. This path is
/// allowed to use the store's counted lookup methods; the engine is not.
pub fn score_table(
    network: &SocialNetwork,
    store: &TaggingStore,
    ctx: &QueryContext,
    cfg: &EngineConfig,
) -> Result<ScoreTable> {
    let mut sigma: HashMap<UserId, f64> = HashMap::new();
    let mut it = if network.contains(ctx.seeker) {
        network.proximity_iter(ctx.seeker, cfg.proximity)?
    } else {
        network.isolated_iter(ctx.seeker, cfg.proximity)
    };
    while let Some((u, s)) = it.next_user() {
        sigma.insert(u, s);
    }

    let mut universe: BTreeSet<ItemId> = BTreeSet::new();
    for &tag in &ctx.tags {
        let mut cursor = store.cursor(tag);
        while let Some((item, _)) = cursor.advance() {
            universe.insert(item);
        }
    }

    let mut scores = HashMap::new();
    let mut qualified = HashSet::new();
    for &item in &universe {
        let mut total = 0.0;
        let mut evidence = Vec::with_capacity(ctx.tags.len());
        for &tag in &ctx.tags {
            let tf = store.tf_lookup(tag, item);
            let mut sf = 0.0;
            for &tagger in store.taggers(tag, item) {
                if tagger == ctx.seeker && !cfg.include_seeker_sf {
                    continue;
                }
                sf += sigma.get(&tagger).copied().unwrap_or(0.0);
            }
            let fr = overall_frequency(tf, sf, ctx.alpha);
            evidence.push(fr > 0.0);
            total += apply_h(&ctx.ranking, fr, tag);
        }
        let ok = match ctx.semantics {
            Semantics::Disjunctive => evidence.iter().any(|&e| e),
            Semantics::Conjunctive => evidence.iter().all(|&e| e),
        };
        if ok {
            qualified.insert(item);
            scores.insert(item, total);
        } else {
            scores.insert(item, 0.0);
        }
    }
    Ok(ScoreTable {
        scores,
        qualified,
        users_scanned: sigma.len() as u64,
    })
}

/// Reference top-k: qualified items by exact score, ties broken by item id.
pub fn full_scan(
    network: &SocialNetwork,
    store: &TaggingStore,
    ctx: &QueryContext,
    cfg: &EngineConfig,
) -> Result<QueryOutcome> {
    let t0 = Instant::now();
    let table = score_table(network, store, ctx, cfg)?;
    let mut ranked: Vec<ScoredItem> = table
        .qualified
        .iter()
        .map(|&item| ScoredItem {
            item,
            score: table.scores[&item],
        })
        .collect();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.item.cmp(&b.item)));
    ranked.truncate(ctx.k);
    let stats = RunStats {
        users_visited: table.users_scanned,
        seqitems: 0,
        steps: 0,
        terminated_early: false,
        wall: t0.elapsed(),
    };
    Ok(QueryOutcome {
        short: ranked.len() < ctx.k,
        partial: false,
        items: ranked,
        stats,
    })
}
