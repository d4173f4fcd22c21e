//! The stepping state machine behind every engine entry point.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::time::Instant;

use crate::approx::BoundEstimator;
use crate::graph::{ProximityIterator, SocialNetwork};
use crate::ids::{ItemId, UserId};
use crate::scoring::{apply_h, QueryContext, Semantics};
use crate::store::{InvertedCursor, TaggingStore};
use crate::Result;

use super::{EngineConfig, QueryOutcome, RunStats, ScoredItem, TraversalMode};

/// Where social steps draw `(user, proximity)` pairs from.
enum ProximitySource<'n> {
    Lazy(ProximityIterator<'n>),
    Vector {
        entries: Vec<(UserId, f64)>,
        pos: usize,
    },
}

impl ProximitySource<'_> {
    /// Upper bound on every not-yet-visited user's proximity; 0 once done.
    fn peek_top(&mut self) -> f64 {
        match self {
            ProximitySource::Lazy(it) => it.peek_top(),
            ProximitySource::Vector { entries, pos } => {
                entries.get(*pos).map_or(0.0, |e| e.1)
            }
        }
    }

    fn next_entry(&mut self) -> Option<(UserId, f64)> {
        match self {
            ProximitySource::Lazy(it) => it.next_user(),
            ProximitySource::Vector { entries, pos } => {
                let e = entries.get(*pos).copied();
                if e.is_some() {
                    *pos += 1;
                }
                e
            }
        }
    }

    fn has_entries(&mut self) -> bool {
        match self {
            ProximitySource::Lazy(it) => !it.is_exhausted(),
            ProximitySource::Vector { entries, pos } => *pos < entries.len(),
        }
    }
}

/// Per-candidate, per-query-tag bookkeeping.
#[derive(Debug, Clone, Copy)]
struct TagSlot {
    /// Proximity mass of visited taggers of this (item, tag) pair.
    sf: f64,
    /// Visited taggers of this pair: a lower bound on its tag frequency.
    partial_tf: u32,
    /// Exact tag frequency once the pair's list entry was consumed.
    tf: Option<u32>,
    /// Upper bound on taggers of this pair not visited yet.
    unseen: u32,
}

#[derive(Debug, Clone)]
struct Candidate {
    item: ItemId,
    tags: Vec<TagSlot>,
}

impl Candidate {
    /// A fresh candidate knows nothing beyond the per-tag frequency
    /// ceilings in effect at discovery time.
    fn new(item: ItemId, frequency_ceilings: &[u32]) -> Self {
        Candidate {
            item,
            tags: frequency_ceilings
                .iter()
                .map(|&ceiling| TagSlot {
                    sf: 0.0,
                    partial_tf: 0,
                    tf: None,
                    unseen: ceiling,
                })
                .collect(),
        }
    }
}

/// One candidate's current score interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateBounds {
    pub item: ItemId,
    pub min: f64,
    pub max: f64,
}

/// Ranked bound state at one step, for callers that audit the run.
#[derive(Debug, Clone)]
pub struct BoundsSnapshot {
    /// All candidates, best first (min desc, then max desc, then item id).
    pub candidates: Vec<CandidateBounds>,
    /// Score ceiling for items not in the candidate buffer at all.
    pub max_score_unseen: f64,
}

struct BoundsView {
    ranked: Vec<CandidateBounds>,
    msu: f64,
    top_h: f64,
}

enum Branch {
    Social,
    /// Consume one head per unspent cursor.
    TextualBulk,
    /// Consume one head of this query-tag index.
    TextualTag(usize),
}

fn rank_cmp(a: &CandidateBounds, b: &CandidateBounds) -> Ordering {
    b.min
        .total_cmp(&a.min)
        .then(b.max.total_cmp(&a.max))
        .then(a.item.cmp(&b.item))
}

/// A top-k run in progress. [`Self::step`] executes one branch at a time,
/// so tests and tools can audit bounds between steps via [`Self::snapshot`];
/// [`Self::run`] drives it to completion.
pub struct TopkRun<'a> {
    store: &'a TaggingStore,
    ctx: &'a QueryContext,
    cfg: EngineConfig,
    mode: TraversalMode,
    source: ProximitySource<'a>,
    cursors: Vec<InvertedCursor<'a>>,
    candidates: HashMap<ItemId, Candidate>,
    estimator: BoundEstimator,
    stats: RunStats,
    /// Per-tag frequency ceilings read once at start (materialized mode's
    /// branch rule only).
    start_tfs: Vec<u32>,
    /// Round-robin position over query tags (materialized mode only).
    rr: usize,
    done: bool,
}

impl<'a> TopkRun<'a> {
    pub fn new(
        network: &'a SocialNetwork,
        store: &'a TaggingStore,
        ctx: &'a QueryContext,
        cfg: &EngineConfig,
        mode: TraversalMode,
        estimator: BoundEstimator,
    ) -> Result<Self> {
        let cursors: Vec<InvertedCursor<'a>> =
            ctx.tags.iter().map(|&t| store.cursor(t)).collect();
        let source = match mode {
            TraversalMode::OnTheFly => {
                ProximitySource::Lazy(Self::iterator_for(network, ctx, cfg)?)
            }
            TraversalMode::Materialized => {
                // The whole proximity vector is precomputed offline in this
                // mode; building it is not part of the run's work, reading
                // it is.
                let mut it = Self::iterator_for(network, ctx, cfg)?;
                let mut entries = Vec::new();
                while let Some(e) = it.next_user() {
                    entries.push(e);
                }
                ProximitySource::Vector { entries, pos: 0 }
            }
        };
        let mut stats = RunStats::default();
        let start_tfs: Vec<u32> = cursors.iter().map(|c| c.top_tf()).collect();
        if mode == TraversalMode::Materialized {
            // The branch rule needs each tag's top frequency: one head read
            // per non-empty list.
            stats.seqitems += cursors.iter().filter(|c| !c.is_spent()).count() as u64;
        }
        Ok(TopkRun {
            store,
            ctx,
            cfg: *cfg,
            mode,
            source,
            cursors,
            candidates: HashMap::new(),
            estimator,
            stats,
            start_tfs,
            rr: 0,
            done: false,
        })
    }

    fn iterator_for(
        network: &'a SocialNetwork,
        ctx: &QueryContext,
        cfg: &EngineConfig,
    ) -> Result<ProximityIterator<'a>> {
        if network.contains(ctx.seeker) {
            network.proximity_iter(ctx.seeker, cfg.proximity)
        } else {
            // A seeker with no edges is connected to nobody: the traversal
            // emits only the seeker itself.
            Ok(network.isolated_iter(ctx.seeker, cfg.proximity))
        }
    }

    pub fn stats(&self) -> RunStats {
        self.stats
    }

    /// Executes one branch. Returns false once the run is finished, either
    /// because the stop rule fired or because no step can move any bound.
    pub fn step(&mut self) -> bool {
        if self.done {
            return false;
        }
        let view = self.bounds_view();
        if self.should_stop(&view) {
            self.done = true;
            self.stats.terminated_early = true;
            return false;
        }
        let alpha = self.ctx.alpha;
        let social_alive = self.source.has_entries();
        // With alpha = 0 a zero queue head means no social step can add
        // score mass, and textual steps never could: the run is done.
        let social_useful =
            social_alive && alpha < 1.0 && !(alpha == 0.0 && view.top_h == 0.0);
        let textual_alive = self.cursors.iter().any(|c| !c.is_spent());
        let textual_useful = textual_alive && alpha > 0.0;
        if !social_useful && !textual_useful {
            self.done = true;
            return false;
        }
        let branch = if !social_useful {
            match self.mode {
                TraversalMode::OnTheFly => Branch::TextualBulk,
                TraversalMode::Materialized => Branch::TextualTag(self.next_unspent_tag()),
            }
        } else if !textual_useful {
            Branch::Social
        } else {
            match self.mode {
                TraversalMode::OnTheFly => self.choose_on_the_fly(&view),
                TraversalMode::Materialized => self.choose_materialized(view.top_h),
            }
        };
        match branch {
            Branch::Social => self.social_step(),
            Branch::TextualBulk => {
                for l in 0..self.cursors.len() {
                    if !self.cursors[l].is_spent() {
                        self.consume_head(l);
                    }
                }
            }
            Branch::TextualTag(l) => self.consume_head(l),
        }
        self.stats.steps += 1;
        true
    }

    /// Drives the run to completion and assembles the outcome.
    pub fn run(mut self) -> QueryOutcome {
        let t0 = Instant::now();
        while self.step() {}
        let mut out = self.finish();
        out.stats.wall = t0.elapsed();
        out
    }

    /// Current ranked bounds, for step-by-step auditing.
    pub fn snapshot(&mut self) -> BoundsSnapshot {
        let view = self.bounds_view();
        BoundsSnapshot {
            candidates: view.ranked,
            max_score_unseen: view.msu,
        }
    }

    /// Assembles the outcome from the current state: qualified candidates
    /// best-first, truncated to k, scored by their lower bounds.
    pub fn finish(mut self) -> QueryOutcome {
        let view = self.bounds_view();
        let mut items = Vec::new();
        let mut all_final = true;
        for cb in &view.ranked {
            if items.len() == self.ctx.k {
                break;
            }
            if !self.qualifies(&self.candidates[&cb.item]) {
                continue;
            }
            items.push(ScoredItem {
                item: cb.item,
                score: cb.min,
            });
            if cb.min != cb.max {
                all_final = false;
            }
        }
        QueryOutcome {
            short: items.len() < self.ctx.k,
            partial: !all_final,
            items,
            stats: self.stats,
        }
    }

    /// Evidence check for the result set: per semantics, the candidate must
    /// have a factually positive frequency (visited taggers or a consumed
    /// list entry, no estimates) on some tag / on every tag.
    fn qualifies(&self, cand: &Candidate) -> bool {
        let alpha = self.ctx.alpha;
        let has = |s: &TagSlot| {
            alpha * s.tf.unwrap_or(s.partial_tf) as f64 + (1.0 - alpha) * s.sf > 0.0
        };
        match self.ctx.semantics {
            Semantics::Disjunctive => cand.tags.iter().any(has),
            Semantics::Conjunctive => cand.tags.iter().all(has),
        }
    }

    // ---- bounds ----

    fn bounds_view(&mut self) -> BoundsView {
        let top_h = self.source.peek_top();
        let alpha = self.ctx.alpha;
        let concave = self.ctx.ranking.concave();
        let tops: Vec<u32> = self.cursors.iter().map(|c| c.top_tf()).collect();
        // Estimates depend only on the unseen count; memoise per view.
        let mut memo: HashMap<u32, (f64, f64)> = HashMap::new();
        let estimator = &self.estimator;
        let mut est = |unseen: u32| -> (f64, f64) {
            *memo.entry(unseen).or_insert_with(|| {
                let emax = estimator.est_max(unseen, top_h);
                // A lower estimate above the upper one (possible with stale
                // summaries) would invert the interval; flooring it keeps
                // the bounds ordered and only loosens them.
                let emin = estimator.est_min(unseen).min(emax);
                (emax, emin)
            })
        };

        let mut ranked = Vec::with_capacity(self.candidates.len());
        for cand in self.candidates.values() {
            let mut lo_sum = 0.0;
            let mut hi_sum = 0.0;
            let mut evidence_all = true;
            for (l, s) in cand.tags.iter().enumerate() {
                let (emax, emin) = est(s.unseen);
                let (fr_lo, fr_hi) = match s.tf {
                    Some(tf) => {
                        // Raising the pessimistic social mass by the lower
                        // estimate is only sound for score functions linear
                        // in the frequency.
                        let emin = if concave { 0.0 } else { emin };
                        let base = alpha * tf as f64;
                        (
                            base + (1.0 - alpha) * (s.sf + emin * s.unseen as f64),
                            base + (1.0 - alpha) * (s.sf + emax * s.unseen as f64),
                        )
                    }
                    None => (
                        alpha * s.partial_tf as f64 + (1.0 - alpha) * s.sf,
                        alpha * tops[l] as f64
                            + (1.0 - alpha) * (s.sf + emax * s.unseen as f64),
                    ),
                };
                // The score function is monotone in fr but may decrease
                // (negative idf), so order the endpoint images explicitly.
                let h_lo = apply_h(&self.ctx.ranking, fr_lo, self.ctx.tags[l]);
                let h_hi = apply_h(&self.ctx.ranking, fr_hi, self.ctx.tags[l]);
                lo_sum += h_lo.min(h_hi);
                hi_sum += h_lo.max(h_hi);
                let factual =
                    alpha * s.tf.unwrap_or(s.partial_tf) as f64 + (1.0 - alpha) * s.sf;
                if factual <= 0.0 {
                    evidence_all = false;
                }
            }
            let (min, max) = if self.ctx.semantics == Semantics::Conjunctive && !evidence_all
            {
                // Without evidence on every tag the item scores 0 unless
                // future steps complete it.
                (0.0, hi_sum.max(0.0))
            } else {
                (lo_sum, hi_sum)
            };
            ranked.push(CandidateBounds {
                item: cand.item,
                min,
                max,
            });
        }
        ranked.sort_by(rank_cmp);

        // Ceiling for items never seen: on each tag they have at most the
        // head frequency, all of it from unvisited taggers.
        let mut msu = 0.0;
        for (l, &t_tf) in tops.iter().enumerate() {
            if t_tf == 0 {
                continue;
            }
            let (emax, _) = est(t_tf);
            let fr = alpha * t_tf as f64 + (1.0 - alpha) * emax * t_tf as f64;
            msu += apply_h(&self.ctx.ranking, fr, self.ctx.tags[l]).max(0.0);
        }
        BoundsView {
            ranked,
            msu,
            top_h,
        }
    }

    fn should_stop(&self, view: &BoundsView) -> bool {
        let k = self.ctx.k;
        if view.ranked.len() < k {
            return false;
        }
        let threshold = view.ranked[k - 1].min;
        let rest_max = view.ranked[k..]
            .iter()
            .map(|c| c.max)
            .fold(f64::NEG_INFINITY, f64::max);
        if !(threshold > rest_max && threshold > view.msu) {
            return false;
        }
        if self.cfg.exact_scores {
            // Keep stepping until the scores that will be returned are
            // final: the first k qualified candidates must have closed
            // intervals.
            let mut returned = 0;
            for cb in &view.ranked {
                if returned == k {
                    break;
                }
                if !self.qualifies(&self.candidates[&cb.item]) {
                    continue;
                }
                if cb.min != cb.max {
                    return false;
                }
                returned += 1;
            }
        }
        true
    }

    // ---- branch choice ----

    /// Lazy-mode heuristic: look at the strongest candidate outside the
    /// current top k and take the branch with more remaining upside for it.
    fn choose_on_the_fly(&mut self, view: &BoundsView) -> Branch {
        let alpha = self.ctx.alpha;
        let runner_up = view
            .ranked
            .get(self.ctx.k..)
            .unwrap_or(&[])
            .iter()
            .fold(None::<&CandidateBounds>, |best, c| match best {
                Some(b) if b.max >= c.max => Some(b),
                _ => Some(c),
            });
        let Some(rc) = runner_up else {
            return if alpha < 1.0 {
                Branch::Social
            } else {
                Branch::TextualBulk
            };
        };
        let cand = &self.candidates[&rc.item];
        let mut any_potential = false;
        for (l, s) in cand.tags.iter().enumerate() {
            let social = (1.0 - alpha) * s.unseen as f64 * view.top_h;
            let textual = if s.tf.is_none() {
                alpha * self.cursors[l].top_tf() as f64
            } else {
                0.0
            };
            if social > textual {
                return Branch::Social;
            }
            if social > 0.0 || textual > 0.0 {
                any_potential = true;
            }
        }
        if any_potential {
            Branch::TextualBulk
        } else if alpha < 1.0 {
            Branch::Social
        } else {
            Branch::TextualBulk
        }
    }

    /// Baseline branch rule: round-robin over query tags, comparing each
    /// tag's social ceiling (start-time top frequency times queue head)
    /// against its textual ceiling (current head frequency).
    fn choose_materialized(&mut self, top_h: f64) -> Branch {
        let alpha = self.ctx.alpha;
        let r = self.cursors.len();
        for attempt in 0..r {
            let l = (self.rr + attempt) % r;
            let social = (1.0 - alpha) * self.start_tfs[l] as f64 * top_h;
            let textual = alpha * self.cursors[l].top_tf() as f64;
            if social > textual {
                self.rr += attempt + 1;
                return Branch::Social;
            }
            if !self.cursors[l].is_spent() {
                self.rr += attempt + 1;
                return Branch::TextualTag(l);
            }
            // Spent cursor that social cannot beat: skip this tag.
        }
        self.rr += r;
        Branch::Social
    }

    fn next_unspent_tag(&mut self) -> usize {
        let r = self.cursors.len();
        for attempt in 0..r {
            let l = (self.rr + attempt) % r;
            if !self.cursors[l].is_spent() {
                self.rr += attempt + 1;
                return l;
            }
        }
        unreachable!("gated on an unspent cursor existing");
    }

    // ---- steps ----

    fn social_step(&mut self) {
        let (user, sigma) = self
            .source
            .next_entry()
            .expect("social branch gated on a live source");
        if user != self.ctx.seeker {
            // Summaries describe everyone but the seeker.
            self.estimator.observe(sigma);
        }
        self.visit_user(user, sigma);
        if self.mode == TraversalMode::OnTheFly {
            self.consume_surfaced();
        }
    }

    /// Reads the visited user's tagging lists for every query tag and folds
    /// them into the candidate buffer.
    fn visit_user(&mut self, user: UserId, sigma: f64) {
        let tops: Vec<u32> = self.cursors.iter().map(|c| c.top_tf()).collect();
        let add_sf = user != self.ctx.seeker || self.cfg.include_seeker_sf;
        for (l, &tag) in self.ctx.tags.iter().enumerate() {
            for &item in self.store.user_list(user, tag) {
                let cand = self
                    .candidates
                    .entry(item)
                    .or_insert_with(|| Candidate::new(item, &tops));
                let slot = &mut cand.tags[l];
                if add_sf {
                    slot.sf += sigma;
                }
                slot.partial_tf += 1;
                slot.unseen = slot.unseen.saturating_sub(1);
            }
        }
        self.stats.users_visited += 1;
    }

    /// Lazy-mode refinement: as long as some list head is already a
    /// candidate, consuming it is free of discovery risk and pins its exact
    /// frequency.
    fn consume_surfaced(&mut self) {
        loop {
            let next = (0..self.cursors.len()).find(|&l| {
                self.cursors[l]
                    .top_item()
                    .is_some_and(|i| self.candidates.contains_key(&i))
            });
            match next {
                Some(l) => self.consume_head(l),
                None => break,
            }
        }
    }

    /// Consumes the head of one tag's inverted list: fixes the item's exact
    /// frequency and propagates the tightened per-tag frequency ceiling to
    /// candidates still awaiting theirs.
    fn consume_head(&mut self, l: usize) {
        let (item, tf) = self.cursors[l]
            .advance()
            .expect("consume_head called on a spent cursor");
        self.stats.seqitems += 1;
        let tops: Vec<u32> = self.cursors.iter().map(|c| c.top_tf()).collect();
        let cand = self
            .candidates
            .entry(item)
            .or_insert_with(|| Candidate::new(item, &tops));
        let slot = &mut cand.tags[l];
        slot.tf = Some(tf);
        slot.unseen = tf.saturating_sub(slot.partial_tf);
        // The list is frequency-ordered: every unconsumed item now has at
        // most the new head's frequency, so their unseen-tagger ceilings
        // shrink by the drop.
        let delta = tf.saturating_sub(self.cursors[l].top_tf());
        if delta > 0 {
            for cand in self.candidates.values_mut() {
                let slot = &mut cand.tags[l];
                if slot.tf.is_none() {
                    slot.unseen = slot.unseen.saturating_sub(delta);
                }
            }
        }
    }
}

#[cfg(test)]
pub(crate) mod tests_support {
    use crate::graph::tests_support::five_user_network;
    use crate::ids::SymbolTable;
    use crate::store::TaggingStore;

    /// The five-user network plus the matching taggings:
    /// B and D tagged i1 with t1; C and E tagged i2 with t1;
    /// B tagged i2 with t2; E tagged i1 with t2.
    pub(crate) fn fixture() -> (
        crate::graph::SocialNetwork,
        SymbolTable,
        TaggingStore,
        crate::ids::Vocab,
    ) {
        let (net, users) = five_user_network();
        let mut vocab = crate::ids::Vocab::new();
        for name in ["A", "B", "C", "D", "E"] {
            vocab.user(name);
        }
        let triples = [
            ("B", "i1", "t1"),
            ("D", "i1", "t1"),
            ("C", "i2", "t1"),
            ("E", "i2", "t1"),
            ("B", "i2", "t2"),
            ("E", "i1", "t2"),
        ];
        let store = TaggingStore::ingest(
            triples
                .iter()
                .map(|&(u, i, t)| (vocab.user(u), vocab.item(i), vocab.tag(t))),
        );
        (net, users, store, vocab)
    }
}

#[cfg(test)]
mod tests {
    use super::tests_support::fixture;
    use super::*;
    use crate::engine::{self, CostModel, EngineConfig, TraversalMode};
    use crate::graph::tests_support::five_user_network;
    use crate::ids::TagId;
    use crate::scoring::RankingFunction;
    use crate::store::TaggingStore;

    fn ctx(
        vocab: &mut crate::ids::Vocab,
        seeker: &str,
        tags: &[&str],
        k: usize,
        alpha: f64,
    ) -> QueryContext {
        let seeker = vocab.user(seeker);
        let tags: Vec<TagId> = tags.iter().map(|t| vocab.tag(t)).collect();
        QueryContext::new(
            seeker,
            tags,
            k,
            alpha,
            RankingFunction::identity(),
            Semantics::Disjunctive,
        )
        .unwrap()
    }

    fn items_of(out: &QueryOutcome, vocab: &crate::ids::Vocab) -> Vec<(String, f64)> {
        out.items
            .iter()
            .map(|s| (vocab.item_name(s.item).to_string(), s.score))
            .collect()
    }

    #[test]
    fn social_only_single_tag() {
        let (net, _, store, mut vocab) = fixture();
        let q = ctx(&mut vocab, "A", &["t1"], 1, 0.0);
        let out = engine::top_k(&net, &store, &q, &EngineConfig::default()).unwrap();
        let got = items_of(&out, &vocab);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].0, "i1");
        assert!((got[0].1 - 1.62).abs() < 1e-12, "{}", got[0].1);
        assert!(!out.short);
    }

    #[test]
    fn social_only_two_tags() {
        let (net, _, store, mut vocab) = fixture();
        let q = ctx(&mut vocab, "A", &["t1", "t2"], 1, 0.0);
        let out = engine::top_k(&net, &store, &q, &EngineConfig::default()).unwrap();
        let got = items_of(&out, &vocab);
        assert_eq!(got[0].0, "i1");
        // i1: 1.62 on t1 plus E's 0.3 on t2; i2 totals 1.8.
        assert!((got[0].1 - 1.92).abs() < 1e-12, "{}", got[0].1);
    }

    #[test]
    fn unknown_tag_returns_empty_short() {
        let (net, _, store, mut vocab) = fixture();
        let q = ctx(&mut vocab, "A", &["t3"], 1, 0.0);
        let out = engine::top_k(&net, &store, &q, &EngineConfig::default()).unwrap();
        assert!(out.items.is_empty());
        assert!(out.short);
    }

    #[test]
    fn textual_only_breaks_frequency_tie_by_item_id() {
        let (net, _, store, mut vocab) = fixture();
        let q = ctx(&mut vocab, "A", &["t1"], 2, 1.0);
        let out = engine::top_k(&net, &store, &q, &EngineConfig::default()).unwrap();
        let got = items_of(&out, &vocab);
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].0, "i1");
        assert_eq!(got[1].0, "i2");
        assert_eq!(got[0].1, 2.0);
        assert_eq!(got[1].1, 2.0);
        // Pure textual runs never touch the network.
        assert_eq!(out.stats.users_visited, 0);
    }

    #[test]
    fn blended_alpha_prefers_connected_item() {
        let (net, _, store, mut vocab) = fixture();
        let q = ctx(&mut vocab, "A", &["t1"], 1, 0.5);
        for mode in [TraversalMode::OnTheFly, TraversalMode::Materialized] {
            let cfg = EngineConfig {
                exact_scores: true,
                ..EngineConfig::default()
            };
            let run = TopkRun::new(&net, &store, &q, &cfg, mode, BoundEstimator::Exact)
                .unwrap();
            let out = run.run();
            let got = items_of(&out, &vocab);
            assert_eq!(got[0].0, "i1");
            assert!((got[0].1 - 1.81).abs() < 1e-12, "{}", got[0].1);
            assert!(!out.partial);
        }
    }

    #[test]
    fn stepping_bounds_match_worked_example() {
        let (net, _, store, mut vocab) = fixture();
        let q = ctx(&mut vocab, "A", &["t1"], 1, 0.0);
        let cfg = EngineConfig::default();
        let mut run = TopkRun::new(
            &net,
            &store,
            &q,
            &cfg,
            TraversalMode::OnTheFly,
            BoundEstimator::Exact,
        )
        .unwrap();
        // Step 1 visits the seeker (no taggings): buffer stays empty.
        assert!(run.step());
        assert_eq!(run.stats().users_visited, 1);
        assert!(run.snapshot().candidates.is_empty());
        // Step 2 visits B (proximity 0.9): i1 and i2 surface; i1's head
        // entry gets consumed, pinning tf = 2.
        assert!(run.step());
        let snap = run.snapshot();
        let i1 = vocab.lookup_item("i1").unwrap();
        let cb = snap.candidates.iter().find(|c| c.item == i1).unwrap();
        assert!((cb.min - 0.9).abs() < 1e-12, "{}", cb.min);
        // One unvisited tagger at most, ceiling 0.72: max = 0.9 + 0.72.
        assert!((cb.max - 1.62).abs() < 1e-12, "{}", cb.max);
        // Unseen items: head frequency 2 at ceiling 0.72 each.
        assert!((snap.max_score_unseen - 1.44).abs() < 1e-12);
    }

    #[test]
    fn exhaustive_stepping_matches_oracle_each_step() {
        let (net, _, store, mut vocab) = fixture();
        let cfg = EngineConfig::default();
        for alpha in [0.0, 0.5, 1.0] {
            let q = ctx(&mut vocab, "A", &["t1", "t2"], 1, alpha);
            let table = engine::oracle::score_table(&net, &store, &q, &cfg).unwrap();
            let mut run = TopkRun::new(
                &net,
                &store,
                &q,
                &cfg,
                TraversalMode::OnTheFly,
                BoundEstimator::Exact,
            )
            .unwrap();
            loop {
                let snap = run.snapshot();
                for cb in &snap.candidates {
                    let exact = table.scores[&cb.item];
                    assert!(
                        cb.min <= exact + 1e-9 && exact <= cb.max + 1e-9,
                        "alpha {alpha}: {exact} outside [{}, {}]",
                        cb.min,
                        cb.max
                    );
                }
                if !run.step() {
                    break;
                }
            }
        }
    }

    #[test]
    fn both_modes_agree_with_oracle_on_fixture() {
        let (net, _, store, mut vocab) = fixture();
        for alpha in [0.0, 0.25, 0.5, 0.75, 1.0] {
            for tags in [vec!["t1"], vec!["t2"], vec!["t1", "t2"]] {
                let q = ctx(&mut vocab, "A", &tags, 2, alpha);
                // Default mode settles the top-k membership; scores stay
                // lower bounds, so compare sets.
                let cfg = EngineConfig::default();
                let reference = engine::oracle::full_scan(&net, &store, &q, &cfg).unwrap();
                let want: std::collections::BTreeSet<ItemId> =
                    reference.items.iter().map(|s| s.item).collect();
                let lazy = engine::top_k(&net, &store, &q, &cfg).unwrap();
                let baseline = engine::top_k_materialized(&net, &store, &q, &cfg).unwrap();
                for out in [&lazy, &baseline] {
                    let got: std::collections::BTreeSet<ItemId> =
                        out.items.iter().map(|s| s.item).collect();
                    assert_eq!(got, want, "alpha {alpha} tags {tags:?}");
                }
                // Exact-scores mode settles order and values too.
                let cfg = EngineConfig {
                    exact_scores: true,
                    ..cfg
                };
                let lazy = engine::top_k(&net, &store, &q, &cfg).unwrap();
                let baseline = engine::top_k_materialized(&net, &store, &q, &cfg).unwrap();
                for out in [&lazy, &baseline] {
                    assert_eq!(out.items.len(), reference.items.len());
                    for (got, want) in out.items.iter().zip(&reference.items) {
                        assert_eq!(got.item, want.item, "alpha {alpha} tags {tags:?}");
                        assert!(
                            (got.score - want.score).abs() < 1e-12,
                            "alpha {alpha} tags {tags:?}: {} vs {}",
                            got.score,
                            want.score
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn exact_scores_mode_reports_oracle_scores() {
        let (net, _, store, mut vocab) = fixture();
        let cfg = EngineConfig {
            exact_scores: true,
            ..EngineConfig::default()
        };
        let q = ctx(&mut vocab, "A", &["t1", "t2"], 2, 0.5);
        let table = engine::oracle::score_table(&net, &store, &q, &cfg).unwrap();
        let out = engine::top_k(&net, &store, &q, &cfg).unwrap();
        assert!(!out.partial);
        for s in &out.items {
            assert!(
                (s.score - table.scores[&s.item]).abs() < 1e-12,
                "{} vs {}",
                s.score,
                table.scores[&s.item]
            );
        }
    }

    #[test]
    fn social_only_entry_rejects_positive_alpha() {
        let (net, _, store, mut vocab) = fixture();
        let q = ctx(&mut vocab, "A", &["t1"], 1, 0.3);
        assert!(engine::top_k_social(&net, &store, &q, &EngineConfig::default()).is_err());
    }

    #[test]
    fn isolated_seeker_still_gets_textual_results() {
        let (net, _, store, mut vocab) = fixture();
        let q = ctx(&mut vocab, "ghost", &["t1"], 2, 1.0);
        let out = engine::top_k(&net, &store, &q, &EngineConfig::default()).unwrap();
        assert_eq!(out.items.len(), 2);
        // And socially there is nothing for them.
        let q0 = ctx(&mut vocab, "ghost", &["t1"], 2, 0.0);
        let out0 = engine::top_k(&net, &store, &q0, &EngineConfig::default()).unwrap();
        assert!(out0.items.is_empty());
        assert!(out0.short);
    }

    #[test]
    fn seeker_taggings_excluded_from_social_mass_by_default() {
        let (net, _, store, mut vocab) = {
            let (net, users) = five_user_network();
            let mut vocab = crate::ids::Vocab::new();
            for name in ["A", "B", "C", "D", "E"] {
                vocab.user(name);
            }
            // A tagged i2 themselves; B and D tagged i1.
            let triples = [("A", "i2", "t1"), ("B", "i1", "t1"), ("D", "i1", "t1")];
            let store = TaggingStore::ingest(triples.iter().map(|&(u, i, t)| {
                (vocab.user(u), vocab.item(i), vocab.tag(t))
            }));
            let _ = users;
            (net, (), store, vocab)
        };
        let q = ctx(&mut vocab, "A", &["t1"], 2, 0.0);
        let cfg = EngineConfig {
            exact_scores: true,
            ..EngineConfig::default()
        };
        let out = engine::top_k(&net, &store, &q, &cfg).unwrap();
        let got = items_of(&out, &vocab);
        // i2 has no social mass beyond the seeker: it does not qualify.
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].0, "i1");
        // Opting in counts the seeker's own proximity of 1.
        let cfg_self = EngineConfig {
            include_seeker_sf: true,
            ..cfg
        };
        let out = engine::top_k(&net, &store, &q, &cfg_self).unwrap();
        let got = items_of(&out, &vocab);
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].0, "i1");
        assert_eq!(got[1].0, "i2");
        assert_eq!(got[1].1, 1.0);
    }

    #[test]
    fn cost_model_example() {
        let stats = RunStats {
            users_visited: 3,
            seqitems: 50,
            ..RunStats::default()
        };
        assert_eq!(CostModel::default().cost(&stats), 350);
    }

    #[test]
    fn conjunctive_requires_every_tag() {
        let (net, _, store, mut vocab) = fixture();
        let seeker = vocab.user("A");
        let tags = vec![vocab.tag("t1"), vocab.tag("t3")];
        let q = QueryContext::new(
            seeker,
            tags,
            2,
            0.0,
            RankingFunction::identity(),
            Semantics::Conjunctive,
        )
        .unwrap();
        let out = engine::top_k(&net, &store, &q, &EngineConfig::default()).unwrap();
        // Nothing carries t3, so nothing qualifies.
        assert!(out.items.is_empty());
        assert!(out.short);

        let tags = vec![vocab.tag("t1"), vocab.tag("t2")];
        let q = QueryContext::new(
            seeker,
            tags,
            2,
            0.0,
            RankingFunction::identity(),
            Semantics::Conjunctive,
        )
        .unwrap();
        let out = engine::top_k(&net, &store, &q, &EngineConfig::default()).unwrap();
        // Both items carry both tags through reachable taggers.
        assert_eq!(out.items.len(), 2);
    }
}
