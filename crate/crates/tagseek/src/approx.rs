//! Per-seeker proximity summaries and probabilistic bound estimation.
//!
//! Exact search bounds the social contribution of the users it has not yet
//! visited by the proximity-queue head: sound, but pessimistic when the
//! proximity distribution has a long flat tail. Approximate search instead
//! precomputes, per seeker, either moment statistics ([`SeekerSummary`]) or
//! a bucketed distribution ([`ProximityHistogram`]) of the full proximity
//! vector. During a run the engine removes each visited user's proximity
//! from the summary and asks for estimates of the *remaining* values that
//! hold with a drilled-down per-item confidence, trading a bounded failure
//! probability `delta` for earlier termination.
//!
//! `delta = 0` is exact mode: [`BoundEstimator::for_query`] then returns the
//! exact estimator, and results are bit-identical to exact search.

use std::collections::HashMap;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::graph::{ProximityFunction, SocialNetwork};
use crate::ids::{SymbolTable, UserId};
use crate::{Error, Result};

/// Moment summary of one seeker's full proximity vector (the seeker's own
/// identity entry excluded). `n = 0` marks an empty summary (isolated
/// seeker); estimation then degrades to exact bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeekerSummary {
    pub seeker: UserId,
    pub n: u64,
    pub mean: f64,
    pub variance: f64,
    pub second_moment: f64,
}

impl SeekerSummary {
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

/// One histogram bucket covering the half-open range `(low, high]`. The
/// zero bucket (`low == high == 0`) holds zero-proximity entries and is
/// kept last.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistBucket {
    pub low: f64,
    pub high: f64,
    pub count: u64,
}

/// Equal-width bucketing of one seeker's proximity vector over `(0, 1]`,
/// descending, with the zero bucket last.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityHistogram {
    pub seeker: UserId,
    pub buckets: Vec<HistBucket>,
    pub total: u64,
}

impl ProximityHistogram {
    /// Positive-range bucket count (excludes the zero bucket).
    pub fn positive_buckets(&self) -> usize {
        self.buckets.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }
}

/// Runs the proximity iterator to exhaustion for each seeker and records
/// moment and histogram summaries of the emitted values (the seeker's own
/// identity entry is skipped). Seekers without network presence yield empty
/// summaries. `bucket_override` fixes the positive-range bucket count; the
/// default is `ceil(sqrt(n))`.
pub fn build_summaries(
    network: &SocialNetwork,
    f: ProximityFunction,
    seekers: impl IntoIterator<Item = UserId>,
    bucket_override: Option<usize>,
) -> Result<Vec<(SeekerSummary, ProximityHistogram)>> {
    let mut out = Vec::new();
    for seeker in seekers {
        let mut sigmas: Vec<f64> = Vec::new();
        if network.contains(seeker) {
            let mut it = network.proximity_iter(seeker, f)?;
            while let Some((user, sigma)) = it.next_user() {
                if user != seeker {
                    sigmas.push(sigma);
                }
            }
        }
        let n = sigmas.len() as u64;
        let (mean, second_moment) = if n == 0 {
            (0.0, 0.0)
        } else {
            let sum: f64 = sigmas.iter().sum();
            let sumsq: f64 = sigmas.iter().map(|s| s * s).sum();
            (sum / n as f64, sumsq / n as f64)
        };
        let variance = (second_moment - mean * mean).max(0.0);
        let summary = SeekerSummary {
            seeker,
            n,
            mean,
            variance,
            second_moment,
        };

        let b = match bucket_override {
            Some(b) => b,
            None => (n as f64).sqrt().ceil() as usize,
        };
        let mut buckets: Vec<HistBucket> = (0..b)
            .map(|j| HistBucket {
                low: (b - j - 1) as f64 / b as f64,
                high: (b - j) as f64 / b as f64,
                count: 0,
            })
            .collect();
        let mut zero = 0u64;
        for &s in &sigmas {
            match bucket_index(b, s) {
                Some(j) => buckets[j].count += 1,
                None => zero += 1,
            }
        }
        buckets.push(HistBucket {
            low: 0.0,
            high: 0.0,
            count: zero,
        });
        out.push((
            summary,
            ProximityHistogram {
                seeker,
                buckets,
                total: n,
            },
        ));
    }
    Ok(out)
}

/// Index of the positive-range bucket holding `sigma`, or `None` for the
/// zero bucket. Bucket `j` covers `((b-j-1)/b, (b-j)/b]`.
fn bucket_index(b: usize, sigma: f64) -> Option<usize> {
    if sigma <= 0.0 || b == 0 {
        return None;
    }
    let scaled = (sigma * b as f64).ceil() as usize;
    let scaled = scaled.clamp(1, b);
    Some(b - scaled)
}

/// Per-item confidence drilled down from a whole-query failure budget:
/// with `q` tags each allowed to fail with probability `delta'`, the query
/// holds with probability `1 - delta` when `delta' = 1 - (1-delta)^(1/q)`.
pub fn drill_delta_query(delta: f64, query_len: usize) -> Result<f64> {
    if query_len == 0 {
        return Err(Error::domain("query length must be at least 1"));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::domain(format!(
            "delta {delta} outside (0, 1] (0 means exact mode, handled by the caller)"
        )));
    }
    Ok(1.0 - (1.0 - delta).powf(1.0 / query_len as f64))
}

/// Running record of the proximity values already seen during one query.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PartialSummaryState {
    pub seen: u64,
    pub sum_seen: f64,
    pub sumsq_seen: f64,
}

impl PartialSummaryState {
    pub fn observe(&mut self, sigma: f64) {
        self.seen += 1;
        self.sum_seen += sigma;
        self.sumsq_seen += sigma * sigma;
    }
}

/// Mean and variance of the values not yet seen, reconstructed from the
/// full-vector moments and exact running sums of the seen prefix. `None`
/// once every summarised value has been seen (bounds then collapse to 0).
pub fn remaining_stats(summary: &SeekerSummary, state: &PartialSummaryState) -> Option<(f64, f64)> {
    if state.seen >= summary.n {
        return None;
    }
    let n = summary.n as f64;
    let rem = (summary.n - state.seen) as f64;
    let mean_rem = (n * summary.mean - state.sum_seen) / rem;
    let sm_rem = (n * summary.second_moment - state.sumsq_seen) / rem;
    let var_rem = (sm_rem - mean_rem * mean_rem).max(0.0);
    Some((mean_rem, var_rem))
}

/// One-sided concentration estimate: with probability at least
/// `1 - delta_prime` per drawn value, the mean of `unseen` remaining draws
/// stays below `mean + sqrt(var / (unseen * delta_prime))`.
pub fn mvar_est_max(mean_rem: f64, var_rem: f64, unseen: u32, delta_prime: f64) -> Result<f64> {
    check_est_inputs(unseen, delta_prime)?;
    Ok(mean_rem + (var_rem / (unseen as f64 * delta_prime)).sqrt())
}

/// Symmetric lower estimate, clamped at 0.
pub fn mvar_est_min(mean_rem: f64, var_rem: f64, unseen: u32, delta_prime: f64) -> Result<f64> {
    check_est_inputs(unseen, delta_prime)?;
    Ok((mean_rem - (var_rem / (unseen as f64 * delta_prime)).sqrt()).max(0.0))
}

fn check_est_inputs(unseen: u32, delta_prime: f64) -> Result<()> {
    if unseen == 0 {
        return Err(Error::domain("estimation needs at least one unseen user"));
    }
    if !(delta_prime > 0.0 && delta_prime <= 1.0) {
        return Err(Error::domain(format!(
            "per-item confidence {delta_prime} outside (0, 1]"
        )));
    }
    Ok(())
}

/// Summary-file side of the approximate mode: one seeker per line,
/// `seeker<TAB>n<TAB>mean<TAB>variance<TAB>second_moment`.
pub fn write_summary_file(
    path: &Path,
    summaries: &[SeekerSummary],
    users: &SymbolTable,
) -> Result<()> {
    let mut out = fs::File::create(path)?;
    for s in summaries {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            users.name(s.seeker.0),
            s.n,
            s.mean,
            s.variance,
            s.second_moment
        )?;
    }
    Ok(())
}

pub fn read_summary_file(path: &Path, users: &mut SymbolTable) -> Result<Vec<SeekerSummary>> {
    let text = fs::read_to_string(path).map_err(|e| {
        Error::config(format!("cannot read summary file {}: {e}", path.display()))
    })?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(Error::parse(path, lineno, "expected 5 tab-separated fields"));
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad number `{s}`")))
        };
        out.push(SeekerSummary {
            seeker: UserId(users.intern(fields[0])),
            n: fields[1]
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad count `{}`", fields[1])))?,
            mean: parse_f(fields[2])?,
            variance: parse_f(fields[3])?,
            second_moment: parse_f(fields[4])?,
        });
    }
    Ok(out)
}

/// Histogram-file side: one seeker per line,
/// `seeker<TAB>b<TAB>low:high:count,...` with the zero bucket last.
pub fn write_histogram_file(
    path: &Path,
    histograms: &[ProximityHistogram],
    users: &SymbolTable,
) -> Result<()> {
    let mut out = fs::File::create(path)?;
    for h in histograms {
        let entries: Vec<String> = h
            .buckets
            .iter()
            .map(|b| format!("{}:{}:{}", b.low, b.high, b.count))
            .collect();
        writeln!(
            out,
            "{}\t{}\t{}",
            users.name(h.seeker.0),
            h.positive_buckets(),
            entries.join(",")
        )?;
    }
    Ok(())
}

pub fn read_histogram_file(path: &Path, users: &mut SymbolTable) -> Result<Vec<ProximityHistogram>> {
    let text = fs::read_to_string(path).map_err(|e| {
        Error::config(format!("cannot read histogram file {}: {e}", path.display()))
    })?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(path, lineno, "expected 3 tab-separated fields"));
        }
        let b: usize = fields[1]
            .parse()
            .map_err(|_| Error::parse(path, lineno, format!("bad bucket count `{}`", fields[1])))?;
        let mut buckets = Vec::new();
        for entry in fields[2].split(',') {
            let parts: Vec<&str> = entry.split(':').collect();
            if parts.len() != 3 {
                return Err(Error::parse(path, lineno, format!("bad bucket `{entry}`")));
            }
            let parse_f = |s: &str| -> Result<f64> {
                s.parse()
                    .map_err(|_| Error::parse(path, lineno, format!("bad number `{s}`")))
            };
            buckets.push(HistBucket {
                low: parse_f(parts[0])?,
                high: parse_f(parts[1])?,
                count: parts[2]
                    .parse()
                    .map_err(|_| Error::parse(path, lineno, format!("bad count `{}`", parts[2])))?,
            });
        }
        if buckets.len() != b + 1 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected {} buckets plus the zero bucket", b),
            ));
        }
        let zero = buckets.last().unwrap();
        if zero.low != 0.0 || zero.high != 0.0 {
            return Err(Error::parse(path, lineno, "zero bucket must come last"));
        }
        let total = buckets.iter().map(|b| b.count).sum();
        out.push(ProximityHistogram {
            seeker: UserId(users.intern(fields[0])),
            buckets,
            total,
        });
    }
    Ok(out)
}

/// Loaded summaries and histograms, keyed by seeker.
#[derive(Debug, Default)]
pub struct SummaryStore {
    summaries: HashMap<UserId, SeekerSummary>,
    histograms: HashMap<UserId, ProximityHistogram>,
}

impl SummaryStore {
    pub fn load(
        summary_path: &Path,
        histogram_path: &Path,
        users: &mut SymbolTable,
    ) -> Result<Self> {
        let summaries = read_summary_file(summary_path, users)?
            .into_iter()
            .map(|s| (s.seeker, s))
            .collect();
        let histograms = read_histogram_file(histogram_path, users)?
            .into_iter()
            .map(|h| (h.seeker, h))
            .collect();
        Ok(SummaryStore {
            summaries,
            histograms,
        })
    }

    pub fn from_parts(
        entries: impl IntoIterator<Item = (SeekerSummary, ProximityHistogram)>,
    ) -> Self {
        let mut store = SummaryStore::default();
        for (s, h) in entries {
            store.summaries.insert(s.seeker, s);
            store.histograms.insert(h.seeker, h);
        }
        store
    }

    pub fn summary(&self, seeker: UserId) -> Option<&SeekerSummary> {
        self.summaries.get(&seeker)
    }

    pub fn histogram(&self, seeker: UserId) -> Option<&ProximityHistogram> {
        self.histograms.get(&seeker)
    }
}

/// Moment-based tracker: summary plus the running seen-prefix sums.
#[derive(Debug, Clone)]
pub struct MvarTracker {
    summary: SeekerSummary,
    state: PartialSummaryState,
    delta_prime: f64,
}

impl MvarTracker {
    pub fn observe(&mut self, sigma: f64) {
        self.state.observe(sigma);
    }

    /// Upper estimate for one remaining value, clamped into `[0, top_h]`.
    pub fn est_max(&self, unseen: u32, top_h: f64) -> f64 {
        match remaining_stats(&self.summary, &self.state) {
            None => 0.0,
            Some((mean_rem, var_rem)) => mvar_est_max(mean_rem, var_rem, unseen, self.delta_prime)
                .map_or(0.0, |v| v.clamp(0.0, top_h)),
        }
    }

    /// Lower estimate for one remaining value, clamped into `[0, 1]`.
    pub fn est_min(&self, unseen: u32) -> f64 {
        match remaining_stats(&self.summary, &self.state) {
            None => 0.0,
            Some((mean_rem, var_rem)) => mvar_est_min(mean_rem, var_rem, unseen, self.delta_prime)
                .map_or(0.0, |v| v.clamp(0.0, 1.0)),
        }
    }
}

/// Histogram-based tracker: full bucket counts plus per-bucket seen counts.
#[derive(Debug, Clone)]
pub struct HistTracker {
    buckets: Vec<HistBucket>,
    seen: Vec<u64>,
    total: u64,
    seen_total: u64,
    delta_prime: f64,
    staleness: u64,
}

impl HistTracker {
    fn new(hist: &ProximityHistogram, delta_prime: f64) -> Self {
        HistTracker {
            seen: vec![0; hist.buckets.len()],
            buckets: hist.buckets.clone(),
            total: hist.total,
            seen_total: 0,
            delta_prime,
            staleness: 0,
        }
    }

    fn remaining(&self, i: usize) -> u64 {
        self.buckets[i].count.saturating_sub(self.seen[i])
    }

    /// Removes one visited value from the histogram. A value whose own
    /// bucket is already empty (stale or hand-edited summaries) falls back
    /// to the nearest non-empty bucket below, then above, and is counted in
    /// [`Self::staleness`].
    pub fn observe(&mut self, sigma: f64) {
        if self.seen_total >= self.total {
            self.staleness += 1;
            return;
        }
        self.seen_total += 1;
        let b = self.buckets.len() - 1;
        let idx = bucket_index(b, sigma).unwrap_or(b);
        if self.remaining(idx) > 0 {
            self.seen[idx] += 1;
            return;
        }
        self.staleness += 1;
        for i in idx + 1..self.buckets.len() {
            if self.remaining(i) > 0 {
                self.seen[i] += 1;
                return;
            }
        }
        for i in (0..idx).rev() {
            if self.remaining(i) > 0 {
                self.seen[i] += 1;
                return;
            }
        }
    }

    pub fn staleness(&self) -> u64 {
        self.staleness
    }

    /// `(est_max, est_min)` for one remaining value at the per-item
    /// confidence drilled down by the unseen count. `est_max` is clamped
    /// into `[0, top_h]`.
    pub fn est_bounds(&self, unseen: u32, top_h: f64) -> (f64, f64) {
        let total_rem = self.total.saturating_sub(self.seen_total);
        if total_rem == 0 || unseen == 0 {
            return (0.0, 0.0);
        }
        // Confidence per remaining value of this item's tag pair.
        let delta2 = 1.0 - (1.0 - self.delta_prime).powf(1.0 / unseen as f64);
        let positive = self.buckets.len() - 1;
        let mut cum = 0u64;
        let mut est_max: Option<f64> = None;
        let mut est_min: Option<f64> = None;
        for i in 0..positive {
            cum += self.remaining(i);
            let pr_above_low = cum as f64 / total_rem as f64;
            if pr_above_low <= delta2 {
                est_max = Some(self.buckets[i].low);
            }
            if est_min.is_none() && pr_above_low >= 1.0 - delta2 {
                est_min = Some(self.buckets[i].low);
            }
        }
        let est_max = est_max.unwrap_or_else(|| {
            // No low qualifies: bound by the top non-empty bucket's high.
            (0..self.buckets.len())
                .find(|&i| self.remaining(i) > 0)
                .map_or(0.0, |i| self.buckets[i].high)
        });
        (est_max.clamp(0.0, top_h), est_min.unwrap_or(0.0))
    }
}

/// The bound source used by the engine: exact queue-head bounds, or one of
/// the two estimated variants.
#[derive(Debug, Clone)]
pub enum BoundEstimator {
    Exact,
    Mvar(MvarTracker),
    Hist(HistTracker),
}

/// Which bound source a query should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    Exact,
    Mvar,
    Hist,
}

impl BoundEstimator {
    /// Builds the estimator for one query. `delta = 0` or an empty summary
    /// degrades to the exact estimator.
    pub fn for_query(
        kind: EstimatorKind,
        summaries: Option<&SummaryStore>,
        seeker: UserId,
        delta: f64,
        query_len: usize,
    ) -> Result<Self> {
        if delta < 0.0 || delta > 1.0 {
            return Err(Error::domain(format!("delta {delta} outside [0, 1]")));
        }
        match kind {
            EstimatorKind::Exact => Ok(BoundEstimator::Exact),
            _ if delta == 0.0 => Ok(BoundEstimator::Exact),
            EstimatorKind::Mvar => {
                let store = summaries.ok_or_else(|| {
                    Error::config("approximate mode needs a loaded summary file")
                })?;
                let summary = store.summary(seeker).ok_or_else(|| {
                    Error::config(format!("no summary for seeker {seeker}"))
                })?;
                if summary.is_empty() {
                    return Ok(BoundEstimator::Exact);
                }
                Ok(BoundEstimator::Mvar(MvarTracker {
                    summary: *summary,
                    state: PartialSummaryState::default(),
                    delta_prime: drill_delta_query(delta, query_len)?,
                }))
            }
            EstimatorKind::Hist => {
                let store = summaries.ok_or_else(|| {
                    Error::config("approximate mode needs a loaded histogram file")
                })?;
                let hist = store.histogram(seeker).ok_or_else(|| {
                    Error::config(format!("no histogram for seeker {seeker}"))
                })?;
                if hist.is_empty() {
                    return Ok(BoundEstimator::Exact);
                }
                Ok(BoundEstimator::Hist(HistTracker::new(
                    hist,
                    drill_delta_query(delta, query_len)?,
                )))
            }
        }
    }

    /// Records a visited user's proximity (the engine skips the seeker).
    pub fn observe(&mut self, sigma: f64) {
        match self {
            BoundEstimator::Exact => {}
            BoundEstimator::Mvar(t) => t.observe(sigma),
            BoundEstimator::Hist(t) => t.observe(sigma),
        }
    }

    /// Upper bound estimate for one unvisited user's proximity, given the
    /// item's unseen-tagger count; never exceeds the exact queue head.
    pub fn est_max(&self, unseen: u32, top_h: f64) -> f64 {
        if unseen == 0 {
            return 0.0;
        }
        match self {
            BoundEstimator::Exact => top_h,
            BoundEstimator::Mvar(t) => t.est_max(unseen, top_h),
            BoundEstimator::Hist(t) => t.est_bounds(unseen, top_h).0,
        }
    }

    /// Lower bound estimate for one unvisited user's proximity; 0 in exact
    /// mode.
    pub fn est_min(&self, unseen: u32) -> f64 {
        if unseen == 0 {
            return 0.0;
        }
        match self {
            BoundEstimator::Exact => 0.0,
            BoundEstimator::Mvar(t) => t.est_min(unseen),
            BoundEstimator::Hist(t) => t.est_bounds(unseen, 1.0).1,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, BoundEstimator::Exact)
    }
}
