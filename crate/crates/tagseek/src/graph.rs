//! Weighted social network and lazy proximity iteration.
//!
//! Edge weights are similarities in `(0, 1]`. The proximity of the seeker to
//! another user is the best value over all connecting paths of a monotone
//! path aggregation ([`ProximityFunction`]): multiplying weights, taking the
//! weakest link, or an exponential length penalty. Because every aggregation
//! is non-increasing as a path grows, a best-first traversal (a max-priority
//! variant of Dijkstra) emits users in non-increasing proximity order, and
//! the head of its queue bounds the proximity of every not-yet-visited user.
//! That bound is what lets the search engine stop early, so the iterator
//! exposes it as [`ProximityIterator::peek_top`].

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::ids::{SymbolTable, UserId};
use crate::{Error, Result};

/// Path aggregation for proximity between users.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProximityFunction {
    /// Product of edge weights along the path.
    Mul,
    /// Minimum edge weight along the path (bottleneck).
    Min,
    /// `lambda^(-sum(1/w_i))`: an exponential penalty on accumulated edge
    /// "length" `1/w`. Requires `lambda >= 1` so extensions never increase
    /// the value.
    Pow { lambda: f64 },
}

impl ProximityFunction {
    /// Value of the empty path (the seeker to herself).
    pub fn identity(&self) -> f64 {
        1.0
    }

    /// Extends a path value by one more edge. Errors if `sigma` is outside
    /// `[0, 1]`, the weight is outside `(0, 1]`, or a `Pow` lambda is below 1.
    pub fn extend(&self, sigma: f64, weight: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&sigma) {
            return Err(Error::domain(format!(
                "path value {sigma} outside [0, 1]"
            )));
        }
        check_weight(weight)?;
        self.check_params()?;
        Ok(self.extend_trusted(sigma, weight))
    }

    /// Aggregates a whole path of edge weights, starting from the identity.
    pub fn aggregate_path(&self, weights: &[f64]) -> Result<f64> {
        self.check_params()?;
        let mut acc = self.identity();
        for &w in weights {
            check_weight(w)?;
            acc = self.extend_trusted(acc, w);
        }
        Ok(acc)
    }

    fn check_params(&self) -> Result<()> {
        if let ProximityFunction::Pow { lambda } = self {
            if !(*lambda >= 1.0) {
                return Err(Error::domain(format!(
                    "exponential penalty base {lambda} must be >= 1"
                )));
            }
        }
        Ok(())
    }

    /// `extend` without validation; inputs must already satisfy the domain
    /// invariants (network weights are validated at load time).
    #[inline]
    pub(crate) fn extend_trusted(&self, sigma: f64, weight: f64) -> f64 {
        match self {
            ProximityFunction::Mul => sigma * weight,
            ProximityFunction::Min => sigma.min(weight),
            ProximityFunction::Pow { lambda } => sigma * lambda.powf(-1.0 / weight),
        }
    }
}

/// Undirected similarity network over users.
///
/// Weights live in `(0, 1]`; parallel edges and self-loops are rejected.
/// Users appear in the network exactly when they have at least one edge.
#[derive(Debug, Default, Clone)]
pub struct SocialNetwork {
    adjacency: Vec<Vec<(UserId, f64)>>,
    edges: usize,
}

impl SocialNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts the undirected edge `u -- v` with similarity `weight`.
    pub fn add_edge(&mut self, u: UserId, v: UserId, weight: f64) -> Result<()> {
        if u == v {
            return Err(Error::domain(format!("self-loop on user {u}")));
        }
        check_weight(weight)?;
        let needed = u.index().max(v.index()) + 1;
        if self.adjacency.len() < needed {
            self.adjacency.resize(needed, Vec::new());
        }
        if self.adjacency[u.index()].iter().any(|&(n, _)| n == v) {
            return Err(Error::domain(format!("duplicate edge {u} -- {v}")));
        }
        self.adjacency[u.index()].push((v, weight));
        self.adjacency[v.index()].push((u, weight));
        self.edges += 1;
        Ok(())
    }

    /// True when the user has at least one edge.
    pub fn contains(&self, u: UserId) -> bool {
        self.adjacency
            .get(u.index())
            .map_or(false, |adj| !adj.is_empty())
    }

    pub fn neighbors(&self, u: UserId) -> &[(UserId, f64)] {
        self.adjacency.get(u.index()).map_or(&[], Vec::as_slice)
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    /// Users with at least one edge, ascending.
    pub fn members(&self) -> impl Iterator<Item = UserId> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .filter(|(_, adj)| !adj.is_empty())
            .map(|(i, _)| UserId(i as u32))
    }

    fn sort_adjacency(&mut self) {
        for adj in &mut self.adjacency {
            adj.sort_by_key(|&(n, _)| n);
        }
    }

    /// Loads a tab-separated edge list (`user<TAB>user<TAB>weight`, one
    /// undirected edge per line). Rejects self-loops, repeated pairs and
    /// weights outside `(0, 1]`.
    pub fn from_edge_file(path: &Path, users: &mut SymbolTable) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| {
            Error::config(format!("cannot read edge file {}: {e}", path.display()))
        })?;
        let mut net = SocialNetwork::new();
        for (lineno, line) in text.lines().enumerate() {
            let lineno = lineno + 1;
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let (u, v, w) = match (fields.next(), fields.next(), fields.next()) {
                (Some(u), Some(v), Some(w)) if fields.next().is_none() => (u, v, w),
                _ => {
                    return Err(Error::parse(
                        path,
                        lineno,
                        "expected exactly `user<TAB>user<TAB>weight`",
                    ))
                }
            };
            let weight: f64 = w
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad weight `{w}`")))?;
            let u = UserId(users.intern(u));
            let v = UserId(users.intern(v));
            net.add_edge(u, v, weight)
                .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        }
        net.sort_adjacency();
        Ok(net)
    }

    /// Writes the edge list in the format read by [`Self::from_edge_file`],
    /// one undirected edge per line, ordered by user id.
    pub fn write_edge_file(&self, path: &Path, users: &SymbolTable) -> Result<()> {
        let mut out = fs::File::create(path)?;
        for (i, adj) in self.adjacency.iter().enumerate() {
            let u = UserId(i as u32);
            let mut row: Vec<_> = adj.iter().filter(|&&(v, _)| u < v).collect();
            row.sort_by_key(|&&(v, _)| v);
            for &&(v, w) in &row {
                writeln!(out, "{}\t{}\t{}", users.name(u.0), users.name(v.0), w)?;
            }
        }
        Ok(())
    }

    /// Starts lazy proximity iteration from `seeker`. Errors when the seeker
    /// has no edges (it is then not part of this network).
    pub fn proximity_iter(&self, seeker: UserId, f: ProximityFunction) -> Result<ProximityIterator<'_>> {
        f.check_params()?;
        if !self.contains(seeker) {
            return Err(Error::NotFound {
                kind: "network user",
                name: seeker.to_string(),
            });
        }
        Ok(ProximityIterator::new(self, seeker, f))
    }

    /// Iterator for a seeker with no network presence: emits only the seeker
    /// itself at proximity 1. Lets callers treat "not in the network" as
    /// "connected to nobody" where that is the friendlier behaviour.
    pub fn isolated_iter(&self, seeker: UserId, f: ProximityFunction) -> ProximityIterator<'_> {
        let mut it = ProximityIterator::new(self, seeker, f);
        it.queue.clear();
        it.queue.push(QueueEntry {
            sigma: f.identity(),
            user: seeker,
        });
        it
    }
}

fn check_weight(weight: f64) -> Result<()> {
    if !(weight > 0.0 && weight <= 1.0) {
        return Err(Error::domain(format!("weight {weight} outside (0, 1]")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct QueueEntry {
    sigma: f64,
    user: UserId,
}

// Max-heap order: higher proximity first, ties by ascending user id.
impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sigma
            .total_cmp(&other.sigma)
            .then_with(|| other.user.cmp(&self.user))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueueEntry {}

/// Best-first traversal emitting `(user, proximity)` in non-increasing
/// proximity order, seeker first at 1. Users the seeker cannot reach are
/// never emitted.
///
/// Improvements push a fresh queue entry; superseded and already-visited
/// entries are skipped on pop, so `best` always holds the tightest known
/// value per user.
pub struct ProximityIterator<'n> {
    network: &'n SocialNetwork,
    f: ProximityFunction,
    queue: BinaryHeap<QueueEntry>,
    best: HashMap<UserId, f64>,
    visited: HashMap<UserId, f64>,
}

impl<'n> ProximityIterator<'n> {
    fn new(network: &'n SocialNetwork, seeker: UserId, f: ProximityFunction) -> Self {
        let mut queue = BinaryHeap::new();
        let mut best = HashMap::new();
        let identity = f.identity();
        queue.push(QueueEntry {
            sigma: identity,
            user: seeker,
        });
        best.insert(seeker, identity);
        ProximityIterator {
            network,
            f,
            queue,
            best,
            visited: HashMap::new(),
        }
    }

    fn drop_stale(&mut self) {
        while let Some(top) = self.queue.peek() {
            let stale = self.visited.contains_key(&top.user)
                || self.best.get(&top.user).is_some_and(|&b| b > top.sigma);
            if stale {
                self.queue.pop();
            } else {
                break;
            }
        }
    }

    /// Proximity of the best not-yet-visited user, or 0 once exhausted.
    /// Upper-bounds the proximity of every user not yet emitted.
    pub fn peek_top(&mut self) -> f64 {
        self.drop_stale();
        self.queue.peek().map_or(0.0, |e| e.sigma)
    }

    /// True once every reachable user has been emitted.
    pub fn is_exhausted(&mut self) -> bool {
        self.drop_stale();
        self.queue.is_empty()
    }

    /// Emits the next `(user, proximity)` pair, relaxing its neighbours.
    pub fn next_user(&mut self) -> Option<(UserId, f64)> {
        self.drop_stale();
        let entry = self.queue.pop()?;
        self.visited.insert(entry.user, entry.sigma);
        for &(v, w) in self.network.neighbors(entry.user) {
            if self.visited.contains_key(&v) {
                continue;
            }
            let candidate = self.f.extend_trusted(entry.sigma, w);
            let improved = match self.best.get(&v) {
                Some(&b) => candidate > b,
                None => true,
            };
            if improved {
                self.best.insert(v, candidate);
                self.queue.push(QueueEntry {
                    sigma: candidate,
                    user: v,
                });
            }
        }
        Some((entry.user, entry.sigma))
    }

    /// Proximity of an already-emitted user.
    pub fn visited_sigma(&self, user: UserId) -> Option<f64> {
        self.visited.get(&user).copied()
    }

    pub fn visited_count(&self) -> usize {
        self.visited.len()
    }
}

impl Iterator for ProximityIterator<'_> {
    type Item = (UserId, f64);

    fn next(&mut self) -> Option<Self::Item> {
        self.next_user()
    }
}

#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;

    /// Five users A..E in a diamond with a tail:
    /// A-B 0.9, A-C 0.6, B-D 0.8, C-E 0.5, D-E 0.4.
    pub(crate) fn five_user_network() -> (SocialNetwork, SymbolTable) {
        let mut users = SymbolTable::new();
        let mut net = SocialNetwork::new();
        let ids: Vec<UserId> = ["A", "B", "C", "D", "E"]
            .iter()
            .map(|n| UserId(users.intern(n)))
            .collect();
        for &(u, v, w) in &[
            (0, 1, 0.9),
            (0, 2, 0.6),
            (1, 3, 0.8),
            (2, 4, 0.5),
            (3, 4, 0.4),
        ] {
            net.add_edge(ids[u], ids[v], w).unwrap();
        }
        (net, users)
    }
}

#[cfg(test)]
mod tests {
    use super::tests_support::five_user_network;
    use super::*;

    #[test]
    fn aggregate_examples() {
        let mul = ProximityFunction::Mul;
        assert!((mul.aggregate_path(&[0.9, 0.8]).unwrap() - 0.72).abs() < 1e-12);
        assert_eq!(mul.aggregate_path(&[]).unwrap(), 1.0);

        let min = ProximityFunction::Min;
        assert_eq!(min.aggregate_path(&[0.9, 0.8]).unwrap(), 0.8);
        assert_eq!(min.aggregate_path(&[]).unwrap(), 1.0);

        let pow = ProximityFunction::Pow { lambda: 2.0 };
        let got = pow.aggregate_path(&[0.9]).unwrap();
        assert!((got - 0.462_937_356_143_645_2).abs() < 1e-12, "{got}");
        assert_eq!(pow.extend(1.0, 0.5).unwrap(), 0.25);
    }

    #[test]
    fn extend_never_increases() {
        for f in [
            ProximityFunction::Mul,
            ProximityFunction::Min,
            ProximityFunction::Pow { lambda: 1.1 },
            ProximityFunction::Pow { lambda: 2.0 },
        ] {
            for sigma in [1.0, 0.7, 0.3, 0.0] {
                for w in [1.0, 0.9, 0.4, 0.05] {
                    let next = f.extend(sigma, w).unwrap();
                    assert!(next <= sigma, "{f:?} extend({sigma}, {w}) = {next}");
                    assert!(next >= 0.0);
                }
            }
        }
    }

    #[test]
    fn domain_errors() {
        let mul = ProximityFunction::Mul;
        assert!(mul.extend(1.0, 0.0).is_err());
        assert!(mul.extend(1.0, 1.5).is_err());
        assert!(mul.extend(-0.1, 0.5).is_err());
        assert!(mul.aggregate_path(&[0.5, -1.0]).is_err());
        let bad = ProximityFunction::Pow { lambda: 0.5 };
        assert!(bad.aggregate_path(&[0.9]).is_err());
        assert!(bad.extend(1.0, 0.9).is_err());

        let mut net = SocialNetwork::new();
        assert!(net.add_edge(UserId(0), UserId(0), 0.5).is_err());
        net.add_edge(UserId(0), UserId(1), 0.5).unwrap();
        assert!(net.add_edge(UserId(1), UserId(0), 0.7).is_err());
        assert!(net.add_edge(UserId(0), UserId(2), 0.0).is_err());
    }

    #[test]
    fn product_order_from_a() {
        let (net, users) = five_user_network();
        let a = UserId(users.get("A").unwrap());
        let order: Vec<(u32, f64)> = net
            .proximity_iter(a, ProximityFunction::Mul)
            .unwrap()
            .map(|(u, s)| (u.0, s))
            .collect();
        let want = [(0, 1.0), (1, 0.9), (3, 0.72), (2, 0.6), (4, 0.3)];
        assert_eq!(order.len(), want.len());
        for ((gu, gs), (wu, ws)) in order.iter().zip(want.iter()) {
            assert_eq!(gu, wu);
            assert!((gs - ws).abs() < 1e-12, "user {gu}: {gs} vs {ws}");
        }
    }

    #[test]
    fn bottleneck_order_from_a() {
        let (net, users) = five_user_network();
        let a = UserId(users.get("A").unwrap());
        let order: Vec<(u32, f64)> = net
            .proximity_iter(a, ProximityFunction::Min)
            .unwrap()
            .map(|(u, s)| (u.0, s))
            .collect();
        assert_eq!(
            order,
            vec![(0, 1.0), (1, 0.9), (3, 0.8), (2, 0.6), (4, 0.5)]
        );
    }

    #[test]
    fn peek_top_bounds_unvisited() {
        let (net, users) = five_user_network();
        let a = UserId(users.get("A").unwrap());
        let mut it = net.proximity_iter(a, ProximityFunction::Mul).unwrap();
        assert_eq!(it.peek_top(), 1.0);
        it.next_user(); // A
        it.next_user(); // B
        assert!((it.peek_top() - 0.72).abs() < 1e-12);
        while it.next_user().is_some() {}
        assert_eq!(it.peek_top(), 0.0);
    }

    #[test]
    fn unreachable_users_never_emitted() {
        let mut users = SymbolTable::new();
        let mut net = SocialNetwork::new();
        let a = UserId(users.intern("a"));
        let b = UserId(users.intern("b"));
        let c = UserId(users.intern("c"));
        let d = UserId(users.intern("d"));
        net.add_edge(a, b, 0.5).unwrap();
        net.add_edge(c, d, 0.5).unwrap();
        let emitted: Vec<UserId> = net
            .proximity_iter(a, ProximityFunction::Mul)
            .unwrap()
            .map(|(u, _)| u)
            .collect();
        assert_eq!(emitted, vec![a, b]);
    }

    #[test]
    fn missing_seeker_is_not_found() {
        let (net, mut users) = five_user_network();
        let ghost = UserId(users.intern("ghost"));
        assert!(net.proximity_iter(ghost, ProximityFunction::Mul).is_err());
        let emitted: Vec<_> = net.isolated_iter(ghost, ProximityFunction::Mul).collect();
        assert_eq!(emitted, vec![(ghost, 1.0)]);
    }

    #[test]
    fn proximity_ties_break_by_user_id() {
        let mut users = SymbolTable::new();
        let mut net = SocialNetwork::new();
        let s = UserId(users.intern("s"));
        let x = UserId(users.intern("x"));
        let y = UserId(users.intern("y"));
        let z = UserId(users.intern("z"));
        // y and z tie at 0.4, x cuts in between at 0.5.
        net.add_edge(s, z, 0.4).unwrap();
        net.add_edge(s, y, 0.4).unwrap();
        net.add_edge(s, x, 0.5).unwrap();
        let order: Vec<UserId> = net
            .proximity_iter(s, ProximityFunction::Mul)
            .unwrap()
            .map(|(u, _)| u)
            .collect();
        assert_eq!(order, vec![s, x, y, z]);
    }

    #[test]
    fn edge_file_round_trip() {
        let (net, users) = five_user_network();
        let dir = std::env::temp_dir().join("tagseek-graph-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("net.tsv");
        net.write_edge_file(&path, &users).unwrap();
        let mut users2 = SymbolTable::new();
        let net2 = SocialNetwork::from_edge_file(&path, &mut users2).unwrap();
        assert_eq!(net2.edge_count(), net.edge_count());
        let a = UserId(users2.get("A").unwrap());
        let order: Vec<f64> = net2
            .proximity_iter(a, ProximityFunction::Mul)
            .unwrap()
            .map(|(_, s)| s)
            .collect();
        for (got, want) in order.iter().zip([1.0, 0.9, 0.72, 0.6, 0.3]) {
            assert!((got - want).abs() < 1e-12, "{order:?}");
        }
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn loader_rejects_bad_lines() {
        let dir = std::env::temp_dir().join("tagseek-graph-test");
        std::fs::create_dir_all(&dir).unwrap();
        for (name, body) in [
            ("dup.tsv", "a\tb\t0.5\nb\ta\t0.6\n"),
            ("self.tsv", "a\ta\t0.5\n"),
            ("weight.tsv", "a\tb\t1.5\n"),
            ("fields.tsv", "a\tb\n"),
            ("nan.tsv", "a\tb\tx\n"),
        ] {
            let path = dir.join(name);
            std::fs::write(&path, body).unwrap();
            let mut users = SymbolTable::new();
            let got = SocialNetwork::from_edge_file(&path, &mut users);
            assert!(got.is_err(), "{name} should fail");
            std::fs::remove_file(&path).ok();
        }
    }
}
