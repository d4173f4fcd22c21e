//! Triple store for `(user, item, tag)` tagging actions.
//!
//! Ingestion deduplicates triples and materialises the two access paths the
//! search engine is allowed to use:
//!
//! * per-`(user, tag)` item lists ([`TaggingStore::user_list`]), read when a
//!   user is visited during proximity traversal;
//! * per-tag inverted lists ordered by tag frequency ([`InvertedCursor`]),
//!   read strictly sequentially.
//!
//! Random-access frequency lookups exist only for verification oracles.
//! Every such call bumps [`TaggingStore::random_access_count`], which tests
//! assert stays flat across engine runs: the engine must work from
//! sequential reads and visit-order evidence alone.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::ids::{ItemId, TagId, UserId, Vocab};
use crate::{Error, Result};

/// Counters reported after ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IngestStats {
    pub triples_read: u64,
    pub duplicates_dropped: u64,
    pub users: usize,
    pub items: usize,
    pub tags: usize,
}

/// Immutable-after-ingest store of tagging triples.
#[derive(Debug, Default)]
pub struct TaggingStore {
    user_lists: HashMap<(UserId, TagId), Vec<ItemId>>,
    inverted: HashMap<TagId, Vec<(ItemId, u32)>>,
    taggers: HashMap<(TagId, ItemId), Vec<UserId>>,
    user_items: HashMap<UserId, BTreeSet<ItemId>>,
    user_tags: HashMap<UserId, BTreeSet<TagId>>,
    item_count: usize,
    stats: IngestStats,
    random_accesses: AtomicU64,
}

impl TaggingStore {
    /// Builds a store from raw triples, dropping exact duplicates.
    pub fn ingest(triples: impl IntoIterator<Item = (UserId, ItemId, TagId)>) -> Self {
        let mut seen: HashSet<(UserId, ItemId, TagId)> = HashSet::new();
        let mut store = TaggingStore::default();
        let mut all_items: BTreeSet<ItemId> = BTreeSet::new();
        let mut all_users: BTreeSet<UserId> = BTreeSet::new();
        let mut all_tags: BTreeSet<TagId> = BTreeSet::new();
        for (user, item, tag) in triples {
            store.stats.triples_read += 1;
            if !seen.insert((user, item, tag)) {
                store.stats.duplicates_dropped += 1;
                continue;
            }
            store
                .user_lists
                .entry((user, tag))
                .or_default()
                .push(item);
            store.taggers.entry((tag, item)).or_default().push(user);
            store.user_items.entry(user).or_default().insert(item);
            store.user_tags.entry(user).or_default().insert(tag);
            all_items.insert(item);
            all_users.insert(user);
            all_tags.insert(tag);
        }
        for list in store.user_lists.values_mut() {
            list.sort();
        }
        let mut inverted: HashMap<TagId, Vec<(ItemId, u32)>> = HashMap::new();
        for (&(tag, item), users) in &mut store.taggers {
            users.sort();
            inverted
                .entry(tag)
                .or_default()
                .push((item, users.len() as u32));
        }
        for list in inverted.values_mut() {
            // Frequency descending, then item id ascending.
            list.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        }
        store.inverted = inverted;
        store.item_count = all_items.len();
        store.stats.users = all_users.len();
        store.stats.items = all_items.len();
        store.stats.tags = all_tags.len();
        store
    }

    /// Loads a tab-separated tagging log: `user<TAB>item<TAB>tag`, with an
    /// optional fourth column (e.g. a timestamp) that is ignored.
    pub fn from_triple_file(path: &Path, vocab: &mut Vocab) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| {
            Error::config(format!("cannot read triple file {}: {e}", path.display()))
        })?;
        let mut triples = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let lineno = lineno + 1;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 && fields.len() != 4 {
                return Err(Error::parse(
                    path,
                    lineno,
                    "expected `user<TAB>item<TAB>tag` with optional trailing column",
                ));
            }
            if fields[..3].iter().any(|f| f.is_empty()) {
                return Err(Error::parse(path, lineno, "empty field"));
            }
            triples.push((
                vocab.user(fields[0]),
                vocab.item(fields[1]),
                vocab.tag(fields[2]),
            ));
        }
        Ok(TaggingStore::ingest(triples))
    }

    pub fn stats(&self) -> IngestStats {
        self.stats
    }

    /// Number of distinct items in the store (`|I|` in IDF weighting).
    pub fn item_count(&self) -> usize {
        self.item_count
    }

    /// Items `user` tagged with `tag`, ascending by item id; empty when the
    /// pair never occurs.
    pub fn user_list(&self, user: UserId, tag: TagId) -> &[ItemId] {
        self.user_lists
            .get(&(user, tag))
            .map_or(&[], Vec::as_slice)
    }

    /// All items a user tagged (with any tag).
    pub fn items_of_user(&self, user: UserId) -> impl Iterator<Item = ItemId> + '_ {
        self.user_items.get(&user).into_iter().flatten().copied()
    }

    /// Distinct tags a user has used.
    pub fn tags_of_user(&self, user: UserId) -> impl Iterator<Item = TagId> + '_ {
        self.user_tags.get(&user).into_iter().flatten().copied()
    }

    pub fn users(&self) -> impl Iterator<Item = UserId> + '_ {
        self.user_items.keys().copied()
    }

    /// Number of distinct items carrying `tag` (`n_t` in IDF weighting).
    pub fn tag_item_count(&self, tag: TagId) -> usize {
        self.inverted.get(&tag).map_or(0, Vec::len)
    }

    /// Tags that occur in at least one triple.
    pub fn tags(&self) -> impl Iterator<Item = TagId> + '_ {
        self.inverted.keys().copied()
    }

    /// Sequential cursor over the tag's inverted list. Unknown tags yield an
    /// empty cursor that is spent from the start.
    pub fn cursor(&self, tag: TagId) -> InvertedCursor<'_> {
        InvertedCursor {
            list: self.inverted.get(&tag).map_or(&[], Vec::as_slice),
            pos: 0,
            consumed: HashSet::new(),
        }
    }

    /// Exact tag frequency of `(tag, item)`. Random access: oracle use only,
    /// counted by [`Self::random_access_count`].
    pub fn tf_lookup(&self, tag: TagId, item: ItemId) -> u32 {
        self.random_accesses.fetch_add(1, Ordering::Relaxed);
        self.taggers
            .get(&(tag, item))
            .map_or(0, |users| users.len() as u32)
    }

    /// Users who tagged `(tag, item)`, ascending. Random access: oracle use
    /// only, counted by [`Self::random_access_count`].
    pub fn taggers(&self, tag: TagId, item: ItemId) -> &[UserId] {
        self.random_accesses.fetch_add(1, Ordering::Relaxed);
        self.taggers.get(&(tag, item)).map_or(&[], Vec::as_slice)
    }

    /// How many random-access lookups have been served. The engine's
    /// sequential-access discipline is asserted by snapshotting this counter
    /// around engine runs.
    pub fn random_access_count(&self) -> u64 {
        self.random_accesses.load(Ordering::Relaxed)
    }
}

/// Sequential reader over one tag's frequency-ordered inverted list.
///
/// The list is sorted by tag frequency descending (item id ascending within
/// ties), so `top_tf` never increases as the cursor advances and bounds the
/// frequency of every unconsumed item.
#[derive(Debug)]
pub struct InvertedCursor<'s> {
    list: &'s [(ItemId, u32)],
    pos: usize,
    consumed: HashSet<ItemId>,
}

impl InvertedCursor<'_> {
    /// Item at the cursor head, or `None` once spent.
    pub fn top_item(&self) -> Option<ItemId> {
        self.list.get(self.pos).map(|&(item, _)| item)
    }

    /// Frequency at the cursor head; 0 once spent.
    pub fn top_tf(&self) -> u32 {
        self.list.get(self.pos).map_or(0, |&(_, tf)| tf)
    }

    /// Consumes the head entry, recording the item as consumed. `None` once
    /// spent (end of list is a state, not an error).
    pub fn advance(&mut self) -> Option<(ItemId, u32)> {
        let &(item, tf) = self.list.get(self.pos)?;
        self.pos += 1;
        self.consumed.insert(item);
        Some((item, tf))
    }

    pub fn is_spent(&self) -> bool {
        self.pos >= self.list.len()
    }

    /// True when the item's exact frequency was fixed by a past `advance`.
    pub fn is_consumed(&self, item: ItemId) -> bool {
        self.consumed.contains(&item)
    }

    /// Entries consumed so far.
    pub fn consumed_count(&self) -> usize {
        self.pos
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> (TaggingStore, Vocab) {
        let mut vocab = Vocab::new();
        for u in ["A", "B", "C", "D", "E"] {
            vocab.user(u);
        }
        let triples = [
            ("B", "i1", "t1"),
            ("D", "i1", "t1"),
            ("C", "i2", "t1"),
            ("E", "i2", "t1"),
            ("B", "i2", "t2"),
            ("E", "i1", "t2"),
        ];
        let triples: Vec<_> = triples
            .iter()
            .map(|&(u, i, t)| (vocab.user(u), vocab.item(i), vocab.tag(t)))
            .collect();
        (TaggingStore::ingest(triples), vocab)
    }

    #[test]
    fn inverted_lists_order_by_frequency_then_item() {
        let (store, mut vocab) = fixture();
        let t1 = vocab.tag("t1");
        let t2 = vocab.tag("t2");
        let i1 = vocab.item("i1");
        let i2 = vocab.item("i2");
        let mut c1 = store.cursor(t1);
        assert_eq!(c1.advance(), Some((i1, 2)));
        assert_eq!(c1.advance(), Some((i2, 2)));
        assert_eq!(c1.advance(), None);
        assert!(c1.is_spent());
        assert_eq!(c1.top_tf(), 0);
        assert_eq!(c1.top_item(), None);
        assert!(c1.is_consumed(i1) && c1.is_consumed(i2));

        let mut c2 = store.cursor(t2);
        assert_eq!(c2.advance(), Some((i1, 1)));
        assert_eq!(c2.advance(), Some((i2, 1)));
        assert_eq!(c2.advance(), None);
    }

    #[test]
    fn user_lists_are_sorted_and_total() {
        let (store, mut vocab) = fixture();
        let t1 = vocab.tag("t1");
        let t2 = vocab.tag("t2");
        let a = vocab.user("A");
        let b = vocab.user("B");
        let e = vocab.user("E");
        assert_eq!(store.user_list(a, t1), &[]);
        assert_eq!(store.user_list(b, t1), &[vocab.item("i1")]);
        assert_eq!(store.user_list(b, t2), &[vocab.item("i2")]);
        assert_eq!(store.user_list(e, t2), &[vocab.item("i1")]);
        // Union of user lists accounts for every triple of the tag.
        let total: usize = ["A", "B", "C", "D", "E"]
            .iter()
            .map(|u| store.user_list(vocab.user(u), t1).len())
            .sum();
        assert_eq!(total, 4);
    }

    #[test]
    fn duplicates_are_dropped() {
        let mut vocab = Vocab::new();
        let u = vocab.user("u");
        let i = vocab.item("i");
        let t = vocab.tag("t");
        let store = TaggingStore::ingest([(u, i, t), (u, i, t), (u, i, t)]);
        assert_eq!(store.stats().triples_read, 3);
        assert_eq!(store.stats().duplicates_dropped, 2);
        let mut c = store.cursor(t);
        assert_eq!(c.advance(), Some((i, 1)));
        assert_eq!(c.advance(), None);
    }

    #[test]
    fn unknown_tag_cursor_is_spent() {
        let (store, mut vocab) = fixture();
        let t3 = vocab.tag("t3");
        let mut c = store.cursor(t3);
        assert!(c.is_spent());
        assert_eq!(c.top_tf(), 0);
        assert_eq!(c.advance(), None);
    }

    #[test]
    fn random_access_counter_tracks_oracle_lookups() {
        let (store, mut vocab) = fixture();
        let t1 = vocab.tag("t1");
        let i1 = vocab.item("i1");
        assert_eq!(store.random_access_count(), 0);
        assert_eq!(store.tf_lookup(t1, i1), 2);
        assert_eq!(store.taggers(t1, i1).len(), 2);
        assert_eq!(store.random_access_count(), 2);
        // Sequential reads do not count.
        let mut c = store.cursor(t1);
        c.advance();
        assert_eq!(store.random_access_count(), 2);
    }

    #[test]
    fn triple_file_round_trip_with_optional_column() {
        let dir = std::env::temp_dir().join("tagseek-store-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("log.tsv");
        std::fs::write(&path, "u1\ti1\tt1\t1700000000\nu2\ti1\tt1\nu1\ti2\tt2\n").unwrap();
        let mut vocab = Vocab::new();
        let store = TaggingStore::from_triple_file(&path, &mut vocab).unwrap();
        assert_eq!(store.stats().triples_read, 3);
        assert_eq!(store.stats().users, 2);
        assert_eq!(store.stats().items, 2);
        assert_eq!(store.stats().tags, 2);
        std::fs::remove_file(&path).ok();

        let bad = dir.join("bad.tsv");
        std::fs::write(&bad, "u1\ti1\n").unwrap();
        assert!(TaggingStore::from_triple_file(&bad, &mut Vocab::new()).is_err());
        std::fs::remove_file(&bad).ok();
    }
}
