//! Interned identifiers for users, items and tags.
//!
//! All structures in this crate address entities by dense `u32` ids so that
//! the hot paths never hash strings. A [`Vocab`] owns the three symbol
//! tables; loaders intern through it, which keeps ids consistent between a
//! network file and a tagging log loaded side by side.

use std::collections::HashMap;
use std::fmt;

macro_rules! id_newtype {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        #[repr(transparent)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_newtype!(
    /// A user (potential seeker, tagger, network node).
    UserId
);
id_newtype!(
    /// A tagged item (bookmark, document).
    ItemId
);
id_newtype!(
    /// A tag keyword.
    TagId
);

/// Insertion-ordered bidirectional map between names and dense `u32` ids.
#[derive(Debug, Default, Clone)]
pub struct SymbolTable {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id for `name`, interning it on first sight.
    pub fn intern(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    /// Panics if `id` was not produced by this table.
    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// The shared dictionaries for one dataset.
#[derive(Debug, Default, Clone)]
pub struct Vocab {
    pub users: SymbolTable,
    pub items: SymbolTable,
    pub tags: SymbolTable,
}

impl Vocab {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn user(&mut self, name: &str) -> UserId {
        UserId(self.users.intern(name))
    }

    pub fn item(&mut self, name: &str) -> ItemId {
        ItemId(self.items.intern(name))
    }

    pub fn tag(&mut self, name: &str) -> TagId {
        TagId(self.tags.intern(name))
    }

    pub fn lookup_user(&self, name: &str) -> Option<UserId> {
        self.users.get(name).map(UserId)
    }

    pub fn lookup_tag(&self, name: &str) -> Option<TagId> {
        self.tags.get(name).map(TagId)
    }

    pub fn lookup_item(&self, name: &str) -> Option<ItemId> {
        self.items.get(name).map(ItemId)
    }

    pub fn user_name(&self, id: UserId) -> &str {
        self.users.name(id.0)
    }

    pub fn item_name(&self, id: ItemId) -> &str {
        self.items.name(id.0)
    }

    pub fn tag_name(&self, id: TagId) -> &str {
        self.tags.name(id.0)
    }
}
