//! Network-aware top-k search over social tagging data.
//!
//! A tagging dataset is a set of `(user, item, tag)` triples. Given a seeker
//! (the querying user), a set of query tags, and a blend factor `alpha`, the
//! engine retrieves the k items with the best mix of textual relevance
//! (tag frequency) and social relevance (tagging by users close to the seeker
//! in a weighted social network).
//!
//! The crate is organised around the data flow:
//!
//! * [`graph`]: the social network and lazy best-first proximity iteration;
//! * [`store`]: triple storage, per-user tag lists, frequency-ordered
//!   inverted lists with sequential cursors;
//! * [`scoring`]: item relevance (tf/social blend, IDF and BM15 weighting);
//! * [`engine`]: early-terminating top-k search with sound score bounds,
//!   plus a full-scan oracle for verification;
//! * [`approx`]: per-seeker proximity summaries and probabilistic bound
//!   tightening for approximate (faster, near-exact) search;
//! * [`netgen`]: deriving a similarity network from co-tagging behaviour;
//! * [`cli`]: batch workloads, benchmark reports and the prediction
//!   experiment, shared by the `tagseek` binary;
//! * [`synth`]: seeded generators for synthetic datasets, used by the
//!   examples and the test suite.
//!
//! Run `cargo run --example exact_search` for a guided tour, or see the
//! other examples for each capability.

pub mod approx;
pub mod cli;
pub mod engine;
pub mod graph;
pub mod ids;
pub mod netgen;
pub mod scoring;
pub mod store;
pub mod synth;

mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
