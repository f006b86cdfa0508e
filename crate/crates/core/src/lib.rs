//! Nearest-neighbour commit message generation.
//!
//! A test diff is answered with the message of its nearest training diff,
//! found in two stages: the top `k` training diffs by bag-of-words cosine
//! similarity, re-ranked by sentence BLEU-4 against the test diff. Retrieval
//! can search all training commits ([`ScopePolicy::Global`]), only the test
//! commit's own repository ([`ScopePolicy::SameRepo`]) or only other
//! repositories ([`ScopePolicy::ExcludeRepo`]).
//!
//! The crate also covers the surrounding experiment: attaching repository
//! provenance to a cleaned dataset by matching messages against a raw commit
//! dump, dropping small repositories, and reporting BLEU-4 per method and per
//! neighbour origin.
//!
//! ```
//! use nngen::corpus::{tokenize, Commit, Corpus, Split};
//! use nngen::retrieval::{Retriever, ScopePolicy};
//!
//! let commit = |index, diff: &str, msg: &str, repo: &str, split| Commit {
//!     index,
//!     diff_tokens: tokenize(diff),
//!     msg_tokens: tokenize(msg),
//!     repo: Some(repo.to_string()),
//!     split,
//! };
//! let train = Corpus::new(Split::Train, vec![
//!     commit(0, "+ import foo . Bar ;", "use Bar from foo", "a/a", Split::Train),
//!     commit(1, "- return null ;", "drop null return", "b/b", Split::Train),
//! ]).unwrap();
//! let test = commit(0, "+ import foo . Baz ;", "use Baz", "a/a", Split::Test);
//!
//! let outcome = Retriever::new(&train).generate(&test, ScopePolicy::SameRepo).unwrap();
//! assert_eq!(outcome.generated_msg_tokens.join(" "), "use Bar from foo");
//! ```

pub mod corpus;
pub mod error;
pub mod evaluation;
mod fsutil;
pub mod pipeline;
pub mod retrieval;
pub mod synthetic;
mod table;
pub mod textmetrics;

pub use error::{Error, Result};
pub use retrieval::{Origin, RetrievalOutcome, Retriever, ScopePolicy};
pub use textmetrics::BleuBreakdown;
