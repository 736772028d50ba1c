//! Authorship linkage for microblog corpora.
//!
//! Per-author Naive Bayes profiles over character tokens (letters, letter
//! bigrams, hashtag characters) rank candidate authors for a batch of
//! anonymous tweets. The [`experiment`] module measures how often the true
//! author lands in the top 1, 5 or 10 candidates.
//!
//! ```
//! use tweetlink::{corpus::Tweet, model::NbModel, tokenize::{self, TokenScheme}};
//!
//! let alice = vec![Tweet::new("alice", "the quick brown fox")];
//! let bob = vec![Tweet::new("bob", "zzz xyz zzz")];
//! let model = NbModel::build([("alice", &alice[..]), ("bob", &bob[..])], TokenScheme::TextUnigram).unwrap();
//!
//! let query = tokenize::count(&[Tweet::new("?", "zz top")], TokenScheme::TextUnigram);
//! let ranking = model.rank(&query).unwrap();
//! assert_eq!(&*ranking.entries[0].0, "bob");
//! ```

pub mod corpus;
pub mod error;
pub mod experiment;
pub mod model;
pub mod rng;
pub mod tokenize;

pub use error::{Error, Result};
