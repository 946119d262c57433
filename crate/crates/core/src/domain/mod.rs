//! Matching vocabulary shared by every protocol: words over a small integer
//! alphabet, the `t`-of-`T` matching predicate, injective integer encodings
//! and the plaintext oracle that all protocol runs are checked against.

mod dataset;
mod generator;
mod params;
mod word;

pub use dataset::Dataset;
pub use generator::{generate_instance, GeneratedInstance, GeneratorSpec};
pub use params::FuzzyParams;
pub use word::{
    agreement, decode_word, encode_word, match_t, oracle_intersection, select, Combination,
    PayloadEncoding, Word,
};
