//! Private fuzzy matching: a client and a server each hold a set of words
//! over a finite alphabet, and the client learns the server words that agree
//! with one of its own in at least `t` of `T` positions.

pub mod channel;
pub mod codec;
pub mod domain;
pub mod encpoly;
pub mod error;
pub mod homcrypt;
pub mod lss;
pub mod ot;
pub mod protocols;
pub mod symenc;

pub use error::{Error, Result};
