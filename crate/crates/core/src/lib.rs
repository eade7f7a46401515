//! Synchronization strings: exact verification, randomized and deterministic
//! constructions, small-alphabet variants, extremal search, and an
//! insertion/deletion index codec.

mod bitlcs;
pub mod codec;
pub mod det;
pub mod ecc;
pub mod error;
pub mod fraction;
pub mod metrics;
pub mod naive;
pub mod random;
pub mod search;
pub mod selfmatch;
pub mod small_alphabet;
pub mod stream;
pub mod string;
pub mod verify;

pub use error::Error;
pub use fraction::ExactFraction;
pub use string::{Matching, Symbol, SyncString, TextFormat};
pub use verify::{Property, Verdict, Violation};
