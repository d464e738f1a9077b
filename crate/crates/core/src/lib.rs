pub mod classify;
pub mod density;
pub mod error;
pub mod par;
pub mod primes;
pub mod sequences;
pub mod spaces;
pub mod operators;
pub mod parse;
pub mod stanalysis;
pub mod suite;

pub use error::{Error, Result};
