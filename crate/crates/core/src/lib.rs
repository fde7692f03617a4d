//! Exact counting of prime difference configurations, k-tuple prime
//! difference champion search, Hardy–Littlewood singular-series predictions
//! and empirical checks of champion structure.

pub mod champions;
pub mod counting;
pub mod error;
pub mod hardy_littlewood;
pub mod moments;
pub mod numeric;
pub mod sieve;
pub mod singular;
pub mod verify;

mod ntt;

pub use counting::{DifferenceSet, GapHistogram, TupleCount};
pub use error::{Error, Result};
pub use sieve::PrimeTable;
pub use singular::SingularValue;
