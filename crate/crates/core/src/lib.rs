//! Recurrence statistics for topological dynamics.
//!
//! The crate builds an explicit irregularly recurrent transitive point of the two-symbol shift,
//! estimates lower and upper Banach densities of return times on finite horizons, screens points
//! against the hierarchy `AP ⊆ UR ⊆ W ⊆ QW ⊆ R`, and, for piecewise-linear interval maps,
//! certifies strict turbulence and realizes symbolic itineraries as exact rational intervals.
//! All orbit arithmetic on rational data is exact.

pub mod classify;
pub mod cli;
pub mod construction;
pub mod density;
pub mod entropy;
pub mod error;
pub mod rational;
pub mod systems;

pub use error::{Error, Result};
