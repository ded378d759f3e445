//! Open covers of Cantor space, martingale transformations, closure
//! properties of randomness notions and a diagonalization that builds points
//! of `W^ω` escaping given tests.

pub mod cli;
pub mod closure;
pub mod coder;
pub mod covers;
pub mod diagonal;
pub mod error;
pub mod martingale;
pub mod series;
pub mod space;

pub use error::{Error, Result};
pub use space::{BitString, Clopen, CylinderConstraintSet, PeriodicPoint, PrefixFreeSet, Rational, StagedOpenSet};
