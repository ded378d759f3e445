//! Cantor space at desk scale: strings, finite open sets, and points.

pub mod bits;
pub mod clopen;
pub mod periodic;
pub mod prefix_free;
pub mod rational;
pub mod staged;

pub use bits::BitString;
pub use clopen::{Clopen, CylinderConstraintSet};
pub use periodic::PeriodicPoint;
pub use prefix_free::PrefixFreeSet;
pub use rational::Rational;
pub use staged::StagedOpenSet;
