//! Desk-scale label cover reductions: degree and alphabet reduction, IKW
//! parallel repetition, decoder composition, and the set-cover and
//! dominating-set reductions, each with its recovery map, plus exact
//! EMD-based sensitivity measurement.

pub mod compose;
pub mod covering;
pub mod error;
pub mod gadgets;
pub mod gen;
pub mod hash;
pub mod ikw;
pub mod lc;
pub mod metrics;
pub mod rational;
pub mod reduce;
pub mod pipeline;
pub mod rng;
pub mod suites;

pub use error::{Error, Result};
pub use lc::{Assignment, Label, LabelCoverInstance, Swap, Swappable, TwoCspInstance};
pub use rational::Rational;
