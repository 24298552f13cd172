//! Certified numerical checks of numerical-radius inequalities for complex
//! matrices: matrix functions, numerical radius enclosures, sphere infima of
//! form differences, an inequality registry, seeded generators and a
//! campaign harness.

pub mod catalog;
pub mod gen;
pub mod harness;
pub mod interval;
pub mod matcore;
pub mod radius;
pub mod sphereopt;

pub use interval::{EnclosureMethod, Interval};
