//! Reference implementations used to check insightkit in tests.
//!
//! Everything here is written for clarity, not speed: nested loops,
//! insertion sorts and exhaustive enumeration. Only insightkit's data types
//! are shared with the code under test.

pub mod dot;
pub mod graph;
pub mod harness;
pub mod models;
pub mod relation;
