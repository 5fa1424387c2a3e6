//! Exact arithmetic, word-length estimates and random walks on groups of
//! upper-triangular matrices over Z[1/P].

pub mod arith;
pub mod group;
pub mod metrics;
pub mod verify;
pub mod walk;
