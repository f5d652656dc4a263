//! Shared test oracles, independent of the library's solver paths.

pub mod exact_riemann;
