//! Test-only oracles shared by the integration suites.
//!
//! Nothing here calls into discovery, filtering, comparison or statistics code: every
//! oracle recomputes its answer from raw case data with plain loops.

#![allow(dead_code)]

pub mod dot;
pub mod oracle;
pub mod random;
