//! Shared fixtures, reference oracles and a mock policy server for the
//! roomforge test suites.

pub mod fixtures;
pub mod mock;
pub mod oracle;
