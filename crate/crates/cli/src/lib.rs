//! Pieces of the `pcg` command that are also used by the acceptance suite.

pub mod bench;
