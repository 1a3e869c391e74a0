//! Reference implementations and synthetic fixtures for the wavecorr test
//! suites.
//!
//! Nothing here shares code with the `wavecorr` library: oracles take plain
//! slices and are written for clarity, not speed.

pub mod fixtures;
pub mod oracle;
