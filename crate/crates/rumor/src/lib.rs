//! Exact and Monte Carlo analysis of the Firework and Reverse Firework
//! rumor processes on the nonnegative integers, via their discrete-renewal
//! representation.
//!
//! - [`dist`]: the radius-distribution catalog and transforms.
//! - [`parse`]: the distribution mini-grammar (`frac:c=2`, `sparse(...)`, ...).
//! - [`renewal`]: inter-arrival law, renewal sequence, μ/σ²/survival with
//!   certified truncation error, recurrence classification, tail bounds.
//! - [`firework`]: Firework simulator, reach law, and the coupled H-chain.
//! - [`rfp`]: Reverse Firework simulator and spreader-count limit laws.
//! - [`oracle`]: brute-force exact-rational enumeration for small cases.
//! - [`mc`]: reproducible parallel Monte Carlo and goodness-of-fit tests.
//! - [`suites`]: named verification suites with PASS/FAIL verdicts.
//! - [`cli`]: the `rumor` command-line front end.

pub mod cli;
pub mod dist;
pub mod firework;
pub mod mc;
pub mod oracle;
pub mod parse;
pub mod renewal;
pub mod rfp;
pub mod suites;

pub use dist::RadiusDistribution;
pub use parse::parse_dist;
