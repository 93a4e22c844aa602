//! Short non-solutions of word equations with constants.
//!
//! For a word `w = x^{a0} c1 x^{a1} … ck x^{ak}` over a free group (realised
//! inside `SL_d(Z)`), the pipeline reduces modulo a prime from the window
//! `(C0 n, C0 n^2]`, finds a group element `g` of `SL_d(p)` with `w(g)`
//! non-central by breadth-first search, lifts it to a short word and
//! verifies the result exactly. The [`oracle`] module provides brute-force
//! ground truth for small instances.

pub mod cayley;
pub mod error;
pub mod intmat;
pub mod modp;
pub mod oracle;
pub mod par;
pub mod pipeline;
pub mod rng;
pub mod sample;
pub mod stats;
pub mod words;

pub use error::{Error, Result};
