//! Pseudo-random generators, exact integer and sampling methods, and audits
//! of the biases that finite state spaces and discretized outputs introduce.
//!
//! * [`generators`]: LCGs (including RANDU), Wichmann-Hill, MT19937, a
//!   counter-mode hash generator, and a scripted source for tests.
//! * [`integers`]: floor, round and mask-and-reject maps from words to
//!   `{1..m}`, with exact induced distributions.
//! * [`sampling`]: PIKK, Fisher-Yates, random indices, Cormen's recursive
//!   sampler, reservoir Algorithm R and Vitter's Algorithm Z, plus exact
//!   path enumeration of their output distributions.
//! * [`bounds`]: exact factorials and binomials, pigeonhole attainability,
//!   Stirling/entropy bounds and the L1 lower bound.
//! * [`audit`]: reproducible bias experiments producing JSON reports.

pub mod audit;
pub mod bounds;
pub mod generators;
pub mod integers;
pub mod sampling;
