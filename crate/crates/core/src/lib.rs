//! Exact computation with t-popular sumsets over finite abelian groups.
//!
//! The crate is organised bottom-up:
//!
//! * [`group`]: `Z_{d1} x ... x Z_{dk}` with dense element indices, subgroups, quotients.
//! * [`set`] and [`algebra`]: bit-vector subsets, sumsets, representation
//!   profiles `r_{A,B}`, popular sumsets `A +_t B`, stabilizers, the Dyson
//!   transform and dot-grid statistics.
//! * [`theorems`]: one checker per classical or new bound, each returning a
//!   [`theorems::BoundReport`] with both sides of the inequality.
//! * [`witness`]: search and validation of the structural pair `(A', B')`.
//! * [`constructions`]: generators for the extremal families.
//! * [`restricted`]: restricted sumsets `A ⊕_τ B` and their lower bounds.
//! * [`search`]: deterministic exhaustive / seeded random scans with JSONL findings
//!   and checkpoints.
//! * [`cli`]: the `popsum` command-line front end.

pub mod algebra;
pub mod cli;
pub mod constructions;
pub mod error;
pub mod group;
pub mod literal;
pub mod restricted;
pub mod search;
pub mod set;
pub mod theorems;
pub mod witness;

pub use error::{Error, Result};
pub use group::{Element, FiniteAbelianGroup, Subgroup};
pub use set::GroupSet;

/// Version tag written into every JSON artifact.
pub const SCHEMA_VERSION: u32 = 1;
