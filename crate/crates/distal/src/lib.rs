//! Executable arithmetic for sparse predicates over the integers.
//!
//! The crate materializes, with exact integer arithmetic, the objects behind
//! a quantifier-elimination argument for sparse sets: shift-polynomial
//! operators, gapped tuple spaces, the extremal functions that pick out the
//! largest tuple value below (and the smallest above) a threshold, strong
//! honest definitions of those functions over finite parameter windows, and
//! the induced cell decompositions.
//!
//! Start with the examples (`cargo run --example <name>`):
//!
//! * `predicates` — built-in sparse sets, successors, congruence periods
//! * `operators` — shift polynomials, sign certificates, growth witnesses
//! * `tuple_spaces` — gapped tuples, ordering certificates, enumeration
//! * `pq_functions` — the extremal functions and their spot-check oracle
//! * `formulas` — the bounded formula language and atom normalization
//! * `verify_order` — strong honest definition of an order relation
//! * `firstcoord` — honest definition of the first coordinate of the
//!   extremal tuple
//! * `catchall` — constructing a definition for one parameter instance
//! * `cells_sweep` — cell decomposition sizes over growing windows

pub mod cli;
pub mod error;
pub mod formula;
pub mod jsonint;
pub mod normal;
pub mod operator;
pub mod pdelta;
mod poly;
pub mod predicate;
pub mod sexpr;
pub mod shd;
pub mod tuplespace;

pub use error::{Error, Result};
