//! Exact computation of mixed character sums over finite-field elements with
//! restricted coordinates.
//!
//! The library builds towers F_p < F_q < F_{q^r} exactly, enumerates
//! restricted-coordinate sets S_r(A) such as the Cantor-like set
//! S_r({0,2}) in F_{3^r}, evaluates multiplicative/additive character pairs
//! at rational-function arguments into an exact cyclotomic accumulator,
//! classifies the functions the saving bounds require (Q_{d,n}, R_d, the
//! exceptional Artin-Schreier shapes, P_d), and evaluates the exponent
//! calculus kappa_s(rho), tau_0, Delta and the Cantor constant gamma.
//! A harness ties it together into reproducible verification runs with CSV
//! and JSON reports.
//!
//! See the book under `book/` for a guided tour, and the `rsums` CLI for the
//! command-line surface.

pub mod arith;
pub mod bounds;
pub mod characters;
pub mod classify;
mod error;
pub mod expr;
pub mod field;
pub mod harness;
pub mod poly;
pub mod restricted;
mod ring;
pub mod sums;

pub use error::{Error, Result};
pub use field::{FieldCtx, FieldElement};
pub use poly::{Polynomial, RationalFunction};
