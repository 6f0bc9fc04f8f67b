//! mdBook cannot run its code blocks as tests, so this crate includes each
//! chapter as a doc comment: `cargo test --doc -p rsums-guide` compiles and
//! runs every Rust snippet in the book, keeping the prose in sync with the
//! library. One module per chapter so a failure names its origin.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/fields.md")]
pub mod fields {}

#[doc = include_str!("../../../book/src/polynomials.md")]
pub mod polynomials {}

#[doc = include_str!("../../../book/src/characters.md")]
pub mod characters {}

#[doc = include_str!("../../../book/src/restricted-sets.md")]
pub mod restricted_sets {}

#[doc = include_str!("../../../book/src/classification.md")]
pub mod classification {}

#[doc = include_str!("../../../book/src/sums.md")]
pub mod sums {}

#[doc = include_str!("../../../book/src/exponents.md")]
pub mod exponents {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
