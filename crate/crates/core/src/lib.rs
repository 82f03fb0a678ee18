//! Algebro-geometric upper-triangular solutions of rank-two Schlesinger
//! systems built from periods of `v^n du` on hyperelliptic curves, the
//! Painleve VI families they induce in genus one, and reference solutions of
//! PVI(1/8, -1/8, 1/8, 3/8) used to cross-check them.

// `!(a > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
pub mod error;
pub mod numerics;
pub mod painleve6;
pub mod reference;
pub mod schlesinger;

pub use error::{Error, Result};
