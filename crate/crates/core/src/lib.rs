//! Block-triangular factorizations of matrices over exact fields.
//!
//! A square matrix of size `m + n` splits into blocks
//!
//! ```text
//! M = [ M1  M2 ]
//!     [ M3  M4 ]
//! ```
//!
//! with `M1` of size `m x m`. Lower layers `[I 0; A I]` and upper layers
//! `[I A; 0 I]` alternate; five of them reach every matrix with invertible
//! `M2`, six reach all of SL, and six with a diagonal scale reach GL.

pub mod commutator;
pub mod couplingio;
pub mod error;
pub mod factor;
pub mod fields;
pub mod io;
pub mod matkit;
pub mod obstruction;
pub mod sl4gf2;

pub use error::{Error, Result};
pub use factor::{BlockLayer, Factorization, FactorizationKind};
pub use fields::{Elem, Field, FieldValue};
pub use matkit::Matrix;
