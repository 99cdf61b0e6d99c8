//! Exact combinatorics of subspaces of `F_q^n` at desk scale.
//!
//! Everything here is exact: field arithmetic is table-driven, subspaces are
//! kept in canonical reduced row-echelon form, counts are arbitrary-precision
//! integers, and bound formulas are arbitrary-precision rationals. Floating
//! point is never used.
//!
//! Module map:
//! - [`gfq`] — arithmetic in GF(q) for small prime powers
//! - [`qbinom`] — Gaussian binomial coefficients and their identities
//! - [`subspace`] — canonical subspaces and lattice operations
//! - [`family`] — k-uniform families, covers, and the `F_{X,k}` constructions
//! - [`simplex`] — simplex counting, extremal counts, and the sequence
//!   assembly bounds
//! - [`audit`] — exact evaluation of the closed-form inequality chains
//! - [`search`] — exhaustive and sampled exploration of maximal families

pub mod audit;
pub mod family;
pub mod gfq;
pub mod qbinom;
pub mod search;
pub mod simplex;
pub mod subspace;

pub use family::{CoverReport, Family, FamilyError};
pub use gfq::{Field, FieldError};
pub use qbinom::{gauss_binom, BigCount, BigRatio};
pub use subspace::{Subspace, SubspaceError};
