//! Computations with finite algebras given by operation tables.
//!
//! The crate decides, for a finite algebra `A`, whether the variety `HSP(A)`
//! is congruence meet-semidistributive — producing a machine-checkable
//! certificate either way — and implements the supporting machinery:
//! congruence lattices, free algebras on finitely many generators, the
//! translation calculus over unordered pairs, and a budgeted decision
//! procedure for finite residual bounds.

pub mod algebra;
pub mod congruence;
pub mod fixtures;
pub mod free;
pub mod partition;
pub mod residual;
pub mod sdmeet;
pub mod translations;

mod closure;
mod error;

pub use algebra::{FiniteAlgebra, Identity, Signature, Term, UnorderedPair};
pub use error::Error;
pub use partition::Partition;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Default cap on the universe size of derived algebras (powers, quotients).
pub const DEFAULT_SIZE_CAP: usize = 1_000_000;

/// Default cap on the number of elements of a generated free algebra.
pub const DEFAULT_FREE_CAP: usize = 200_000;

/// Cap on the number of columns `|A|^n` used to represent free-algebra
/// elements (and Kalicki membership pairs) as vectors.
pub const COLUMN_CAP: usize = 1 << 20;

/// Default cap on the number of congruences enumerated for a full lattice.
pub const DEFAULT_CONGRUENCE_CAP: usize = 100_000;

/// Default cap on the number of entries of a single materialized operation
/// table.
pub const TABLE_ENTRY_CAP: usize = 1_000_000;
