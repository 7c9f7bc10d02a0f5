//! Exact-arithmetic calculus for the numerical Hodge data of irreducible
//! polarized complex Hodge modules on the punctured affine line.
//!
//! A module is represented by its numerical shadow only: generic Hodge
//! numbers `h^p`, degrees `delta^p` of the Hodge bundles of the canonical
//! extension, and per-point nearby/vanishing cycle data graded by Hodge
//! degree, monodromy residue and Jordan block size. On top of that shadow the
//! crate implements the transformation laws for tensor products and additive
//! middle convolution, including the full table of special fiber data at
//! infinity, Kummer twists and convolutions, skyscraper bookkeeping, and a
//! battery of cross-checking identities.
//!
//! Modules:
//! - [`model`]: scalars, residues, graded vectors, Jordan blocks, descriptors
//! - [`schema`]: strict JSON parsing and canonical serialization
//! - [`invariants`]: derived local/global tables, validation, parabolic
//!   cohomology, reframing transforms and numeric duality
//! - [`tensor`]: Jordan block tensor law and global tensor bookkeeping
//! - [`hypergeometric`]: Kummer and hypergeometric constructors
//! - [`convolution`]: middle convolution pipelines and their cross-checks
//! - [`generate`]: seeded construction of certified-realizable test modules
//! - [`selfcheck`]: the identity battery behind `hodgeconv selfcheck`

pub mod convolution;
pub mod error;
pub mod generate;
pub mod hypergeometric;
pub mod invariants;
pub mod model;
pub mod schema;
pub mod selfcheck;
pub mod tensor;

pub use error::{Error, Result, ValidationReport, Violation};
pub use model::{
    AggregateData, BlockSet, Flags, GradedVector, JordanBlock, LocalData, ModuleData, PointId,
    Rational, Residue,
};
pub use schema::{parse_module, serialize_module};
