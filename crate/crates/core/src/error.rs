//! Error and validation-report types shared by the whole engine.

use thiserror::Error;

/// Everything that can go wrong inside the engine.
///
/// Variants are grouped by the exit-code class the CLI maps them to:
/// parse/I-O problems, structural validation failures, and violated
/// mathematical preconditions.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input document (bad JSON, malformed rational, wrong shape).
    #[error("parse error: {0}")]
    Parse(String),

    /// A residue was given outside the fundamental interval [0, 1).
    #[error("residue out of range [0,1): {0}")]
    ResidueOutOfRange(String),

    /// The same point occurred twice in a module descriptor.
    #[error("duplicate point entry: {0}")]
    DuplicatePoint(String),

    /// A module failed `validate_module` where an operation required a valid one.
    #[error("invalid module '{module}': {detail}")]
    InvalidModule { module: String, detail: String },

    /// Partial data: a field marked unknown was required.
    #[error("module '{module}' has field '{field}' marked unknown; operation '{op}' needs it")]
    UnknownField {
        module: String,
        field: &'static str,
        op: &'static str,
    },

    /// Partial data: a point marked data-absent was required.
    #[error("module '{module}' has no local data at {point}; operation '{op}' needs it")]
    MissingLocalData {
        module: String,
        point: String,
        op: &'static str,
    },

    /// The entry at infinity is missing entirely.
    #[error("module '{module}' has no entry at infinity")]
    MissingInfinity { module: String },

    /// Block-level data was required but only aggregate counts are stored.
    #[error("operation '{op}' needs block-level data at {point} of '{module}', found aggregate counts only")]
    BlocksRequired {
        module: String,
        point: String,
        op: &'static str,
    },

    /// Multiplicity arithmetic left the machine word. Always a hard error.
    #[error("integer overflow in exact multiplicity arithmetic")]
    Overflow,

    /// Numerically impossible data (negative Hodge number, failed Euler identity, ...).
    #[error("unrealizable data: {0}")]
    Unrealizable(String),

    /// The middle convolution is identically zero; the plain convolution is punctual.
    #[error("punctual convolution: {0}")]
    PunctualConvolution(String),

    /// A skyscraper candidate passed the numeric test but the caller chose no mode.
    #[error("undeclared skyscraper: candidate at c = {c} with twist q = {q}; declare it or assume absence explicitly")]
    UndeclaredSkyscraper { c: String, q: i64 },

    /// The caller declared a skyscraper that contradicts the numeric test.
    #[error("declared skyscraper (c = {c}, q = {q}) is inconsistent: {detail}")]
    SkyscraperMismatch { c: String, q: i64, detail: String },

    /// Kummer parameter collides with residues of the input.
    #[error("non-generic mu = {mu}: {collisions}")]
    NonGenericMu { mu: String, collisions: String },

    /// An operation that assumes an irreducible nonconstant minimal extension
    /// was fed a module not flagged as such, and no waiver was given.
    #[error("module '{0}' is not flagged as an irreducible nonconstant minimal extension; pass the irreducibility waiver to proceed")]
    NotIrreducible(String),

    /// Bad argument to a constructor (zero Kummer residue, integral residue sum, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// One structural invariant broken by a module descriptor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Stable machine-readable code, kebab-case.
    pub code: String,
    /// Human-readable description with degrees and points spelled out.
    pub message: String,
}

/// Outcome of `validate_module`: hard violations plus advisory warnings.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub(crate) fn violation(&mut self, code: &str, message: String) {
        self.violations.push(Violation {
            code: code.to_string(),
            message,
        });
    }

    pub(crate) fn warn(&mut self, message: String) {
        self.warnings.push(message);
    }
}
