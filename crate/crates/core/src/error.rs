use thiserror::Error;

use crate::edit::Edit;
use crate::variance::Side;

/// Failures of the edit algebra and the difference engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// The edit does not fit a document of this arity.
    #[error("invalid edit `{edit}` for a document of arity {arity}")]
    InvalidEdit { edit: Edit, arity: usize },

    /// Index zero, or a move onto itself.
    #[error("malformed edit `{edit}`")]
    MalformedEdit { edit: Edit },

    /// No rule matched the pair; the rule table has a gap.
    #[error("no {operation} rule for `{edit}` through `{through}`")]
    UnhandledPair {
        operation: &'static str,
        edit: Edit,
        through: Edit,
    },

    /// `Id` cannot be recorded as a difference.
    #[error("`id` edits are not recordable")]
    IdNotRecordable,

    /// Difference index outside `1..=len`.
    #[error("difference index {index} out of range for side {side} with {len} differences")]
    IndexOutOfRange { side: Side, index: usize, len: usize },

    /// The requested difference cannot be retracted through an earlier one on
    /// the same side; that earlier difference must be migrated first.
    #[error("difference {index} on side {side} depends on difference {blocking} (`{blocking_edit}`); migrate it first")]
    Dependency {
        side: Side,
        index: usize,
        blocking: usize,
        blocking_edit: Edit,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
