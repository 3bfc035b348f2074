//! Structural version control for typed tuple documents.
//!
//! Documents are tuples of typed slots changed only through structure edits
//! ([`Edit`]). Two long-lived variants are kept as an agreement plus two
//! difference sequences ([`VariantPair`]); individual differences can be
//! migrated from one variant to the other, carrying data along with the schema.
//!
//! ```
//! use tvc_core::{AtomType, Document, Edit, EditId, Side, VariantPair};
//!
//! let pair = VariantPair::new(Document::from_types(&[AtomType::Num]));
//! let pair = pair.record_edit(Side::A, &Edit::ins(1, AtomType::Bool, EditId::new("A", 1))).unwrap();
//! let pair = pair.record_edit(Side::B, &Edit::conv(1, AtomType::Str)).unwrap();
//! let report = tvc_core::migrate(&pair, Side::B, 1).unwrap();
//! assert_eq!(report.applied, vec![Edit::conv(2, AtomType::Str)]);
//! ```

pub mod document;
pub mod edit;
pub mod error;
pub mod image;
pub mod migration;
pub mod scalar;
pub mod syntax;
pub mod transform;
pub mod variance;
pub mod verify;

pub use document::{AtomType, Conformed, ConformedSlot, Slot};
pub use edit::{apply_edit, replay, validate_edit, Edit, EditId};
pub use error::{Error, Result};
pub use migration::{
    merge_all, migrate, migrate_with_dependencies, Conflict, MergePolicy,
};
pub use scalar::Scalar;
pub use transform::{project, retract, Dependency, Rules, StandardRules, TransformOutcome};
pub use variance::{rebuild, record_edit, translate, Side, TranslateOutcome};

use num_rational::Ratio;

pub type Document = document::Document<f64>;
pub type Value = document::Value<f64>;
pub type ConformedDocument = document::ConformedDocument<f64>;
pub type VariantPair = variance::VariantPair<f64>;
pub type MigrationReport = migration::MigrationReport<f64>;

/// Exact rational payloads.
pub type ExactDocument = document::Document<Ratio<i64>>;
pub type ExactValue = document::Value<Ratio<i64>>;
pub type ExactVariantPair = variance::VariantPair<Ratio<i64>>;
