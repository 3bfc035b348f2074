//! Agreement and differences between two variant documents.
//!
//! A [`VariantPair`] stores the agreement `A&B` and the two difference
//! sequences that rebuild each variant from it. Edits made on one side are
//! translated to the other: retracted back through the own side's differences
//! to the agreement, then projected forward through the other side's. An edit
//! whose translation is `Id` is absorbed into the agreement; anything else is
//! appended to the edited side's differences.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::document::Document;
use crate::edit::{replay, validate_edit, Edit};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::transform::{Dependency, Rules, StandardRules, TransformOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::A => "A",
            Side::B => "B",
        })
    }
}

impl std::str::FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" | "a" => Ok(Side::A),
            "B" | "b" => Ok(Side::B),
            other => Err(format!("unknown side `{other}` (expected A or B)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantPair<N> {
    pub agreement: Document<N>,
    pub diffs_a: Vec<Edit>,
    pub diffs_b: Vec<Edit>,
}

impl<N: Scalar> VariantPair<N> {
    /// Two identical variants of `agreement`.
    pub fn new(agreement: Document<N>) -> Self {
        VariantPair {
            agreement,
            diffs_a: Vec::new(),
            diffs_b: Vec::new(),
        }
    }

    pub fn diffs(&self, side: Side) -> &[Edit] {
        match side {
            Side::A => &self.diffs_a,
            Side::B => &self.diffs_b,
        }
    }

    pub(crate) fn diffs_mut(&mut self, side: Side) -> &mut Vec<Edit> {
        match side {
            Side::A => &mut self.diffs_a,
            Side::B => &mut self.diffs_b,
        }
    }

    /// Replays one side's differences over the agreement.
    pub fn document(&self, side: Side) -> Result<Document<N>> {
        replay(&self.agreement, self.diffs(side))
    }

    /// True when there are no differences left on either side.
    pub fn is_converged(&self) -> bool {
        self.diffs_a.is_empty() && self.diffs_b.is_empty()
    }

    /// Checks that neither side holds `Id` and both sides replay.
    pub fn check(&self) -> Result<()> {
        for side in [Side::A, Side::B] {
            if self.diffs(side).iter().any(Edit::is_id) {
                return Err(Error::IdNotRecordable);
            }
            self.document(side)?;
        }
        Ok(())
    }

    pub fn record_edit(&self, side: Side, edit: &Edit) -> Result<Self> {
        record_edit_with(&StandardRules, self, side, edit)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TranslateOutcome {
    Translated {
        /// The edit that does the same thing on the other side.
        delta: Edit,
        /// The edit retracted all the way back to the agreement.
        retracted: Edit,
        /// 1-based position in the own side's differences that the edit
        /// repeats; retraction grounded it to `Id` there.
        repeats: Option<usize>,
        adjusted_own: Vec<Edit>,
        adjusted_other: Vec<Edit>,
        /// 1-based position in the other side's differences where the
        /// translated edit was grounded to `Id`.
        grounded_at: Option<usize>,
    },
    /// Retraction through own difference `dependency_index` (1-based) was undefined.
    Blocked {
        dependency_index: usize,
        reason: Dependency,
    },
}

pub fn translate(edit: &Edit, own: &[Edit], other: &[Edit]) -> Result<TranslateOutcome> {
    translate_with(&StandardRules, edit, own, other)
}

/// Retracts `edit` through `own` in reverse, then projects the result through
/// `other` in order. Adjusted sequences keep positional correspondence and may
/// contain `Id`.
pub fn translate_with<R: Rules + ?Sized>(
    rules: &R,
    edit: &Edit,
    own: &[Edit],
    other: &[Edit],
) -> Result<TranslateOutcome> {
    let mut current = edit.clone();
    let mut adjusted_own = own.to_vec();
    let mut repeats = None;
    for (i, diff) in own.iter().enumerate().rev() {
        match rules.retract(&current, diff)? {
            TransformOutcome::Defined {
                result,
                adjusted,
                grounded,
            } => {
                if grounded {
                    repeats = Some(i + 1);
                }
                current = result;
                adjusted_own[i] = adjusted;
            }
            TransformOutcome::Undefined(reason) => {
                return Ok(TranslateOutcome::Blocked {
                    dependency_index: i + 1,
                    reason,
                })
            }
        }
    }
    let retracted = current.clone();

    let mut adjusted_other = Vec::with_capacity(other.len());
    let mut grounded_at = None;
    for (j, diff) in other.iter().enumerate() {
        match rules.project(&current, diff)? {
            TransformOutcome::Defined {
                result,
                adjusted,
                grounded,
            } => {
                if grounded && grounded_at.is_none() {
                    grounded_at = Some(j + 1);
                }
                current = result;
                adjusted_other.push(adjusted);
            }
            TransformOutcome::Undefined(_) => {
                return Err(Error::UnhandledPair {
                    operation: "projection",
                    edit: current,
                    through: diff.clone(),
                })
            }
        }
    }

    Ok(TranslateOutcome::Translated {
        delta: current,
        retracted,
        repeats,
        adjusted_own,
        adjusted_other,
        grounded_at,
    })
}

pub(crate) fn prune(edits: Vec<Edit>) -> Vec<Edit> {
    edits.into_iter().filter(|e| !e.is_id()).collect()
}

pub fn record_edit<N: Scalar>(pair: &VariantPair<N>, side: Side, edit: &Edit) -> Result<VariantPair<N>> {
    record_edit_with(&StandardRules, pair, side, edit)
}

/// Records an edit made to one variant, absorbing it into the agreement when
/// the other variant already does the same thing.
pub fn record_edit_with<R: Rules + ?Sized, N: Scalar>(
    rules: &R,
    pair: &VariantPair<N>,
    side: Side,
    edit: &Edit,
) -> Result<VariantPair<N>> {
    if edit.is_id() {
        return Err(Error::IdNotRecordable);
    }
    let doc = pair.document(side)?;
    if !validate_edit(edit, doc.arity()) {
        return Err(Error::InvalidEdit {
            edit: edit.clone(),
            arity: doc.arity(),
        });
    }

    let mut next = pair.clone();
    match translate_with(rules, edit, pair.diffs(side), pair.diffs(side.other()))? {
        TranslateOutcome::Translated {
            delta,
            retracted,
            adjusted_own,
            adjusted_other,
            grounded_at: Some(at),
            ..
        } if delta.is_id() && !retracted.is_id() && adjusted_other[at - 1].is_id() => {
            next.agreement = retracted.apply(&pair.agreement)?;
            *next.diffs_mut(side) = prune(adjusted_own);
            *next.diffs_mut(side.other()) = prune(adjusted_other);
        }
        _ => next.diffs_mut(side).push(edit.clone()),
    }
    Ok(next)
}

pub fn rebuild<N: Scalar>(ancestor: &Document<N>, history_a: &[Edit], history_b: &[Edit]) -> Result<VariantPair<N>> {
    rebuild_with(&StandardRules, ancestor, history_a, history_b)
}

/// Derives the pair from scratch: the agreement starts at the ancestor, B's
/// differences are its whole history, and A's history is recorded edit by edit.
pub fn rebuild_with<R: Rules + ?Sized, N: Scalar>(
    rules: &R,
    ancestor: &Document<N>,
    history_a: &[Edit],
    history_b: &[Edit],
) -> Result<VariantPair<N>> {
    let mut pair = VariantPair::new(ancestor.clone());
    pair.diffs_b = prune(history_b.to_vec());
    pair.document(Side::B)?;
    for edit in history_a.iter().filter(|e| !e.is_id()) {
        pair = record_edit_with(rules, &pair, Side::A, edit)?;
    }
    Ok(pair)
}
