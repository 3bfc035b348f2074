//! Projection and retraction of edits through a difference.
//!
//! Both operations complete a square of edits
//!
//! ```text
//!         diff
//!     A ───────▶ B
//!     │          │
//! pre │          │ post
//!     ▼          ▼
//!     A' ──────▶ B'
//!        adjust
//! ```
//!
//! so that `post ∘ diff = adjust ∘ pre` on every document where the inputs are
//! valid. [`project`] is given `pre` and `diff`; [`retract`] is given `post` and
//! `diff` and fails when `post` acts on a location that `diff` created or vacated.
//!
//! Rules are matched in order: `Id` is a fixpoint, equal edits cancel, then the
//! location-specific rules below.

use std::fmt;

use crate::edit::Edit;
use crate::error::{Error, Result};

/// Why an edit cannot be carried back through a difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dependency {
    /// The edit touches the slot the difference inserted.
    InsertedSlot,
    /// The edit touches the slot the difference moved out of.
    VacatedSlot,
}

impl fmt::Display for Dependency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dependency::InsertedSlot => f.write_str("acts on the slot created by the insert"),
            Dependency::VacatedSlot => f.write_str("acts on the slot vacated by the move"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransformOutcome {
    /// `result` is `post` for a projection and `pre` for a retraction.
    /// `grounded` is set when a non-`Id` input was turned into `Id`.
    Defined {
        result: Edit,
        adjusted: Edit,
        grounded: bool,
    },
    Undefined(Dependency),
}

impl TransformOutcome {
    fn defined(input: &Edit, result: Edit, adjusted: Edit) -> Self {
        let grounded = result.is_id() && !input.is_id();
        TransformOutcome::Defined {
            result,
            adjusted,
            grounded,
        }
    }

    pub fn is_defined(&self) -> bool {
        matches!(self, TransformOutcome::Defined { .. })
    }

    /// `(result, adjusted)` when defined.
    pub fn pair(&self) -> Option<(&Edit, &Edit)> {
        match self {
            TransformOutcome::Defined {
                result, adjusted, ..
            } => Some((result, adjusted)),
            TransformOutcome::Undefined(_) => None,
        }
    }
}

/// A projection/retraction rule set. The difference engine is generic over it so
/// alternative (or deliberately broken) tables can be checked by the harness.
pub trait Rules {
    fn project(&self, pre: &Edit, diff: &Edit) -> Result<TransformOutcome>;
    fn retract(&self, post: &Edit, diff: &Edit) -> Result<TransformOutcome>;
}

/// The standard rule table.
#[derive(Debug, Clone, Copy, Default)]
pub struct StandardRules;

impl Rules for StandardRules {
    fn project(&self, pre: &Edit, diff: &Edit) -> Result<TransformOutcome> {
        project(pre, diff)
    }

    fn retract(&self, post: &Edit, diff: &Edit) -> Result<TransformOutcome> {
        retract(post, diff)
    }
}

impl<R: Rules + ?Sized> Rules for &R {
    fn project(&self, pre: &Edit, diff: &Edit) -> Result<TransformOutcome> {
        (**self).project(pre, diff)
    }

    fn retract(&self, post: &Edit, diff: &Edit) -> Result<TransformOutcome> {
        (**self).retract(post, diff)
    }
}

/// Index after an insert at `at`.
fn shift(index: usize, at: usize) -> usize {
    if index >= at {
        index + 1
    } else {
        index
    }
}

/// Index before an insert at `at`; `index != at`.
fn unshift(index: usize, at: usize) -> usize {
    if index > at {
        index - 1
    } else {
        index
    }
}

fn well_formed(e: &Edit) -> Result<()> {
    let ok = match *e {
        Edit::Id => true,
        Edit::Ins { index, .. } | Edit::Conv { index, .. } => index >= 1,
        Edit::Move { target, source } => target >= 1 && source >= 1 && target != source,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::MalformedEdit { edit: e.clone() })
    }
}

fn unhandled(operation: &'static str, edit: &Edit, through: &Edit) -> Error {
    Error::UnhandledPair {
        operation,
        edit: edit.clone(),
        through: through.clone(),
    }
}

/// Carries `pre` forward through `diff`, returning `post` and `adjust`.
pub fn project(pre: &Edit, diff: &Edit) -> Result<TransformOutcome> {
    use Edit::*;
    well_formed(pre)?;
    well_formed(diff)?;
    let done = |post: Edit, adjust: Edit| Ok(TransformOutcome::defined(pre, post, adjust));

    if pre.is_id() {
        return done(Id, diff.clone());
    }
    if diff.is_id() {
        return done(pre.clone(), Id);
    }
    if pre == diff {
        return done(Id, Id);
    }

    match (pre, diff) {
        (&Conv { index: j, .. }, &Conv { index: i, .. }) => {
            if i == j {
                // the left edit overrides the top one
                done(pre.clone(), Id)
            } else {
                done(pre.clone(), diff.clone())
            }
        }
        (&Conv { index: j, ty }, &Ins { index: i, .. }) => done(Edit::conv(shift(j, i), ty), diff.clone()),
        (&Conv { index: j, ty }, &Move { target, source }) => {
            if j == source {
                done(Edit::conv(target, ty), diff.clone())
            } else if j == target {
                // would retract to the move's source, so it cannot survive
                done(Id, diff.clone())
            } else {
                done(pre.clone(), diff.clone())
            }
        }

        (&Ins { index: j, .. }, &Conv { index: i, ty }) => done(pre.clone(), Edit::conv(shift(i, j), ty)),
        (Ins { index: j, ty: u, id: q }, Ins { index: i, ty: t, id: p }) => {
            if p == q {
                return Err(unhandled("projection", pre, diff));
            }
            // inserts at the same index are ordered by id, whichever side is projected
            if i < j || (i == j && p < q) {
                done(Edit::ins(j + 1, *u, q.clone()), diff.clone())
            } else {
                done(pre.clone(), Edit::ins(i + 1, *t, p.clone()))
            }
        }
        (&Ins { index: j, .. }, &Move { target, source }) => {
            done(pre.clone(), Edit::mv(shift(target, j), shift(source, j)))
        }

        (&Move { target: a, .. }, &Conv { index: i, .. }) if i == a => done(pre.clone(), Id),
        (&Move { target: a, source: b }, &Conv { index: i, ty }) if i == b => {
            done(pre.clone(), Edit::conv(a, ty))
        }
        (Move { .. }, Conv { .. }) => done(pre.clone(), diff.clone()),
        (&Move { target: a, source: b }, &Ins { index: i, .. }) => {
            done(Edit::mv(shift(a, i), shift(b, i)), diff.clone())
        }
        (&Move { target: a, source: b }, &Move { target: c, source: d }) => {
            if a == c {
                // same target: the left move wins and the top move's source is
                // cleared by moving the left move's (now empty) source over it
                done(pre.clone(), Edit::mv(d, b))
            } else if b == d {
                // same source: the content follows to the left move's target
                done(Edit::mv(a, c), diff.clone())
            } else if a == d && b == c {
                // each move overwrites the other's source; both slots end up empty
                done(diff.clone(), pre.clone())
            } else if a == d {
                done(Edit::mv(c, b), diff.clone())
            } else if b == c {
                done(pre.clone(), Edit::mv(a, d))
            } else {
                done(pre.clone(), diff.clone())
            }
        }

        _ => Err(unhandled("projection", pre, diff)),
    }
}

/// Carries `post` back through `diff`, returning `pre` and `adjust`, or
/// [`TransformOutcome::Undefined`] when `post` depends on `diff`.
pub fn retract(post: &Edit, diff: &Edit) -> Result<TransformOutcome> {
    use Edit::*;
    well_formed(post)?;
    well_formed(diff)?;
    let done = |pre: Edit, adjust: Edit| Ok(TransformOutcome::defined(post, pre, adjust));
    let blocked = |why| Ok(TransformOutcome::Undefined(why));

    if post.is_id() {
        return done(Id, diff.clone());
    }
    if diff.is_id() {
        return done(post.clone(), Id);
    }
    if post == diff {
        return match *post {
            // a second identical move shifts the tombstone over the moved
            // content; the same end state is reached by swapping first
            Move { target, source } => done(Edit::mv(source, target), Edit::mv(source, target)),
            // an insert id occurs once per history
            Ins { .. } => Err(unhandled("retraction", post, diff)),
            _ => done(Id, diff.clone()),
        };
    }

    match (post, diff) {
        (&Conv { index: j, .. }, &Conv { index: i, .. }) => {
            if i == j {
                done(post.clone(), Id)
            } else {
                done(post.clone(), diff.clone())
            }
        }
        (&Conv { index: j, ty }, &Ins { index: i, .. }) => {
            if j == i {
                blocked(Dependency::InsertedSlot)
            } else {
                done(Edit::conv(unshift(j, i), ty), diff.clone())
            }
        }
        (&Conv { index: j, ty }, &Move { target, source }) => {
            if j == target {
                done(Edit::conv(source, ty), diff.clone())
            } else if j == source {
                blocked(Dependency::VacatedSlot)
            } else {
                done(post.clone(), diff.clone())
            }
        }

        (&Ins { index: j, .. }, &Conv { index: i, ty }) => done(post.clone(), Edit::conv(shift(i, j), ty)),
        (Ins { index: j, ty: u, id: q }, Ins { index: i, ty: t, id: p }) => {
            if p == q {
                return Err(unhandled("retraction", post, diff));
            }
            if j > i {
                done(Edit::ins(j - 1, *u, q.clone()), diff.clone())
            } else if j < i || q < p {
                done(post.clone(), Edit::ins(i + 1, *t, p.clone()))
            } else {
                blocked(Dependency::InsertedSlot)
            }
        }
        (&Ins { index: j, .. }, &Move { target, source }) => {
            done(post.clone(), Edit::mv(shift(target, j), shift(source, j)))
        }

        (&Move { target: a, .. }, &Conv { index: i, .. }) if i == a => done(post.clone(), Id),
        (&Move { target: a, source: b }, &Conv { index: i, ty }) if i == b => {
            done(post.clone(), Edit::conv(a, ty))
        }
        (Move { .. }, Conv { .. }) => done(post.clone(), diff.clone()),
        (&Move { target: a, source: b }, &Ins { index: i, .. }) => {
            if a == i || b == i {
                blocked(Dependency::InsertedSlot)
            } else {
                done(Edit::mv(unshift(a, i), unshift(b, i)), diff.clone())
            }
        }
        (&Move { target: x, source: y }, &Move { target: c, source: d }) => {
            if x == d || y == d {
                blocked(Dependency::VacatedSlot)
            } else if x == c {
                done(Edit::mv(d, y), diff.clone())
            } else if y == c {
                done(post.clone(), Edit::mv(x, d))
            } else {
                done(post.clone(), diff.clone())
            }
        }

        _ => Err(unhandled("retraction", post, diff)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::AtomType::*;
    use crate::edit::EditId;

    fn p() -> EditId {
        EditId::new("B", 1)
    }
    fn q() -> EditId {
        EditId::new("A", 1)
    }

    fn defined(result: Edit, adjusted: Edit, grounded: bool) -> TransformOutcome {
        TransformOutcome::Defined {
            result,
            adjusted,
            grounded,
        }
    }

    #[test]
    fn project_examples() {
        let ins = Edit::ins(1, Bool, p());
        assert_eq!(
            project(&Edit::conv(1, Str), &ins).unwrap(),
            defined(Edit::conv(2, Str), ins.clone(), false)
        );
        assert_eq!(
            project(&Edit::conv(1, Num), &Edit::conv(1, Str)).unwrap(),
            defined(Edit::conv(1, Num), Edit::Id, false)
        );
        assert_eq!(
            project(&Edit::conv(1, Num), &Edit::conv(1, Num)).unwrap(),
            defined(Edit::Id, Edit::Id, true)
        );
        assert_eq!(
            project(&Edit::conv(2, Bool), &Edit::mv(1, 2)).unwrap(),
            defined(Edit::conv(1, Bool), Edit::mv(1, 2), false)
        );
        let ins_p = Edit::ins(1, Str, p());
        assert_eq!(
            project(&Edit::ins(2, Num, q()), &ins_p).unwrap(),
            defined(Edit::ins(3, Num, q()), ins_p, false)
        );
    }

    #[test]
    fn retract_examples() {
        assert_eq!(
            retract(&Edit::conv(1, Num), &Edit::conv(1, Num)).unwrap(),
            defined(Edit::Id, Edit::conv(1, Num), true)
        );
        assert_eq!(
            retract(&Edit::conv(1, Num), &Edit::ins(1, Str, p())).unwrap(),
            TransformOutcome::Undefined(Dependency::InsertedSlot)
        );
        let ins = Edit::ins(1, Bool, p());
        assert_eq!(
            retract(&Edit::conv(2, Bool), &ins).unwrap(),
            defined(Edit::conv(1, Bool), ins, false)
        );
    }

    #[test]
    fn id_is_a_fixpoint() {
        let x = Edit::mv(2, 1);
        for op in [project, retract] {
            assert_eq!(op(&Edit::Id, &x).unwrap(), defined(Edit::Id, x.clone(), false));
            assert_eq!(op(&x, &Edit::Id).unwrap(), defined(x.clone(), Edit::Id, false));
        }
    }

    #[test]
    fn duplicate_inserts_cancel_and_distinct_ones_shift() {
        let a = Edit::ins(2, Num, p());
        assert_eq!(project(&a, &a).unwrap(), defined(Edit::Id, Edit::Id, true));
        let b = Edit::ins(2, Num, q());
        // the smaller id takes the slot whichever side is projected
        assert_eq!(
            project(&b, &a).unwrap(),
            defined(b.clone(), Edit::ins(3, Num, p()), false)
        );
        assert_eq!(
            project(&a, &b).unwrap(),
            defined(Edit::ins(3, Num, p()), b.clone(), false)
        );
        // same id with a different position is a broken history
        assert!(matches!(
            project(&Edit::ins(1, Num, p()), &a),
            Err(Error::UnhandledPair { .. })
        ));
    }

    #[test]
    fn asymmetry_is_kept() {
        // top edit is overridden in both orientations
        assert_eq!(
            project(&Edit::conv(1, Num), &Edit::conv(1, Str)).unwrap(),
            defined(Edit::conv(1, Num), Edit::Id, false)
        );
        assert_eq!(
            project(&Edit::conv(1, Str), &Edit::conv(1, Num)).unwrap(),
            defined(Edit::conv(1, Str), Edit::Id, false)
        );
    }

    #[test]
    fn conv_into_move_target_grounds() {
        assert_eq!(
            project(&Edit::conv(1, Str), &Edit::mv(1, 2)).unwrap(),
            defined(Edit::Id, Edit::mv(1, 2), true)
        );
    }

    #[test]
    fn conflicting_moves_clear_the_overridden_source() {
        assert_eq!(
            project(&Edit::mv(1, 3), &Edit::mv(1, 2)).unwrap(),
            defined(Edit::mv(1, 3), Edit::mv(2, 3), false)
        );
    }

    #[test]
    fn malformed_input() {
        assert!(matches!(
            project(&Edit::mv(1, 1), &Edit::Id),
            Err(Error::MalformedEdit { .. })
        ));
        assert!(matches!(
            retract(&Edit::conv(0, Num), &Edit::Id),
            Err(Error::MalformedEdit { .. })
        ));
    }
}
