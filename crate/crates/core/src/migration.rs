//! Migrating individual differences across a variant pair.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::edit::Edit;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::transform::{Rules, StandardRules};
use crate::variance::{prune, translate_with, Side, TranslateOutcome, VariantPair};

/// Two differences on opposite sides doing incompatible things to the same
/// location. Indexes are 1-based and refer to the pair the migration was
/// requested on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Conflict {
    pub overridden_side: Side,
    pub overridden_index: usize,
    pub overridden_edit: Edit,
    pub winning_side: Side,
    pub winning_index: usize,
    pub winning_edit: Edit,
}

impl Conflict {
    /// The difference on `side` at `index` took part in this conflict.
    pub fn involves(&self, side: Side, index: usize) -> bool {
        (self.overridden_side == side && self.overridden_index == index)
            || (self.winning_side == side && self.winning_index == index)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MigrationReport<N> {
    pub pair: VariantPair<N>,
    /// Side the differences were taken from.
    pub side: Side,
    /// Edits applied to the other side's document, in order. `Id` results are left out.
    pub applied: Vec<Edit>,
    pub conflicts: Vec<Conflict>,
    /// Indexes of the migrated differences in the original pair, in migration order.
    pub migrated_indexes: Vec<usize>,
}

/// Order in which [`merge_all`] picks the next difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MergePolicy {
    /// Oldest remaining first.
    Historical,
    /// Newest remaining first, pulling in dependencies as needed.
    Reverse,
    /// Uniformly random remaining difference.
    Random(u64),
}

impl Default for MergePolicy {
    fn default() -> Self {
        MergePolicy::Historical
    }
}

struct Step<N> {
    pair: VariantPair<N>,
    delta: Edit,
    conflicts: Vec<Conflict>,
    /// New position of each old own-side difference.
    index_map: Vec<Option<usize>>,
    /// New position of each old other-side difference.
    other_map: Vec<Option<usize>>,
}

fn migrate_step<R: Rules + ?Sized, N: Scalar>(
    rules: &R,
    pair: &VariantPair<N>,
    side: Side,
    index: usize,
) -> Result<Step<N>> {
    let own = pair.diffs(side);
    if index == 0 || index > own.len() {
        return Err(Error::IndexOutOfRange {
            side,
            index,
            len: own.len(),
        });
    }
    let edit = &own[index - 1];
    let other = pair.diffs(side.other());

    let dependency = |blocking: usize| Error::Dependency {
        side,
        index,
        blocking,
        blocking_edit: own[blocking - 1].clone(),
    };
    let (delta, retracted, adjusted_own, adjusted_other, grounded_at) =
        match translate_with(rules, edit, &own[..index - 1], other)? {
            // repeating an earlier difference only means something after it
            TranslateOutcome::Translated {
                retracted: Edit::Id,
                repeats: Some(k),
                ..
            } => return Err(dependency(k)),
            TranslateOutcome::Translated {
                delta,
                retracted,
                adjusted_own,
                adjusted_other,
                grounded_at,
                ..
            } => (delta, retracted, adjusted_own, adjusted_other, grounded_at),
            TranslateOutcome::Blocked {
                dependency_index, ..
            } => return Err(dependency(dependency_index)),
        };

    let mut conflicts = Vec::new();
    for (j, (before, after)) in other.iter().zip(&adjusted_other).enumerate() {
        let at = j + 1;
        let duplicate = grounded_at == Some(at) && after.is_id();
        if duplicate {
            continue;
        }
        if after.is_id() {
            conflicts.push(Conflict {
                overridden_side: side.other(),
                overridden_index: at,
                overridden_edit: before.clone(),
                winning_side: side,
                winning_index: index,
                winning_edit: edit.clone(),
            });
        } else if grounded_at == Some(at) {
            conflicts.push(Conflict {
                overridden_side: side,
                overridden_index: index,
                overridden_edit: edit.clone(),
                winning_side: side.other(),
                winning_index: at,
                winning_edit: before.clone(),
            });
        }
    }

    let mut index_map = Vec::with_capacity(own.len());
    let mut kept = Vec::with_capacity(own.len());
    for e in adjusted_own {
        if e.is_id() {
            index_map.push(None);
        } else {
            kept.push(e);
            index_map.push(Some(kept.len()));
        }
    }
    index_map.push(None);
    for e in &own[index..] {
        kept.push(e.clone());
        index_map.push(Some(kept.len()));
    }

    let mut other_map = Vec::with_capacity(adjusted_other.len());
    let mut survivors = 0;
    for e in &adjusted_other {
        if e.is_id() {
            other_map.push(None);
        } else {
            survivors += 1;
            other_map.push(Some(survivors));
        }
    }

    let mut next = pair.clone();
    next.agreement = retracted.apply(&pair.agreement)?;
    *next.diffs_mut(side) = kept;
    *next.diffs_mut(side.other()) = prune(adjusted_other);
    Ok(Step {
        pair: next,
        delta,
        conflicts,
        index_map,
        other_map,
    })
}

pub fn migrate<N: Scalar>(pair: &VariantPair<N>, side: Side, index: usize) -> Result<MigrationReport<N>> {
    migrate_with(&StandardRules, pair, side, index)
}

/// Moves difference `index` of `side` over to the other side. Fails with
/// [`Error::Dependency`] when it cannot be retracted through an earlier
/// difference.
pub fn migrate_with<R: Rules + ?Sized, N: Scalar>(
    rules: &R,
    pair: &VariantPair<N>,
    side: Side,
    index: usize,
) -> Result<MigrationReport<N>> {
    let step = migrate_step(rules, pair, side, index)?;
    Ok(MigrationReport {
        pair: step.pair,
        side,
        applied: if step.delta.is_id() { vec![] } else { vec![step.delta] },
        conflicts: step.conflicts,
        migrated_indexes: vec![index],
    })
}

fn remap(origin: &[usize], map: &[Option<usize>]) -> Vec<usize> {
    let mut out = vec![0; map.iter().flatten().count()];
    for (old, new) in map.iter().enumerate() {
        if let Some(new) = new {
            out[new - 1] = origin[old];
        }
    }
    out
}

/// Running state of a multi-step migration from one side.
struct Session<N> {
    report: MigrationReport<N>,
    /// Original index of each current own-side difference.
    origin: Vec<usize>,
    /// Original index of each current other-side difference.
    other_origin: Vec<usize>,
}

impl<N: Scalar> Session<N> {
    fn new(pair: &VariantPair<N>, side: Side) -> Self {
        Session {
            origin: (1..=pair.diffs(side).len()).collect(),
            other_origin: (1..=pair.diffs(side.other()).len()).collect(),
            report: MigrationReport {
                pair: pair.clone(),
                side,
                applied: Vec::new(),
                conflicts: Vec::new(),
                migrated_indexes: Vec::new(),
            },
        }
    }

    /// Migrates current index `index`, first migrating whatever it depends on.
    fn migrate_with_deps<R: Rules + ?Sized>(&mut self, rules: &R, index: usize) -> Result<()> {
        let side = self.report.side;
        let mut pending = vec![index];
        while let Some(&target) = pending.last() {
            match migrate_step(rules, &self.report.pair, side, target) {
                Ok(step) => {
                    pending.pop();
                    self.report.migrated_indexes.push(self.origin[target - 1]);
                    if !step.delta.is_id() {
                        self.report.applied.push(step.delta);
                    }
                    for mut c in step.conflicts {
                        for (s, i) in [
                            (c.overridden_side, &mut c.overridden_index),
                            (c.winning_side, &mut c.winning_index),
                        ] {
                            *i = if s == side {
                                self.origin[*i - 1]
                            } else {
                                self.other_origin[*i - 1]
                            };
                        }
                        self.report.conflicts.push(c);
                    }
                    self.report.pair = step.pair;
                    self.origin = remap(&self.origin, &step.index_map);
                    self.other_origin = remap(&self.other_origin, &step.other_map);
                    // only later differences wait on the stack, and those are kept
                    for p in pending.iter_mut() {
                        *p = step.index_map[*p - 1].expect("pending difference was removed");
                    }
                }
                Err(Error::Dependency { blocking, .. }) => pending.push(blocking),
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }
}

pub fn migrate_with_dependencies<N: Scalar>(
    pair: &VariantPair<N>,
    side: Side,
    index: usize,
) -> Result<MigrationReport<N>> {
    migrate_with_dependencies_with(&StandardRules, pair, side, index)
}

/// Like [`migrate`], but first migrates every difference the requested one
/// transitively depends on.
pub fn migrate_with_dependencies_with<R: Rules + ?Sized, N: Scalar>(
    rules: &R,
    pair: &VariantPair<N>,
    side: Side,
    index: usize,
) -> Result<MigrationReport<N>> {
    let len = pair.diffs(side).len();
    if index == 0 || index > len {
        return Err(Error::IndexOutOfRange { side, index, len });
    }
    let mut session = Session::new(pair, side);
    session.migrate_with_deps(rules, index)?;
    Ok(session.report)
}

pub fn merge_all<N: Scalar>(pair: &VariantPair<N>, from: Side, policy: MergePolicy) -> Result<MigrationReport<N>> {
    merge_all_with(&StandardRules, pair, from, policy)
}

/// Migrates every difference of `from` until none are left.
pub fn merge_all_with<R: Rules + ?Sized, N: Scalar>(
    rules: &R,
    pair: &VariantPair<N>,
    from: Side,
    policy: MergePolicy,
) -> Result<MigrationReport<N>> {
    let mut session = Session::new(pair, from);
    let mut rng = match policy {
        MergePolicy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    loop {
        let len = session.report.pair.diffs(from).len();
        if len == 0 {
            return Ok(session.report);
        }
        let index = match (policy, rng.as_mut()) {
            (MergePolicy::Reverse, _) => len,
            (MergePolicy::Random(_), Some(rng)) => rng.gen_range(1..=len),
            _ => 1,
        };
        session.migrate_with_deps(rules, index)?;
    }
}
