//! JSON and text renderings of a pair and of migration reports.

use std::fmt::Write;

use serde::Serialize;
use tvc_core::document::Conformed;
use tvc_core::syntax::{print, print_short};
use tvc_core::{
    migrate, migrate_with_dependencies, AtomType, Conflict, Document, Edit, Error, MigrationReport, Side, Value,
    VariantPair,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotView {
    pub index: usize,
    #[serde(rename = "type")]
    pub ty: AtomType,
    pub value: serde_json::Value,
    pub display: String,
    pub error: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DifferenceView {
    pub index: usize,
    /// Short edit syntax, inserts without their id.
    pub text: String,
    /// Full edit syntax.
    pub full: String,
    pub edit: Edit,
    /// Earlier difference on the same side that must be migrated first.
    pub depends_on: Option<usize>,
    /// Opposite-side difference that migrating this one conflicts with.
    pub conflicts_with: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sides<T> {
    #[serde(rename = "A")]
    pub a: T,
    #[serde(rename = "B")]
    pub b: T,
}

impl<T> Sides<T> {
    pub fn get(&self, side: Side) -> &T {
        match side {
            Side::A => &self.a,
            Side::B => &self.b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateView {
    pub agreement: Vec<SlotView>,
    pub documents: Sides<Vec<SlotView>>,
    pub differences: Sides<Vec<DifferenceView>>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConflictView {
    pub overridden_side: Side,
    pub overridden_index: usize,
    pub overridden: String,
    pub winning_side: Side,
    pub winning_index: usize,
    pub winning: String,
}

impl From<&Conflict> for ConflictView {
    fn from(c: &Conflict) -> Self {
        ConflictView {
            overridden_side: c.overridden_side,
            overridden_index: c.overridden_index,
            overridden: print_short(&c.overridden_edit),
            winning_side: c.winning_side,
            winning_index: c.winning_index,
            winning: print_short(&c.winning_edit),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MigrationView {
    pub side: Side,
    pub migrated_indexes: Vec<usize>,
    pub applied: Vec<String>,
    pub conflicts: Vec<ConflictView>,
}

impl From<&MigrationReport> for MigrationView {
    fn from(r: &MigrationReport) -> Self {
        MigrationView {
            side: r.side,
            migrated_indexes: r.migrated_indexes.clone(),
            applied: r.applied.iter().map(print).collect(),
            conflicts: r.conflicts.iter().map(ConflictView::from).collect(),
        }
    }
}

fn value_json(v: &Value) -> serde_json::Value {
    match v {
        Value::Number(n) => serde_json::Number::from_f64(*n).map_or(serde_json::Value::Null, Into::into),
        Value::Text(s) => s.clone().into(),
        Value::Truth(b) => (*b).into(),
        Value::Null => serde_json::Value::Null,
    }
}

pub fn slots(doc: &Document) -> Vec<SlotView> {
    doc.conform()
        .slots
        .iter()
        .enumerate()
        .map(|(k, s)| SlotView {
            index: k + 1,
            ty: s.ty,
            value: match &s.display {
                Conformed::Value(v) => value_json(v),
                Conformed::Error => serde_json::Value::Null,
            },
            display: s.display.to_string(),
            error: matches!(s.display, Conformed::Error),
        })
        .collect()
}

fn annotate(pair: &VariantPair, side: Side, index: usize, edit: &Edit) -> DifferenceView {
    let depends_on = match migrate(pair, side, index) {
        Err(Error::Dependency { blocking, .. }) => Some(blocking),
        _ => None,
    };
    let conflicts_with = migrate_with_dependencies(pair, side, index).ok().and_then(|r| {
        r.conflicts
            .iter()
            .filter(|c| c.involves(side, index))
            .map(|c| {
                if c.overridden_side == side {
                    c.winning_index
                } else {
                    c.overridden_index
                }
            })
            .min()
    });
    DifferenceView {
        index,
        text: print_short(edit),
        full: print(edit),
        edit: edit.clone(),
        depends_on,
        conflicts_with,
    }
}

pub fn state(pair: &VariantPair) -> Result<StateView, Error> {
    let diffs = |side| {
        pair.diffs(side)
            .iter()
            .enumerate()
            .map(|(k, e)| annotate(pair, side, k + 1, e))
            .collect()
    };
    Ok(StateView {
        agreement: slots(&pair.agreement),
        documents: Sides {
            a: slots(&pair.document(Side::A)?),
            b: slots(&pair.document(Side::B)?),
        },
        differences: Sides {
            a: diffs(Side::A),
            b: diffs(Side::B),
        },
        converged: pair.is_converged(),
    })
}

pub fn tuple(slots: &[SlotView]) -> String {
    let inner: Vec<String> = slots.iter().map(|s| format!("{}:{}", s.display, s.ty)).collect();
    format!("({})", inner.join(", "))
}

pub fn render_state(view: &StateView) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "agreement {}", tuple(&view.agreement));
    for side in [Side::A, Side::B] {
        let _ = writeln!(out, "document {side}  {}", tuple(view.documents.get(side)));
    }
    for side in [Side::A, Side::B] {
        let diffs = view.differences.get(side);
        if diffs.is_empty() {
            let _ = writeln!(out, "differences {side}: none");
            continue;
        }
        let _ = writeln!(out, "differences {side}:");
        for d in diffs {
            let mut notes = Vec::new();
            if let Some(j) = d.depends_on {
                notes.push(format!("depends on {side}{j}"));
            }
            if let Some(j) = d.conflicts_with {
                notes.push(format!("conflicts with {}{j}", side.other()));
            }
            let notes = if notes.is_empty() {
                String::new()
            } else {
                format!("  ({})", notes.join(", "))
            };
            let _ = writeln!(out, "  {side}{}  {}{notes}", d.index, d.text);
        }
    }
    out
}

pub fn render_migration(view: &MigrationView) -> String {
    let mut out = String::new();
    let from = view.side;
    let to = from.other();
    if view.migrated_indexes.is_empty() {
        let _ = writeln!(out, "nothing to migrate from {from}");
        return out;
    }
    let order: Vec<String> = view.migrated_indexes.iter().map(|i| format!("{from}{i}")).collect();
    let _ = writeln!(out, "migrated {} from {from} to {to}", order.join(", "));
    for e in &view.applied {
        let _ = writeln!(out, "  applied to {to}: {e}");
    }
    for c in &view.conflicts {
        let _ = writeln!(
            out,
            "  conflict: {}{} `{}` overridden by {}{} `{}`",
            c.overridden_side, c.overridden_index, c.overridden, c.winning_side, c.winning_index, c.winning
        );
    }
    out
}
