//! Edit operations and their value semantics.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::document::{AtomType, Document, Slot, Value};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Unique identity of an insert: the replica that created it and a per-replica
/// counter. Serialized as `replica:counter`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EditId {
    pub replica: String,
    pub counter: u64,
}

impl EditId {
    pub fn new(replica: impl Into<String>, counter: u64) -> Self {
        EditId {
            replica: replica.into(),
            counter,
        }
    }
}

/// Replica tags are short, non-empty, and free of `:` and whitespace.
pub fn valid_replica(replica: &str) -> bool {
    !replica.is_empty()
        && replica.len() <= 32
        && replica
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.')
}

impl fmt::Display for EditId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.replica, self.counter)
    }
}

impl FromStr for EditId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (replica, counter) = s
            .rsplit_once(':')
            .ok_or_else(|| format!("edit id `{s}` is not of the form replica:counter"))?;
        if !valid_replica(replica) {
            return Err(format!("invalid replica tag `{replica}`"));
        }
        let counter: u64 = counter
            .parse()
            .map_err(|_| format!("invalid counter `{counter}` in edit id"))?;
        if counter == 0 {
            return Err("edit id counters start at 1".to_string());
        }
        Ok(EditId::new(replica, counter))
    }
}

impl Serialize for EditId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EditId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A structure edit. All indexes are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase", deny_unknown_fields)]
pub enum Edit {
    Id,
    /// Insert a null slot of type `ty` at `index`, shifting indexes `>= index` right.
    Ins {
        index: usize,
        #[serde(rename = "type")]
        ty: AtomType,
        id: EditId,
    },
    /// Change the declared type at `index`; the stored value stays.
    Conv {
        index: usize,
        #[serde(rename = "type")]
        ty: AtomType,
    },
    /// Copy slot `source` over slot `target` and tombstone `source`.
    Move { target: usize, source: usize },
}

impl Edit {
    pub fn ins(index: usize, ty: AtomType, id: EditId) -> Edit {
        Edit::Ins { index, ty, id }
    }

    pub fn conv(index: usize, ty: AtomType) -> Edit {
        Edit::Conv { index, ty }
    }

    pub fn mv(target: usize, source: usize) -> Edit {
        Edit::Move { target, source }
    }

    pub fn is_id(&self) -> bool {
        matches!(self, Edit::Id)
    }

    /// Arity of the result when applied to a document of arity `arity`.
    pub fn result_arity(&self, arity: usize) -> usize {
        match self {
            Edit::Ins { .. } => arity + 1,
            _ => arity,
        }
    }

    pub fn apply<N: Scalar>(&self, doc: &Document<N>) -> Result<Document<N>> {
        apply_edit(self, doc)
    }
}

impl fmt::Display for Edit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Edit::Id => f.write_str("id"),
            Edit::Ins { index, ty, id } => write!(f, "ins {index} {ty} @{id}"),
            Edit::Conv { index, ty } => write!(f, "conv {index} {ty}"),
            Edit::Move { target, source } => write!(f, "move {target} {source}"),
        }
    }
}

pub fn validate_edit(edit: &Edit, arity: usize) -> bool {
    match *edit {
        Edit::Id => true,
        Edit::Ins { index, .. } => (1..=arity + 1).contains(&index),
        Edit::Conv { index, .. } => (1..=arity).contains(&index),
        Edit::Move { target, source } => {
            target != source && (1..=arity).contains(&target) && (1..=arity).contains(&source)
        }
    }
}

/// Applies an edit, returning a new document.
pub fn apply_edit<N: Scalar>(edit: &Edit, doc: &Document<N>) -> Result<Document<N>> {
    if !validate_edit(edit, doc.arity()) {
        return Err(Error::InvalidEdit {
            edit: edit.clone(),
            arity: doc.arity(),
        });
    }
    let mut out = doc.clone();
    let slots = out.slots_mut();
    match *edit {
        Edit::Id => {}
        Edit::Ins { index, ty, .. } => slots.insert(index - 1, Slot::new(Value::Null, ty)),
        Edit::Conv { index, ty } => slots[index - 1].ty = ty,
        Edit::Move { target, source } => {
            let moved = std::mem::replace(&mut slots[source - 1], Slot::tombstone());
            slots[target - 1] = moved;
        }
    }
    Ok(out)
}

/// Applies a sequence of edits in order.
pub fn replay<'a, N: Scalar>(
    start: &Document<N>,
    edits: impl IntoIterator<Item = &'a Edit>,
) -> Result<Document<N>> {
    edits
        .into_iter()
        .try_fold(start.clone(), |doc, e| apply_edit(e, &doc))
}

/// Every edit valid on a document of the given arity, drawing insert ids from `id`.
pub fn all_valid_edits(arity: usize, id: &EditId) -> Vec<Edit> {
    let mut out = vec![Edit::Id];
    for index in 1..=arity + 1 {
        for ty in AtomType::ALL {
            out.push(Edit::ins(index, ty, id.clone()));
        }
    }
    for index in 1..=arity {
        for ty in AtomType::ALL {
            out.push(Edit::conv(index, ty));
        }
    }
    for target in 1..=arity {
        for source in 1..=arity {
            if target != source {
                out.push(Edit::mv(target, source));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::Slot;
    use AtomType::*;

    type D = Document<f64>;
    type V = Value<f64>;

    fn p() -> EditId {
        EditId::new("A", 1)
    }

    #[test]
    fn validity() {
        assert!(validate_edit(&Edit::Id, 0));
        assert!(validate_edit(&Edit::ins(1, Str, p()), 0));
        assert!(!validate_edit(&Edit::ins(2, Str, p()), 0));
        assert!(!validate_edit(&Edit::mv(2, 2), 3));
        assert!(!validate_edit(&Edit::conv(0, Num), 3));
        assert!(!validate_edit(&Edit::conv(4, Num), 3));
        assert!(validate_edit(&Edit::mv(1, 3), 3));
    }

    #[test]
    fn insert_into_empty() {
        let d = apply_edit(&Edit::ins(1, Str, p()), &D::empty()).unwrap();
        assert_eq!(d, D::from_slots(vec![Slot::new(V::Null, Str)]));
    }

    #[test]
    fn move_copies_and_tombstones() {
        let d = D::from_slots(vec![
            Slot::new(V::Text("a".into()), Str),
            Slot::new(V::Number(5.0), Num),
        ]);
        let out = apply_edit(&Edit::mv(1, 2), &d).unwrap();
        assert_eq!(
            out,
            D::from_slots(vec![Slot::new(V::Number(5.0), Num), Slot::tombstone()])
        );
        // input untouched
        assert_eq!(d.slots()[0].value, V::Text("a".into()));
    }

    #[test]
    fn conv_keeps_value() {
        let d = D::from_slots(vec![Slot::new(V::Text("hi".into()), Str)]);
        let hidden = apply_edit(&Edit::conv(1, Del), &d).unwrap();
        assert_eq!(hidden.conform().to_string(), "(null:del)");
        let back = apply_edit(&Edit::conv(1, Str), &hidden).unwrap();
        assert_eq!(back.conform(), d.conform());
    }

    #[test]
    fn invalid_edit_is_rejected() {
        let err = apply_edit(&Edit::conv(9, Str), &D::from_types(&[Num, Num])).unwrap_err();
        assert!(matches!(err, Error::InvalidEdit { arity: 2, .. }));
    }

    #[test]
    fn edit_id_parsing() {
        assert_eq!("A:1".parse::<EditId>().unwrap(), p());
        assert!("A".parse::<EditId>().is_err());
        assert!("A:0".parse::<EditId>().is_err());
        assert!(":3".parse::<EditId>().is_err());
        assert!("a b:3".parse::<EditId>().is_err());
    }

    #[test]
    fn edit_json_shape() {
        let json = serde_json::to_string(&Edit::ins(1, Num, p())).unwrap();
        assert_eq!(json, r#"{"op":"ins","index":1,"type":"num","id":"A:1"}"#);
        let back: Edit = serde_json::from_str(&json).unwrap();
        assert_eq!(back, Edit::ins(1, Num, p()));
        let mv: Edit = serde_json::from_str(r#"{"op":"move","target":1,"source":2}"#).unwrap();
        assert_eq!(mv, Edit::mv(1, 2));
        assert!(serde_json::from_str::<Edit>(r#"{"op":"conv","index":1}"#).is_err());
    }

    #[test]
    fn exhaustive_arity_rules() {
        // every valid edit applies and changes arity as documented
        let id = p();
        for arity in 0..=3 {
            let d = D::from_types(&vec![Num; arity]);
            for e in all_valid_edits(arity, &id) {
                let out = apply_edit(&e, &d).unwrap();
                assert_eq!(out.arity(), e.result_arity(arity), "{e}");
                if e.is_id() {
                    assert_eq!(out, d);
                }
                if let Edit::Conv { .. } = e {
                    let before: Vec<_> = d.slots().iter().map(|s| &s.value).collect();
                    let after: Vec<_> = out.slots().iter().map(|s| &s.value).collect();
                    assert_eq!(before, after);
                }
            }
        }
    }
}
