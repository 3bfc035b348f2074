//! Typed tuple documents and the `conform` view over them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Declared type of a slot. `Del` marks a tombstone; its only conforming value is null.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AtomType {
    Num,
    Str,
    Bool,
    Del,
}

impl AtomType {
    pub const ALL: [AtomType; 4] = [AtomType::Num, AtomType::Str, AtomType::Bool, AtomType::Del];

    pub fn name(self) -> &'static str {
        match self {
            AtomType::Num => "num",
            AtomType::Str => "str",
            AtomType::Bool => "bool",
            AtomType::Del => "del",
        }
    }
}

impl fmt::Display for AtomType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AtomType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "num" => Ok(AtomType::Num),
            "str" => Ok(AtomType::Str),
            "bool" => Ok(AtomType::Bool),
            "del" => Ok(AtomType::Del),
            other => Err(format!("unknown type `{other}` (expected num, str, bool or del)")),
        }
    }
}

/// A stored value. It keeps its own tag regardless of the slot's declared type.
#[derive(Debug, Clone, PartialEq)]
pub enum Value<N> {
    Number(N),
    Text(String),
    Truth(bool),
    Null,
}

impl<N: Scalar> Value<N> {
    /// The type this value natively conforms to; `Null` conforms only to `del`.
    pub fn native_type(&self) -> AtomType {
        match self {
            Value::Number(_) => AtomType::Num,
            Value::Text(_) => AtomType::Str,
            Value::Truth(_) => AtomType::Bool,
            Value::Null => AtomType::Del,
        }
    }
}

impl<N: Scalar> fmt::Display for Value<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(n) => f.write_str(&n.render()),
            Value::Text(s) => write!(f, "{s:?}"),
            Value::Truth(b) => write!(f, "{b}"),
            Value::Null => f.write_str("null"),
        }
    }
}

/// One position of a document.
#[derive(Debug, Clone, PartialEq)]
pub struct Slot<N> {
    pub value: Value<N>,
    pub ty: AtomType,
}

impl<N> Slot<N> {
    pub fn new(value: Value<N>, ty: AtomType) -> Self {
        Slot { value, ty }
    }

    pub fn tombstone() -> Self {
        Slot {
            value: Value::Null,
            ty: AtomType::Del,
        }
    }
}

/// A typed tuple `(v1: T1 ... vn: Tn)`. Indexes are 1-based and tombstones
/// count toward the arity.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document<N> {
    slots: Vec<Slot<N>>,
}

impl<N: Scalar> Document<N> {
    pub fn empty() -> Self {
        Document { slots: Vec::new() }
    }

    pub fn from_slots(slots: Vec<Slot<N>>) -> Self {
        Document { slots }
    }

    /// A document of null values with the given declared types.
    pub fn from_types(types: &[AtomType]) -> Self {
        Document {
            slots: types.iter().map(|&ty| Slot::new(Value::Null, ty)).collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[Slot<N>] {
        &self.slots
    }

    pub(crate) fn slots_mut(&mut self) -> &mut Vec<Slot<N>> {
        &mut self.slots
    }

    /// Slot at a 1-based index.
    pub fn get(&self, index: usize) -> Option<&Slot<N>> {
        index.checked_sub(1).and_then(|i| self.slots.get(i))
    }

    pub fn types(&self) -> Vec<AtomType> {
        self.slots.iter().map(|s| s.ty).collect()
    }

    pub fn conform(&self) -> ConformedDocument<N> {
        conform(self)
    }
}

impl<N: Scalar> fmt::Display for Document<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, slot) in self.slots.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}:{}", slot.value, slot.ty)?;
        }
        f.write_str(")")
    }
}

/// What a program sees in a slot: a value conforming to the declared type, or
/// the error marker.
#[derive(Debug, Clone, PartialEq)]
pub enum Conformed<N> {
    Value(Value<N>),
    Error,
}

impl<N: Scalar> fmt::Display for Conformed<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Conformed::Value(v) => v.fmt(f),
            Conformed::Error => f.write_str("error"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConformedSlot<N> {
    pub display: Conformed<N>,
    pub ty: AtomType,
}

/// Type-conforming view of a document. Never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformedDocument<N> {
    pub slots: Vec<ConformedSlot<N>>,
}

impl<N: Scalar> ConformedDocument<N> {
    pub fn arity(&self) -> usize {
        self.slots.len()
    }

    /// Reads the view back as a stored document; error markers become the
    /// text `"error"`, which no strict conversion accepts.
    pub fn to_document(&self) -> Document<N> {
        Document::from_slots(
            self.slots
                .iter()
                .map(|s| {
                    let value = match &s.display {
                        Conformed::Value(v) => v.clone(),
                        Conformed::Error => Value::Text("error".to_string()),
                    };
                    Slot::new(value, s.ty)
                })
                .collect(),
        )
    }
}

impl<N: Scalar> fmt::Display for ConformedDocument<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, slot) in self.slots.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}:{}", slot.display, slot.ty)?;
        }
        f.write_str(")")
    }
}

pub fn default_value<N: Scalar>(ty: AtomType) -> Value<N> {
    match ty {
        AtomType::Num => Value::Number(N::zero()),
        AtomType::Str => Value::Text(String::new()),
        AtomType::Bool => Value::Truth(false),
        AtomType::Del => Value::Null,
    }
}

/// Converts a stored value for display under `ty`.
pub fn convert_value<N: Scalar>(value: &Value<N>, ty: AtomType) -> Conformed<N> {
    use Value::*;
    let converted = match (value, ty) {
        (_, AtomType::Del) => Some(Null),
        (Null, ty) => Some(default_value(ty)),
        (Number(_), AtomType::Num) | (Text(_), AtomType::Str) | (Truth(_), AtomType::Bool) => {
            Some(value.clone())
        }
        (Number(n), AtomType::Str) => Some(Text(n.render())),
        (Text(s), AtomType::Num) => N::parse_decimal(s).map(Number),
        (Truth(b), AtomType::Str) => Some(Text(b.to_string())),
        (Text(s), AtomType::Bool) => match s.as_str() {
            "true" => Some(Truth(true)),
            "false" => Some(Truth(false)),
            _ => None,
        },
        (Number(_), AtomType::Bool) | (Truth(_), AtomType::Num) => None,
    };
    converted.map_or(Conformed::Error, Conformed::Value)
}

pub fn conform<N: Scalar>(doc: &Document<N>) -> ConformedDocument<N> {
    ConformedDocument {
        slots: doc
            .slots()
            .iter()
            .map(|s| ConformedSlot {
                display: convert_value(&s.value, s.ty),
                ty: s.ty,
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type V = Value<f64>;

    #[test]
    fn defaults() {
        assert_eq!(default_value::<f64>(AtomType::Num), V::Number(0.0));
        assert_eq!(default_value::<f64>(AtomType::Str), V::Text(String::new()));
        assert_eq!(default_value::<f64>(AtomType::Bool), V::Truth(false));
        assert_eq!(default_value::<f64>(AtomType::Del), V::Null);
    }

    #[test]
    fn conversion_table() {
        let text = |s: &str| V::Text(s.to_string());
        let ok = |v: V| Conformed::Value(v);
        assert_eq!(convert_value(&text("42"), AtomType::Num), ok(V::Number(42.0)));
        assert_eq!(convert_value(&text("x"), AtomType::Num), Conformed::Error);
        assert_eq!(convert_value(&V::Null, AtomType::Bool), ok(V::Truth(false)));
        assert_eq!(convert_value(&V::Number(2.5), AtomType::Str), ok(text("2.5")));
        assert_eq!(convert_value(&V::Truth(true), AtomType::Str), ok(text("true")));
        assert_eq!(convert_value(&text("false"), AtomType::Bool), ok(V::Truth(false)));
        assert_eq!(convert_value(&text("False"), AtomType::Bool), Conformed::Error);
        assert_eq!(convert_value(&V::Number(1.0), AtomType::Bool), Conformed::Error);
        assert_eq!(convert_value(&V::Truth(true), AtomType::Num), Conformed::Error);
        assert_eq!(convert_value(&V::Number(1.0), AtomType::Del), ok(V::Null));
    }

    #[test]
    fn conform_examples() {
        let d = Document::from_slots(vec![Slot::new(V::Number(5.0), AtomType::Num)]);
        assert_eq!(d.conform().to_string(), "(5:num)");

        let d = Document::from_slots(vec![Slot::new(V::Text("hi".into()), AtomType::Num)]);
        assert_eq!(d.conform().slots[0].display, Conformed::Error);

        let d = Document::from_slots(vec![Slot::new(V::Text("hi".into()), AtomType::Del)]);
        let c = d.conform();
        assert_eq!(c.slots[0].display, Conformed::Value(V::Null));
        // the stored value survives under the mask
        assert_eq!(d.slots()[0].value, V::Text("hi".into()));
    }

    #[test]
    fn atom_type_names_round_trip() {
        for t in AtomType::ALL {
            assert_eq!(t.name().parse::<AtomType>().unwrap(), t);
        }
        assert!("int".parse::<AtomType>().is_err());
    }
}
