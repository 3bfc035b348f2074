//! Textual edit syntax: `ins <i> <type> [@replica:counter]`, `conv <i> <type>`,
//! `move <target> <source>` and `id`.

use std::fmt;

use crate::document::AtomType;
use crate::edit::{Edit, EditId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// 1-based character column the error points at.
    pub column: usize,
    pub message: String,
}

impl ParseError {
    /// The input with a caret under the offending column.
    pub fn caret(&self, input: &str) -> String {
        format!("{input}\n{}^ {}", " ".repeat(self.column.saturating_sub(1)), self.message)
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

/// A parsed edit. An insert written without an id has `id: None`; the store
/// assigns one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EditSyntax {
    Id,
    Ins {
        index: usize,
        ty: AtomType,
        id: Option<EditId>,
    },
    Conv {
        index: usize,
        ty: AtomType,
    },
    Move {
        target: usize,
        source: usize,
    },
}

impl EditSyntax {
    /// Completes the edit, drawing an insert id from `fresh` if none was written.
    pub fn into_edit(self, fresh: impl FnOnce() -> EditId) -> Edit {
        match self {
            EditSyntax::Id => Edit::Id,
            EditSyntax::Ins { index, ty, id } => Edit::ins(index, ty, id.unwrap_or_else(fresh)),
            EditSyntax::Conv { index, ty } => Edit::conv(index, ty),
            EditSyntax::Move { target, source } => Edit::mv(target, source),
        }
    }
}

impl From<&Edit> for EditSyntax {
    fn from(e: &Edit) -> Self {
        match e.clone() {
            Edit::Id => EditSyntax::Id,
            Edit::Ins { index, ty, id } => EditSyntax::Ins {
                index,
                ty,
                id: Some(id),
            },
            Edit::Conv { index, ty } => EditSyntax::Conv { index, ty },
            Edit::Move { target, source } => EditSyntax::Move { target, source },
        }
    }
}

impl fmt::Display for EditSyntax {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EditSyntax::Id => f.write_str("id"),
            EditSyntax::Ins { index, ty, id: None } => write!(f, "ins {index} {ty}"),
            EditSyntax::Ins {
                index,
                ty,
                id: Some(id),
            } => write!(f, "ins {index} {ty} @{id}"),
            EditSyntax::Conv { index, ty } => write!(f, "conv {index} {ty}"),
            EditSyntax::Move { target, source } => write!(f, "move {target} {source}"),
        }
    }
}

/// Short form used in listings: inserts without their id.
pub fn print_short(e: &Edit) -> String {
    match e {
        Edit::Ins { index, ty, .. } => format!("ins {index} {ty}"),
        other => other.to_string(),
    }
}

/// Full form; parses back to the same edit.
pub fn print(e: &Edit) -> String {
    e.to_string()
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(input: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (col, (byte, ch)) in input.char_indices().enumerate() {
        if ch.is_whitespace() {
            if let Some((b, c)) = start.take() {
                out.push(Token {
                    text: &input[b..byte],
                    column: c,
                });
            }
        } else if start.is_none() {
            start = Some((byte, col + 1));
        }
    }
    if let Some((b, c)) = start {
        out.push(Token {
            text: &input[b..],
            column: c,
        });
    }
    out
}

pub fn parse(input: &str) -> Result<EditSyntax, ParseError> {
    let toks = tokens(input);
    let end = input.chars().count() + 1;
    let err = |column, message: String| ParseError { column, message };
    let Some(op) = toks.first() else {
        return Err(err(1, "expected an edit: ins, conv, move or id".into()));
    };

    let arg = |k: usize, what: &str| -> Result<&Token<'_>, ParseError> {
        toks.get(k).ok_or_else(|| err(end, format!("expected {what}")))
    };
    let index = |k: usize, what: &str| -> Result<usize, ParseError> {
        let t = arg(k, what)?;
        match t.text.parse::<usize>() {
            Ok(v) if v >= 1 => Ok(v),
            _ => Err(err(t.column, format!("expected {what} (a positive integer), found `{}`", t.text))),
        }
    };
    let ty = |k: usize| -> Result<AtomType, ParseError> {
        let t = arg(k, "a type")?;
        t.text.parse().map_err(|m| err(t.column, m))
    };

    let (edit, used) = match op.text {
        "id" => (EditSyntax::Id, 1),
        "ins" => {
            let index = index(1, "an index")?;
            let ty = ty(2)?;
            match toks.get(3) {
                Some(t) if t.text.starts_with('@') => {
                    let id = t.text[1..]
                        .parse()
                        .map_err(|m| err(t.column + 1, m))?;
                    (EditSyntax::Ins { index, ty, id: Some(id) }, 4)
                }
                _ => (EditSyntax::Ins { index, ty, id: None }, 3),
            }
        }
        "conv" => (
            EditSyntax::Conv {
                index: index(1, "an index")?,
                ty: ty(2)?,
            },
            3,
        ),
        "move" => {
            let target = index(1, "a target index")?;
            let source = index(2, "a source index")?;
            if target == source {
                return Err(err(toks[2].column, "a move needs distinct target and source".into()));
            }
            (EditSyntax::Move { target, source }, 3)
        }
        other => {
            return Err(err(
                op.column,
                format!("unknown operation `{other}` (expected ins, conv, move or id)"),
            ))
        }
    };
    if let Some(extra) = toks.get(used) {
        return Err(err(extra.column, format!("unexpected `{}`", extra.text)));
    }
    Ok(edit)
}
