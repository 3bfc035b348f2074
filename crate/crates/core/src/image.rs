//! Image files: a replica's edit history persisted as canonical JSON.
//!
//! The document itself is never stored; it is rebuilt by replaying the history
//! from the empty document every time an image is loaded.

use std::collections::HashSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::document::Document;
use crate::edit::{apply_edit, valid_replica, Edit, EditId};
use crate::scalar::Scalar;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ImageFile {
    pub format_version: u32,
    pub replica: String,
    /// Counter for the next insert id minted by this replica.
    pub counter: u64,
    pub history: Vec<Edit>,
}

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed image at line {line}, column {column}: {message}")]
    Format {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported image format version {found} (this build reads version {FORMAT_VERSION})")]
    Version { found: u64 },
    #[error("history entry {position} (`{edit}`) does not apply: {source}")]
    Replay {
        position: usize,
        edit: Edit,
        #[source]
        source: crate::error::Error,
    },
    #[error("insert id {id} appears more than once in the history")]
    DuplicateId { id: EditId },
    #[error("counter {counter} would reuse id {replica}:{used} already in the history")]
    StaleCounter {
        replica: String,
        counter: u64,
        used: u64,
    },
    #[error("invalid replica tag `{0}`")]
    Replica(String),
}

impl ImageFile {
    pub fn new(replica: &str) -> Result<Self, ImageError> {
        if !valid_replica(replica) {
            return Err(ImageError::Replica(replica.to_string()));
        }
        Ok(ImageFile {
            format_version: FORMAT_VERSION,
            replica: replica.to_string(),
            counter: 1,
            history: Vec::new(),
        })
    }

    /// Mints the next insert id of this replica.
    pub fn fresh_id(&mut self) -> EditId {
        let id = EditId::new(self.replica.clone(), self.counter);
        self.counter += 1;
        id
    }

    /// Peeks at the id [`fresh_id`](Self::fresh_id) would return.
    pub fn next_id(&self) -> EditId {
        EditId::new(self.replica.clone(), self.counter)
    }

    pub fn document<N: Scalar>(&self) -> Result<Document<N>, ImageError> {
        let mut doc = Document::empty();
        for (i, edit) in self.history.iter().enumerate() {
            doc = apply_edit(edit, &doc).map_err(|source| ImageError::Replay {
                position: i + 1,
                edit: edit.clone(),
                source,
            })?;
        }
        Ok(doc)
    }

    /// Checks the replica tag, replay validity and insert id uniqueness.
    pub fn validate(&self) -> Result<(), ImageError> {
        if self.format_version != FORMAT_VERSION {
            return Err(ImageError::Version {
                found: self.format_version.into(),
            });
        }
        if !valid_replica(&self.replica) {
            return Err(ImageError::Replica(self.replica.clone()));
        }
        self.document::<f64>()?;
        let mut seen = HashSet::new();
        for edit in &self.history {
            if let Edit::Ins { id, .. } = edit {
                if !seen.insert(id) {
                    return Err(ImageError::DuplicateId { id: id.clone() });
                }
                if id.replica == self.replica && id.counter >= self.counter {
                    return Err(ImageError::StaleCounter {
                        replica: self.replica.clone(),
                        counter: self.counter,
                        used: id.counter,
                    });
                }
            }
        }
        Ok(())
    }

    /// Canonical serialization: sorted keys, two-space indent, trailing newline.
    pub fn to_canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("image serializes");
        let mut text = serde_json::to_string_pretty(&value).expect("value serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, ImageError> {
        let format = |e: serde_json::Error| ImageError::Format {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        };
        let value: serde_json::Value = serde_json::from_str(text).map_err(format)?;
        match value.get("formatVersion").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(FORMAT_VERSION) => {}
            Some(found) => return Err(ImageError::Version { found }),
            None => {
                return Err(ImageError::Format {
                    line: 1,
                    column: 1,
                    message: "missing integer field `formatVersion`".into(),
                })
            }
        }
        let image: ImageFile = serde_json::from_str(text).map_err(format)?;
        image.validate()?;
        Ok(image)
    }
}

pub fn save_image(path: &Path, image: &ImageFile) -> Result<(), ImageError> {
    fs::write(path, image.to_canonical_json()).map_err(|source| ImageError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_image(path: &Path) -> Result<ImageFile, ImageError> {
    let text = fs::read_to_string(path).map_err(|source| ImageError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ImageFile::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::AtomType::*;

    fn sample() -> ImageFile {
        let mut img = ImageFile::new("A").unwrap();
        let id = img.fresh_id();
        img.history.push(Edit::ins(1, Num, id));
        img
    }

    #[test]
    fn canonical_form() {
        let text = sample().to_canonical_json();
        assert_eq!(
            text,
            r#"{
  "counter": 2,
  "formatVersion": 1,
  "history": [
    {
      "id": "A:1",
      "index": 1,
      "op": "ins",
      "type": "num"
    }
  ],
  "replica": "A"
}
"#
        );
        assert_eq!(ImageFile::from_json(&text).unwrap(), sample());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.json");
        save_image(&path, &sample()).unwrap();
        assert_eq!(load_image(&path).unwrap(), sample());
        assert!(matches!(
            load_image(&dir.path().join("missing.json")),
            Err(ImageError::Io { .. })
        ));
    }

    #[test]
    fn rejects_bad_input() {
        let text = sample().to_canonical_json();
        let truncated = &text[..text.len() / 2];
        assert!(matches!(
            ImageFile::from_json(truncated),
            Err(ImageError::Format { line, .. }) if line > 1
        ));
        let future = text.replace("\"formatVersion\": 1", "\"formatVersion\": 99");
        assert!(matches!(
            ImageFile::from_json(&future),
            Err(ImageError::Version { found: 99 })
        ));
        let broken = text.replace("\"index\": 1", "\"index\": 2");
        assert!(matches!(
            ImageFile::from_json(&broken),
            Err(ImageError::Replay { position: 1, .. })
        ));
        let stale = text.replace("\"counter\": 2", "\"counter\": 1");
        assert!(matches!(
            ImageFile::from_json(&stale),
            Err(ImageError::StaleCounter { .. })
        ));
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let mut img = sample();
        img.history.push(Edit::ins(1, Str, EditId::new("A", 1)));
        assert!(matches!(img.validate(), Err(ImageError::DuplicateId { .. })));
    }
}
