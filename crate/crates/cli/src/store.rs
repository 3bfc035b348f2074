//! A pair of image files opened together, with the ancestor they share.

use std::path::{Path, PathBuf};

use thiserror::Error;
use tvc_core::image::{load_image, save_image, ImageError, ImageFile};
use tvc_core::syntax::{self, ParseError};
use tvc_core::{
    merge_all, migrate, migrate_with_dependencies, rebuild, replay, validate_edit, Document, Edit, Error,
    MergePolicy, MigrationReport, Side, VariantPair,
};

use crate::cli::{EXIT_IO, EXIT_USAGE};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Engine(#[from] Error),
    #[error("cannot parse `{input}`: {error}")]
    Parse { input: String, error: ParseError },
    #[error("histories differ at entry {position} (`{a}` vs `{b}`), inside the claimed common prefix")]
    PrefixMismatch { position: usize, a: String, b: String },
    #[error("common prefix of {prefix} entries is longer than a history ({a} and {b} entries)")]
    PrefixTooLong { prefix: usize, a: usize, b: usize },
    #[error("{} already exists", .0.display())]
    Exists(PathBuf),
}

impl StoreError {
    /// Process exit status: 3 for unreadable or malformed files, 2 for
    /// requests that do not fit the current state.
    pub fn exit_code(&self) -> u8 {
        match self {
            StoreError::Image(ImageError::Replica(_)) => EXIT_USAGE,
            StoreError::Image(_) | StoreError::Exists(_) => EXIT_IO,
            _ => EXIT_USAGE,
        }
    }
}

pub type Result<T> = std::result::Result<T, StoreError>;

pub fn init_image(path: &Path, replica: &str) -> Result<ImageFile> {
    if path.exists() {
        return Err(StoreError::Exists(path.to_path_buf()));
    }
    let image = ImageFile::new(replica)?;
    save_image(path, &image)?;
    Ok(image)
}

pub fn parse_edit(text: &str) -> Result<tvc_core::syntax::EditSyntax> {
    syntax::parse(text).map_err(|error| StoreError::Parse {
        input: text.to_string(),
        error,
    })
}

/// Appends one edit written in edit syntax to an image, minting an insert id
/// when none is given. Returns the recorded edit and the new document.
pub fn append_edit(image: &mut ImageFile, text: &str) -> Result<(Edit, Document)> {
    let parsed = parse_edit(text)?;
    let doc = image.document::<f64>()?;
    let mut next = image.clone();
    let edit = parsed.into_edit(|| next.fresh_id());
    if edit.is_id() {
        return Err(Error::IdNotRecordable.into());
    }
    if !validate_edit(&edit, doc.arity()) {
        return Err(Error::InvalidEdit {
            edit,
            arity: doc.arity(),
        }
        .into());
    }
    if let Edit::Ins { id, .. } = &edit {
        if id.replica == next.replica && id.counter >= next.counter {
            next.counter = id.counter + 1;
        }
    }
    next.history.push(edit.clone());
    next.validate()?;
    let doc = edit.apply(&doc)?;
    *image = next;
    Ok((edit, doc))
}

pub struct Workspace {
    pub paths: [PathBuf; 2],
    pub images: [ImageFile; 2],
    /// Length of the history prefix both images share; it replays to the ancestor.
    pub prefix: usize,
}

fn slot(side: Side) -> usize {
    match side {
        Side::A => 0,
        Side::B => 1,
    }
}

impl Workspace {
    pub fn open(a: &Path, b: &Path, prefix: Option<usize>) -> Result<Self> {
        let ws = Workspace {
            paths: [a.to_path_buf(), b.to_path_buf()],
            images: [load_image(a)?, load_image(b)?],
            prefix: prefix.unwrap_or(0),
        };
        ws.check_prefix()?;
        Ok(ws)
    }

    pub fn image(&self, side: Side) -> &ImageFile {
        &self.images[slot(side)]
    }

    fn check_prefix(&self) -> Result<()> {
        let (a, b) = (&self.images[0].history, &self.images[1].history);
        if self.prefix > a.len() || self.prefix > b.len() {
            return Err(StoreError::PrefixTooLong {
                prefix: self.prefix,
                a: a.len(),
                b: b.len(),
            });
        }
        if let Some(k) = (0..self.prefix).find(|&k| a[k] != b[k]) {
            return Err(StoreError::PrefixMismatch {
                position: k + 1,
                a: syntax::print(&a[k]),
                b: syntax::print(&b[k]),
            });
        }
        Ok(())
    }

    /// Ancestor and the two histories after it.
    pub fn split(&self) -> Result<(Document, &[Edit], &[Edit])> {
        self.check_prefix()?;
        let (a, b) = (&self.images[0].history, &self.images[1].history);
        let ancestor = replay(&Document::empty(), &a[..self.prefix])?;
        Ok((ancestor, &a[self.prefix..], &b[self.prefix..]))
    }

    pub fn pair(&self) -> Result<VariantPair> {
        let (ancestor, a, b) = self.split()?;
        Ok(rebuild(&ancestor, a, b)?)
    }

    pub fn save(&self, side: Side) -> Result<()> {
        save_image(&self.paths[slot(side)], &self.images[slot(side)])?;
        Ok(())
    }

    pub fn edit(&mut self, side: Side, text: &str) -> Result<Edit> {
        let mut image = self.images[slot(side)].clone();
        let (edit, _) = append_edit(&mut image, text)?;
        self.images[slot(side)] = image;
        self.save(side)?;
        Ok(edit)
    }

    pub fn migrate(&mut self, side: Side, index: usize, with_deps: bool) -> Result<MigrationReport> {
        let pair = self.pair()?;
        let report = if with_deps {
            migrate_with_dependencies(&pair, side, index)?
        } else {
            migrate(&pair, side, index)?
        };
        self.land(&report)?;
        Ok(report)
    }

    pub fn merge(&mut self, side: Side, policy: MergePolicy) -> Result<MigrationReport> {
        let pair = self.pair()?;
        let report = merge_all(&pair, side, policy)?;
        self.land(&report)?;
        Ok(report)
    }

    /// Appends the edits a migration applied to the receiving image.
    fn land(&mut self, report: &MigrationReport) -> Result<()> {
        let target = report.side.other();
        if report.applied.is_empty() {
            return Ok(());
        }
        let mut image = self.images[slot(target)].clone();
        image.history.extend(report.applied.iter().cloned());
        image.validate()?;
        self.images[slot(target)] = image;
        self.save(target)
    }
}
