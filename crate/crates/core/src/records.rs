//! JSONL record layouts for every pipeline stage.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::candidates::{CandidatePool, CooccurrenceStats, Gazetteer, Post, PostMention, Query};
use crate::qcv::SlotRef;
use crate::realize::ImageMeta;
use crate::templatize::{EntityMention, Template};
use crate::typesys::CoarseType;

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Format { path: String, line: usize, msg: String },
}

/// Reads one JSON value per non-blank line.
pub fn read_jsonl<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>, RecordError> {
    let path = path.as_ref();
    let io = |source| RecordError::Io {
        path: path.to_path_buf(),
        source,
    };
    let reader = BufReader::new(File::open(path).map_err(io)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|e| RecordError::Format {
            path: path.display().to_string(),
            line: i + 1,
            msg: e.to_string(),
        })?;
        out.push(value);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<(), RecordError> {
    let path = path.as_ref();
    let io = |source| RecordError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for row in rows {
        serde_json::to_writer(&mut w, row).map_err(|e| io(e.into()))?;
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<(), RecordError> {
    let path = path.as_ref();
    let io = |source| RecordError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io(e.into()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(io)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptionRow {
    pub doc_id: String,
    pub caption: String,
}

/// Token span over the caption's CoNLL-U parse (1-based, inclusive).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionRow {
    pub doc_id: String,
    pub start: usize,
    pub end: usize,
    pub surface: String,
    pub coarse: CoarseType,
}

impl From<&MentionRow> for EntityMention {
    fn from(m: &MentionRow) -> Self {
        EntityMention {
            start: m.start,
            end: m.end,
            surface: m.surface.clone(),
            coarse: m.coarse,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateRow {
    pub doc_id: String,
    pub items: Template,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostRow {
    pub id: String,
    pub tags: Vec<String>,
    pub taken_date: NaiveDate,
    #[serde(default)]
    pub text: String,
    /// Detected with the gazetteer when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mentions: Option<Vec<PostMention>>,
}

impl PostRow {
    pub fn into_post(self, gazetteer: &Gazetteer) -> Post {
        let mentions = match self.mentions {
            Some(m) => m,
            None => gazetteer.find(&self.text),
        };
        Post::new(self.id, self.tags, self.taken_date, self.text, mentions)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRow {
    pub doc_id: String,
    pub tags: Vec<String>,
    pub taken_date: NaiveDate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exif_date: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geo: Option<(f64, f64)>,
}

impl QueryRow {
    pub fn query(&self) -> Query {
        Query::new(Some(self.doc_id.clone()), &self.tags, self.taken_date)
    }

    pub fn meta(&self) -> ImageMeta {
        ImageMeta {
            exif_date: self.exif_date,
            geo: self.geo,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRow {
    pub doc_id: String,
    /// Ids of the retrieved context posts.
    pub context: Vec<String>,
    pub pool: CandidatePool,
    pub stats: CooccurrenceStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptionOut {
    pub doc_id: String,
    pub caption: String,
    pub omega: f64,
    pub unfillable: Vec<SlotRef>,
    /// Chosen names in slot order.
    #[serde(default)]
    pub entities: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub doc_id: String,
    pub references: Vec<String>,
    #[serde(default)]
    pub entities: Vec<String>,
}
