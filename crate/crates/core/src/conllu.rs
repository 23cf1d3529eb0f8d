//! Minimal CoNLL-U reader.
//!
//! Only ID, FORM, HEAD and DEPREL are interpreted; the remaining columns are
//! kept verbatim. Multiword-token ranges (`3-4`) and empty nodes (`5.1`) are
//! skipped. A sentence's identifier comes from a `# doc_id = ...` comment,
//! falling back to `# sent_id = ...` and then to its 1-based ordinal.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::templatize::Token;

#[derive(Debug, Error)]
pub enum ConlluError {
    #[error("{path}:{line}: {msg}")]
    Format {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConlluSentence {
    pub doc_id: String,
    /// Line of the first token, for error reporting downstream.
    pub line: usize,
    pub tokens: Vec<Token>,
    /// Columns LEMMA, UPOS, XPOS, FEATS, DEPS, MISC per token.
    pub extra: Vec<[String; 6]>,
}

pub fn read_conllu(path: impl AsRef<Path>) -> Result<Vec<ConlluSentence>, ConlluError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ConlluError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_conllu(&text, &path.display().to_string())
}

pub fn parse_conllu(text: &str, origin: &str) -> Result<Vec<ConlluSentence>, ConlluError> {
    let mut out = Vec::new();
    let mut cur = Pending::default();
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let row = raw.trim_end_matches('\r');
        if row.trim().is_empty() {
            cur.flush(&mut out, origin, line)?;
            continue;
        }
        if let Some(comment) = row.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                match key.trim() {
                    "doc_id" => cur.doc_id = Some(value.trim().to_string()),
                    "sent_id" => cur.sent_id = Some(value.trim().to_string()),
                    _ => {}
                }
            }
            continue;
        }
        let err = |msg: String| ConlluError::Format {
            path: origin.to_string(),
            line,
            msg,
        };
        let cols: Vec<&str> = row.split('\t').collect();
        if cols.len() != 10 {
            return Err(err(format!("expected 10 tab-separated columns, found {}", cols.len())));
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let index: usize = cols[0]
            .parse()
            .map_err(|_| err(format!("bad token ID {:?}", cols[0])))?;
        let head: usize = cols[6]
            .parse()
            .map_err(|_| err(format!("bad HEAD {:?}", cols[6])))?;
        if index != cur.tokens.len() + 1 {
            return Err(err(format!("token ID {index} out of sequence")));
        }
        if cur.tokens.is_empty() {
            cur.line = line;
        }
        cur.tokens.push(Token {
            index,
            form: cols[1].to_string(),
            head,
            deprel: cols[7].to_string(),
        });
        cur.extra.push([
            cols[2].to_string(),
            cols[3].to_string(),
            cols[4].to_string(),
            cols[5].to_string(),
            cols[8].to_string(),
            cols[9].to_string(),
        ]);
    }
    cur.flush(&mut out, origin, last_line + 1)?;
    Ok(out)
}

#[derive(Default)]
struct Pending {
    doc_id: Option<String>,
    sent_id: Option<String>,
    line: usize,
    tokens: Vec<Token>,
    extra: Vec<[String; 6]>,
}

impl Pending {
    fn flush(&mut self, out: &mut Vec<ConlluSentence>, origin: &str, line: usize) -> Result<(), ConlluError> {
        let taken = std::mem::take(self);
        if taken.tokens.is_empty() {
            if taken.doc_id.is_some() || taken.sent_id.is_some() {
                return Err(ConlluError::Format {
                    path: origin.to_string(),
                    line,
                    msg: "sentence header without tokens".into(),
                });
            }
            return Ok(());
        }
        let n = taken.tokens.len();
        if let Some(bad) = taken.tokens.iter().find(|t| t.head > n) {
            return Err(ConlluError::Format {
                path: origin.to_string(),
                line: taken.line + bad.index - 1,
                msg: format!("HEAD {} outside sentence of {n} tokens", bad.head),
            });
        }
        let doc_id = taken
            .doc_id
            .or(taken.sent_id)
            .unwrap_or_else(|| (out.len() + 1).to_string());
        out.push(ConlluSentence {
            doc_id,
            line: taken.line,
            tokens: taken.tokens,
            extra: taken.extra,
        });
        Ok(())
    }
}
