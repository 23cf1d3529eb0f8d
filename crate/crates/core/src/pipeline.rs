//! Corpus-level stages shared by the CLI subcommands.
//!
//! Every stage returns rows sorted by `doc_id`, whatever the worker count.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use thiserror::Error;

use crate::candidates::{
    cooccurrence, extract_candidates, retrieve_context, CandidateError, Gazetteer, PostIndex,
};
use crate::config::{ConfigError, PipelineConfig};
use crate::conllu::{ConlluError, ConlluSentence};
use crate::metrics::{evaluate, tokenize, EvalPair, EvalReport, MetricsError};
use crate::qcv::{solve, QcvError, SlotRef};
use crate::realize::{append_date, fill, RealizeError};
use crate::records::{
    CandidateRow, CaptionOut, CaptionRow, MentionRow, PostRow, QueryRow, RecordError, ReferenceRow, TemplateRow,
};
use crate::templatize::{templatize_one, BuildError, CaptionRecord, EntityMention, ParsedCaption, StructureError};
use crate::typesys::{TypeMapError, TypeSystem};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error(transparent)]
    Conllu(#[from] ConlluError),
    #[error(transparent)]
    TypeMap(#[from] TypeMapError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Corpus(#[from] CandidateError),
    #[error("duplicate doc_id {doc_id} in {what}")]
    DuplicateDoc { what: &'static str, doc_id: String },
    #[error("caption {0} has no parse")]
    MissingParse(String),
    #[error("caption {doc_id}: {source}")]
    Structure {
        doc_id: String,
        #[source]
        source: StructureError,
    },
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("{doc_id}: {source}")]
    Solve {
        doc_id: String,
        #[source]
        source: QcvError,
    },
    #[error("{doc_id}: {source}")]
    Realize {
        doc_id: String,
        #[source]
        source: RealizeError,
    },
    #[error("no caption matched a reference doc_id")]
    NoMatches,
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("worker pool: {0}")]
    Threads(String),
}

impl PipelineError {
    /// 2 for malformed or missing input, 1 for operational failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Solve { .. }
            | PipelineError::Realize { .. }
            | PipelineError::NoMatches
            | PipelineError::Metrics(_)
            | PipelineError::Threads(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StageCounts {
    pub input: usize,
    pub skipped: usize,
    pub emitted: usize,
}

/// Runs `f` on a pool of `jobs` workers (`0` lets rayon decide).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T, PipelineError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| PipelineError::Threads(e.to_string()))?;
    Ok(pool.install(f))
}

fn unique_index<'a, T>(
    rows: &'a [T],
    key: impl Fn(&T) -> &str,
    what: &'static str,
) -> Result<HashMap<&'a str, &'a T>, PipelineError> {
    let mut map = HashMap::with_capacity(rows.len());
    for r in rows {
        if map.insert(key(r), r).is_some() {
            return Err(PipelineError::DuplicateDoc {
                what,
                doc_id: key(r).to_string(),
            });
        }
    }
    Ok(map)
}

/// Joins captions with their parses and mention spans.
pub fn caption_records(
    captions: &[CaptionRow],
    parses: &[ConlluSentence],
    mentions: &[MentionRow],
) -> Result<Vec<CaptionRecord>, PipelineError> {
    unique_index(captions, |c| &c.doc_id, "captions")?;
    let by_doc = unique_index(parses, |p| &p.doc_id, "parses")?;
    let mut spans: HashMap<&str, Vec<EntityMention>> = HashMap::new();
    for m in mentions {
        spans.entry(&m.doc_id).or_default().push(m.into());
    }
    let mut records = Vec::with_capacity(captions.len());
    for c in captions {
        let parse = by_doc.get(c.doc_id.as_str()).ok_or_else(|| PipelineError::MissingParse(c.doc_id.clone()))?;
        let parse = ParsedCaption::new(parse.tokens.clone(), spans.remove(c.doc_id.as_str()).unwrap_or_default())
            .map_err(|source| PipelineError::Structure {
                doc_id: c.doc_id.clone(),
                source,
            })?;
        records.push(CaptionRecord {
            doc_id: c.doc_id.clone(),
            raw: c.caption.clone(),
            parse,
        });
    }
    records.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    Ok(records)
}

pub fn templatize_corpus(
    records: &[CaptionRecord],
    ts: &TypeSystem,
    cfg: &PipelineConfig,
) -> Result<(Vec<TemplateRow>, StageCounts), PipelineError> {
    let opts = cfg.templatize_options();
    let built: Vec<_> = records
        .par_iter()
        .map(|r| templatize_one(r, ts, &opts).map(|t| (r.doc_id.clone(), t)))
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    for (doc_id, t) in built {
        if let Some(items) = t {
            rows.push(TemplateRow { doc_id, items });
        }
    }
    rows.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    let counts = StageCounts {
        input: records.len(),
        skipped: records.len() - rows.len(),
        emitted: rows.len(),
    };
    Ok((rows, counts))
}

/// Builds the post index, running the gazetteer over posts without mentions.
pub fn index_posts(posts: Vec<PostRow>, ts: &TypeSystem) -> Result<PostIndex, PipelineError> {
    let gazetteer = Gazetteer::new(ts);
    let posts = posts.into_iter().map(|p| p.into_post(&gazetteer)).collect();
    Ok(PostIndex::new(posts)?)
}

pub fn candidates_for(query: &QueryRow, index: &PostIndex, ts: &TypeSystem, cfg: &PipelineConfig) -> CandidateRow {
    let context = retrieve_context(&query.query(), index, cfg.window_days, cfg.tag_freq_cap);
    CandidateRow {
        doc_id: query.doc_id.clone(),
        context: context.iter().map(|p| p.id.clone()).collect(),
        pool: extract_candidates(context.iter().copied(), ts, cfg.top_k),
        stats: cooccurrence(context.iter().copied()),
    }
}

pub fn candidates_corpus(
    queries: &[QueryRow],
    index: &PostIndex,
    ts: &TypeSystem,
    cfg: &PipelineConfig,
) -> Result<Vec<CandidateRow>, PipelineError> {
    unique_index(queries, |q| &q.doc_id, "queries")?;
    let mut rows: Vec<CandidateRow> = queries.par_iter().map(|q| candidates_for(q, index, ts, cfg)).collect();
    rows.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    Ok(rows)
}

pub fn fill_one(
    template: &TemplateRow,
    query: &QueryRow,
    index: &PostIndex,
    ts: &TypeSystem,
    cfg: &PipelineConfig,
) -> Result<CaptionOut, PipelineError> {
    let cands = candidates_for(query, index, ts, cfg);
    let slots = SlotRef::from_template(&template.items);
    let assignment = solve(&slots, &cands.pool, &cands.stats, &cfg.solve_options()).map_err(|source| {
        PipelineError::Solve {
            doc_id: template.doc_id.clone(),
            source,
        }
    })?;
    let text = fill(&template.items, &assignment).map_err(|source| PipelineError::Realize {
        doc_id: template.doc_id.clone(),
        source,
    })?;
    Ok(CaptionOut {
        doc_id: template.doc_id.clone(),
        caption: append_date(&text, &query.meta()),
        omega: assignment.score,
        unfillable: assignment.unfillable,
        entities: assignment.chosen.into_values().map(|c| c.name).collect(),
    })
}

/// Fills every template that has a query with the same `doc_id`; the rest
/// are counted as skipped.
pub fn fill_corpus(
    templates: &[TemplateRow],
    queries: &[QueryRow],
    index: &PostIndex,
    ts: &TypeSystem,
    cfg: &PipelineConfig,
) -> Result<(Vec<CaptionOut>, StageCounts, Vec<String>), PipelineError> {
    unique_index(templates, |t| &t.doc_id, "templates")?;
    let by_doc = unique_index(queries, |q| &q.doc_id, "queries")?;
    let mut missing = Vec::new();
    let mut jobs = Vec::new();
    for t in templates {
        match by_doc.get(t.doc_id.as_str()) {
            Some(q) => jobs.push((t, *q)),
            None => missing.push(t.doc_id.clone()),
        }
    }
    let results: Vec<Result<CaptionOut, PipelineError>> =
        jobs.par_iter().map(|(t, q)| fill_one(t, q, index, ts, cfg)).collect();
    let mut rows = Vec::with_capacity(results.len());
    let mut first_err: Option<PipelineError> = None;
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            // Report the failing document with the smallest doc_id.
            Err(e) => {
                let id = err_doc(&e);
                if first_err.as_ref().is_none_or(|f| id < err_doc(f)) {
                    first_err = Some(e);
                }
            }
        }
    }
    if let Some(e) = first_err {
        return Err(e);
    }
    rows.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    missing.sort();
    let counts = StageCounts {
        input: templates.len(),
        skipped: missing.len(),
        emitted: rows.len(),
    };
    Ok((rows, counts, missing))
}

fn err_doc(e: &PipelineError) -> &str {
    match e {
        PipelineError::Solve { doc_id, .. } | PipelineError::Realize { doc_id, .. } => doc_id,
        _ => "",
    }
}

/// Pairs captions with references by `doc_id`. Returns the pairs (sorted)
/// and the doc_ids present on only one side.
pub fn eval_pairs(captions: &[CaptionOut], references: &[ReferenceRow]) -> Result<(Vec<EvalPair>, Vec<String>), PipelineError> {
    unique_index(captions, |c| &c.doc_id, "captions")?;
    let refs = unique_index(references, |r| &r.doc_id, "references")?;
    let mut pairs = BTreeMap::new();
    let mut unmatched = Vec::new();
    for c in captions {
        match refs.get(c.doc_id.as_str()) {
            Some(r) => {
                pairs.insert(
                    c.doc_id.clone(),
                    EvalPair {
                        doc_id: c.doc_id.clone(),
                        candidate: tokenize(&c.caption),
                        references: r.references.iter().map(|s| tokenize(s)).collect(),
                        cand_entities: c.entities.clone(),
                        ref_entities: r.entities.clone(),
                    },
                );
            }
            None => unmatched.push(c.doc_id.clone()),
        }
    }
    for r in references {
        if !pairs.contains_key(&r.doc_id) {
            unmatched.push(r.doc_id.clone());
        }
    }
    unmatched.sort();
    Ok((pairs.into_values().collect(), unmatched))
}

pub fn eval_corpus(
    captions: &[CaptionOut],
    references: &[ReferenceRow],
    cfg: &PipelineConfig,
) -> Result<(EvalReport, Vec<String>), PipelineError> {
    let (pairs, unmatched) = eval_pairs(captions, references)?;
    if pairs.is_empty() {
        return Err(PipelineError::NoMatches);
    }
    Ok((evaluate(&pairs, &cfg.eval_config())?, unmatched))
}
