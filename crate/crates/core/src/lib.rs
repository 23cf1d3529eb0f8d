//! Entity-aware caption templates.
//!
//! Captions are compressed along their dependency parses and generalized into
//! typed slot templates ([`templatize`]). Slots are filled by collective
//! validation over co-occurrence graphs of candidates mined from tagged posts
//! ([`candidates`], [`qcv`]), rendered ([`realize`]) and scored ([`metrics`]).

pub mod candidates;
pub mod config;
pub mod conllu;
pub mod metrics;
pub mod pipeline;
pub mod qcv;
pub mod realize;
pub mod records;
pub mod templatize;
pub mod typesys;

pub use candidates::{
    CandidateEntity, CandidatePool, CooccurrenceStats, Gazetteer, Post, PostIndex, PostMention, Query,
};
pub use config::PipelineConfig;
pub use metrics::{EvalPair, EvalReport};
pub use pipeline::PipelineError;
pub use qcv::{Assignment, QcvInstance, SlotRef, SolveOptions};
pub use realize::ImageMeta;
pub use templatize::{EntityMention, ParsedCaption, Template, TemplateItem, Token};
pub use typesys::{CoarseType, SlotType, TypeSystem};
