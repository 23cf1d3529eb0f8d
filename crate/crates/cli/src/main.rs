use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "entcap", version, about = "Entity-aware caption templates and slot filling")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Flat `key = value` configuration file
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Worker threads (0 = one per core)
    #[arg(long, global = true, default_value_t = 1, value_name = "N")]
    jobs: usize,
    /// Seed for randomized checks
    #[arg(long, global = true, default_value_t = 0, value_name = "N")]
    seed: u64,
    #[command(flatten)]
    overrides: Overrides,
}

/// Per-run overrides of configuration keys.
#[derive(Args, Debug, Clone, Default)]
pub struct Overrides {
    #[arg(long, global = true, value_name = "DAYS")]
    window_days: Option<u32>,
    #[arg(long, global = true, value_name = "N")]
    tag_freq_cap: Option<usize>,
    #[arg(long, global = true, value_name = "K")]
    top_k: Option<usize>,
    /// Comma-separated dependency relations to keep
    #[arg(long, global = true, value_name = "LIST", value_delimiter = ',')]
    relations: Option<Vec<String>>,
    #[arg(long, global = true, value_name = "BOOL")]
    allow_duplicates: Option<bool>,
    #[arg(long, global = true, value_name = "W")]
    beam_width: Option<usize>,
    #[arg(long, global = true, value_name = "N")]
    min_caption_tokens: Option<usize>,
    #[arg(long, global = true, value_name = "X")]
    fuzzy_threshold: Option<f64>,
    #[arg(long, global = true, value_name = "N")]
    max_exhaustive_slots: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct CaptionInputs {
    /// Captions JSONL: {doc_id, caption}
    #[arg(long, value_name = "PATH")]
    captions: PathBuf,
    /// CoNLL-U parses, one sentence per caption (`# doc_id = ...`)
    #[arg(long, value_name = "PATH")]
    parses: PathBuf,
    /// Mention spans JSONL: {doc_id, start, end, surface, coarse}
    #[arg(long, value_name = "PATH")]
    mentions: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct CorpusInputs {
    /// Query images JSONL: {doc_id, tags, taken_date, exif_date?, geo?}
    #[arg(long, value_name = "PATH")]
    queries: PathBuf,
    /// Posts JSONL: {id, tags, taken_date, text, mentions?}
    #[arg(long, value_name = "PATH")]
    posts: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compress and generalize captions into slot templates
    Templatize {
        #[command(flatten)]
        inputs: CaptionInputs,
        /// Type map TSV
        #[arg(long, value_name = "PATH")]
        types: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Retrieve context posts and build candidate pools and statistics
    Candidates {
        #[command(flatten)]
        corpus: CorpusInputs,
        #[arg(long, value_name = "PATH")]
        types: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Fill templates with collectively validated candidates
    Fill {
        /// Templates JSONL: {doc_id, items}
        #[arg(long, value_name = "PATH")]
        templates: PathBuf,
        #[command(flatten)]
        corpus: CorpusInputs,
        #[arg(long, value_name = "PATH")]
        types: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Score captions against references
    Eval {
        /// Captions JSONL as written by `fill`
        #[arg(long, value_name = "PATH", requires = "references", conflicts_with = "pairs")]
        captions: Option<PathBuf>,
        /// References JSONL: {doc_id, references, entities}
        #[arg(long, value_name = "PATH")]
        references: Option<PathBuf>,
        /// Pre-tokenized pairs JSONL: {doc_id, candidate, references, cand_entities, ref_entities}
        #[arg(long, value_name = "PATH", required_unless_present = "captions")]
        pairs: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Run templatize, candidates, fill and (with references) eval
    Pipeline {
        #[command(flatten)]
        inputs: CaptionInputs,
        #[command(flatten)]
        corpus: CorpusInputs,
        #[arg(long, value_name = "PATH")]
        types: PathBuf,
        #[arg(long, value_name = "PATH")]
        references: Option<PathBuf>,
        /// Directory for templates.jsonl, candidates.jsonl, captions.jsonl, report.json
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
    },
    /// Compare the solver with the brute-force reference
    OracleCheck {
        /// Instances JSONL: {slots, pool, stats}
        #[arg(long, value_name = "PATH")]
        instances: Option<PathBuf>,
        /// Number of random instances (default 200 when no file is given)
        #[arg(long, value_name = "N")]
        random: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command, &cli.common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
