use std::fmt;
use std::fs;
use std::path::Path;

use entcap_core::conllu::read_conllu;
use entcap_core::metrics::{evaluate, EvalPair, EvalReport};
use entcap_core::pipeline::{
    candidates_corpus, caption_records, eval_pairs, fill_corpus, index_posts, templatize_corpus, with_jobs,
    StageCounts,
};
use entcap_core::qcv::{random_instance, solve, solve_bruteforce, QcvInstance, RandomInstanceSpec, SolveOptions};
use entcap_core::records::{
    read_jsonl, write_json, write_jsonl, CandidateRow, CaptionOut, CaptionRow, MentionRow, PostRow, QueryRow,
    RecordError, ReferenceRow, TemplateRow,
};
use entcap_core::{PipelineConfig, PipelineError, TypeSystem};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{CaptionInputs, Command, Common, CorpusInputs, Overrides};

#[derive(Debug)]
pub enum CliError {
    Pipeline(PipelineError),
    Mismatch { checked: usize, failed: usize },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Pipeline(e) => e.exit_code() as u8,
            CliError::Mismatch { .. } => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Pipeline(e) => write!(f, "{e}"),
            CliError::Mismatch { checked, failed } => {
                write!(f, "{failed} of {checked} instances disagree with the brute-force solver")
            }
        }
    }
}

impl<E: Into<PipelineError>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Pipeline(e.into())
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(command: Command, common: &Common) -> Result<()> {
    let cfg = load_config(common)?;
    let jobs = common.jobs;
    match command {
        Command::Templatize { inputs, types, out } => {
            let ts = TypeSystem::load(&types)?;
            let rows = templatize(&inputs, &ts, &cfg, jobs)?;
            write_jsonl(&out, &rows)?;
        }
        Command::Candidates { corpus, types, out } => {
            let ts = TypeSystem::load(&types)?;
            let rows = candidates(&corpus, &ts, &cfg, jobs)?;
            write_jsonl(&out, &rows)?;
        }
        Command::Fill {
            templates,
            corpus,
            types,
            out,
        } => {
            let ts = TypeSystem::load(&types)?;
            let templates: Vec<TemplateRow> = read_jsonl(&templates)?;
            let rows = fill(&templates, &corpus, &ts, &cfg, jobs)?;
            write_jsonl(&out, &rows)?;
        }
        Command::Eval {
            captions,
            references,
            pairs,
            out,
        } => {
            let report = match (captions, references, pairs) {
                (Some(c), Some(r), _) => {
                    let captions: Vec<CaptionOut> = read_jsonl(&c)?;
                    eval(&captions, &r, &cfg)?
                }
                (_, _, Some(p)) => {
                    let pairs: Vec<EvalPair> = read_jsonl(&p)?;
                    let report = evaluate(&pairs, &cfg.eval_config()).map_err(PipelineError::from)?;
                    eprintln!("eval: pairs={}", report.n);
                    report
                }
                _ => unreachable!("clap enforces an input set"),
            };
            write_json(&out, &report)?;
        }
        Command::Pipeline {
            inputs,
            corpus,
            types,
            references,
            out_dir,
        } => {
            fs::create_dir_all(&out_dir).map_err(|source| RecordError::Io {
                path: out_dir.clone(),
                source,
            })?;
            let ts = TypeSystem::load(&types)?;
            let templates = templatize(&inputs, &ts, &cfg, jobs)?;
            write_jsonl(out_dir.join("templates.jsonl"), &templates)?;
            let cands = candidates(&corpus, &ts, &cfg, jobs)?;
            write_jsonl(out_dir.join("candidates.jsonl"), &cands)?;
            let captions = fill(&templates, &corpus, &ts, &cfg, jobs)?;
            write_jsonl(out_dir.join("captions.jsonl"), &captions)?;
            if let Some(r) = references {
                let report = eval(&captions, &r, &cfg)?;
                write_json(out_dir.join("report.json"), &report)?;
            }
        }
        Command::OracleCheck { instances, random } => oracle_check(instances.as_deref(), random, common.seed, &cfg)?,
    }
    Ok(())
}

fn load_config(common: &Common) -> Result<PipelineConfig> {
    let mut cfg = match &common.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    apply(&mut cfg, &common.overrides);
    cfg.validate()?;
    Ok(cfg)
}

fn apply(cfg: &mut PipelineConfig, o: &Overrides) {
    if let Some(v) = o.window_days {
        cfg.window_days = v;
    }
    if let Some(v) = o.tag_freq_cap {
        cfg.tag_freq_cap = v;
    }
    if let Some(v) = o.top_k {
        cfg.top_k = v;
    }
    if let Some(v) = &o.relations {
        cfg.relation_whitelist = v.iter().map(|s| s.trim().to_string()).collect();
    }
    if let Some(v) = o.allow_duplicates {
        cfg.allow_duplicates = v;
    }
    if let Some(v) = o.beam_width {
        cfg.beam_width = Some(v);
    }
    if let Some(v) = o.min_caption_tokens {
        cfg.min_caption_tokens = v;
    }
    if let Some(v) = o.fuzzy_threshold {
        cfg.fuzzy_threshold = v;
    }
    if let Some(v) = o.max_exhaustive_slots {
        cfg.max_exhaustive_slots = v;
    }
}

fn report_counts(stage: &str, c: StageCounts) {
    eprintln!("{stage}: input={} skipped={} emitted={}", c.input, c.skipped, c.emitted);
}

fn templatize(inputs: &CaptionInputs, ts: &TypeSystem, cfg: &PipelineConfig, jobs: usize) -> Result<Vec<TemplateRow>> {
    let captions: Vec<CaptionRow> = read_jsonl(&inputs.captions)?;
    let parses = read_conllu(&inputs.parses)?;
    let mentions: Vec<MentionRow> = read_jsonl(&inputs.mentions)?;
    let records = caption_records(&captions, &parses, &mentions)?;
    let (rows, counts) = with_jobs(jobs, || templatize_corpus(&records, ts, cfg))??;
    report_counts("templatize", counts);
    Ok(rows)
}

fn candidates(corpus: &CorpusInputs, ts: &TypeSystem, cfg: &PipelineConfig, jobs: usize) -> Result<Vec<CandidateRow>> {
    let queries: Vec<QueryRow> = read_jsonl(&corpus.queries)?;
    let index = index_posts(read_jsonl::<PostRow>(&corpus.posts)?, ts)?;
    let rows = with_jobs(jobs, || candidates_corpus(&queries, &index, ts, cfg))??;
    eprintln!("candidates: queries={} posts={}", rows.len(), index.len());
    Ok(rows)
}

fn fill(
    templates: &[TemplateRow],
    corpus: &CorpusInputs,
    ts: &TypeSystem,
    cfg: &PipelineConfig,
    jobs: usize,
) -> Result<Vec<CaptionOut>> {
    let queries: Vec<QueryRow> = read_jsonl(&corpus.queries)?;
    let index = index_posts(read_jsonl::<PostRow>(&corpus.posts)?, ts)?;
    let (rows, counts, missing) = with_jobs(jobs, || fill_corpus(templates, &queries, &index, ts, cfg))??;
    for id in &missing {
        eprintln!("warning: no query for template {id}");
    }
    report_counts("fill", counts);
    Ok(rows)
}

fn eval(captions: &[CaptionOut], references: &Path, cfg: &PipelineConfig) -> Result<EvalReport> {
    let refs: Vec<ReferenceRow> = read_jsonl(references)?;
    let (pairs, unmatched) = eval_pairs(captions, &refs)?;
    for id in &unmatched {
        eprintln!("warning: unmatched doc_id {id} excluded");
    }
    eprintln!("eval: pairs={} unmatched={}", pairs.len(), unmatched.len());
    if pairs.is_empty() {
        return Err(PipelineError::NoMatches.into());
    }
    Ok(evaluate(&pairs, &cfg.eval_config()).map_err(PipelineError::from)?)
}

fn oracle_check(instances: Option<&Path>, random: Option<usize>, seed: u64, cfg: &PipelineConfig) -> Result<()> {
    let mut all: Vec<QcvInstance> = match instances {
        Some(p) => read_jsonl(p)?,
        None => Vec::new(),
    };
    let n_random = random.unwrap_or(if instances.is_none() { 200 } else { 0 });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = RandomInstanceSpec::default();
    all.extend((0..n_random).map(|_| random_instance(&mut rng, &spec)));

    let opts = SolveOptions {
        beam_width: None,
        ..cfg.solve_options()
    };
    let mut failed = 0;
    for (i, inst) in all.iter().enumerate() {
        let fast = solve(&inst.slots, &inst.pool, &inst.stats, &opts);
        let slow = solve_bruteforce(&inst.slots, &inst.pool, &inst.stats, opts.allow_duplicates);
        let agree = match (&fast, &slow) {
            (Ok(a), Ok(b)) => a.equivalent(b),
            (Err(a), Err(b)) => a == b,
            _ => false,
        };
        if !agree {
            failed += 1;
            eprintln!("mismatch on instance {i}: solve={fast:?} bruteforce={slow:?}");
        }
    }
    println!("oracle-check: instances={} mismatches={failed} seed={seed}", all.len());
    if failed > 0 {
        return Err(CliError::Mismatch {
            checked: all.len(),
            failed,
        });
    }
    Ok(())
}
