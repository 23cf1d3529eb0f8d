use std::path::PathBuf;

use entcap_core::conllu::read_conllu;
use entcap_core::pipeline::{caption_records, candidates_for, fill_corpus, index_posts, templatize_corpus, with_jobs};
use entcap_core::qcv::{solve, solve_bruteforce, SlotRef};
use entcap_core::records::{read_jsonl, CaptionRow, MentionRow, PostRow, QueryRow, TemplateRow};
use entcap_core::templatize::{template_vocabulary_size, vocabulary_size, CaptionRecord};
use entcap_core::{PipelineConfig, PostIndex, TypeSystem};

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

fn types() -> TypeSystem {
    TypeSystem::load(fixture("types.tsv")).unwrap()
}

fn records(dir: &str) -> Vec<CaptionRecord> {
    let captions: Vec<CaptionRow> = read_jsonl(fixture(&format!("{dir}/captions.jsonl"))).unwrap();
    let parses = read_conllu(fixture(&format!("{dir}/parses.conllu"))).unwrap();
    let mentions: Vec<MentionRow> = read_jsonl(fixture(&format!("{dir}/mentions.jsonl"))).unwrap();
    caption_records(&captions, &parses, &mentions).unwrap()
}

fn bundle() -> (PipelineConfig, Vec<QueryRow>, PostIndex, Vec<TemplateRow>) {
    let cfg = PipelineConfig::load(fixture("bundle/pipeline.conf")).unwrap();
    let queries: Vec<QueryRow> = read_jsonl(fixture("bundle/queries.jsonl")).unwrap();
    let posts: Vec<PostRow> = read_jsonl(fixture("bundle/posts.jsonl")).unwrap();
    let templates: Vec<TemplateRow> = read_jsonl(fixture("bundle/templates.jsonl")).unwrap();
    (cfg, queries, index_posts(posts, &types()).unwrap(), templates)
}

#[test]
fn champagne_template() {
    let (rows, counts) = templatize_corpus(&records("champagne"), &types(), &PipelineConfig::default()).unwrap();
    assert_eq!(counts.emitted, 1);
    assert_eq!(rows[0].items.to_string(), "<Athlete> pours champagne over <Athlete> .");
}

#[test]
fn worked_example_caption() {
    let (cfg, queries, index, templates) = bundle();
    let (rows, _, missing) = fill_corpus(&templates, &queries, &index, &types(), &cfg).unwrap();
    assert!(missing.is_empty());
    assert_eq!(
        rows[0].caption,
        "Junior doctors holding signs protest against Tories outside Norfolk and Norwich University Hospital in Colney on April 26 2016."
    );
    assert!(rows[0].unfillable.is_empty());
}

#[test]
fn worked_example_is_a_unique_argmax() {
    let (cfg, queries, index, templates) = bundle();
    let q = queries.iter().find(|q| q.doc_id == "nhs-001").unwrap();
    let cands = candidates_for(q, &index, &types(), &cfg);
    let slots = SlotRef::from_template(&templates[0].items);
    let fast = solve(&slots, &cands.pool, &cands.stats, &cfg.solve_options()).unwrap();
    let slow = solve_bruteforce(&slots, &cands.pool, &cands.stats, cfg.allow_duplicates).unwrap();
    assert!(fast.equivalent(&slow));
    assert_eq!(fast.ties, 1);
    let names: Vec<&str> = fast.chosen.values().map(|c| c.name.as_str()).collect();
    assert_eq!(names, ["Junior doctors", "Tories", "Norfolk and Norwich University Hospital", "Colney"]);
    // Same answer with duplicates allowed.
    let dup = solve(&slots, &cands.pool, &cands.stats, &Default::default()).unwrap();
    assert_eq!(dup.chosen, fast.chosen);
}

#[test]
fn corpus_vocabulary_shrinks() {
    let recs = records("corpus");
    assert_eq!(recs.len(), 20);
    let (rows, counts) = templatize_corpus(&recs, &types(), &PipelineConfig::default()).unwrap();
    assert_eq!(counts.input, 20);
    let raw = vocabulary_size(recs.iter().map(|r| r.raw.as_str()));
    let templ = template_vocabulary_size(rows.iter().map(|r| &r.items));
    assert!(templ < raw, "{templ} !< {raw}");
}

#[test]
fn worker_count_does_not_change_output() {
    let recs = records("corpus");
    let cfg = PipelineConfig::default();
    let one = with_jobs(1, || templatize_corpus(&recs, &types(), &cfg)).unwrap().unwrap();
    let four = with_jobs(4, || templatize_corpus(&recs, &types(), &cfg)).unwrap().unwrap();
    assert_eq!(one, four);
}
