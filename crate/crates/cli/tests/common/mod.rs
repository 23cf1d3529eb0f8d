#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

pub fn fx(rel: &str) -> String {
    fixture(rel).display().to_string()
}

pub fn entcap<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entcap"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn jsonl(path: &Path) -> Vec<serde_json::Value> {
    read(path).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

pub fn caption_inputs(dir: &str) -> Vec<String> {
    vec![
        "--captions".into(),
        fx(&format!("{dir}/captions.jsonl")),
        "--parses".into(),
        fx(&format!("{dir}/parses.conllu")),
        "--mentions".into(),
        fx(&format!("{dir}/mentions.jsonl")),
    ]
}

pub fn bundle_inputs() -> Vec<String> {
    vec![
        "--config".into(),
        fx("bundle/pipeline.conf"),
        "--queries".into(),
        fx("bundle/queries.jsonl"),
        "--posts".into(),
        fx("bundle/posts.jsonl"),
        "--types".into(),
        fx("types.tsv"),
    ]
}

pub fn args(parts: &[&[String]]) -> Vec<String> {
    parts.iter().flat_map(|p| p.iter().cloned()).collect()
}

pub fn s(items: &[&str]) -> Vec<String> {
    items.iter().map(|x| x.to_string()).collect()
}
