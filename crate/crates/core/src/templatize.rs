//! Turning news captions into slot templates.
//!
//! Three stages run in order:
//!
//! 1. [`preprocess`] strips parenthesized asides, keeps the longest sentence
//!    and rejects captions shorter than ten whitespace tokens.
//! 2. [`compress`] walks the dependency tree breadth-first from the root and
//!    keeps a dependent only when its relation is whitelisted and its
//!    governor survived.
//! 3. [`generalize`] replaces each surviving entity mention with a typed slot.
//!
//! Two refinements apply during compression. Tokens inside the same entity
//! mention as their governor follow the governor, so multi-token names are
//! never split by name-internal relations (`nn`, `compound`, `flat`). A
//! sentence-final `.`, `!` or `?` attached to the root is kept as well.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::typesys::{CoarseType, SlotType, TypeSystem};

pub const MIN_CAPTION_TOKENS: usize = 10;

pub const DEFAULT_RELATIONS: [&str; 15] = [
    "nsubj", "obj", "iobj", "dobj", "acomp", "det", "neg", "nsubjpass", "pobj", "predet", "prep", "prt", "vmod",
    "nmod", "cc",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// 1-based position in the sentence.
    pub index: usize,
    pub form: String,
    /// Index of the governor, `0` for the root.
    pub head: usize,
    pub deprel: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMention {
    /// First token index (1-based, inclusive).
    pub start: usize,
    /// Last token index (inclusive).
    pub end: usize,
    pub surface: String,
    pub coarse: CoarseType,
}

impl EntityMention {
    pub fn token_count(&self) -> usize {
        self.end + 1 - self.start
    }

    fn covers(&self, index: usize) -> bool {
        (self.start..=self.end).contains(&index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("parse has no tokens")]
    Empty,
    #[error("token {found} found where {expected} was expected")]
    OutOfSequence { expected: usize, found: usize },
    #[error("token {0} is its own head")]
    SelfLoop(usize),
    #[error("token {index} has head {head} outside the sentence")]
    HeadOutOfRange { index: usize, head: usize },
    #[error("parse has no root")]
    NoRoot,
    #[error("parse has multiple roots: {0:?}")]
    MultipleRoots(Vec<usize>),
    #[error("head links starting at token {0} form a cycle")]
    Cycle(usize),
    #[error("mention {start}..={end} is outside the sentence")]
    MentionOutOfBounds { start: usize, end: usize },
    #[error("mentions {0}..={1} and {2}..={3} overlap")]
    MentionOverlap(usize, usize, usize, usize),
    #[error("mention surface {surface:?} does not match tokens {tokens:?}")]
    MentionSurface { surface: String, tokens: String },
}

/// A caption's tokens with their dependency tree and entity mentions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedCaption {
    pub tokens: Vec<Token>,
    pub mentions: Vec<EntityMention>,
}

impl ParsedCaption {
    pub fn new(tokens: Vec<Token>, mut mentions: Vec<EntityMention>) -> Result<Self, StructureError> {
        mentions.sort_by_key(|m| m.start);
        let p = ParsedCaption { tokens, mentions };
        p.validate()?;
        Ok(p)
    }

    pub fn root(&self) -> usize {
        self.tokens.iter().find(|t| t.head == 0).map(|t| t.index).unwrap_or(0)
    }

    pub fn validate(&self) -> Result<(), StructureError> {
        let n = self.tokens.len();
        if n == 0 {
            return Err(StructureError::Empty);
        }
        for (i, t) in self.tokens.iter().enumerate() {
            if t.index != i + 1 {
                return Err(StructureError::OutOfSequence {
                    expected: i + 1,
                    found: t.index,
                });
            }
            if t.head == t.index {
                return Err(StructureError::SelfLoop(t.index));
            }
            if t.head > n {
                return Err(StructureError::HeadOutOfRange {
                    index: t.index,
                    head: t.head,
                });
            }
        }
        let roots: Vec<usize> = self.tokens.iter().filter(|t| t.head == 0).map(|t| t.index).collect();
        match roots.len() {
            0 => return Err(StructureError::NoRoot),
            1 => {}
            _ => return Err(StructureError::MultipleRoots(roots)),
        }
        // With a single root, every chain must reach it within n steps.
        for t in &self.tokens {
            let mut cur = t.index;
            let mut steps = 0;
            while cur != 0 {
                cur = self.tokens[cur - 1].head;
                steps += 1;
                if steps > n {
                    return Err(StructureError::Cycle(t.index));
                }
            }
        }
        let mut prev: Option<&EntityMention> = None;
        for m in &self.mentions {
            if m.start == 0 || m.start > m.end || m.end > n {
                return Err(StructureError::MentionOutOfBounds {
                    start: m.start,
                    end: m.end,
                });
            }
            if let Some(p) = prev {
                if m.start <= p.end {
                    return Err(StructureError::MentionOverlap(p.start, p.end, m.start, m.end));
                }
            }
            let joined = self.span_text(m.start, m.end);
            let surface = m.surface.split_whitespace().collect::<Vec<_>>().join(" ");
            if joined != surface {
                return Err(StructureError::MentionSurface {
                    surface: m.surface.clone(),
                    tokens: joined,
                });
            }
            prev = Some(m);
        }
        Ok(())
    }

    fn span_text(&self, start: usize, end: usize) -> String {
        self.tokens[start - 1..end]
            .iter()
            .map(|t| t.form.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn forms(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.form.as_str())
    }
}

/// Dependency relations whose dependents survive compression.
///
/// Matching is case-insensitive. A subtyped label such as `nmod:poss`
/// matches when either the full label or its base (`nmod`) is listed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationWhitelist(HashSet<String>);

impl RelationWhitelist {
    pub fn new<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        RelationWhitelist(labels.into_iter().map(|s| s.as_ref().trim().to_lowercase()).collect())
    }

    /// Every label is accepted.
    pub fn all() -> Self {
        RelationWhitelist::new(["*"])
    }

    pub fn contains(&self, deprel: &str) -> bool {
        if self.0.contains("*") {
            return true;
        }
        let label = deprel.to_lowercase();
        if self.0.contains(&label) {
            return true;
        }
        match label.split_once(':') {
            Some((base, _)) => self.0.contains(base),
            None => false,
        }
    }

    pub fn labels(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.0.iter().map(String::as_str).collect();
        v.sort_unstable();
        v
    }
}

impl Default for RelationWhitelist {
    fn default() -> Self {
        RelationWhitelist::new(DEFAULT_RELATIONS)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TemplateItem {
    #[serde(rename = "w")]
    Word(String),
    #[serde(rename = "slot")]
    Slot(SlotType),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Template {
    pub items: Vec<TemplateItem>,
}

impl Template {
    pub fn new(items: Vec<TemplateItem>) -> Option<Self> {
        (!items.is_empty()).then_some(Template { items })
    }

    pub fn slot_count(&self) -> usize {
        self.items.iter().filter(|i| matches!(i, TemplateItem::Slot(_))).count()
    }

    /// Surface tokens: words verbatim, slots as `<Type>`.
    pub fn tokens(&self) -> Vec<String> {
        self.items
            .iter()
            .map(|item| match item {
                TemplateItem::Word(w) => w.clone(),
                TemplateItem::Slot(s) => format!("<{s}>"),
            })
            .collect()
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tokens().join(" "))
    }
}

fn is_sentence_end(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Removes `( ... )` spans. Nested parentheses are removed together with
/// their outermost span; an unmatched `(` is kept as literal text.
pub fn strip_parentheses(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '(' {
            if let Some(close) = matching_close(&chars, i) {
                let next = chars.get(close + 1).copied();
                if next.is_none_or(|c| c.is_whitespace() || c.is_ascii_punctuation()) {
                    while out.ends_with(char::is_whitespace) {
                        out.pop();
                    }
                }
                i = close + 1;
                continue;
            }
        }
        out.push(chars[i]);
        i += 1;
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn matching_close(chars: &[char], open: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (j, &c) in chars.iter().enumerate().skip(open) {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(j);
                }
            }
            _ => {}
        }
    }
    None
}

/// Splits after runs of `.`, `!` or `?` that are followed by whitespace or
/// the end of the text. Sentences keep their terminal punctuation.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut iter = text.char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        if !is_sentence_end(c) {
            continue;
        }
        match iter.peek() {
            Some(&(_, next)) if is_sentence_end(next) => continue,
            Some(&(_, next)) if !next.is_whitespace() => continue,
            _ => {}
        }
        let end = i + c.len_utf8();
        let s = text[start..end].trim();
        if !s.is_empty() {
            out.push(s);
        }
        start = end;
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        out.push(tail);
    }
    out
}

pub fn preprocess(raw: &str) -> Option<String> {
    preprocess_with(raw, MIN_CAPTION_TOKENS)
}

/// Returns `None` when the kept sentence has fewer than `min_tokens`
/// whitespace tokens.
pub fn preprocess_with(raw: &str, min_tokens: usize) -> Option<String> {
    let stripped = strip_parentheses(raw);
    let mut best: Option<(&str, usize)> = None;
    for s in split_sentences(&stripped) {
        let n = s.split_whitespace().count();
        if best.is_none_or(|(_, m)| n > m) {
            best = Some((s, n));
        }
    }
    let (sentence, n) = best?;
    (n >= min_tokens).then(|| sentence.to_string())
}

fn is_terminal_punct(parse: &ParsedCaption, t: &Token, root: usize) -> bool {
    t.index == parse.tokens.len()
        && t.head == root
        && !t.form.is_empty()
        && t.form.chars().all(is_sentence_end)
}

/// Prunes the tree breadth-first from the root. Surviving tokens keep their
/// surface order and are renumbered; mentions survive only when all of their
/// tokens do.
pub fn compress(parse: &ParsedCaption, whitelist: &RelationWhitelist) -> Result<ParsedCaption, StructureError> {
    parse.validate()?;
    let n = parse.tokens.len();
    let root = parse.root();

    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for t in &parse.tokens {
        children[t.head].push(t.index);
    }
    let mut mention_of: Vec<Option<usize>> = vec![None; n + 1];
    for (mi, m) in parse.mentions.iter().enumerate() {
        for slot in &mut mention_of[m.start..=m.end] {
            *slot = Some(mi);
        }
    }

    let mut kept = vec![false; n + 1];
    kept[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(gov) = queue.pop_front() {
        for &dep in &children[gov] {
            let tok = &parse.tokens[dep - 1];
            let same_mention = mention_of[dep].is_some() && mention_of[dep] == mention_of[gov];
            if whitelist.contains(&tok.deprel) || same_mention || is_terminal_punct(parse, tok, root) {
                kept[dep] = true;
                queue.push_back(dep);
            }
        }
    }

    let mut renumber = vec![0usize; n + 1];
    let mut next = 0;
    for i in 1..=n {
        if kept[i] {
            next += 1;
            renumber[i] = next;
        }
    }
    let tokens = parse
        .tokens
        .iter()
        .filter(|t| kept[t.index])
        .map(|t| {
            let mut head = t.head;
            while head != 0 && !kept[head] {
                head = parse.tokens[head - 1].head;
            }
            Token {
                index: renumber[t.index],
                form: t.form.clone(),
                head: renumber[head],
                deprel: t.deprel.clone(),
            }
        })
        .collect();
    let mentions = parse
        .mentions
        .iter()
        .filter(|m| (m.start..=m.end).all(|i| kept[i]))
        .map(|m| EntityMention {
            start: renumber[m.start],
            end: renumber[m.end],
            surface: m.surface.clone(),
            coarse: m.coarse,
        })
        .collect();
    Ok(ParsedCaption { tokens, mentions })
}

/// Each mention becomes one slot typed by [`TypeSystem::resolve_slot_type`].
pub fn generalize(parse: &ParsedCaption, ts: &TypeSystem) -> Template {
    let mut items = Vec::with_capacity(parse.tokens.len());
    let mut i = 1;
    while i <= parse.tokens.len() {
        if let Some(m) = parse.mentions.iter().find(|m| m.covers(i)) {
            items.push(TemplateItem::Slot(ts.resolve_slot_type(&m.surface, m.coarse)));
            i = m.end + 1;
        } else {
            items.push(TemplateItem::Word(parse.tokens[i - 1].form.clone()));
            i += 1;
        }
    }
    Template { items }
}

#[derive(Debug, Clone)]
pub struct TemplatizeOptions {
    pub whitelist: RelationWhitelist,
    pub min_tokens: usize,
}

impl Default for TemplatizeOptions {
    fn default() -> Self {
        TemplatizeOptions {
            whitelist: RelationWhitelist::default(),
            min_tokens: MIN_CAPTION_TOKENS,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CaptionRecord {
    pub doc_id: String,
    pub raw: String,
    pub parse: ParsedCaption,
}

#[derive(Debug, Clone, Default)]
pub struct BuildOutcome {
    pub templates: Vec<(String, Template)>,
    pub skipped: Vec<String>,
}

#[derive(Debug, Error)]
#[error("record {doc_id}: {source}")]
pub struct BuildError {
    pub doc_id: String,
    #[source]
    pub source: StructureError,
}

pub fn templatize_one(
    record: &CaptionRecord,
    ts: &TypeSystem,
    opts: &TemplatizeOptions,
) -> Result<Option<Template>, BuildError> {
    if preprocess_with(&record.raw, opts.min_tokens).is_none() {
        return Ok(None);
    }
    let compressed = compress(&record.parse, &opts.whitelist).map_err(|source| BuildError {
        doc_id: record.doc_id.clone(),
        source,
    })?;
    Ok(Some(generalize(&compressed, ts)))
}

/// Runs preprocess, compress and generalize over a corpus, in input order.
pub fn build_pairs<I>(corpus: I, ts: &TypeSystem, opts: &TemplatizeOptions) -> Result<BuildOutcome, BuildError>
where
    I: IntoIterator<Item = CaptionRecord>,
{
    let mut outcome = BuildOutcome::default();
    for record in corpus {
        match templatize_one(&record, ts, opts)? {
            Some(t) => outcome.templates.push((record.doc_id, t)),
            None => outcome.skipped.push(record.doc_id),
        }
    }
    Ok(outcome)
}

/// Distinct whitespace tokens across `texts`.
pub fn vocabulary_size<'a, I>(texts: I) -> usize
where
    I: IntoIterator<Item = &'a str>,
{
    texts
        .into_iter()
        .flat_map(str::split_whitespace)
        .collect::<HashSet<_>>()
        .len()
}

pub fn template_vocabulary_size<'a, I>(templates: I) -> usize
where
    I: IntoIterator<Item = &'a Template>,
{
    templates.into_iter().flat_map(Template::tokens).collect::<HashSet<_>>().len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tok(index: usize, form: &str, head: usize, deprel: &str) -> Token {
        Token {
            index,
            form: form.into(),
            head,
            deprel: deprel.into(),
        }
    }

    fn mention(start: usize, end: usize, surface: &str, coarse: CoarseType) -> EntityMention {
        EntityMention {
            start,
            end,
            surface: surface.into(),
            coarse,
        }
    }

    #[test]
    fn preprocess_strips_and_keeps_longer_sentence() {
        let raw = "A (C) B. A very long second sentence with twelve informative tokens here today.";
        assert_eq!(
            preprocess(raw).as_deref(),
            Some("A very long second sentence with twelve informative tokens here today.")
        );
    }

    #[test]
    fn preprocess_token_floor() {
        assert_eq!(preprocess("one two three four five six seven eight nine"), None);
        assert!(preprocess("one two three four five six seven eight nine ten").is_some());
    }

    #[test]
    fn preprocess_tie_keeps_first() {
        let a = "w1 w2 w3 w4 w5 w6 w7 w8 w9 w10 w11 first.";
        let b = "x1 x2 x3 x4 x5 x6 x7 x8 x9 x10 x11 second.";
        assert_eq!(preprocess(&format!("{a} {b}")).as_deref(), Some(a));
    }

    #[test]
    fn parentheses_variants() {
        assert_eq!(strip_parentheses("Bailly (R) celebrates (L) here."), "Bailly celebrates here.");
        assert_eq!(strip_parentheses("x (a (b) c) y"), "x y");
        assert_eq!(strip_parentheses("Colney (R)."), "Colney.");
        // Unbalanced open parenthesis stays literal.
        assert_eq!(strip_parentheses("a ( b c"), "a ( b c");
        assert_eq!(strip_parentheses("a ) b"), "a ) b");
    }

    #[test]
    fn sentence_split_rules() {
        assert_eq!(split_sentences("One. Two! Three? Four"), ["One.", "Two!", "Three?", "Four"]);
        assert_eq!(split_sentences("U.S. troops"), ["U.S.", "troops"]);
        assert_eq!(split_sentences("v1.2 is out"), ["v1.2 is out"]);
        assert_eq!(split_sentences("Really?! Yes"), ["Really?!", "Yes"]);
    }

    #[test]
    fn chain_with_non_whitelisted_link_keeps_only_root() {
        // root -> (advmod) x -> (nsubj) y
        let p = ParsedCaption::new(
            vec![tok(1, "root", 0, "root"), tok(2, "x", 1, "advmod"), tok(3, "y", 2, "nsubj")],
            vec![],
        )
        .unwrap();
        let c = compress(&p, &RelationWhitelist::default()).unwrap();
        assert_eq!(c.tokens, vec![tok(1, "root", 0, "root")]);
    }

    #[test]
    fn full_whitelist_is_identity() {
        let p = ParsedCaption::new(
            vec![tok(1, "a", 2, "det"), tok(2, "dog", 3, "nsubj"), tok(3, "barks", 0, "root")],
            vec![],
        )
        .unwrap();
        assert_eq!(compress(&p, &RelationWhitelist::default()).unwrap(), p);
        assert_eq!(compress(&p, &RelationWhitelist::all()).unwrap(), p);
    }

    #[test]
    fn whitelist_is_case_insensitive_and_subtype_aware() {
        let wl = RelationWhitelist::default();
        assert!(wl.contains("NSUBJ"));
        assert!(wl.contains("nmod:tmod"));
        assert!(!wl.contains("advmod"));
        assert!(!wl.contains("punct"));
    }

    #[test]
    fn partially_covered_mention_dropped() {
        // "Old Town Hall opened": mention spans 1..=3, but token 1 attaches
        // via amod (cut) to a token outside the mention.
        let p = ParsedCaption::new(
            vec![
                tok(1, "Old", 4, "amod"),
                tok(2, "Town", 3, "nn"),
                tok(3, "Hall", 4, "nsubj"),
                tok(4, "opened", 0, "root"),
            ],
            vec![mention(1, 3, "Old Town Hall", CoarseType::Location)],
        )
        .unwrap();
        let c = compress(&p, &RelationWhitelist::default()).unwrap();
        assert_eq!(c.forms().collect::<Vec<_>>(), ["Town", "Hall", "opened"]);
        assert!(c.mentions.is_empty());
    }

    #[test]
    fn orphans_retarget_to_kept_ancestor() {
        // With an empty whitelist nothing but the root survives; with "nsubj"
        // only, token 3 (nsubj of the cut token 2) is still removed.
        let p = ParsedCaption::new(
            vec![tok(1, "r", 0, "root"), tok(2, "x", 1, "advcl"), tok(3, "y", 2, "nsubj")],
            vec![],
        )
        .unwrap();
        let c = compress(&p, &RelationWhitelist::new(["nsubj"])).unwrap();
        assert_eq!(c.tokens.len(), 1);
    }

    #[test]
    fn structural_errors() {
        let two_roots = ParsedCaption {
            tokens: vec![tok(1, "a", 0, "root"), tok(2, "b", 0, "root")],
            mentions: vec![],
        };
        assert_eq!(
            compress(&two_roots, &RelationWhitelist::default()),
            Err(StructureError::MultipleRoots(vec![1, 2]))
        );
        let cycle = ParsedCaption {
            tokens: vec![tok(1, "a", 0, "root"), tok(2, "b", 3, "dep"), tok(3, "c", 2, "dep")],
            mentions: vec![],
        };
        assert_eq!(cycle.validate(), Err(StructureError::Cycle(2)));
        let self_loop = ParsedCaption {
            tokens: vec![tok(1, "a", 1, "root")],
            mentions: vec![],
        };
        assert_eq!(self_loop.validate(), Err(StructureError::SelfLoop(1)));
        let bad_surface = ParsedCaption::new(
            vec![tok(1, "Paris", 0, "root")],
            vec![mention(1, 1, "London", CoarseType::Location)],
        );
        assert!(matches!(bad_surface, Err(StructureError::MentionSurface { .. })));
    }

    #[test]
    fn generalize_without_mentions_copies_forms() {
        let p = ParsedCaption::new(vec![tok(1, "rain", 2, "nsubj"), tok(2, "falls", 0, "root")], vec![]).unwrap();
        let t = generalize(&p, &TypeSystem::empty());
        assert_eq!(t.items, [TemplateItem::Word("rain".into()), TemplateItem::Word("falls".into())]);
    }

    #[test]
    fn generalize_uses_higher_level_type() {
        let ts = TypeSystem::parse("Bob Dylan\tWriter\tPerson\t6\nBob Dylan\tArtist\tPerson\t5\n", "t").unwrap();
        let p = ParsedCaption::new(
            vec![tok(1, "Bob", 2, "nn"), tok(2, "Dylan", 3, "nsubj"), tok(3, "performs", 0, "root")],
            vec![mention(1, 2, "Bob Dylan", CoarseType::Person)],
        )
        .unwrap();
        let t = generalize(&p, &ts);
        assert_eq!(t.to_string(), "<Artist> performs");
    }

    #[test]
    fn template_json_shape() {
        let t = Template::new(vec![
            TemplateItem::Slot(SlotType::Coarse(CoarseType::Person)),
            TemplateItem::Word("waves".into()),
        ])
        .unwrap();
        assert_eq!(serde_json::to_string(&t).unwrap(), r#"[{"slot":"Person"},{"w":"waves"}]"#);
        assert!(Template::new(vec![]).is_none());
    }

    #[test]
    fn build_pairs_counts_skips() {
        let long = "a b c d e f g h i j";
        let parse = ParsedCaption::new(vec![tok(1, "x", 0, "root")], vec![]).unwrap();
        let rec = |id: &str, raw: &str| CaptionRecord {
            doc_id: id.into(),
            raw: raw.into(),
            parse: parse.clone(),
        };
        let out = build_pairs(
            vec![rec("1", long), rec("2", "a b c d e f g h i"), rec("3", long)],
            &TypeSystem::empty(),
            &TemplatizeOptions::default(),
        )
        .unwrap();
        assert_eq!(out.templates.len(), 2);
        assert_eq!(out.skipped, ["2"]);
        let empty = build_pairs(Vec::new(), &TypeSystem::empty(), &TemplatizeOptions::default()).unwrap();
        assert!(empty.templates.is_empty() && empty.skipped.is_empty());
    }

    #[test]
    fn build_pairs_attaches_record_id_to_errors() {
        let bad = ParsedCaption {
            tokens: vec![tok(1, "a", 0, "root"), tok(2, "b", 0, "root")],
            mentions: vec![],
        };
        let err = build_pairs(
            vec![CaptionRecord {
                doc_id: "doc-9".into(),
                raw: "a b c d e f g h i j".into(),
                parse: bad,
            }],
            &TypeSystem::empty(),
            &TemplatizeOptions::default(),
        )
        .unwrap_err();
        assert_eq!(err.doc_id, "doc-9");
        assert!(err.to_string().starts_with("record doc-9:"));
    }
}
