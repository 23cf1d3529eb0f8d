//! Context retrieval over a tag-indexed post corpus, candidate pools and
//! post-level co-occurrence counts.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::typesys::{normalize_name, CoarseType, SlotType, TypeSystem};

pub const DEFAULT_WINDOW_DAYS: u32 = 7;
pub const DEFAULT_TAG_FREQ_CAP: usize = 200;
pub const DEFAULT_TOP_K: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CandidateError {
    #[error("duplicate post id {0:?}")]
    DuplicatePostId(String),
    #[error("co-occurrence of {a:?} and {b:?} is {pair}, above min unary count {min}")]
    PairExceedsUnary { a: String, b: String, pair: u64, min: u64 },
    #[error("co-occurrence references {0:?}, which has no unary count")]
    MissingUnary(String),
}

/// Lowercases and strips a leading `#`.
pub fn normalize_tag(tag: &str) -> String {
    tag.trim().trim_start_matches('#').trim().to_lowercase()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostMention {
    pub surface: String,
    pub coarse: CoarseType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Post {
    pub id: String,
    pub tags: BTreeSet<String>,
    pub taken_date: NaiveDate,
    pub text: String,
    pub mentions: Vec<PostMention>,
}

impl Post {
    pub fn new<T: AsRef<str>>(
        id: impl Into<String>,
        tags: impl IntoIterator<Item = T>,
        taken_date: NaiveDate,
        text: impl Into<String>,
        mentions: Vec<PostMention>,
    ) -> Self {
        Post {
            id: id.into(),
            tags: tags.into_iter().map(|t| normalize_tag(t.as_ref())).filter(|t| !t.is_empty()).collect(),
            taken_date,
            text: text.into(),
            mentions,
        }
    }
}

/// Tags and capture date of the image whose slots are being filled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    /// Excluded from its own context when present in the corpus.
    pub id: Option<String>,
    pub tags: BTreeSet<String>,
    pub taken_date: NaiveDate,
}

impl Query {
    pub fn new<T: AsRef<str>>(id: Option<String>, tags: impl IntoIterator<Item = T>, taken_date: NaiveDate) -> Self {
        Query {
            id,
            tags: tags.into_iter().map(|t| normalize_tag(t.as_ref())).filter(|t| !t.is_empty()).collect(),
            taken_date,
        }
    }
}

/// Posts sorted by id with a tag → posts inverted index.
#[derive(Debug, Clone, Default)]
pub struct PostIndex {
    posts: Vec<Post>,
    by_tag: HashMap<String, Vec<usize>>,
}

impl PostIndex {
    pub fn new(mut posts: Vec<Post>) -> Result<Self, CandidateError> {
        posts.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = posts.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(CandidateError::DuplicatePostId(w[0].id.clone()));
        }
        let mut by_tag: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, p) in posts.iter().enumerate() {
            for t in &p.tags {
                by_tag.entry(t.clone()).or_default().push(i);
            }
        }
        Ok(PostIndex { posts, by_tag })
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    /// Number of posts carrying `tag` (normalized).
    pub fn tag_frequency(&self, tag: &str) -> usize {
        self.by_tag.get(&normalize_tag(tag)).map_or(0, Vec::len)
    }
}

/// Posts that share at least one non-saturated tag with the query and were
/// taken within `window_days` of it, in either direction. Tags carried by
/// more than `tag_freq_cap` posts are ignored. The result is sorted by id.
pub fn retrieve_context<'a>(
    query: &Query,
    index: &'a PostIndex,
    window_days: u32,
    tag_freq_cap: usize,
) -> Vec<&'a Post> {
    let mut hits: BTreeSet<usize> = BTreeSet::new();
    for tag in &query.tags {
        let Some(ids) = index.by_tag.get(tag) else { continue };
        if ids.len() > tag_freq_cap {
            continue;
        }
        hits.extend(ids.iter().copied());
    }
    hits.into_iter()
        .map(|i| &index.posts[i])
        .filter(|p| query.id.as_deref() != Some(p.id.as_str()))
        .filter(|p| (p.taken_date - query.taken_date).num_days().unsigned_abs() <= u64::from(window_days))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CandidateEntity {
    pub name: String,
    pub slot_type: SlotType,
    pub freq: u64,
}

/// Ranked candidates per slot type, best first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CandidatePool {
    pub per_type: BTreeMap<SlotType, Vec<CandidateEntity>>,
}

impl CandidatePool {
    pub fn candidates(&self, slot_type: &SlotType) -> &[CandidateEntity] {
        self.per_type.get(slot_type).map_or(&[], Vec::as_slice)
    }

    pub fn is_empty(&self) -> bool {
        self.per_type.values().all(Vec::is_empty)
    }

    /// Sorts each list by (freq desc, name asc) and truncates to `top_k`.
    pub fn rank(&mut self, top_k: usize) {
        for list in self.per_type.values_mut() {
            list.sort_by(|a, b| b.freq.cmp(&a.freq).then_with(|| a.name.cmp(&b.name)));
            list.truncate(top_k);
        }
        self.per_type.retain(|_, v| !v.is_empty());
    }
}

/// Groups context mentions by normalized name. The display form of a group
/// is its most frequent surface, ties broken by lexicographic order.
struct NameGroups {
    display: HashMap<String, String>,
    coarse: HashMap<String, CoarseType>,
    /// Normalized names mentioned by each post, deduplicated.
    per_post: Vec<BTreeSet<String>>,
}

impl NameGroups {
    fn build<'a>(context: impl IntoIterator<Item = &'a Post>) -> Self {
        let mut surfaces: HashMap<String, HashMap<&str, usize>> = HashMap::new();
        let mut coarse_votes: HashMap<String, [usize; 4]> = HashMap::new();
        let mut per_post = Vec::new();
        for post in context {
            let mut seen = BTreeSet::new();
            for m in &post.mentions {
                let key = normalize_name(&m.surface);
                if key.is_empty() {
                    continue;
                }
                *surfaces.entry(key.clone()).or_default().entry(m.surface.trim()).or_default() += 1;
                if seen.insert(key.clone()) {
                    let slot = CoarseType::ALL.iter().position(|&c| c == m.coarse).unwrap_or(0);
                    coarse_votes.entry(key).or_default()[slot] += 1;
                }
            }
            per_post.push(seen);
        }
        let display = surfaces
            .into_iter()
            .map(|(key, forms)| {
                let best = forms
                    .into_iter()
                    .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(a.0)))
                    .map(|(s, _)| s.split_whitespace().collect::<Vec<_>>().join(" "))
                    .unwrap_or_default();
                (key, best)
            })
            .collect();
        let coarse = coarse_votes
            .into_iter()
            .map(|(key, votes)| {
                // First maximum in enum order wins ties.
                let (idx, _) = votes
                    .iter()
                    .enumerate()
                    .fold((0, 0), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
                (key, CoarseType::ALL[idx])
            })
            .collect();
        NameGroups {
            display,
            coarse,
            per_post,
        }
    }

    fn document_frequencies(&self) -> BTreeMap<&str, u64> {
        let mut df: BTreeMap<&str, u64> = BTreeMap::new();
        for names in &self.per_post {
            for key in names {
                *df.entry(self.display[key].as_str()).or_default() += 1;
            }
        }
        df
    }
}

/// Candidate frequency is the number of context posts mentioning the name.
pub fn extract_candidates<'a>(
    context: impl IntoIterator<Item = &'a Post>,
    ts: &TypeSystem,
    top_k: usize,
) -> CandidatePool {
    let groups = NameGroups::build(context);
    let mut df: HashMap<&str, u64> = HashMap::new();
    for names in &groups.per_post {
        for key in names {
            *df.entry(key.as_str()).or_default() += 1;
        }
    }
    let mut pool = CandidatePool::default();
    for (key, freq) in df {
        let name = groups.display[key].clone();
        let slot_type = ts.resolve_slot_type(&name, groups.coarse[key]);
        pool.per_type.entry(slot_type.clone()).or_default().push(CandidateEntity {
            name,
            slot_type,
            freq,
        });
    }
    pool.rank(top_k);
    pool
}

/// Unary and pairwise post counts keyed by candidate display name.
///
/// A name paired with itself co-occurs in every post that mentions it, so
/// `pair(a, a) == unary(a)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "StatsRepr", try_from = "StatsRepr")]
pub struct CooccurrenceStats {
    unary: BTreeMap<String, u64>,
    pair: BTreeMap<(String, String), u64>,
}

#[derive(Serialize, Deserialize)]
struct StatsRepr {
    unary: BTreeMap<String, u64>,
    #[serde(default)]
    pairs: Vec<PairCount>,
}

#[derive(Serialize, Deserialize)]
struct PairCount {
    a: String,
    b: String,
    count: u64,
}

impl From<CooccurrenceStats> for StatsRepr {
    fn from(s: CooccurrenceStats) -> Self {
        StatsRepr {
            unary: s.unary,
            pairs: s
                .pair
                .into_iter()
                .map(|((a, b), count)| PairCount { a, b, count })
                .collect(),
        }
    }
}

impl TryFrom<StatsRepr> for CooccurrenceStats {
    type Error = CandidateError;

    fn try_from(r: StatsRepr) -> Result<Self, Self::Error> {
        let mut s = CooccurrenceStats {
            unary: r.unary,
            pair: BTreeMap::new(),
        };
        for p in r.pairs {
            s.set_pair(&p.a, &p.b, p.count);
        }
        s.validate()?;
        Ok(s)
    }
}

fn ordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl CooccurrenceStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_unary(&mut self, name: &str, count: u64) {
        self.unary.insert(name.to_string(), count);
    }

    /// Self-pairs are implied by the unary count and are not stored.
    pub fn set_pair(&mut self, a: &str, b: &str, count: u64) {
        if a == b {
            return;
        }
        if count == 0 {
            self.pair.remove(&ordered(a, b));
        } else {
            self.pair.insert(ordered(a, b), count);
        }
    }

    pub fn unary(&self, name: &str) -> Option<u64> {
        self.unary.get(name).copied()
    }

    pub fn pair(&self, a: &str, b: &str) -> u64 {
        if a == b {
            return self.unary(a).unwrap_or(0);
        }
        let key = ordered(a, b);
        self.pair.get(&key).copied().unwrap_or(0)
    }

    pub fn unary_counts(&self) -> &BTreeMap<String, u64> {
        &self.unary
    }

    pub fn pair_counts(&self) -> impl Iterator<Item = (&str, &str, u64)> {
        self.pair.iter().map(|((a, b), &c)| (a.as_str(), b.as_str(), c))
    }

    /// Multiplies every count by `factor`.
    pub fn scaled(&self, factor: u64) -> Self {
        CooccurrenceStats {
            unary: self.unary.iter().map(|(k, v)| (k.clone(), v * factor)).collect(),
            pair: self.pair.iter().map(|(k, v)| (k.clone(), v * factor)).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), CandidateError> {
        for ((a, b), &count) in &self.pair {
            let ua = self.unary(a).ok_or_else(|| CandidateError::MissingUnary(a.clone()))?;
            let ub = self.unary(b).ok_or_else(|| CandidateError::MissingUnary(b.clone()))?;
            if count > ua.min(ub) {
                return Err(CandidateError::PairExceedsUnary {
                    a: a.clone(),
                    b: b.clone(),
                    pair: count,
                    min: ua.min(ub),
                });
            }
        }
        Ok(())
    }
}

/// Post-level counts: each name is counted once per post.
pub fn cooccurrence<'a>(context: impl IntoIterator<Item = &'a Post>) -> CooccurrenceStats {
    let groups = NameGroups::build(context);
    let mut stats = CooccurrenceStats::new();
    for (name, df) in groups.document_frequencies() {
        stats.set_unary(name, df);
    }
    let mut pairs: BTreeMap<(String, String), u64> = BTreeMap::new();
    for names in &groups.per_post {
        let shown: Vec<&str> = names.iter().map(|k| groups.display[k].as_str()).collect();
        for (i, a) in shown.iter().enumerate() {
            for b in &shown[i + 1..] {
                *pairs.entry(ordered(a, b)).or_default() += 1;
            }
        }
    }
    stats.pair = pairs;
    stats
}

/// Offline mention detector over the names indexed by a [`TypeSystem`].
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    entries: HashMap<String, CoarseType>,
    max_tokens: usize,
}

impl Gazetteer {
    pub fn new(ts: &TypeSystem) -> Self {
        let mut entries = HashMap::new();
        let mut max_tokens = 0;
        for (name, coarse) in ts.entities() {
            max_tokens = max_tokens.max(name.split_whitespace().count());
            entries.insert(name.to_string(), coarse);
        }
        Gazetteer { entries, max_tokens }
    }

    /// Longest-match, left-to-right, non-overlapping and case-insensitive.
    /// Leading punctuation of the first token and trailing punctuation of
    /// the last token of a candidate span are ignored.
    pub fn find(&self, text: &str) -> Vec<PostMention> {
        let spans = token_spans(text);
        let mut out = Vec::new();
        let mut i = 0;
        while i < spans.len() {
            let longest = self.max_tokens.min(spans.len() - i);
            let hit = (1..=longest).rev().find_map(|len| {
                let start = trim_start_punct(text, spans[i]);
                let end = trim_end_punct(text, spans[i + len - 1]);
                if start >= end {
                    return None;
                }
                let surface = &text[start..end];
                self.entries.get(&normalize_name(surface)).map(|&coarse| (len, surface, coarse))
            });
            match hit {
                Some((len, surface, coarse)) => {
                    out.push(PostMention {
                        surface: surface.to_string(),
                        coarse,
                    });
                    i += len;
                }
                None => i += 1,
            }
        }
        out
    }
}

fn token_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                spans.push((s, i));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push((s, text.len()));
    }
    spans
}

fn trim_start_punct(text: &str, (s, e): (usize, usize)) -> usize {
    let tok = &text[s..e];
    s + (tok.len() - tok.trim_start_matches(|c: char| !c.is_alphanumeric()).len())
}

fn trim_end_punct(text: &str, (s, e): (usize, usize)) -> usize {
    s + text[s..e].trim_end_matches(|c: char| !c.is_alphanumeric()).len()
}

pub fn gazetteer_match(text: &str, ts: &TypeSystem) -> Vec<(String, CoarseType)> {
    Gazetteer::new(ts)
        .find(text)
        .into_iter()
        .map(|m| (m.surface, m.coarse))
        .collect()
}

/// Distinct candidate names across a pool.
pub fn pool_names(pool: &CandidatePool) -> HashSet<&str> {
    pool.per_type.values().flatten().map(|c| c.name.as_str()).collect()
}
