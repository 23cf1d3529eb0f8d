use std::collections::{BTreeSet, HashMap};

use entcap_core::templatize::{
    build_pairs, compress, generalize, preprocess, template_vocabulary_size, vocabulary_size, CaptionRecord,
    EntityMention, ParsedCaption, RelationWhitelist, StructureError, TemplateItem, TemplatizeOptions, Token,
};
use entcap_core::typesys::{CoarseType, TypeSystem};
use proptest::prelude::*;

const RELATIONS: [&str; 8] = ["nsubj", "obj", "det", "advmod", "amod", "prep", "pobj", "punct"];
const NAMES: [&str; 6] = ["Ada", "Bram", "Cleo", "Dov", "Eli", "Fay"];

fn coarse_of(name: &str) -> CoarseType {
    CoarseType::ALL[NAMES.iter().position(|n| *n == name).unwrap() % 4]
}

/// A random tree over `n` tokens plus non-overlapping mentions.
#[derive(Debug, Clone)]
struct Sample {
    parse: ParsedCaption,
}

fn sample() -> impl Strategy<Value = Sample> {
    (2usize..14).prop_flat_map(|n| {
        (
            Just(n),
            0..n,
            prop::collection::vec(any::<prop::sample::Index>(), n),
            prop::collection::vec(0..RELATIONS.len(), n),
            prop::collection::vec((any::<bool>(), 1usize..3, 0..NAMES.len()), n),
            prop::collection::vec(any::<prop::sample::Index>(), n),
        )
            .prop_map(|(n, root, heads, rels, spans, perm)| build_sample(n, root, &heads, &rels, &spans, &perm))
    })
}

fn build_sample(
    n: usize,
    root: usize,
    heads: &[prop::sample::Index],
    rels: &[usize],
    spans: &[(bool, usize, usize)],
    perm: &[prop::sample::Index],
) -> Sample {
    // Attach nodes in a random order, each to an already placed node.
    let mut order: Vec<usize> = (0..n).filter(|&i| i != root).collect();
    for i in (1..order.len()).rev() {
        order.swap(i, perm[i].index(i + 1));
    }
    let mut placed = vec![root];
    let mut head = vec![0usize; n];
    for (k, &node) in order.iter().enumerate() {
        let gov = placed[heads[k].index(placed.len())];
        head[node] = gov + 1;
        placed.push(node);
    }

    let mut forms: Vec<String> = (1..=n).map(|i| format!("w{i}")).collect();
    let mut mentions = Vec::new();
    let mut i = 0;
    while i < n {
        let (take, len, name) = spans[i];
        if take && i + len <= n {
            let base = NAMES[name];
            for (j, form) in forms[i..i + len].iter_mut().enumerate() {
                *form = format!("{base}{j}");
            }
            mentions.push(EntityMention {
                start: i + 1,
                end: i + len,
                surface: forms[i..i + len].join(" "),
                coarse: coarse_of(base),
            });
            i += len;
        } else {
            i += 1;
        }
    }
    let tokens = (0..n)
        .map(|i| Token {
            index: i + 1,
            form: forms[i].clone(),
            head: head[i],
            deprel: if head[i] == 0 { "root".into() } else { RELATIONS[rels[i]].into() },
        })
        .collect();
    Sample {
        parse: ParsedCaption::new(tokens, mentions).expect("generated parse is valid"),
    }
}

fn whitelist() -> RelationWhitelist {
    RelationWhitelist::new(["nsubj", "obj", "det", "prep", "pobj"])
}

/// Renames every token to `u<index>` so survivors can be traced back.
fn uniquely_named(p: &ParsedCaption) -> ParsedCaption {
    let tokens: Vec<Token> = p
        .tokens
        .iter()
        .map(|t| Token {
            form: format!("u{}", t.index),
            ..t.clone()
        })
        .collect();
    let mentions = p
        .mentions
        .iter()
        .map(|m| EntityMention {
            surface: (m.start..=m.end).map(|i| format!("u{i}")).collect::<Vec<_>>().join(" "),
            ..m.clone()
        })
        .collect();
    ParsedCaption::new(tokens, mentions).unwrap()
}

fn kept_forms(p: &ParsedCaption) -> BTreeSet<String> {
    p.forms().map(String::from).collect()
}

fn mention_id(p: &ParsedCaption, index: usize) -> Option<usize> {
    p.mentions.iter().position(|m| (m.start..=m.end).contains(&index))
}

fn type_system() -> TypeSystem {
    let rows: String = NAMES
        .iter()
        .enumerate()
        .filter(|(i, _)| i % 2 == 0)
        .map(|(_, n)| format!("{n}0\tKind{n}\t{}\t3\n", coarse_of(n)))
        .collect();
    TypeSystem::parse(&rows, "types").unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn compress_is_idempotent(s in sample()) {
        let once = compress(&s.parse, &whitelist()).unwrap();
        let twice = compress(&once, &whitelist()).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn compress_shrinks_and_keeps_root(s in sample()) {
        let out = compress(&s.parse, &whitelist()).unwrap();
        prop_assert!(out.tokens.len() <= s.parse.tokens.len());
        let root_form = &s.parse.tokens[s.parse.root() - 1].form;
        prop_assert_eq!(&out.tokens[out.root() - 1].form, root_form);
        prop_assert!(out.validate().is_ok());
    }

    #[test]
    fn kept_tokens_follow_the_keep_rule(s in sample()) {
        let p = &uniquely_named(&s.parse);
        let wl = whitelist();
        let kept = kept_forms(&compress(p, &wl).unwrap());
        let is_kept = |i: usize| kept.contains(&p.tokens[i - 1].form);
        for t in &p.tokens {
            // Every ancestor of a kept token is kept.
            if is_kept(t.index) {
                let mut cur = t.head;
                while cur != 0 {
                    prop_assert!(is_kept(cur), "token {} kept but ancestor {} dropped", t.index, cur);
                    cur = p.tokens[cur - 1].head;
                }
            }
            // A dependent survives exactly when its governor does and it is
            // whitelisted or inside the governor's mention.
            if t.head != 0 {
                let same = mention_id(p, t.index).is_some() && mention_id(p, t.index) == mention_id(p, t.head);
                let expected = is_kept(t.head) && (wl.contains(&t.deprel) || same);
                prop_assert_eq!(is_kept(t.index), expected, "token {}", t.index);
            }
        }
        // Surface order is preserved.
        let out = compress(p, &wl).unwrap();
        let order: Vec<&str> = p.forms().filter(|f| kept.contains(*f)).collect();
        prop_assert_eq!(out.forms().collect::<Vec<_>>(), order);
    }

    #[test]
    fn full_whitelist_keeps_everything(s in sample()) {
        let p = uniquely_named(&s.parse);
        let out = compress(&p, &RelationWhitelist::all()).unwrap();
        prop_assert_eq!(out.tokens.len(), p.tokens.len());
        prop_assert_eq!(kept_forms(&out), kept_forms(&p));
        prop_assert_eq!(out.mentions.len(), s.parse.mentions.len());
    }

    #[test]
    fn generalize_item_count_law(s in sample()) {
        let ts = type_system();
        let p = compress(&s.parse, &whitelist()).unwrap();
        let t = generalize(&p, &ts);
        let span: usize = p.mentions.iter().map(|m| m.token_count()).sum();
        prop_assert_eq!(t.items.len(), p.tokens.len() - span + p.mentions.len());
        prop_assert_eq!(t.slot_count(), p.mentions.len());
    }

    #[test]
    fn vocabulary_never_grows(samples in prop::collection::vec(sample(), 1..8)) {
        // Each name carries one coarse type and its fine type only covers
        // the one-token form, so every slot label can be charged to a
        // distinct mention token.
        let ts = type_system();
        let raw: Vec<String> = samples.iter().map(|s| s.parse.forms().collect::<Vec<_>>().join(" ")).collect();
        let templates: Vec<_> = samples
            .iter()
            .map(|s| generalize(&compress(&s.parse, &whitelist()).unwrap(), &ts))
            .collect();
        prop_assert!(template_vocabulary_size(&templates) <= vocabulary_size(raw.iter().map(String::as_str)));
    }
}

#[test]
fn slot_labels_can_outnumber_a_single_name() {
    // One surface tagged with two coarse types: the template side gains a
    // token, which is why the property above keeps names single-typed.
    let tok = |i, f: &str, h, r: &str| Token {
        index: i,
        form: f.into(),
        head: h,
        deprel: r.into(),
    };
    let m = |i, c| EntityMention {
        start: i,
        end: i,
        surface: "Jordan".into(),
        coarse: c,
    };
    let p = ParsedCaption::new(
        vec![tok(1, "Jordan", 2, "nsubj"), tok(2, "visits", 0, "root"), tok(3, "Jordan", 2, "obj")],
        vec![m(1, CoarseType::Person), m(3, CoarseType::Location)],
    )
    .unwrap();
    let t = generalize(&p, &TypeSystem::empty());
    assert_eq!(t.to_string(), "<Person> visits <Location>");
    assert!(template_vocabulary_size([&t]) > vocabulary_size(["Jordan visits Jordan"]));
}

#[test]
fn structural_errors_are_reported() {
    let tok = |i, h| Token {
        index: i,
        form: format!("t{i}"),
        head: h,
        deprel: "nsubj".into(),
    };
    let two_roots = ParsedCaption {
        tokens: vec![tok(1, 0), tok(2, 0)],
        mentions: vec![],
    };
    assert_eq!(
        compress(&two_roots, &whitelist()),
        Err(StructureError::MultipleRoots(vec![1, 2]))
    );
    let cycle = ParsedCaption {
        tokens: vec![tok(1, 0), tok(2, 3), tok(3, 2)],
        mentions: vec![],
    };
    assert!(matches!(compress(&cycle, &whitelist()), Err(StructureError::Cycle(_))));
}

#[test]
fn build_pairs_on_empty_corpus() {
    let out = build_pairs(Vec::<CaptionRecord>::new(), &TypeSystem::empty(), &TemplatizeOptions::default()).unwrap();
    assert!(out.templates.is_empty());
    assert!(out.skipped.is_empty());
}

#[test]
fn preprocess_outputs_meet_the_floor() {
    let text = "Short one. This second sentence has well over ten tokens in it (really) for sure today.";
    let kept = preprocess(text).unwrap();
    assert!(!kept.contains('('));
    assert!(kept.split_whitespace().count() >= 10);
    assert!(kept.starts_with("This second"));
}

#[test]
fn generalized_words_are_untouched() {
    let tok = |i, f: &str, h, r: &str| Token {
        index: i,
        form: f.into(),
        head: h,
        deprel: r.into(),
    };
    let p = ParsedCaption::new(
        vec![tok(1, "Fans", 2, "nsubj"), tok(2, "cheer", 0, "root"), tok(3, "!", 2, "punct")],
        vec![],
    )
    .unwrap();
    let t = generalize(&p, &TypeSystem::empty());
    let words: Vec<&str> = t
        .items
        .iter()
        .map(|i| match i {
            TemplateItem::Word(w) => w.as_str(),
            TemplateItem::Slot(_) => unreachable!(),
        })
        .collect();
    assert_eq!(words, ["Fans", "cheer", "!"]);
    let by_form: HashMap<_, _> = p.forms().zip(words).collect();
    assert_eq!(by_form.len(), 3);
}
