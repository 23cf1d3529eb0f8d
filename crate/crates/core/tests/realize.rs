use std::collections::BTreeMap;

use chrono::NaiveDate;
use entcap_core::candidates::CandidateEntity;
use entcap_core::qcv::{Assignment, SlotRef};
use entcap_core::realize::{append_date, detokenize, fill, format_date, ImageMeta};
use entcap_core::templatize::{Template, TemplateItem};
use entcap_core::typesys::SlotType;
use proptest::prelude::*;

const WORDS: [&str; 8] = ["fans", "celebrate", "outside", "the", ",", ".", "in", "!"];
const TYPES: [&str; 4] = ["Person", "Athlete", "Stadium", "Location"];

fn template() -> impl Strategy<Value = Template> {
    prop::collection::vec(
        prop_oneof![
            (0..WORDS.len()).prop_map(|i| TemplateItem::Word(WORDS[i].into())),
            (0..TYPES.len()).prop_map(|i| TemplateItem::Slot(TYPES[i].parse().unwrap())),
        ],
        1..10,
    )
    .prop_map(|items| Template::new(items).unwrap())
}

fn slots(t: &Template) -> Vec<(usize, SlotType)> {
    t.items
        .iter()
        .enumerate()
        .filter_map(|(i, item)| match item {
            TemplateItem::Slot(s) => Some((i, s.clone())),
            TemplateItem::Word(_) => None,
        })
        .collect()
}

/// Fills every slot with `Name<k>`, leaving the ones flagged in `empty` unfillable.
fn assignment(t: &Template, picks: &[u8], empty: &[bool]) -> Assignment {
    let mut chosen = BTreeMap::new();
    let mut unfillable = Vec::new();
    for (k, (pos, ty)) in slots(t).into_iter().enumerate() {
        if empty.get(k).copied().unwrap_or(false) {
            unfillable.push(SlotRef::new(pos, ty));
        } else {
            chosen.insert(
                pos,
                CandidateEntity {
                    name: format!("Name{}", picks.get(k).copied().unwrap_or(0)),
                    slot_type: ty,
                    freq: 1,
                },
            );
        }
    }
    Assignment {
        chosen,
        unfillable,
        score: 0.0,
        ties: 1,
    }
}

fn date() -> impl Strategy<Value = NaiveDate> {
    (1990i32..2030, 1u32..13, 1u32..29).prop_map(|(y, m, d)| NaiveDate::from_ymd_opt(y, m, d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn filled_text_has_no_slot_markers(t in template(), picks in prop::collection::vec(0u8..5, 10), empty in prop::collection::vec(any::<bool>(), 10)) {
        let text = fill(&t, &assignment(&t, &picks, &empty)).unwrap();
        prop_assert!(!text.contains('<') && !text.contains('>'));
        prop_assert!(!text.contains("  "));
        prop_assert_eq!(text.trim(), text.as_str());
    }

    #[test]
    fn fill_is_injective(t in template(), a in prop::collection::vec(0u8..5, 10), b in prop::collection::vec(0u8..5, 10)) {
        let n = slots(&t).len();
        let none = vec![false; 10];
        let (sa, sb) = (fill(&t, &assignment(&t, &a, &none)).unwrap(), fill(&t, &assignment(&t, &b, &none)).unwrap());
        prop_assert_eq!(a[..n] == b[..n], sa == sb);
    }

    #[test]
    fn append_date_is_idempotent(t in template(), d in date(), picks in prop::collection::vec(0u8..5, 10)) {
        let caption = fill(&t, &assignment(&t, &picks, &[])).unwrap();
        prop_assert_eq!(append_date(&caption, &ImageMeta::default()), caption.clone());
        let meta = ImageMeta { exif_date: Some(d), geo: None };
        let once = append_date(&caption, &meta);
        prop_assert_eq!(append_date(&once, &meta), once.clone());
        let suffix = format!(" on {}", format_date(d));
        prop_assert_eq!(once.matches(&suffix).count(), caption.matches(&suffix).count().max(1));
        prop_assert!(once.ends_with('.') || once.ends_with('!') || once.ends_with('?'));
    }
}

#[test]
fn worked_example_date() {
    let meta = ImageMeta {
        exif_date: NaiveDate::from_ymd_opt(2016, 4, 26),
        geo: Some((52.6, 1.2)),
    };
    let body = "Junior doctors holding signs protest against Tories outside Norfolk and Norwich University Hospital in Colney";
    let want = format!("{body} on April 26 2016.");
    assert_eq!(append_date(body, &meta), want);
    assert_eq!(append_date(&format!("{body}."), &meta), want);
    assert_eq!(format_date(NaiveDate::from_ymd_opt(2016, 5, 1).unwrap()), "May 1 2016");
}

#[test]
fn detokenize_attaches_punctuation() {
    assert_eq!(detokenize(&["a", ",", "b", "."]), "a, b.");
    assert_eq!(detokenize(&["“", "go", "home"]), "“go home");
    assert_eq!(detokenize(&["said", "\"", "go"]), "said \"go");
}
