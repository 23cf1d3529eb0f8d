//! Rendering filled templates into caption strings.

use std::collections::BTreeSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qcv::Assignment;
use crate::templatize::{Template, TemplateItem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RealizeError {
    #[error("assignment fills position {0}, which is not a slot of the template")]
    NotASlot(usize),
    #[error("slot at position {0} is neither filled nor marked unfillable")]
    Uncovered(usize),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ImageMeta {
    #[serde(default)]
    pub exif_date: Option<NaiveDate>,
    /// Latitude, longitude. Carried through, not rendered.
    #[serde(default)]
    pub geo: Option<(f64, f64)>,
}

fn is_closing_punct(token: &str) -> bool {
    !token.is_empty() && token.chars().all(|c| matches!(c, '.' | ',' | '!' | '?' | ';' | ':'))
}

/// Joins tokens with single spaces, except before `.,!?;:` tokens and after
/// opening quotes (`“`, `‘`, ``` `` ```, and odd occurrences of `"`).
pub fn detokenize<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    let mut glue_next = true;
    let mut straight_quotes = 0;
    for tok in tokens {
        let tok = tok.as_ref();
        if tok.is_empty() {
            continue;
        }
        if !glue_next && !is_closing_punct(tok) {
            out.push(' ');
        }
        out.push_str(tok);
        glue_next = match tok {
            "“" | "‘" | "``" => true,
            "\"" => {
                straight_quotes += 1;
                straight_quotes % 2 == 1
            }
            _ => false,
        };
    }
    out
}

/// Replaces slots with chosen names, or with the slot type's name when the
/// slot is unfillable.
pub fn fill(template: &Template, assignment: &Assignment) -> Result<String, RealizeError> {
    for &pos in assignment.chosen.keys() {
        if !matches!(template.items.get(pos), Some(TemplateItem::Slot(_))) {
            return Err(RealizeError::NotASlot(pos));
        }
    }
    let unfillable: BTreeSet<usize> = assignment.unfillable.iter().map(|s| s.position).collect();
    let mut tokens = Vec::with_capacity(template.items.len());
    for (pos, item) in template.items.iter().enumerate() {
        match item {
            TemplateItem::Word(w) => tokens.push(w.as_str()),
            TemplateItem::Slot(slot_type) => {
                if let Some(c) = assignment.chosen.get(&pos) {
                    tokens.push(c.name.as_str());
                } else if unfillable.contains(&pos) {
                    tokens.push(slot_type.name());
                } else {
                    return Err(RealizeError::Uncovered(pos));
                }
            }
        }
    }
    Ok(detokenize(&tokens))
}

/// `April 26 2016`: English month, unpadded day, no comma.
pub fn format_date(date: NaiveDate) -> String {
    date.format("%B %-d %Y").to_string()
}

/// Appends ` on <Month> <D> <YYYY>` before the terminal punctuation, adding
/// a period when there is none. Returns the caption unchanged when no date
/// is known or the same suffix is already present.
pub fn append_date(caption: &str, meta: &ImageMeta) -> String {
    let Some(date) = meta.exif_date else {
        return caption.to_string();
    };
    let suffix = format!(" on {}", format_date(date));
    let trimmed = caption.trim_end();
    let (body, terminal) = match trimmed.chars().last() {
        Some(c @ ('.' | '!' | '?')) => (&trimmed[..trimmed.len() - c.len_utf8()], c),
        _ => (trimmed, '.'),
    };
    if body.ends_with(&suffix) {
        return caption.to_string();
    }
    format!("{body}{suffix}{terminal}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::CandidateEntity;
    use crate::qcv::SlotRef;
    use crate::typesys::SlotType;

    fn word(w: &str) -> TemplateItem {
        TemplateItem::Word(w.into())
    }

    fn slot(t: &str) -> TemplateItem {
        TemplateItem::Slot(t.parse().unwrap())
    }

    fn entity(name: &str, t: &str) -> CandidateEntity {
        CandidateEntity {
            name: name.into(),
            slot_type: t.parse().unwrap(),
            freq: 1,
        }
    }

    fn date(s: &str) -> ImageMeta {
        ImageMeta {
            exif_date: Some(s.parse().unwrap()),
            geo: None,
        }
    }

    #[test]
    fn fills_worked_example() {
        let t = Template::new(vec![
            slot("Person"),
            word("holding"),
            word("signs"),
            word("protest"),
            word("against"),
            slot("Organization"),
            word("outside"),
            slot("Building"),
            word("in"),
            slot("Location"),
        ])
        .unwrap();
        let mut a = Assignment::empty(vec![]);
        a.chosen.insert(0, entity("Junior doctors", "Person"));
        a.chosen.insert(5, entity("Tories", "Organization"));
        a.chosen.insert(7, entity("Norfolk and Norwich University Hospital", "Building"));
        a.chosen.insert(9, entity("Colney", "Location"));
        assert_eq!(
            fill(&t, &a).unwrap(),
            "Junior doctors holding signs protest against Tories outside Norfolk and Norwich University Hospital in Colney"
        );
    }

    #[test]
    fn no_slots_joins_words() {
        let t = Template::new(vec![word("fans"), word("cheer"), word("loudly"), word(".")]).unwrap();
        assert_eq!(fill(&t, &Assignment::empty(vec![])).unwrap(), "fans cheer loudly.");
    }

    #[test]
    fn unfillable_slot_uses_type_name() {
        let t = Template::new(vec![slot("Athlete"), word("celebrates"), word("after"), word("scoring"), word(".")])
            .unwrap();
        let a = Assignment::empty(vec![SlotRef::new(0, SlotType::Fine("Athlete".into()))]);
        assert_eq!(fill(&t, &a).unwrap(), "Athlete celebrates after scoring.");
    }

    #[test]
    fn contract_errors() {
        let t = Template::new(vec![slot("Person"), word("runs")]).unwrap();
        let mut a = Assignment::empty(vec![]);
        assert_eq!(fill(&t, &a), Err(RealizeError::Uncovered(0)));
        a.chosen.insert(1, entity("Bolt", "Person"));
        assert_eq!(fill(&t, &a), Err(RealizeError::NotASlot(1)));
        a.chosen.clear();
        a.chosen.insert(7, entity("Bolt", "Person"));
        assert_eq!(fill(&t, &a), Err(RealizeError::NotASlot(7)));
    }

    #[test]
    fn detokenize_rules() {
        assert_eq!(detokenize(&["a", ",", "b", "!", "?"]), "a, b!?");
        assert_eq!(detokenize(&["he", "said", "“", "hi", "”"]), "he said “hi ”");
        assert_eq!(detokenize(&["say", "\"", "yes", "\"", "now"]), "say \"yes \" now");
        assert_eq!(detokenize::<&str>(&[]), "");
    }

    #[test]
    fn date_appended_before_period() {
        let c = "Junior doctors holding signs protest against Tories outside Norfolk and Norwich University Hospital in Colney";
        assert_eq!(
            append_date(c, &date("2016-04-26")),
            format!("{c} on April 26 2016.")
        );
        assert_eq!(append_date("fans cheer.", &date("2016-04-26")), "fans cheer on April 26 2016.");
        assert_eq!(append_date("what a goal!", &date("2017-08-02")), "what a goal on August 2 2017!");
    }

    #[test]
    fn no_date_is_identity() {
        assert_eq!(append_date("fans cheer", &ImageMeta::default()), "fans cheer");
    }

    #[test]
    fn date_suffix_not_duplicated() {
        let once = append_date("fans cheer.", &date("2016-06-01"));
        assert_eq!(once.matches('.').count(), 1);
        assert_eq!(append_date(&once, &date("2016-06-01")), once);
    }
}
