//! The constituent tag set: `U`ncommon word, `G`eneric modifier,
//! `T`rigger word and `O`utside.
//!
//! Pre-tags are rule-based input features and add `TP` for person
//! triggers. Labeling tags are the CRF outputs, optionally suffixed with
//! the entity type (`U-ORG`).

use std::fmt;
use std::str::FromStr;

use crate::corpus::{Corpus, EntitySpan, Sentence};
use crate::error::{Error, Result};
use crate::induction::{is_uncommon, InductionModel};
use crate::lexicon::{match_word, Category, Lexicon};

/// Entity type given to spans extracted from untyped tags.
pub const UNTYPED_ENTITY: &str = "ENT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PreTag {
    U,
    G,
    T,
    TP,
    O,
}

impl PreTag {
    pub fn as_str(self) -> &'static str {
        match self {
            PreTag::U => "U",
            PreTag::G => "G",
            PreTag::T => "T",
            PreTag::TP => "TP",
            PreTag::O => "O",
        }
    }
}

impl fmt::Display for PreTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Base {
    U,
    G,
    T,
    O,
}

impl Base {
    fn as_str(self) -> &'static str {
        match self {
            Base::U => "U",
            Base::G => "G",
            Base::T => "T",
            Base::O => "O",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelTag {
    pub base: Base,
    pub etype: Option<String>,
}

impl LabelTag {
    pub const OUTSIDE: LabelTag = LabelTag {
        base: Base::O,
        etype: None,
    };

    pub fn new(base: Base, etype: Option<&str>) -> Self {
        let etype = if base == Base::O {
            None
        } else {
            etype.map(str::to_string)
        };
        LabelTag { base, etype }
    }

    pub fn is_outside(&self) -> bool {
        self.base == Base::O
    }
}

impl fmt::Display for LabelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.etype {
            Some(t) => write!(f, "{}-{}", self.base.as_str(), t),
            None => f.write_str(self.base.as_str()),
        }
    }
}

impl FromStr for LabelTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (base, etype) = match s.split_once('-') {
            Some((b, t)) if !t.is_empty() => (b, Some(t)),
            Some(_) => return Err(Error::Usage(format!("malformed label {s:?}"))),
            None => (s, None),
        };
        let base = match base {
            "U" => Base::U,
            "G" => Base::G,
            "T" => Base::T,
            "O" if etype.is_none() => Base::O,
            _ => return Err(Error::Usage(format!("malformed label {s:?}"))),
        };
        Ok(LabelTag::new(base, etype))
    }
}

fn is_proper_noun(pos: &str) -> bool {
    pos.starts_with("NNP")
}

/// Rule-based pre-tag per token; the first matching rule wins:
/// U, then TP, then T, then G, else O.
pub fn pretag_sentence(s: &Sentence, ind: &InductionModel, lex: &Lexicon) -> Vec<PreTag> {
    s.tokens
        .iter()
        .map(|tok| {
            let w = tok.surface.as_str();
            let m = match_word(lex, w);
            if is_uncommon(w, ind)
                && (is_proper_noun(&tok.pos) || m.is_entity_token || m.is_hyphen_entity)
            {
                PreTag::U
            } else if m.trigger_categories.contains(&Category::Per) {
                PreTag::TP
            } else if m.is_non_person_trigger() {
                PreTag::T
            } else if m.is_generic {
                PreTag::G
            } else {
                PreTag::O
            }
        })
        .collect()
}

/// Gold labeling tags. Inside a span a word is `U` when it is in `L`, is a
/// proper noun or matches an entity token (plain or hyphenated), `T` when
/// it is a LOC/ORG/MISC trigger, and `G` otherwise.
pub fn label_sentence(
    s: &Sentence,
    ind: &InductionModel,
    lex: &Lexicon,
    typed: bool,
) -> Vec<LabelTag> {
    s.tokens
        .iter()
        .zip(s.coverage())
        .map(|(tok, cov)| {
            let Some(k) = cov else {
                return LabelTag::OUTSIDE;
            };
            let w = tok.surface.as_str();
            let m = match_word(lex, w);
            let base = if ind.in_list(w)
                || is_proper_noun(&tok.pos)
                || m.is_entity_token
                || m.is_hyphen_entity
            {
                Base::U
            } else if m.is_non_person_trigger() {
                Base::T
            } else {
                Base::G
            };
            let etype = typed.then(|| s.entities[k].etype.as_str());
            LabelTag::new(base, etype)
        })
        .collect()
}

/// Labeling tags for every sentence of a labeled corpus.
pub fn label_corpus(
    corpus: &Corpus,
    ind: &InductionModel,
    lex: &Lexicon,
    typed: bool,
) -> Result<Vec<Vec<LabelTag>>> {
    corpus.require_labeled("labeling")?;
    Ok(corpus
        .sentences
        .iter()
        .map(|s| label_sentence(s, ind, lex, typed))
        .collect())
}

/// Groups adjacent non-`O` tags into spans. Typed tags split wherever the
/// type changes; untyped runs become `ENT` spans.
pub fn extract_entities(tags: &[LabelTag]) -> Vec<EntitySpan> {
    let mut spans: Vec<EntitySpan> = Vec::new();
    let mut open: Option<EntitySpan> = None;
    for (i, tag) in tags.iter().enumerate() {
        if tag.is_outside() {
            spans.extend(open.take());
            continue;
        }
        let etype = tag.etype.as_deref().unwrap_or(UNTYPED_ENTITY);
        match open.as_mut() {
            Some(span) if span.etype == etype => span.end = i + 1,
            _ => {
                spans.extend(open.take());
                open = Some(EntitySpan::new(i, i + 1, etype));
            }
        }
    }
    spans.extend(open);
    spans
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn tags(s: &str) -> Vec<LabelTag> {
        s.split_whitespace().map(|t| t.parse().unwrap()).collect()
    }

    fn words(ws: &[&str]) -> BTreeSet<String> {
        ws.iter().map(|s| s.to_string()).collect()
    }

    fn lexicon() -> Lexicon {
        let mut lex = Lexicon::default();
        lex.triggers
            .insert(Category::Org, words(&["Department", "Transport"]));
        lex.triggers.insert(Category::Per, words(&["Mr."]));
        lex.generic_modifiers = words(&["of", "and"]);
        lex
    }

    fn induction(common: &[&str]) -> InductionModel {
        let mut m = InductionModel::empty(1.0);
        m.common_vocab = common.iter().map(|s| s.to_string()).collect();
        m
    }

    #[test]
    fn label_string_forms() {
        for s in ["U", "G", "T", "O", "U-PER", "T-MISC", "G-ORG"] {
            assert_eq!(s.parse::<LabelTag>().unwrap().to_string(), s);
        }
        for s in ["O-PER", "X", "U-", ""] {
            assert!(s.parse::<LabelTag>().is_err(), "{s}");
        }
    }

    #[test]
    fn pretag_rules() {
        let s = Sentence::from_pairs(
            &[
                ("Japan", "NNP"),
                ("of", "IN"),
                ("Department", "NNP"),
                ("Mr.", "NNP"),
                ("won", "VBD"),
            ],
            vec![],
        )
        .unwrap();
        let ind = induction(&["of", "Department", "Mr.", "won"]);
        let pt = pretag_sentence(&s, &ind, &lexicon());
        assert_eq!(
            pt,
            vec![PreTag::U, PreTag::G, PreTag::T, PreTag::TP, PreTag::O]
        );
    }

    #[test]
    fn uncommon_needs_proper_noun_or_lexicon() {
        let s = Sentence::from_pairs(&[("zorbing", "VBG")], vec![]).unwrap();
        assert_eq!(
            pretag_sentence(&s, &induction(&[]), &lexicon()),
            vec![PreTag::O]
        );
    }

    #[test]
    fn labels_ministry_example() {
        let s = Sentence::from_pairs(
            &[
                ("UK", "NNP"),
                ("Department", "NN"),
                ("of", "IN"),
                ("Transport", "NN"),
                ("on", "IN"),
            ],
            vec![EntitySpan::new(0, 4, "ORG")],
        )
        .unwrap();
        let ind = induction(&["on"]);
        let typed = label_sentence(&s, &ind, &lexicon(), true);
        assert_eq!(typed, tags("U-ORG T-ORG G-ORG T-ORG O"));
        let untyped = label_sentence(&s, &ind, &lexicon(), false);
        assert_eq!(untyped, tags("U T G T O"));
    }

    #[test]
    fn label_without_spans_is_outside() {
        let s = Sentence::from_pairs(&[("Japan", "NNP"), ("won", "VBD")], vec![]).unwrap();
        assert_eq!(
            label_sentence(&s, &induction(&[]), &lexicon(), true),
            tags("O O")
        );
        let unlabeled = Corpus::from_sentences(vec![s], crate::corpus::Split::Unlabeled);
        assert!(label_corpus(&unlabeled, &induction(&[]), &lexicon(), true).is_err());
    }

    #[test]
    fn extraction_typed_and_untyped() {
        assert_eq!(
            extract_entities(&tags("U-MISC U-PER U-PER O")),
            vec![EntitySpan::new(0, 1, "MISC"), EntitySpan::new(1, 3, "PER")]
        );
        assert_eq!(
            extract_entities(&tags("U U U O")),
            vec![EntitySpan::new(0, 3, UNTYPED_ENTITY)]
        );
        assert!(extract_entities(&tags("O O O")).is_empty());
        assert!(extract_entities(&[]).is_empty());
    }
}
