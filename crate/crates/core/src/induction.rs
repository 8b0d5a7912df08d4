//! Entity rates of words and the uncommon-word list.
//!
//! The entity rate of a word is the share of its occurrences that fall
//! inside gold entity spans. Words whose rate reaches a threshold form the
//! list `L`; words never seen in the training common text are uncommon as
//! well, which is how unseen test words get picked up at tagging time.

use std::collections::{BTreeSet, HashMap, HashSet};

use rayon::prelude::*;

use crate::corpus::{Corpus, Sentence};
use crate::error::{Error, Result};

/// Occurrence counts inside (`entity`) and outside (`common`) gold spans.
/// Keys are case-sensitive surfaces.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordCounts {
    pub entity: HashMap<String, u64>,
    pub common: HashMap<String, u64>,
}

impl WordCounts {
    pub fn entity_count(&self, w: &str) -> u64 {
        self.entity.get(w).copied().unwrap_or(0)
    }

    pub fn common_count(&self, w: &str) -> u64 {
        self.common.get(w).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.entity.values().sum::<u64>() + self.common.values().sum::<u64>()
    }

    fn add_sentence(&mut self, s: &Sentence) {
        for (tok, cov) in s.tokens.iter().zip(s.coverage()) {
            let map = if cov.is_some() {
                &mut self.entity
            } else {
                &mut self.common
            };
            *map.entry(tok.surface.clone()).or_insert(0) += 1;
        }
    }

    fn merge(mut self, other: WordCounts) -> WordCounts {
        for (w, c) in other.entity {
            *self.entity.entry(w).or_insert(0) += c;
        }
        for (w, c) in other.common {
            *self.common.entry(w).or_insert(0) += c;
        }
        self
    }

    /// Entity rate of `w`; errors when `w` was never counted.
    pub fn rate(&self, w: &str) -> Result<f64> {
        word_rate(self, w)
    }
}

pub fn count_words(corpus: &Corpus) -> Result<WordCounts> {
    corpus.require_labeled("word counting")?;
    Ok(count_sentences(&corpus.sentences))
}

pub(crate) fn count_sentences(sentences: &[Sentence]) -> WordCounts {
    sentences
        .par_iter()
        .fold(WordCounts::default, |mut acc, s| {
            acc.add_sentence(s);
            acc
        })
        .reduce(WordCounts::default, WordCounts::merge)
}

/// `f_entity(w) / (f_entity(w) + f_common(w))`.
pub fn word_rate(counts: &WordCounts, w: &str) -> Result<f64> {
    let e = counts.entity_count(w);
    let c = counts.common_count(w);
    if e + c == 0 {
        return Err(Error::UndefinedRate(w.to_string()));
    }
    Ok(e as f64 / (e + c) as f64)
}

/// Uncommon-word list `L`, the training common-text vocabulary and the
/// threshold `L` was built with.
#[derive(Debug, Clone, PartialEq)]
pub struct InductionModel {
    pub uncommon: HashSet<String>,
    pub common_vocab: HashSet<String>,
    pub threshold: f64,
}

impl InductionModel {
    pub fn empty(threshold: f64) -> Self {
        InductionModel {
            uncommon: HashSet::new(),
            common_vocab: HashSet::new(),
            threshold,
        }
    }

    pub fn in_list(&self, w: &str) -> bool {
        self.uncommon.contains(w)
    }

    /// `L` sorted lexicographically.
    pub fn sorted_list(&self) -> Vec<&str> {
        let set: BTreeSet<&str> = self.uncommon.iter().map(String::as_str).collect();
        set.into_iter().collect()
    }

    pub fn sorted_common_vocab(&self) -> Vec<&str> {
        let set: BTreeSet<&str> = self.common_vocab.iter().map(String::as_str).collect();
        set.into_iter().collect()
    }
}

pub fn check_threshold(t: f64) -> Result<()> {
    if t > 0.0 && t <= 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("threshold {t} outside (0, 1]")))
    }
}

pub fn induce_uncommon_list(train: &Corpus, t: f64) -> Result<InductionModel> {
    check_threshold(t)?;
    let counts = count_words(train)?;
    Ok(induce_from_counts(&counts, t))
}

/// Builds `L` from precomputed counts. `t` must already be validated.
pub fn induce_from_counts(counts: &WordCounts, t: f64) -> InductionModel {
    let uncommon = counts
        .entity
        .iter()
        .filter(|(_, &e)| e > 0)
        .filter(|(w, &e)| {
            let c = counts.common_count(w);
            e as f64 / (e + c) as f64 >= t
        })
        .map(|(w, _)| w.clone())
        .collect();
    let common_vocab = counts
        .common
        .iter()
        .filter(|(_, &c)| c > 0)
        .map(|(w, _)| w.clone())
        .collect();
    InductionModel {
        uncommon,
        common_vocab,
        threshold: t,
    }
}

/// True when `w` is in `L` or absent from the training common text.
pub fn is_uncommon(w: &str, model: &InductionModel) -> bool {
    model.uncommon.contains(w) || !model.common_vocab.contains(w)
}

/// One word per line, sorted.
pub fn render_list(model: &InductionModel) -> String {
    let mut out = String::new();
    for w in model.sorted_list() {
        out.push_str(w);
        out.push('\n');
    }
    out
}
