//! Corpus characteristic reports: how many entities contain an uncommon
//! word, and which POS tags make up entities.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::corpus::{Corpus, Split};
use crate::error::{Error, Result};
use crate::induction::{count_words, induce_from_counts};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scope {
    /// All given sets pooled into one.
    #[default]
    Entire,
    /// Each set on its own.
    PerSplit,
    Both,
}

impl FromStr for Scope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "entire" => Ok(Scope::Entire),
            "per-split" | "split" => Ok(Scope::PerSplit),
            "both" | "all" => Ok(Scope::Both),
            _ => Err(Error::Config(format!("unknown scope {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UncommonRow {
    pub set: String,
    pub entities: usize,
    pub with_uncommon: usize,
}

impl UncommonRow {
    pub fn percentage(&self) -> f64 {
        if self.entities == 0 {
            0.0
        } else {
            100.0 * self.with_uncommon as f64 / self.entities as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UncommonReport {
    pub threshold: f64,
    pub rows: Vec<UncommonRow>,
}

/// Share of entities holding at least one word whose entity rate within
/// the same set reaches `t`.
pub fn uncommon_in_set(corpus: &Corpus, t: f64) -> Result<UncommonRow> {
    let counts = count_words(corpus)?;
    let rates = induce_from_counts(&counts, t);
    let mut row = UncommonRow {
        set: String::new(),
        entities: 0,
        with_uncommon: 0,
    };
    for s in &corpus.sentences {
        for span in &s.entities {
            row.entities += 1;
            if s.tokens[span.start..span.end]
                .iter()
                .any(|tok| rates.in_list(&tok.surface))
            {
                row.with_uncommon += 1;
            }
        }
    }
    Ok(row)
}

/// `sets` are named labeled corpora (e.g. train/dev/test). Rates are
/// always recomputed inside the set being reported.
pub fn uncommon_report(sets: &[(&str, &Corpus)], t: f64, scope: Scope) -> Result<UncommonReport> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Config(format!("threshold {t} outside (0, 1]")));
    }
    let mut rows = Vec::new();
    if matches!(scope, Scope::Entire | Scope::Both) {
        let all = Corpus::concat(sets.iter().map(|(_, c)| *c), Split::Train);
        for (_, c) in sets {
            c.require_labeled("uncommon report")?;
        }
        let mut row = uncommon_in_set(&all, t)?;
        row.set = "entire".into();
        rows.push(row);
    }
    if matches!(scope, Scope::PerSplit | Scope::Both) {
        for (name, c) in sets {
            let mut row = uncommon_in_set(c, t)?;
            row.set = name.to_string();
            rows.push(row);
        }
    }
    Ok(UncommonReport { threshold: t, rows })
}

impl UncommonReport {
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "threshold t = {}", self.threshold);
        let _ = writeln!(
            out,
            "{:<10} {:>10} {:>14} {:>8}",
            "set", "entities", "with-uncommon", "%"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<10} {:>10} {:>14} {:>8.2}",
                r.set,
                r.entities,
                r.with_uncommon,
                r.percentage()
            );
        }
        out
    }

    pub fn render_csv(&self) -> String {
        let mut out = String::from("set,entities,with_uncommon,percentage\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{:.2}",
                r.set,
                r.entities,
                r.with_uncommon,
                r.percentage()
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosRow {
    pub pos: String,
    pub in_entity: usize,
    pub total: usize,
    /// Share of in-entity tokens carrying this tag.
    pub p_entity: f64,
    /// Share of this tag's occurrences that fall inside entities.
    pub p_text: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosReport {
    pub entity_tokens: usize,
    /// Sorted by `p_entity` descending, then tag.
    pub rows: Vec<PosRow>,
}

impl PosReport {
    pub fn get(&self, pos: &str) -> Option<&PosRow> {
        self.rows.iter().find(|r| r.pos == pos)
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<8} {:>10} {:>10} {:>9} {:>9}",
            "POS", "in-entity", "total", "P_entity", "P_text"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<8} {:>10} {:>10} {:>9.2} {:>9.2}",
                r.pos, r.in_entity, r.total, r.p_entity, r.p_text
            );
        }
        out
    }

    pub fn render_csv(&self) -> String {
        let mut out = String::from("pos,in_entity,total,p_entity,p_text\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{:.2},{:.2}",
                r.pos, r.in_entity, r.total, r.p_entity, r.p_text
            );
        }
        out
    }
}

pub fn pos_report(corpus: &Corpus) -> Result<PosReport> {
    corpus.require_labeled("POS report")?;
    // tag -> (in entity, total)
    let mut counts: HashMap<&str, (usize, usize)> = HashMap::new();
    let mut entity_tokens = 0;
    for s in &corpus.sentences {
        for (tok, cov) in s.tokens.iter().zip(s.coverage()) {
            let c = counts.entry(tok.pos.as_str()).or_default();
            c.1 += 1;
            if cov.is_some() {
                c.0 += 1;
                entity_tokens += 1;
            }
        }
    }
    let mut rows: Vec<PosRow> = counts
        .into_iter()
        .map(|(pos, (inside, total))| PosRow {
            pos: pos.to_string(),
            in_entity: inside,
            total,
            p_entity: if entity_tokens == 0 {
                0.0
            } else {
                100.0 * inside as f64 / entity_tokens as f64
            },
            p_text: 100.0 * inside as f64 / total as f64,
        })
        .collect();
    rows.sort_by(|a, b| {
        b.in_entity
            .cmp(&a.in_entity)
            .then_with(|| a.pos.cmp(&b.pos))
    });
    Ok(PosReport {
        entity_tokens,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{EntitySpan, Sentence};

    fn corpus(sents: Vec<Sentence>) -> Corpus {
        Corpus::from_sentences(sents, Split::Train)
    }

    #[test]
    fn pos_two_tokens() {
        let s = Sentence::from_pairs(
            &[("Japan", "NNP"), ("won", "VBD")],
            vec![EntitySpan::new(0, 1, "LOC")],
        )
        .unwrap();
        let r = pos_report(&corpus(vec![s])).unwrap();
        assert_eq!(r.get("NNP").unwrap().p_entity, 100.0);
        assert_eq!(r.get("NNP").unwrap().p_text, 100.0);
        assert_eq!(r.get("VBD").unwrap().p_text, 0.0);
        assert_eq!(r.rows[0].pos, "NNP");
    }

    #[test]
    fn uncommon_all_or_nothing() {
        // every entity word also appears outside entities
        let s = Sentence::from_pairs(
            &[("Bank", "NNP"), ("Bank", "NNP"), ("x", "NN")],
            vec![EntitySpan::new(0, 1, "ORG")],
        )
        .unwrap();
        let r = uncommon_report(&[("train", &corpus(vec![s]))], 1.0, Scope::Entire).unwrap();
        assert_eq!(r.rows[0].percentage(), 0.0);

        let s = Sentence::from_pairs(
            &[("Acme", "NNP"), ("x", "NN"), ("Bolt", "NNP")],
            vec![EntitySpan::new(0, 1, "ORG"), EntitySpan::new(2, 3, "ORG")],
        )
        .unwrap();
        let r = uncommon_report(&[("train", &corpus(vec![s]))], 1.0, Scope::Entire).unwrap();
        assert_eq!(r.rows[0].percentage(), 100.0);
    }

    #[test]
    fn per_split_rates_are_local() {
        // "Bank" is common text in `a` but entity-only in `b`
        let a = corpus(vec![Sentence::from_pairs(
            &[("Bank", "NNP"), ("Bank", "NN")],
            vec![EntitySpan::new(0, 1, "ORG")],
        )
        .unwrap()]);
        let b = corpus(vec![Sentence::from_pairs(
            &[("Bank", "NNP")],
            vec![EntitySpan::new(0, 1, "ORG")],
        )
        .unwrap()]);
        let r = uncommon_report(&[("a", &a), ("b", &b)], 1.0, Scope::Both).unwrap();
        let pct: Vec<f64> = r.rows.iter().map(UncommonRow::percentage).collect();
        assert_eq!(pct, vec![0.0, 0.0, 100.0]);
    }

    #[test]
    fn unlabeled_rejected() {
        let c = Corpus::new(Split::Unlabeled);
        assert!(pos_report(&c).is_err());
        assert!(uncommon_report(&[("u", &c)], 1.0, Scope::PerSplit).is_err());
    }
}
