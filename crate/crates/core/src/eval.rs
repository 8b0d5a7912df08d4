//! Exact-match entity scoring.
//!
//! A predicted span counts as correct only when a gold span has the same
//! boundaries (and, in recognition mode, the same type). Extraction mode
//! is recognition over a single collapsed type.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use crate::corpus::EntitySpan;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Boundaries only.
    #[default]
    Extraction,
    /// Boundaries and type.
    Recognition,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "extraction" => Ok(Mode::Extraction),
            "recognition" => Ok(Mode::Recognition),
            _ => Err(Error::Config(format!("unknown scoring mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub gold: usize,
    pub pred: usize,
    pub correct: usize,
}

impl Counts {
    pub fn precision(&self) -> f64 {
        ratio(self.correct, self.pred)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.correct, self.gold)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    fn add(&mut self, other: Counts) {
        self.gold += other.gold;
        self.pred += other.pred;
        self.correct += other.correct;
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub mode: Mode,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub counts: Counts,
    /// Per entity type, recognition mode only.
    pub per_type: BTreeMap<String, Counts>,
}

const COLLAPSED: &str = "";

pub fn score(
    gold: &[Vec<EntitySpan>],
    pred: &[Vec<EntitySpan>],
    mode: Mode,
) -> Result<ScoreReport> {
    if gold.len() != pred.len() {
        return Err(Error::Usage(format!(
            "gold has {} sentences but prediction has {}",
            gold.len(),
            pred.len()
        )));
    }
    let key = |s: &EntitySpan| -> (usize, usize, String) {
        let etype = match mode {
            Mode::Extraction => COLLAPSED.to_string(),
            Mode::Recognition => s.etype.clone(),
        };
        (s.start, s.end, etype)
    };

    let mut total = Counts::default();
    let mut per_type: BTreeMap<String, Counts> = BTreeMap::new();
    for (g, p) in gold.iter().zip(pred) {
        let g: BTreeSet<_> = g.iter().map(key).collect();
        let p: BTreeSet<_> = p.iter().map(key).collect();
        for span in &g {
            per_type.entry(span.2.clone()).or_default().gold += 1;
        }
        for span in &p {
            let c = per_type.entry(span.2.clone()).or_default();
            c.pred += 1;
            if g.contains(span) {
                c.correct += 1;
            }
        }
    }
    for c in per_type.values() {
        total.add(*c);
    }
    if mode == Mode::Extraction {
        per_type.clear();
    }
    Ok(ScoreReport {
        mode,
        precision: total.precision(),
        recall: total.recall(),
        f1: total.f1(),
        counts: total,
        per_type,
    })
}

impl ScoreReport {
    /// Aligned text table with percentages to two decimals.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let mode = match self.mode {
            Mode::Extraction => "extraction",
            Mode::Recognition => "recognition",
        };
        let _ = writeln!(out, "mode: {mode}");
        let _ = writeln!(
            out,
            "{:<10} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
            "type", "gold", "pred", "correct", "P", "R", "F1"
        );
        let row = |out: &mut String, name: &str, c: &Counts| {
            let _ = writeln!(
                out,
                "{:<10} {:>8} {:>8} {:>8} {:>8.2} {:>8.2} {:>8.2}",
                name,
                c.gold,
                c.pred,
                c.correct,
                100.0 * c.precision(),
                100.0 * c.recall(),
                100.0 * c.f1()
            );
        };
        for (t, c) in &self.per_type {
            row(&mut out, t, c);
        }
        row(&mut out, "overall", &self.counts);
        out
    }

    pub fn render_csv(&self) -> String {
        let mut out = String::from("type,gold,pred,correct,precision,recall,f1\n");
        let row = |out: &mut String, name: &str, c: &Counts| {
            let _ = writeln!(
                out,
                "{name},{},{},{},{},{},{}",
                c.gold,
                c.pred,
                c.correct,
                c.precision(),
                c.recall(),
                c.f1()
            );
        };
        for (t, c) in &self.per_type {
            row(&mut out, t, c);
        }
        row(&mut out, "overall", &self.counts);
        out
    }
}
