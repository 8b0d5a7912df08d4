//! Shared test helpers: brute-force oracles and synthetic corpora.
//!
//! Nothing here calls the library's scoring or counting code; the oracles
//! recompute everything from first principles.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexSet;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use ugto::corpus::{Corpus, EntitySpan, Sentence, Split, Token};
use ugto::crf::{FeatureSpace, Instance};
use ugto::lexicon::{Category, Lexicon};

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// CRF oracles

/// A random CRF instance small enough to enumerate.
pub struct CrfCase {
    pub space: FeatureSpace,
    pub weights: Vec<f64>,
    pub data: Vec<Instance>,
}

pub fn random_space(rng: &mut TestRng, k: usize, f: usize) -> FeatureSpace {
    let labels: Vec<String> = (0..k).map(|i| format!("L{i}")).collect();
    let feats: IndexSet<String> = (0..f).map(|i| format!("f{i}")).collect();
    let _ = rng;
    FeatureSpace::from_parts(labels, feats).unwrap()
}

pub fn random_instance(rng: &mut TestRng, n: usize, k: usize, f: usize) -> Instance {
    let attrs = (0..n)
        .map(|_| (0..f as u32).filter(|_| rng.gen_bool(0.5)).collect())
        .collect();
    let labels = (0..n).map(|_| rng.gen_range(0..k)).collect();
    Instance { attrs, labels }
}

/// Random case with `len <= max_len`, `labels <= max_k` and at most
/// `max_weights` weights.
pub fn random_case(
    rng: &mut TestRng,
    max_len: usize,
    max_k: usize,
    max_weights: usize,
    seqs: usize,
) -> CrfCase {
    let k = rng.gen_range(1..=max_k);
    let max_f = (max_weights - k * k) / k;
    let f = rng.gen_range(0..=max_f.min(8));
    let space = random_space(rng, k, f);
    let weights = (0..space.num_weights())
        .map(|_| rng.gen_range(-2.0..2.0))
        .collect();
    let data = (0..seqs)
        .map(|_| {
            let n = rng.gen_range(1..=max_len);
            random_instance(rng, n, k, f)
        })
        .collect();
    CrfCase {
        space,
        weights,
        data,
    }
}

/// Score of a label sequence, written directly from the weight layout
/// (transitions first, then K weights per feature).
pub fn oracle_score(weights: &[f64], k: usize, attrs: &[Vec<u32>], labels: &[usize]) -> f64 {
    let mut s = 0.0;
    for t in 0..attrs.len() {
        for &f in &attrs[t] {
            s += weights[k * k + f as usize * k + labels[t]];
        }
        if t > 0 {
            s += weights[labels[t - 1] * k + labels[t]];
        }
    }
    s
}

/// Calls `visit` with every label sequence of length `n` over `k` labels.
pub fn for_each_sequence(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    let mut y = vec![0usize; n];
    loop {
        visit(&y);
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            y[i] += 1;
            if y[i] < k {
                break;
            }
            y[i] = 0;
        }
    }
}

/// log sum_y exp(score(y)) by explicit enumeration.
pub fn brute_log_z(weights: &[f64], k: usize, attrs: &[Vec<u32>]) -> f64 {
    let mut scores = Vec::new();
    for_each_sequence(attrs.len(), k, |y| {
        scores.push(oracle_score(weights, k, attrs, y))
    });
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln()
}

/// Best score over all label sequences.
pub fn brute_max(weights: &[f64], k: usize, attrs: &[Vec<u32>]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for_each_sequence(attrs.len(), k, |y| {
        best = best.max(oracle_score(weights, k, attrs, y))
    });
    best
}

/// Regularized negative log-likelihood from brute-force partition
/// functions.
pub fn brute_objective(weights: &[f64], k: usize, data: &[Instance], l2: f64) -> f64 {
    let mut obj = 0.0;
    for inst in data {
        obj += brute_log_z(weights, k, &inst.attrs)
            - oracle_score(weights, k, &inst.attrs, &inst.labels);
    }
    obj + l2 * weights.iter().map(|w| w * w).sum::<f64>()
}

// ---------------------------------------------------------------------------
// Induction oracle

/// Uncommon list recomputed by scanning every token against every span.
pub fn brute_uncommon(corpus: &Corpus, t: f64) -> BTreeSet<String> {
    let mut ent: BTreeMap<&str, u64> = BTreeMap::new();
    let mut com: BTreeMap<&str, u64> = BTreeMap::new();
    for s in &corpus.sentences {
        for (i, tok) in s.tokens.iter().enumerate() {
            let inside = s.entities.iter().any(|e| e.start <= i && i < e.end);
            let m = if inside { &mut ent } else { &mut com };
            *m.entry(tok.surface.as_str()).or_insert(0) += 1;
        }
    }
    ent.iter()
        .filter(|(w, &e)| {
            let c = com.get(*w).copied().unwrap_or(0);
            e as f64 / (e + c) as f64 >= t
        })
        .map(|(w, _)| w.to_string())
        .collect()
}

// ---------------------------------------------------------------------------
// Synthetic corpora

const COMMON_POS: [&str; 7] = ["NN", "VBD", "DT", "IN", "JJ", "RB", "VBZ"];

fn syllable_word(rng: &mut TestRng, syllables: usize) -> String {
    const ONSETS: [&str; 12] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t"];
    const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(ONSETS.choose(rng).unwrap());
        w.push_str(VOWELS.choose(rng).unwrap());
    }
    w
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().collect::<String>() + c.as_str(),
        None => String::new(),
    }
}

/// Distinct fresh words, `prefix` keeps vocabularies disjoint.
pub fn vocabulary(rng: &mut TestRng, n: usize, prefix: &str, capital: bool) -> Vec<String> {
    let mut set = IndexSet::new();
    while set.len() < n {
        let syl = rng.gen_range(2..=3);
        let w = format!("{prefix}{}", syllable_word(rng, syl));
        set.insert(if capital { capitalize(&w) } else { w });
    }
    set.into_iter().collect()
}

pub const NATIONALITIES: [&str; 6] = [
    "Australian",
    "Brazilian",
    "Chilean",
    "Danish",
    "Estonian",
    "Finnish",
];

pub fn synthetic_lexicon() -> Lexicon {
    let set = |ws: &[&str]| ws.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
    let mut lex = Lexicon::default();
    lex.entity_tokens
        .insert(Category::Misc, set(&NATIONALITIES));
    lex.triggers
        .insert(Category::Org, set(&["Department", "Inc", "Ministry"]));
    lex.triggers.insert(Category::Misc, set(&["Cup"]));
    lex.triggers.insert(Category::Per, set(&["Mr."]));
    lex.generic_modifiers = set(&["of", "and"]);
    lex
}

#[derive(Debug, Clone)]
pub struct SynthVocab {
    pub common: Vec<(String, &'static str)>,
    /// Capitalized words tagged NNP that only occur outside entities.
    pub common_proper: Vec<String>,
    pub entity: Vec<String>,
}

impl SynthVocab {
    pub fn new(
        rng: &mut TestRng,
        n_common: usize,
        n_common_proper: usize,
        n_entity: usize,
    ) -> Self {
        let common = vocabulary(rng, n_common, "", false)
            .into_iter()
            .map(|w| (w, *COMMON_POS.choose(rng).unwrap()))
            .collect();
        SynthVocab {
            common,
            common_proper: vocabulary(rng, n_common_proper, "q", true),
            entity: vocabulary(rng, n_entity, "z", true),
        }
    }
}

fn push(tokens: &mut Vec<Token>, w: &str, pos: &str) {
    let i = tokens.len();
    tokens.push(Token::new(w, pos, i));
}

/// One entity of a random type; returns its span.
fn push_entity(rng: &mut TestRng, tokens: &mut Vec<Token>, names: &[String]) -> EntitySpan {
    let start = tokens.len();
    let pick = |rng: &mut TestRng| names.choose(rng).unwrap().clone();
    let etype = match rng.gen_range(0..6) {
        0 => {
            push(tokens, &pick(rng), "NNP");
            push(tokens, &pick(rng), "NNP");
            "PER"
        }
        1 => {
            push(tokens, &pick(rng), "NNP");
            "LOC"
        }
        2 => {
            push(tokens, &pick(rng), "NNP");
            push(tokens, "Department", "NN");
            push(tokens, "of", "IN");
            push(tokens, &pick(rng), "NNP");
            "ORG"
        }
        3 => {
            push(tokens, &pick(rng), "NNP");
            push(tokens, "Inc", "NNP");
            "ORG"
        }
        4 => {
            push(tokens, NATIONALITIES.choose(rng).unwrap(), "JJ");
            push(tokens, "Cup", "NN");
            "MISC"
        }
        _ => {
            push(tokens, NATIONALITIES.choose(rng).unwrap(), "JJ");
            "MISC"
        }
    };
    EntitySpan::new(start, tokens.len(), etype)
}

/// A sentence of common words with one to three entities separated by at
/// least one common word. `proper_rate` is the chance that a filler slot
/// holds a common proper noun.
pub fn synth_sentence(
    rng: &mut TestRng,
    vocab: &SynthVocab,
    names: &[String],
    proper: &[String],
    proper_rate: f64,
) -> Sentence {
    let mut tokens = Vec::new();
    let mut entities = Vec::new();
    let n_ent = rng.gen_range(1..=3);
    let filler = |rng: &mut TestRng, tokens: &mut Vec<Token>| {
        let n = rng.gen_range(1..=4);
        for _ in 0..n {
            if !proper.is_empty() && rng.gen_bool(proper_rate) {
                push(tokens, proper.choose(rng).unwrap(), "NNP");
            } else {
                let (w, p) = vocab.common.choose(rng).unwrap();
                push(tokens, w, p);
            }
        }
    };
    if rng.gen_bool(0.5) {
        filler(rng, &mut tokens);
    }
    for _ in 0..n_ent {
        entities.push(push_entity(rng, &mut tokens, names));
        filler(rng, &mut tokens);
    }
    // keep "of" in common text as well
    if rng.gen_bool(0.3) {
        push(&mut tokens, "of", "IN");
        filler(rng, &mut tokens);
    }
    let s = Sentence { tokens, entities };
    s.validate().unwrap();
    s
}

pub fn corpus_of(sentences: Vec<Sentence>, split: Split) -> Corpus {
    Corpus::from_sentences(sentences, split)
}

/// Random labeled sentences for property tests: arbitrary words from a
/// small vocabulary, random non-adjacent same-type spans when
/// `no_adjacent_same_type`.
pub fn random_labeled_sentence(
    rng: &mut TestRng,
    max_len: usize,
    no_adjacent_same_type: bool,
) -> Sentence {
    const WORDS: [(&str, &str); 10] = [
        ("Japan", "NNP"),
        ("of", "IN"),
        ("Department", "NN"),
        ("the", "DT"),
        ("Boston", "NNP"),
        ("won", "VBD"),
        ("Australian", "JJ"),
        ("U.S.-based", "JJ"),
        ("firm", "NN"),
        ("Reuters", "NNP"),
    ];
    const TYPES: [&str; 4] = ["PER", "LOC", "ORG", "MISC"];
    let n = rng.gen_range(1..=max_len);
    let tokens: Vec<Token> = (0..n)
        .map(|i| {
            let (w, p) = WORDS.choose(rng).unwrap();
            Token::new(*w, *p, i)
        })
        .collect();
    let mut entities: Vec<EntitySpan> = Vec::new();
    let mut i = 0;
    while i < n {
        if rng.gen_bool(0.35) {
            let len = rng.gen_range(1..=3).min(n - i);
            let mut etype = *TYPES.choose(rng).unwrap();
            if no_adjacent_same_type {
                if let Some(prev) = entities.last() {
                    if prev.end == i {
                        while etype == prev.etype {
                            etype = TYPES.choose(rng).unwrap();
                        }
                    }
                }
            }
            entities.push(EntitySpan::new(i, i + len, etype));
            i += len;
        } else {
            i += 1;
        }
    }
    Sentence { tokens, entities }
}
