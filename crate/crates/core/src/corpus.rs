//! Annotated corpora and the CoNLL column format.
//!
//! A file holds one token per line with whitespace separated columns
//! `surface pos [lemma] [chunk ...] tag`. Blank lines end sentences and a
//! line starting with `-DOCSTART-` starts a new document. The last column
//! carries an IOB1 or BIO tag when the corpus is labeled.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::util;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub pos: String,
    pub lemma: Option<String>,
    pub index: usize,
}

impl Token {
    pub fn new(surface: impl Into<String>, pos: impl Into<String>, index: usize) -> Self {
        Token {
            surface: surface.into(),
            pos: pos.into(),
            lemma: None,
            index,
        }
    }

    /// The lemma, falling back to the lowercased surface.
    pub fn lemma_or_lower(&self) -> String {
        match &self.lemma {
            Some(l) => l.clone(),
            None => self.surface.to_lowercase(),
        }
    }
}

/// Half-open token interval `[start, end)` with an entity category.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntitySpan {
    pub start: usize,
    pub end: usize,
    pub etype: String,
}

impl EntitySpan {
    pub fn new(start: usize, end: usize, etype: impl Into<String>) -> Self {
        EntitySpan {
            start,
            end,
            etype: etype.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub entities: Vec<EntitySpan>,
}

impl Sentence {
    /// Builds a sentence from `(surface, pos)` pairs and spans, checking
    /// the span invariants.
    pub fn from_pairs(pairs: &[(&str, &str)], entities: Vec<EntitySpan>) -> Result<Self> {
        let tokens = pairs
            .iter()
            .enumerate()
            .map(|(i, (w, p))| Token::new(*w, *p, i))
            .collect();
        let s = Sentence { tokens, entities };
        s.validate()?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Checks token and span invariants: non-empty whitespace-free
    /// surfaces, non-empty POS, sorted non-overlapping in-bounds spans.
    pub fn validate(&self) -> Result<()> {
        for (i, t) in self.tokens.iter().enumerate() {
            if t.surface.is_empty() || t.surface.chars().any(char::is_whitespace) {
                return Err(Error::Usage(format!(
                    "token {i} has invalid surface {:?}",
                    t.surface
                )));
            }
            if t.pos.is_empty() {
                return Err(Error::Usage(format!("token {i} has empty POS")));
            }
        }
        let mut prev_end = 0;
        for span in &self.entities {
            if span.start >= span.end || span.end > self.tokens.len() {
                return Err(Error::Usage(format!(
                    "span [{}, {}) out of bounds for sentence of length {}",
                    span.start,
                    span.end,
                    self.tokens.len()
                )));
            }
            if span.start < prev_end {
                return Err(Error::Usage(format!(
                    "span [{}, {}) overlaps or is out of order",
                    span.start, span.end
                )));
            }
            prev_end = span.end;
        }
        Ok(())
    }

    /// Per-token entity membership: `Some(k)` when token is covered by
    /// `entities[k]`.
    pub fn coverage(&self) -> Vec<Option<usize>> {
        let mut cov = vec![None; self.tokens.len()];
        for (k, span) in self.entities.iter().enumerate() {
            for c in &mut cov[span.start..span.end] {
                *c = Some(k);
            }
        }
        cov
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Split {
    #[default]
    Train,
    Dev,
    Test,
    Unlabeled,
}

impl Split {
    pub fn is_labeled(self) -> bool {
        self != Split::Unlabeled
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            "unlabeled" => Ok(Split::Unlabeled),
            _ => Err(Error::Config(format!("unknown split {s:?}"))),
        }
    }
}

/// Sentences grouped into documents. `doc_starts[d]` is the index of the
/// first sentence of document `d`; document `d` ends where `d + 1` starts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
    pub doc_starts: Vec<usize>,
    pub split: Split,
}

impl Corpus {
    pub fn new(split: Split) -> Self {
        Corpus {
            sentences: Vec::new(),
            doc_starts: Vec::new(),
            split,
        }
    }

    /// A single-document corpus.
    pub fn from_sentences(sentences: Vec<Sentence>, split: Split) -> Self {
        let doc_starts = if sentences.is_empty() {
            vec![]
        } else {
            vec![0]
        };
        Corpus {
            sentences,
            doc_starts,
            split,
        }
    }

    pub fn num_documents(&self) -> usize {
        self.doc_starts.len()
    }

    pub fn num_tokens(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    pub fn num_entities(&self) -> usize {
        self.sentences.iter().map(|s| s.entities.len()).sum()
    }

    /// Sentence index range of each document.
    pub fn documents(&self) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
        self.doc_starts.iter().enumerate().map(move |(d, &start)| {
            let end = self
                .doc_starts
                .get(d + 1)
                .copied()
                .unwrap_or(self.sentences.len());
            start..end
        })
    }

    pub(crate) fn require_labeled(&self, what: &str) -> Result<()> {
        if self.split.is_labeled() {
            Ok(())
        } else {
            Err(Error::Usage(format!("{what} requires a labeled corpus")))
        }
    }

    /// Concatenates corpora; each input's documents stay separate.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Corpus>, split: Split) -> Corpus {
        let mut out = Corpus::new(split);
        for c in parts {
            let offset = out.sentences.len();
            out.doc_starts
                .extend(c.doc_starts.iter().map(|d| d + offset));
            out.sentences.extend(c.sentences.iter().cloned());
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BioVariant {
    /// `B-` only separates adjacent spans of the same type.
    #[default]
    Iob1,
    /// Every span starts with `B-`.
    Bio,
}

impl FromStr for BioVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "iob1" => Ok(BioVariant::Iob1),
            "bio" | "iob2" => Ok(BioVariant::Bio),
            _ => Err(Error::Config(format!("unknown tag encoding {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub bio_variant: BioVariant,
    pub has_lemma_column: bool,
    pub split: Split,
}

const DOCSTART: &str = "-DOCSTART-";

/// Placeholder for a missing lemma when a lemma column is written.
const NO_LEMMA: &str = "_";

pub fn load_conll(path: impl AsRef<Path>, opts: LoadOptions) -> Result<Corpus> {
    let path = path.as_ref();
    let text = util::read_to_string(path)?;
    parse_conll(&text, path, opts)
}

/// Parses CoNLL text; `origin` only labels error messages.
pub fn parse_conll(text: &str, origin: &Path, opts: LoadOptions) -> Result<Corpus> {
    let labeled = opts.split.is_labeled();
    let min_cols = 2 + usize::from(opts.has_lemma_column) + usize::from(labeled);

    let mut corpus = Corpus::new(opts.split);
    let mut tokens: Vec<Token> = Vec::new();
    let mut tags: Vec<(usize, String)> = Vec::new();

    let flush = |corpus: &mut Corpus,
                 tokens: &mut Vec<Token>,
                 tags: &mut Vec<(usize, String)>|
     -> Result<()> {
        if tokens.is_empty() {
            return Ok(());
        }
        let entities = if labeled {
            decode_tags(tags, opts.bio_variant, origin)?
        } else {
            Vec::new()
        };
        if corpus.doc_starts.is_empty() {
            corpus.doc_starts.push(0);
        }
        corpus.sentences.push(Sentence {
            tokens: std::mem::take(tokens),
            entities,
        });
        tags.clear();
        Ok(())
    };

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim_end_matches('\r');
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.is_empty() {
            flush(&mut corpus, &mut tokens, &mut tags)?;
            continue;
        }
        if cols[0] == DOCSTART {
            flush(&mut corpus, &mut tokens, &mut tags)?;
            corpus.doc_starts.push(corpus.sentences.len());
            continue;
        }
        if cols.len() < min_cols {
            return Err(Error::parse(
                origin,
                lineno,
                format!("expected at least {min_cols} columns, found {}", cols.len()),
            ));
        }
        let mut token = Token::new(cols[0], cols[1], tokens.len());
        if opts.has_lemma_column && cols[2] != NO_LEMMA {
            token.lemma = Some(cols[2].to_string());
        }
        if labeled {
            tags.push((lineno, cols[cols.len() - 1].to_string()));
        }
        tokens.push(token);
    }
    flush(&mut corpus, &mut tokens, &mut tags)?;
    Ok(corpus)
}

fn split_tag(tag: &str) -> Option<(char, &str)> {
    if tag == "O" {
        return Some(('O', ""));
    }
    let (prefix, etype) = tag.split_once('-')?;
    let p = match prefix {
        "B" => 'B',
        "I" => 'I',
        _ => return None,
    };
    if etype.is_empty() {
        return None;
    }
    Some((p, etype))
}

fn decode_tags(
    tags: &[(usize, String)],
    variant: BioVariant,
    origin: &Path,
) -> Result<Vec<EntitySpan>> {
    let mut spans: Vec<EntitySpan> = Vec::new();
    let mut open: Option<EntitySpan> = None;
    for (i, (lineno, tag)) in tags.iter().enumerate() {
        let (prefix, etype) = split_tag(tag)
            .ok_or_else(|| Error::parse(origin, *lineno, format!("malformed tag {tag:?}")))?;
        match prefix {
            'O' => spans.extend(open.take()),
            'B' => {
                spans.extend(open.take());
                open = Some(EntitySpan::new(i, i + 1, etype));
            }
            _ => match open.as_mut() {
                Some(span) if span.etype == etype => span.end = i + 1,
                _ => {
                    if variant == BioVariant::Bio {
                        return Err(Error::parse(
                            origin,
                            *lineno,
                            format!("tag {tag:?} does not continue a {etype} span"),
                        ));
                    }
                    spans.extend(open.take());
                    open = Some(EntitySpan::new(i, i + 1, etype));
                }
            },
        }
    }
    spans.extend(open);
    Ok(spans)
}

/// BIO tag per token of `s`.
pub fn bio_tags(s: &Sentence) -> Vec<String> {
    let mut tags = vec!["O".to_string(); s.len()];
    for span in &s.entities {
        tags[span.start] = format!("B-{}", span.etype);
        for t in &mut tags[span.start + 1..span.end] {
            *t = format!("I-{}", span.etype);
        }
    }
    tags
}

/// Renders `corpus` as BIO-encoded CoNLL text. A lemma column is written
/// when any token carries a lemma.
pub fn render_conll(corpus: &Corpus) -> String {
    let with_lemma = corpus
        .sentences
        .iter()
        .flat_map(|s| &s.tokens)
        .any(|t| t.lemma.is_some());
    let labeled = corpus.split.is_labeled();
    let mut out = String::new();
    for doc in corpus.documents() {
        out.push_str("-DOCSTART- -X- -X- O\n\n");
        for s in &corpus.sentences[doc] {
            let tags = bio_tags(s);
            for (t, tag) in s.tokens.iter().zip(&tags) {
                out.push_str(&t.surface);
                out.push(' ');
                out.push_str(&t.pos);
                if with_lemma {
                    out.push(' ');
                    out.push_str(t.lemma.as_deref().unwrap_or(NO_LEMMA));
                }
                if labeled {
                    let _ = write!(out, " {tag}");
                }
                out.push('\n');
            }
            out.push('\n');
        }
    }
    out
}

/// Writes `corpus` in BIO encoding. Load the result with
/// [`BioVariant::Bio`] (and `has_lemma_column` when lemmas are present).
pub fn write_conll(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    util::write_atomic(path.as_ref(), render_conll(corpus).as_bytes())
}

/// Entity types dropped by [`normalize_ontonotes`] by default.
pub const DEFAULT_REMOVED_TYPES: [&str; 7] = [
    "CARDINAL", "DATE", "MONEY", "ORDINAL", "PERCENT", "QUANTITY", "TIME",
];

pub fn default_removed_types() -> BTreeSet<String> {
    DEFAULT_REMOVED_TYPES
        .iter()
        .map(|s| s.to_string())
        .collect()
}

/// Drops numeric-like entity types and moves leading "the" and trailing
/// "'s" tokens out of every remaining span.
pub fn normalize_ontonotes(corpus: &Corpus, removed_types: &BTreeSet<String>) -> Corpus {
    let mut out = corpus.clone();
    for s in &mut out.sentences {
        let tokens = &s.tokens;
        s.entities = s
            .entities
            .iter()
            .filter(|span| !removed_types.contains(&span.etype))
            .filter_map(|span| {
                let mut span = span.clone();
                while span.start < span.end
                    && tokens[span.start].surface.eq_ignore_ascii_case("the")
                {
                    span.start += 1;
                }
                while span.start < span.end
                    && tokens[span.end - 1].surface.eq_ignore_ascii_case("'s")
                {
                    span.end -= 1;
                }
                (!span.is_empty()).then_some(span)
            })
            .collect();
    }
    out
}
