//! End-to-end model: induction state, lexicon, word clusters, feature
//! switches and the trained CRF, plus the text model file that holds all
//! of them.

use std::fmt::Write as _;
use std::path::Path;

use indexmap::IndexSet;
use rayon::prelude::*;

use crate::corpus::{bio_tags, Corpus, EntitySpan, Sentence};
use crate::crf::{train_instances, CrfModel, FeatureSpace, SpaceBuilder, TrainConfig, TrainMeta};
use crate::error::{Error, Result};
use crate::features::{extract_features, ClusterMap, FeatureConfig, FeatureVector};
use crate::induction::{check_threshold, induce_uncommon_list, InductionModel};
use crate::lexicon::{Category, Lexicon};
use crate::scheme::{extract_entities, label_sentence, pretag_sentence, LabelTag};
use crate::util;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub threshold: f64,
    /// Suffix labeling tags with the entity type.
    pub typed: bool,
    pub features: FeatureConfig,
    pub train: TrainConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            threshold: 1.0,
            typed: true,
            features: FeatureConfig::default(),
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UgtoModel {
    pub crf: CrfModel,
    pub induction: InductionModel,
    pub lexicon: Lexicon,
    pub clusters: ClusterMap,
    pub features: FeatureConfig,
    pub typed: bool,
}

/// Sentences per batch when extracting training features.
const BATCH: usize = 512;

/// Lexicon with every category present, so snapshots round-trip.
fn normalized(mut lex: Lexicon) -> Lexicon {
    for c in Category::WITH_ENTITY_TOKENS {
        lex.entity_tokens.entry(c).or_default();
    }
    for c in Category::ALL {
        lex.triggers.entry(c).or_default();
    }
    lex
}

fn sentence_features(
    s: &Sentence,
    ind: &InductionModel,
    lex: &Lexicon,
    clusters: &ClusterMap,
    cfg: FeatureConfig,
) -> Vec<FeatureVector> {
    let pretags = pretag_sentence(s, ind, lex);
    extract_features(s, &pretags, lex, clusters, cfg).expect("one pre-tag per token")
}

impl UgtoModel {
    /// Induces `L` from `train`, labels it and fits the CRF.
    pub fn train(
        train: &Corpus,
        lexicon: Lexicon,
        clusters: ClusterMap,
        cfg: &PipelineConfig,
    ) -> Result<Self> {
        check_threshold(cfg.threshold)?;
        train.require_labeled("training")?;
        let lexicon = normalized(lexicon);
        let induction = induce_uncommon_list(train, cfg.threshold)?;

        let sentences: Vec<&Sentence> = train.sentences.iter().filter(|s| !s.is_empty()).collect();
        let mut builder = SpaceBuilder::new();
        for batch in sentences.chunks(BATCH) {
            let prepared: Vec<(Vec<FeatureVector>, Vec<LabelTag>)> = batch
                .par_iter()
                .map(|s| {
                    let x = sentence_features(s, &induction, &lexicon, &clusters, cfg.features);
                    let y = label_sentence(s, &induction, &lexicon, cfg.typed);
                    (x, y)
                })
                .collect();
            for (x, y) in &prepared {
                builder.add(x, y.iter().map(LabelTag::to_string))?;
            }
        }
        let (space, instances) = builder.finish()?;
        let crf = train_instances(space, &instances, &cfg.train)?;
        Ok(UgtoModel {
            crf,
            induction,
            lexicon,
            clusters,
            features: cfg.features,
            typed: cfg.typed,
        })
    }

    pub fn features_for(&self, s: &Sentence) -> Vec<FeatureVector> {
        sentence_features(
            s,
            &self.induction,
            &self.lexicon,
            &self.clusters,
            self.features,
        )
    }

    pub fn tag_sentence(&self, s: &Sentence) -> Vec<LabelTag> {
        if s.is_empty() {
            return Vec::new();
        }
        self.crf
            .tag(&self.features_for(s))
            .into_iter()
            .map(|l| l.parse().expect("model labels are valid tags"))
            .collect()
    }

    /// Tags every sentence; output order matches input order.
    pub fn tag_corpus(&self, corpus: &Corpus) -> Vec<Vec<LabelTag>> {
        corpus
            .sentences
            .par_iter()
            .map(|s| self.tag_sentence(s))
            .collect()
    }

    pub fn extract(&self, s: &Sentence) -> Vec<EntitySpan> {
        extract_entities(&self.tag_sentence(s))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        util::write_atomic(path.as_ref(), self.render().as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&util::read_to_string(path)?, path)
    }
}

pub fn save_model(model: &UgtoModel, path: impl AsRef<Path>) -> Result<()> {
    model.save(path)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<UgtoModel> {
    UgtoModel::load(path)
}

/// CoNLL output of a tagged corpus: `surface pos raw-tag bio-tag`.
pub fn render_tagged(corpus: &Corpus, tags: &[Vec<LabelTag>]) -> String {
    let mut out = String::new();
    for doc in corpus.documents() {
        out.push_str("-DOCSTART- -X- O O\n\n");
        for (s, raw) in corpus.sentences[doc.clone()].iter().zip(&tags[doc]) {
            let predicted = Sentence {
                tokens: s.tokens.clone(),
                entities: extract_entities(raw),
            };
            for ((tok, r), bio) in s.tokens.iter().zip(raw).zip(bio_tags(&predicted)) {
                let _ = writeln!(out, "{} {} {r} {bio}", tok.surface, tok.pos);
            }
            out.push('\n');
        }
    }
    out
}

pub const MAGIC: &str = "UGTO-MODEL";
pub const VERSION: &str = "v1";

const SECTIONS: [&str; 8] = [
    "meta",
    "labels",
    "induction",
    "lexicon",
    "clusters",
    "transitions",
    "state-features",
    "end",
];

fn push_weights(out: &mut String, ws: &[f64]) {
    for w in ws {
        let _ = write!(out, "\t{w}");
    }
    out.push('\n');
}

impl UgtoModel {
    /// Model file text. Weights use the shortest decimal that parses back
    /// to the same `f64`.
    pub fn render(&self) -> String {
        let space = &self.crf.space;
        let k = space.num_labels();
        let mut out = format!("{MAGIC} {VERSION}\n");

        out.push_str("[meta]\n");
        let meta = &self.crf.meta;
        let _ = writeln!(out, "typed\t{}", self.typed);
        let _ = writeln!(out, "use_pretags\t{}", self.features.use_pretags);
        let _ = writeln!(out, "use_clusters\t{}", self.features.use_clusters);
        let _ = writeln!(out, "use_lexical\t{}", self.features.use_lexical);
        let _ = writeln!(out, "l2\t{}", meta.l2);
        let _ = writeln!(out, "iterations\t{}", meta.iterations);
        let _ = writeln!(out, "final_objective\t{}", meta.final_objective);
        let _ = writeln!(out, "labels\t{k}");
        let _ = writeln!(out, "features\t{}", space.num_features());

        out.push_str("[labels]\n");
        for l in space.labels() {
            let _ = writeln!(out, "{l}");
        }

        out.push_str("[induction]\n");
        let _ = writeln!(out, "threshold\t{}", self.induction.threshold);
        for w in self.induction.sorted_list() {
            let _ = writeln!(out, "L\t{w}");
        }
        for w in self.induction.sorted_common_vocab() {
            let _ = writeln!(out, "common\t{w}");
        }

        out.push_str("[lexicon]\n");
        for (c, words) in &self.lexicon.entity_tokens {
            for w in words {
                let _ = writeln!(out, "entity.{}\t{w}", c.file_stem());
            }
        }
        for (c, words) in &self.lexicon.triggers {
            for w in words {
                let _ = writeln!(out, "trigger.{}\t{w}", c.file_stem());
            }
        }
        for w in &self.lexicon.generic_modifiers {
            let _ = writeln!(out, "generic\t{w}");
        }

        out.push_str("[clusters]\n");
        for (w, path) in self.clusters.sorted() {
            let _ = writeln!(out, "{w}\t{path}");
        }

        out.push_str("[transitions]\n");
        for (p, label) in space.labels().iter().enumerate() {
            out.push_str(label);
            push_weights(&mut out, &self.crf.weights[p * k..(p + 1) * k]);
        }

        out.push_str("[state-features]\n");
        for (f, name) in space.features().enumerate() {
            out.push_str(name);
            push_weights(&mut out, self.crf.state_weights(f as u32));
        }
        out.push_str("[end]\n");
        out
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
        let perr = |line: usize, msg: String| Error::parse(origin, line, msg);

        match lines.next() {
            Some((_, first)) => match first.split_once(' ') {
                Some((MAGIC, VERSION)) => {}
                Some((MAGIC, v)) => return Err(Error::UnsupportedVersion(v.to_string())),
                _ => return Err(perr(1, format!("missing {MAGIC} header"))),
            },
            None => return Err(perr(0, "empty model file".into())),
        }

        // Split into sections, checking their order.
        let mut sections: Vec<Vec<(usize, &str)>> = Vec::new();
        let mut last_line = 1;
        for (n, line) in lines {
            last_line = n;
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let expected = SECTIONS.get(sections.len()).copied();
                if expected != Some(name) {
                    return Err(perr(
                        n,
                        format!("expected section {expected:?}, found [{name}]"),
                    ));
                }
                sections.push(Vec::new());
                continue;
            }
            match sections.last_mut() {
                Some(s) => s.push((n, line)),
                None => return Err(perr(n, "content before first section".into())),
            }
        }
        if sections.len() != SECTIONS.len() {
            return Err(perr(last_line, "truncated model file".into()));
        }
        if let Some((n, _)) = sections[7].first() {
            return Err(perr(*n, "content after [end]".into()));
        }

        let fields = |n: usize, line: &str, arity: usize| -> Result<Vec<String>> {
            let f: Vec<String> = line.split('\t').map(str::to_string).collect();
            if f.len() != arity {
                return Err(perr(
                    n,
                    format!("expected {arity} fields, found {}", f.len()),
                ));
            }
            Ok(f)
        };
        fn num<T: std::str::FromStr>(origin: &Path, n: usize, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::parse(origin, n, format!("bad number {v:?}")))
        }

        // [meta]
        let mut typed = None;
        let mut feats = FeatureConfig::default();
        let mut meta = TrainMeta::default();
        let mut num_labels = None;
        let mut num_features = None;
        for &(n, line) in &sections[0] {
            let f = fields(n, line, 2)?;
            let v = f[1].as_str();
            let flag = || -> Result<bool> { num(origin, n, v) };
            match f[0].as_str() {
                "typed" => typed = Some(flag()?),
                "use_pretags" => feats.use_pretags = flag()?,
                "use_clusters" => feats.use_clusters = flag()?,
                "use_lexical" => feats.use_lexical = flag()?,
                "l2" => meta.l2 = num(origin, n, v)?,
                "iterations" => meta.iterations = num(origin, n, v)?,
                "final_objective" => meta.final_objective = num(origin, n, v)?,
                "labels" => num_labels = Some(num::<usize>(origin, n, v)?),
                "features" => num_features = Some(num::<usize>(origin, n, v)?),
                other => return Err(perr(n, format!("unknown meta key {other:?}"))),
            }
        }
        let (Some(typed), Some(num_labels), Some(num_features)) = (typed, num_labels, num_features)
        else {
            return Err(perr(1, "incomplete [meta] section".into()));
        };

        // [labels]
        let labels: Vec<String> = sections[1].iter().map(|(_, l)| l.to_string()).collect();
        if labels.len() != num_labels {
            return Err(perr(
                1,
                format!("expected {num_labels} labels, found {}", labels.len()),
            ));
        }
        for (n, l) in &sections[1] {
            l.parse::<LabelTag>().map_err(|e| perr(*n, e.to_string()))?;
        }

        // [induction]
        let mut induction = InductionModel::empty(1.0);
        for &(n, line) in &sections[2] {
            let f = fields(n, line, 2)?;
            match f[0].as_str() {
                "threshold" => induction.threshold = num(origin, n, &f[1])?,
                "L" => {
                    induction.uncommon.insert(f[1].clone());
                }
                "common" => {
                    induction.common_vocab.insert(f[1].clone());
                }
                other => return Err(perr(n, format!("unknown induction key {other:?}"))),
            }
        }

        // [lexicon]
        let mut lexicon = normalized(Lexicon::default());
        for &(n, line) in &sections[3] {
            let f = fields(n, line, 2)?;
            let word = f[1].clone();
            match f[0].split_once('.') {
                Some(("entity", c)) => {
                    let c: Category = c.parse().map_err(|e: Error| perr(n, e.to_string()))?;
                    lexicon.entity_tokens.entry(c).or_default().insert(word);
                }
                Some(("trigger", c)) => {
                    let c: Category = c.parse().map_err(|e: Error| perr(n, e.to_string()))?;
                    lexicon.triggers.entry(c).or_default().insert(word);
                }
                None if f[0] == "generic" => {
                    lexicon.generic_modifiers.insert(word);
                }
                _ => return Err(perr(n, format!("unknown lexicon key {:?}", f[0]))),
            }
        }

        // [clusters]
        let mut clusters = ClusterMap::default();
        for &(n, line) in &sections[4] {
            let f = fields(n, line, 2)?;
            clusters.paths.insert(f[0].clone(), f[1].clone());
        }

        // [transitions]
        let k = num_labels;
        let mut weights = Vec::with_capacity(k * k + num_features * k);
        if sections[5].len() != k {
            return Err(perr(
                1,
                format!("expected {k} transition rows, found {}", sections[5].len()),
            ));
        }
        for (row, &(n, line)) in sections[5].iter().enumerate() {
            let f = fields(n, line, k + 1)?;
            if f[0] != labels[row] {
                return Err(perr(
                    n,
                    format!("transition row for {:?} out of order", f[0]),
                ));
            }
            for v in &f[1..] {
                weights.push(num::<f64>(origin, n, v)?);
            }
        }

        // [state-features]
        if sections[6].len() != num_features {
            return Err(perr(
                1,
                format!(
                    "expected {num_features} state features, found {}",
                    sections[6].len()
                ),
            ));
        }
        let mut names = IndexSet::with_capacity(num_features);
        for &(n, line) in &sections[6] {
            let f = fields(n, line, k + 1)?;
            if !names.insert(f[0].clone()) {
                return Err(perr(n, format!("duplicate feature {:?}", f[0])));
            }
            for v in &f[1..] {
                weights.push(num::<f64>(origin, n, v)?);
            }
        }

        let space = FeatureSpace::from_parts(labels, names)?;
        let crf = CrfModel {
            space,
            weights,
            meta,
        };
        crf.check_finite()?;
        Ok(UgtoModel {
            crf,
            induction,
            lexicon,
            clusters,
            features: feats,
            typed,
        })
    }
}
