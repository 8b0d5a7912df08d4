//! Command-line front end.
//!
//! Settings resolve in order defaults, config file (`--config`, flat
//! `key = value` lines), `UGTO_*` environment variables, then flags; later
//! sources win.

use std::collections::BTreeSet;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{pos_report, uncommon_report, Scope};
use crate::corpus::{self, BioVariant, Corpus, LoadOptions, Split};
use crate::error::{Error, Result};
use crate::eval::{score, Mode, ScoreReport};
use crate::features::{load_clusters, ClusterMap, FeatureConfig};
use crate::induction::{induce_uncommon_list, render_list};
use crate::lexicon::{load_lexicon, Category, Lexicon};
use crate::pipeline::{render_tagged, PipelineConfig, UgtoModel};
use crate::scheme::extract_entities;
use crate::util;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub threshold: f64,
    pub typed: bool,
    pub use_pretags: bool,
    pub use_clusters: bool,
    pub use_lexical: bool,
    pub train: Option<PathBuf>,
    pub dev: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub lexicon_dir: Option<PathBuf>,
    pub clusters: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub l2: f64,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    /// Entity-token categories removed from the lexicon.
    pub drop_lexicon: Vec<Category>,
    pub encoding: BioVariant,
    pub lemma_column: bool,
    /// Apply the OntoNotes type filter and boundary clean-up on load.
    pub ontonotes: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            threshold: 1.0,
            typed: true,
            use_pretags: true,
            use_clusters: true,
            use_lexical: true,
            train: None,
            dev: None,
            test: None,
            lexicon_dir: None,
            clusters: None,
            model: None,
            l2: 1.0,
            max_iterations: 200,
            gradient_tolerance: 1e-5,
            drop_lexicon: Vec::new(),
            encoding: BioVariant::Iob1,
            lemma_column: false,
            ontonotes: false,
        }
    }
}

pub const KEYS: [&str; 18] = [
    "threshold",
    "typed",
    "use_pretags",
    "use_clusters",
    "use_lexical",
    "train",
    "dev",
    "test",
    "lexicon_dir",
    "clusters",
    "model",
    "l2",
    "max_iterations",
    "gradient_tolerance",
    "drop_lexicon",
    "encoding",
    "lemma_column",
    "ontonotes",
];

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!(
            "{key}: expected a boolean, got {v:?}"
        ))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: invalid number {v:?}")))
}

impl Config {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let path = || (!v.is_empty()).then(|| PathBuf::from(v));
        match key {
            "threshold" => self.threshold = parse_num(key, v)?,
            "typed" => self.typed = parse_bool(key, v)?,
            "use_pretags" => self.use_pretags = parse_bool(key, v)?,
            "use_clusters" => self.use_clusters = parse_bool(key, v)?,
            "use_lexical" => self.use_lexical = parse_bool(key, v)?,
            "train" => self.train = path(),
            "dev" => self.dev = path(),
            "test" => self.test = path(),
            "lexicon_dir" => self.lexicon_dir = path(),
            "clusters" => self.clusters = path(),
            "model" => self.model = path(),
            "l2" => self.l2 = parse_num(key, v)?,
            "max_iterations" => self.max_iterations = parse_num(key, v)?,
            "gradient_tolerance" => self.gradient_tolerance = parse_num(key, v)?,
            "drop_lexicon" => {
                self.drop_lexicon = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "encoding" => self.encoding = v.parse()?,
            "lemma_column" => self.lemma_column = parse_bool(key, v)?,
            "ontonotes" => self.ontonotes = parse_bool(key, v)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment line.
    pub fn apply_file_text(&mut self, text: &str, origin: &Path) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::parse(origin, i + 1, "expected key = value"));
            };
            self.set(k.trim(), v)
                .map_err(|e| Error::parse(origin, i + 1, e.to_string()))?;
        }
        Ok(())
    }

    /// Applies `UGTO_<KEY>` variables from `vars`.
    pub fn apply_env<I, K, V>(&mut self, vars: I) -> Result<()>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        for (k, v) in vars {
            let Some(key) = k.as_ref().strip_prefix("UGTO_") else {
                continue;
            };
            let key = key.to_ascii_lowercase();
            if key == "config" {
                continue;
            }
            if KEYS.contains(&key.as_str()) {
                self.set(&key, v.as_ref())?;
            }
        }
        Ok(())
    }

    pub fn pipeline(&self) -> PipelineConfig {
        let mut p = PipelineConfig {
            threshold: self.threshold,
            typed: self.typed,
            features: FeatureConfig {
                use_pretags: self.use_pretags,
                use_clusters: self.use_clusters,
                use_lexical: self.use_lexical,
            },
            ..Default::default()
        };
        p.train.l2 = self.l2;
        p.train.max_iterations = self.max_iterations;
        p.train.gradient_tolerance = self.gradient_tolerance;
        p
    }

    fn load_opts(&self, split: Split) -> LoadOptions {
        LoadOptions {
            bio_variant: self.encoding,
            has_lemma_column: self.lemma_column,
            split,
        }
    }

    fn load(&self, path: &Path, split: Split) -> Result<Corpus> {
        let c = corpus::load_conll(path, self.load_opts(split))?;
        if self.ontonotes && split.is_labeled() {
            return Ok(corpus::normalize_ontonotes(
                &c,
                &corpus::default_removed_types(),
            ));
        }
        Ok(c)
    }

    fn require<'a>(&self, p: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
        p.as_deref()
            .ok_or_else(|| Error::Config(format!("missing required setting {key:?}")))
    }

    pub fn lexicon(&self) -> Result<Lexicon> {
        let mut lex = match &self.lexicon_dir {
            Some(dir) => load_lexicon(dir)?,
            None => Lexicon::default(),
        };
        lex.drop_entity_tokens(&self.drop_lexicon);
        Ok(lex)
    }

    pub fn cluster_map(&self) -> Result<ClusterMap> {
        match &self.clusters {
            Some(p) => load_clusters(p),
            None => Ok(ClusterMap::default()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ugto",
    version,
    about = "Named entity extraction with uncommon words and a linear-chain CRF"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct GlobalArgs {
    /// Flat key=value config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    /// Drop entity types from labeling tags.
    #[arg(long, global = true)]
    pub untyped: bool,
    #[arg(long, global = true)]
    pub no_pretags: bool,
    #[arg(long, global = true)]
    pub no_clusters: bool,
    #[arg(long, global = true)]
    pub no_lexical: bool,
    #[arg(long, global = true)]
    pub train: Option<PathBuf>,
    #[arg(long, global = true)]
    pub dev: Option<PathBuf>,
    #[arg(long, global = true)]
    pub test: Option<PathBuf>,
    #[arg(long, global = true)]
    pub lexicon_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub clusters: Option<PathBuf>,
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    #[arg(long, global = true)]
    pub l2: Option<f64>,
    #[arg(long, global = true)]
    pub max_iterations: Option<usize>,
    #[arg(long, global = true)]
    pub gradient_tolerance: Option<f64>,
    /// Comma separated entity-token categories to remove, e.g. `per,loc`.
    #[arg(long, global = true)]
    pub drop_lexicon: Option<String>,
    /// Tag encoding of input files: iob1 or bio.
    #[arg(long, global = true)]
    pub encoding: Option<String>,
    /// Input files carry a lemma in the third column.
    #[arg(long, global = true)]
    pub lemma_column: bool,
    /// Normalize OntoNotes annotations on load.
    #[arg(long, global = true)]
    pub ontonotes: bool,
}

impl GlobalArgs {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        let mut opt = |k: &'static str, x: Option<String>| {
            if let Some(x) = x {
                v.push((k, x));
            }
        };
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        opt("threshold", self.threshold.map(|x| x.to_string()));
        opt("typed", self.untyped.then(|| "false".into()));
        opt("use_pretags", self.no_pretags.then(|| "false".into()));
        opt("use_clusters", self.no_clusters.then(|| "false".into()));
        opt("use_lexical", self.no_lexical.then(|| "false".into()));
        opt("train", path(&self.train));
        opt("dev", path(&self.dev));
        opt("test", path(&self.test));
        opt("lexicon_dir", path(&self.lexicon_dir));
        opt("clusters", path(&self.clusters));
        opt("model", path(&self.model));
        opt("l2", self.l2.map(|x| x.to_string()));
        opt("max_iterations", self.max_iterations.map(|x| x.to_string()));
        opt(
            "gradient_tolerance",
            self.gradient_tolerance.map(|x| x.to_string()),
        );
        opt("drop_lexicon", self.drop_lexicon.clone());
        opt("encoding", self.encoding.clone());
        opt("lemma_column", self.lemma_column.then(|| "true".into()));
        opt("ontonotes", self.ontonotes.then(|| "true".into()));
        v
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Corpus characteristic reports.
    Analyze {
        /// uncommon, pos or all.
        #[arg(long, default_value = "all")]
        report: String,
        /// entire, per-split or both.
        #[arg(long, default_value = "both")]
        scope: String,
        /// Directory for .txt and .csv report files.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Write the uncommon-word list induced from the training set.
    Induce {
        #[arg(long)]
        output: PathBuf,
    },
    /// Train a model on the training set and write the model file.
    Train,
    /// Tag a CoNLL file with a trained model.
    Tag {
        /// Defaults to the test set.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Defaults to standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Score predicted entities against gold entities.
    Eval {
        /// Defaults to the test set.
        #[arg(long)]
        gold: Option<PathBuf>,
        #[arg(long)]
        pred: PathBuf,
        /// Tag encoding of the predicted file.
        #[arg(long, default_value = "bio")]
        pred_encoding: String,
        /// extraction or recognition.
        #[arg(long, default_value = "extraction")]
        mode: String,
        /// Also write the report as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

/// Resolves settings from all sources.
pub fn resolve_config<I, K, V>(global: &GlobalArgs, env: I) -> Result<Config>
where
    I: IntoIterator<Item = (K, V)>,
    K: AsRef<str>,
    V: AsRef<str>,
{
    let env: Vec<(String, String)> = env
        .into_iter()
        .map(|(k, v)| (k.as_ref().to_string(), v.as_ref().to_string()))
        .collect();
    let mut cfg = Config::default();
    let file = global.config.clone().or_else(|| {
        env.iter()
            .find(|(k, _)| k == "UGTO_CONFIG")
            .map(|(_, v)| PathBuf::from(v))
    });
    if let Some(file) = file {
        cfg.apply_file_text(&util::read_to_string(&file)?, &file)?;
    }
    cfg.apply_env(env)?;
    for (k, v) in global.overrides() {
        cfg.set(k, &v)?;
    }
    Ok(cfg)
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => util::write_atomic(p, text.as_bytes()),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

pub fn cmd_analyze(
    cfg: &Config,
    report: &str,
    scope: &str,
    out_dir: Option<&Path>,
) -> Result<String> {
    let scope: Scope = scope.parse()?;
    let (want_uncommon, want_pos) = match report {
        "uncommon" => (true, false),
        "pos" => (false, true),
        "all" => (true, true),
        _ => return Err(Error::Config(format!("unknown report {report:?}"))),
    };
    let mut sets = Vec::new();
    for (name, p, split) in [
        ("train", &cfg.train, Split::Train),
        ("dev", &cfg.dev, Split::Dev),
        ("test", &cfg.test, Split::Test),
    ] {
        if let Some(p) = p {
            sets.push((name, cfg.load(p, split)?));
        }
    }
    if sets.is_empty() {
        return Err(Error::Config(
            "analyze needs at least one of train, dev, test".into(),
        ));
    }
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let named: Vec<(&str, &Corpus)> = sets.iter().map(|(n, c)| (*n, c)).collect();
    let mut text = String::new();
    if want_uncommon {
        let r = uncommon_report(&named, cfg.threshold, scope)?;
        text.push_str(&r.render_table());
        if let Some(dir) = out_dir {
            util::write_atomic(&dir.join("uncommon.txt"), r.render_table().as_bytes())?;
            util::write_atomic(&dir.join("uncommon.csv"), r.render_csv().as_bytes())?;
        }
    }
    if want_pos {
        let all = Corpus::concat(named.iter().map(|(_, c)| *c), Split::Train);
        let r = pos_report(&all)?;
        if !text.is_empty() {
            text.push('\n');
        }
        text.push_str(&r.render_table());
        if let Some(dir) = out_dir {
            util::write_atomic(&dir.join("pos.txt"), r.render_table().as_bytes())?;
            util::write_atomic(&dir.join("pos.csv"), r.render_csv().as_bytes())?;
        }
    }
    Ok(text)
}

pub fn cmd_induce(cfg: &Config, output: &Path) -> Result<usize> {
    let train = cfg.load(cfg.require(&cfg.train, "train")?, Split::Train)?;
    let m = induce_uncommon_list(&train, cfg.threshold)?;
    util::write_atomic(output, render_list(&m).as_bytes())?;
    Ok(m.uncommon.len())
}

pub fn cmd_train(cfg: &Config) -> Result<UgtoModel> {
    let train = cfg.load(cfg.require(&cfg.train, "train")?, Split::Train)?;
    let model_path = cfg.require(&cfg.model, "model")?;
    let model = UgtoModel::train(&train, cfg.lexicon()?, cfg.cluster_map()?, &cfg.pipeline())?;
    model.save(model_path)?;
    Ok(model)
}

pub fn cmd_tag(cfg: &Config, input: Option<&Path>) -> Result<String> {
    let model = UgtoModel::load(cfg.require(&cfg.model, "model")?)?;
    let input = match input {
        Some(p) => p,
        None => cfg.require(&cfg.test, "test")?,
    };
    let corpus = corpus::load_conll(input, cfg.load_opts(Split::Unlabeled))?;
    let tags = model.tag_corpus(&corpus);
    Ok(render_tagged(&corpus, &tags))
}

pub fn cmd_eval(
    cfg: &Config,
    gold: Option<&Path>,
    pred: &Path,
    pred_encoding: &str,
    mode: &str,
) -> Result<ScoreReport> {
    let gold = match gold {
        Some(p) => p,
        None => cfg.require(&cfg.test, "test")?,
    };
    let gold = cfg.load(gold, Split::Test)?;
    let pred_opts = LoadOptions {
        bio_variant: pred_encoding.parse()?,
        has_lemma_column: false,
        split: Split::Test,
    };
    let pred = corpus::load_conll(pred, pred_opts)?;
    let g: Vec<_> = gold.sentences.iter().map(|s| s.entities.clone()).collect();
    let p: Vec<_> = pred.sentences.iter().map(|s| s.entities.clone()).collect();
    score(&g, &p, mode.parse::<Mode>()?)
}

/// Predicted spans from a raw-tag column sequence, for callers holding
/// tag strings only.
pub fn spans_from_raw_tags(tags: &[&str]) -> Result<Vec<crate::corpus::EntitySpan>> {
    let tags = tags.iter().map(|t| t.parse()).collect::<Result<Vec<_>>>()?;
    Ok(extract_entities(&tags))
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = resolve_config(&cli.global, std::env::vars())?;
    match cli.command {
        Command::Analyze {
            report,
            scope,
            out_dir,
        } => {
            let text = cmd_analyze(&cfg, &report, &scope, out_dir.as_deref())?;
            emit(None, &text)
        }
        Command::Induce { output } => {
            let n = cmd_induce(&cfg, &output)?;
            eprintln!("wrote {n} uncommon words to {}", output.display());
            Ok(())
        }
        Command::Train => {
            let m = cmd_train(&cfg)?;
            eprintln!(
                "trained {} labels, {} features in {} iterations (objective {})",
                m.crf.space.num_labels(),
                m.crf.space.num_features(),
                m.crf.meta.iterations,
                m.crf.meta.final_objective
            );
            Ok(())
        }
        Command::Tag { input, output } => {
            let text = cmd_tag(&cfg, input.as_deref())?;
            emit(output.as_deref(), &text)
        }
        Command::Eval {
            gold,
            pred,
            pred_encoding,
            mode,
            csv,
        } => {
            let r = cmd_eval(&cfg, gold.as_deref(), &pred, &pred_encoding, &mode)?;
            if let Some(csv) = csv {
                util::write_atomic(&csv, r.render_csv().as_bytes())?;
            }
            emit(None, &r.render_table())
        }
    }
}

/// Valid config file keys; environment variables use `UGTO_` plus the key in upper case.
pub fn known_keys() -> BTreeSet<&'static str> {
    KEYS.iter().copied().collect()
}
