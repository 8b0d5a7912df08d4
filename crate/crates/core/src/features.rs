//! Per-token feature strings for the CRF.
//!
//! Pre-tag, indicator and lexical features are taken over a five word
//! window `[-2, +2]`; positions outside the sentence read as a `<PAD>`
//! token. Word cluster prefixes are only taken for the current word.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::Sentence;
use crate::error::{Error, Result};
use crate::lexicon::{match_word, Lexicon};
use crate::scheme::{LabelTag, PreTag};
use crate::util;

pub const PAD: &str = "<PAD>";

const WINDOW: [isize; 5] = [-2, -1, 0, 1, 2];
const CLUSTER_PREFIXES: [usize; 3] = [4, 8, 12];

/// Word to bit-string path in a hierarchical word clustering.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClusterMap {
    pub paths: HashMap<String, String>,
}

impl ClusterMap {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn get(&self, w: &str) -> Option<&str> {
        self.paths.get(w).map(String::as_str)
    }

    /// Entries sorted by word.
    pub fn sorted(&self) -> Vec<(&str, &str)> {
        let mut v: Vec<_> = self
            .paths
            .iter()
            .map(|(w, p)| (w.as_str(), p.as_str()))
            .collect();
        v.sort_unstable();
        v
    }
}

fn is_bitstring(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b == b'0' || b == b'1')
}

/// Reads `bitstring<TAB>word[<TAB>count]` lines. Later lines for the same
/// word win.
pub fn load_clusters(path: impl AsRef<Path>) -> Result<ClusterMap> {
    let path = path.as_ref();
    parse_clusters(&util::read_to_string(path)?, path)
}

pub fn parse_clusters(text: &str, origin: &Path) -> Result<ClusterMap> {
    let mut map = ClusterMap::default();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split('\t');
        let bits = cols.next().unwrap_or("");
        let word = cols.next().filter(|w| !w.is_empty());
        if !is_bitstring(bits) {
            return Err(Error::parse(
                origin,
                i + 1,
                format!("malformed bit-string {bits:?}"),
            ));
        }
        let Some(word) = word else {
            return Err(Error::parse(origin, i + 1, "missing word column"));
        };
        map.paths.insert(word.to_string(), bits.to_string());
    }
    Ok(map)
}

/// `cl4`, `cl8` and `cl12` prefixes of the word's path; paths shorter than
/// a prefix length contribute the whole path.
pub fn cluster_prefix_features(map: &ClusterMap, w: &str) -> Vec<String> {
    let Some(path) = map.get(w) else {
        return Vec::new();
    };
    CLUSTER_PREFIXES
        .iter()
        .map(|&k| format!("cl{k}={}", &path[..k.min(path.len())]))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureConfig {
    pub use_pretags: bool,
    pub use_clusters: bool,
    pub use_lexical: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            use_pretags: true,
            use_clusters: true,
            use_lexical: true,
        }
    }
}

/// Binary indicator features of one token.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeatureVector(pub Vec<String>);

impl FeatureVector {
    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Values every windowed feature reads from a position.
struct Slot<'a> {
    surface: &'a str,
    lower: String,
    lemma: String,
    pos: &'a str,
    pretag: PreTag,
    entity_token: bool,
    nationality_or_hyphen: bool,
    capitalized: bool,
    bos: bool,
}

impl Slot<'_> {
    fn pad() -> Slot<'static> {
        Slot {
            surface: PAD,
            lower: PAD.to_string(),
            lemma: PAD.to_string(),
            pos: PAD,
            pretag: PreTag::O,
            entity_token: false,
            nationality_or_hyphen: false,
            capitalized: false,
            bos: false,
        }
    }
}

fn flag(b: bool) -> char {
    if b {
        '1'
    } else {
        '0'
    }
}

/// Features for every token of `s`, in a fixed order: per offset the
/// pre-tag group then the lexical group, followed by cluster prefixes.
pub fn extract_features(
    s: &Sentence,
    pretags: &[PreTag],
    lex: &Lexicon,
    clusters: &ClusterMap,
    cfg: FeatureConfig,
) -> Result<Vec<FeatureVector>> {
    if pretags.len() != s.len() {
        return Err(Error::Usage(format!(
            "{} pre-tags for a sentence of {} tokens",
            pretags.len(),
            s.len()
        )));
    }
    let slots: Vec<Slot> = s
        .tokens
        .iter()
        .zip(pretags)
        .enumerate()
        .map(|(i, (tok, &pretag))| {
            let m = match_word(lex, &tok.surface);
            Slot {
                surface: &tok.surface,
                lower: tok.surface.to_lowercase(),
                lemma: tok.lemma_or_lower(),
                pos: &tok.pos,
                pretag,
                entity_token: m.is_entity_token,
                nationality_or_hyphen: m.is_nationality() || m.is_hyphen_entity,
                capitalized: tok.surface.chars().next().is_some_and(char::is_uppercase),
                bos: i == 0,
            }
        })
        .collect();
    let pad = Slot::pad();

    let mut out = Vec::with_capacity(slots.len());
    for i in 0..slots.len() {
        let mut feats: Vec<String> = Vec::new();
        for j in WINDOW {
            let at = i as isize + j;
            let slot = if at < 0 || at >= slots.len() as isize {
                &pad
            } else {
                &slots[at as usize]
            };
            if cfg.use_pretags {
                feats.push(format!("pt[{j}]={}", slot.pretag));
                feats.push(format!("etok[{j}]={}", flag(slot.entity_token)));
                feats.push(format!("nathy[{j}]={}", flag(slot.nationality_or_hyphen)));
            }
            if cfg.use_lexical {
                feats.push(format!("w[{j}]={}", slot.surface));
                feats.push(format!("lw[{j}]={}", slot.lower));
                feats.push(format!("lm[{j}]={}", slot.lemma));
                feats.push(format!("cap[{j}]={}", flag(slot.capitalized)));
                feats.push(format!("bos[{j}]={}", flag(slot.bos)));
                feats.push(format!("pos[{j}]={}", slot.pos));
            }
        }
        if cfg.use_clusters {
            feats.extend(cluster_prefix_features(clusters, slots[i].surface));
        }
        feats.dedup();
        out.push(FeatureVector(feats));
    }
    Ok(out)
}

/// `LABEL<TAB>feat<TAB>...` per token with a blank line after each
/// sentence.
pub fn render_feature_dump<'a>(
    sequences: impl IntoIterator<Item = (&'a [FeatureVector], &'a [LabelTag])>,
) -> String {
    let mut out = String::new();
    for (feats, labels) in sequences {
        for (fv, label) in feats.iter().zip(labels) {
            let _ = write!(out, "{label}");
            for f in fv.iter() {
                out.push('\t');
                out.push_str(f);
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::Category;

    fn clusters(lines: &str) -> ClusterMap {
        parse_clusters(lines, Path::new("<test>")).unwrap()
    }

    #[test]
    fn cluster_file() {
        let m = clusters("1010\tdog\t57\n");
        assert_eq!(m.get("dog"), Some("1010"));
        assert!(clusters("").is_empty());
        let m = clusters("0\tdog\n1\tcat\n11\tdog\n");
        assert_eq!(m.len(), 2);
        assert_eq!(m.get("dog"), Some("11"));
    }

    #[test]
    fn cluster_file_errors() {
        let err = parse_clusters("0101\tok\n10x1\tbad\n", Path::new("c")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(parse_clusters("0101\n", Path::new("c")).is_err());
    }

    #[test]
    fn prefixes() {
        let m = clusters("110100101101\tlong\n10\tshort\n");
        assert_eq!(
            cluster_prefix_features(&m, "long"),
            vec!["cl4=1101", "cl8=11010010", "cl12=110100101101"]
        );
        assert_eq!(
            cluster_prefix_features(&m, "short"),
            vec!["cl4=10", "cl8=10", "cl12=10"]
        );
        assert!(cluster_prefix_features(&m, "none").is_empty());
    }

    fn japan() -> Sentence {
        Sentence::from_pairs(
            &[("Japan", "NNP"), ("began", "VBD"), ("U.S.-based", "JJ")],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn window_features() {
        let mut lex = Lexicon::default();
        lex.entity_tokens
            .insert(Category::Loc, ["U.S.".to_string()].into());
        let s = japan();
        let pt = [PreTag::U, PreTag::O, PreTag::U];
        let fv = extract_features(
            &s,
            &pt,
            &lex,
            &clusters("0110\tJapan\n"),
            FeatureConfig::default(),
        )
        .unwrap();
        let first: Vec<&str> = fv[0].iter().collect();
        for f in [
            "cap[0]=1",
            "bos[0]=1",
            "pos[0]=NNP",
            "pt[0]=U",
            "w[-1]=<PAD>",
            "w[-2]=<PAD>",
            "cl4=0110",
        ] {
            assert!(first.contains(&f), "missing {f}");
        }
        assert!(first.contains(&"nathy[2]=1"));
        assert!(first.contains(&"etok[2]=0"));
        assert!(first.contains(&"lm[1]=began"));
        let last: Vec<&str> = fv[2].iter().collect();
        assert!(last.contains(&"w[2]=<PAD>"));
        assert!(last.contains(&"bos[0]=0"));
        assert_eq!(fv[0].len(), 5 * 9 + 3);
    }

    #[test]
    fn disabled_groups_are_empty() {
        let cfg = FeatureConfig {
            use_pretags: false,
            use_clusters: false,
            use_lexical: false,
        };
        let s = japan();
        let fv = extract_features(
            &s,
            &[PreTag::O; 3],
            &Lexicon::default(),
            &ClusterMap::default(),
            cfg,
        )
        .unwrap();
        assert!(fv.iter().all(FeatureVector::is_empty));
    }

    #[test]
    fn length_mismatch() {
        let r = extract_features(
            &japan(),
            &[PreTag::O],
            &Lexicon::default(),
            &ClusterMap::default(),
            FeatureConfig::default(),
        );
        assert!(matches!(r, Err(Error::Usage(_))));
    }

    #[test]
    fn dump_format() {
        let fv = [FeatureVector(vec!["a".into(), "b".into()])];
        let labels = [LabelTag::OUTSIDE];
        assert_eq!(render_feature_dump([(&fv[..], &labels[..])]), "O\ta\tb\n\n");
    }
}
