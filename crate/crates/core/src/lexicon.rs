//! Word-level lexicon: entity tokens, generic modifiers and trigger words.
//!
//! A lexicon directory may contain any of
//!
//! ```text
//! entity_tokens.per.txt  entity_tokens.loc.txt  entity_tokens.misc.txt
//! modifiers.generic.txt
//! triggers.per.txt  triggers.loc.txt  triggers.org.txt  triggers.misc.txt
//! ```
//!
//! Each file is UTF-8 with one word per line; `#` lines and blank lines
//! are skipped. Missing files are empty sets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::util;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    Per,
    Loc,
    Org,
    Misc,
}

impl Category {
    pub const ALL: [Category; 4] = [Category::Per, Category::Loc, Category::Org, Category::Misc];

    /// Categories that have entity-token files. There is no ORG list.
    pub const WITH_ENTITY_TOKENS: [Category; 3] = [Category::Per, Category::Loc, Category::Misc];

    pub fn file_stem(self) -> &'static str {
        match self {
            Category::Per => "per",
            Category::Loc => "loc",
            Category::Org => "org",
            Category::Misc => "misc",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Per => "PER",
            Category::Loc => "LOC",
            Category::Org => "ORG",
            Category::Misc => "MISC",
        })
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "PER" => Ok(Category::Per),
            "LOC" => Ok(Category::Loc),
            "ORG" => Ok(Category::Org),
            "MISC" => Ok(Category::Misc),
            _ => Err(Error::Config(format!("unknown lexicon category {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    pub entity_tokens: BTreeMap<Category, BTreeSet<String>>,
    pub generic_modifiers: BTreeSet<String>,
    pub triggers: BTreeMap<Category, BTreeSet<String>>,
}

/// Lexicon lookups for one word.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordMatch {
    pub is_entity_token: bool,
    pub entity_token_categories: BTreeSet<Category>,
    pub is_generic: bool,
    pub trigger_categories: BTreeSet<Category>,
    pub is_hyphen_entity: bool,
}

impl WordMatch {
    pub fn is_nationality(&self) -> bool {
        self.entity_token_categories.contains(&Category::Misc)
    }

    /// Trigger of LOC, ORG or MISC.
    pub fn is_non_person_trigger(&self) -> bool {
        self.trigger_categories.iter().any(|&c| c != Category::Per)
    }
}

const GENERIC_FILE: &str = "modifiers.generic.txt";

fn entity_file(c: Category) -> String {
    format!("entity_tokens.{}.txt", c.file_stem())
}

fn trigger_file(c: Category) -> String {
    format!("triggers.{}.txt", c.file_stem())
}

fn load_word_file(path: &Path) -> Result<BTreeSet<String>> {
    if !path.exists() {
        return Ok(BTreeSet::new());
    }
    let text = util::read_to_string(path)?;
    let mut words = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r').trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.chars().any(char::is_whitespace) {
            return Err(Error::parse(
                path,
                i + 1,
                format!("lexicon entry {line:?} is not a single word"),
            ));
        }
        words.insert(line.to_string());
    }
    Ok(words)
}

pub fn load_lexicon(dir: impl AsRef<Path>) -> Result<Lexicon> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(Error::Config(format!(
            "lexicon directory {} not found",
            dir.display()
        )));
    }
    let mut lex = Lexicon::default();
    for c in Category::WITH_ENTITY_TOKENS {
        lex.entity_tokens
            .insert(c, load_word_file(&dir.join(entity_file(c)))?);
    }
    for c in Category::ALL {
        lex.triggers
            .insert(c, load_word_file(&dir.join(trigger_file(c)))?);
    }
    lex.generic_modifiers = load_word_file(&dir.join(GENERIC_FILE))?;
    Ok(lex)
}

/// Writes every non-empty set back out in the directory layout
/// [`load_lexicon`] reads.
pub fn save_lexicon(lex: &Lexicon, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |name: String, words: &BTreeSet<String>| -> Result<()> {
        if words.is_empty() {
            return Ok(());
        }
        let mut out = String::new();
        for w in words {
            out.push_str(w);
            out.push('\n');
        }
        util::write_atomic(&dir.join(name), out.as_bytes())
    };
    for (c, words) in &lex.entity_tokens {
        write(entity_file(*c), words)?;
    }
    for (c, words) in &lex.triggers {
        write(trigger_file(*c), words)?;
    }
    write(GENERIC_FILE.to_string(), &lex.generic_modifiers)
}

impl Lexicon {
    pub fn entity_tokens_of(&self, c: Category) -> Option<&BTreeSet<String>> {
        self.entity_tokens.get(&c)
    }

    pub fn triggers_of(&self, c: Category) -> Option<&BTreeSet<String>> {
        self.triggers.get(&c)
    }

    pub fn is_entity_token(&self, w: &str) -> bool {
        self.entity_tokens.values().any(|s| s.contains(w))
    }

    /// Removes the entity-token lists of `cats`, keeping triggers and
    /// modifiers.
    pub fn drop_entity_tokens(&mut self, cats: &[Category]) {
        for c in cats {
            self.entity_tokens.remove(c);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.generic_modifiers.is_empty()
            && self.entity_tokens.values().all(BTreeSet::is_empty)
            && self.triggers.values().all(BTreeSet::is_empty)
    }
}

/// True when `w` contains `-` and some non-empty piece between hyphens is
/// an entity token. Pieces keep their trailing periods ("U.S.-based").
fn hyphenized_by_entity(lex: &Lexicon, w: &str) -> bool {
    w.contains('-')
        && w.split('-')
            .any(|piece| !piece.is_empty() && lex.is_entity_token(piece))
}

pub fn match_word(lex: &Lexicon, w: &str) -> WordMatch {
    let entity_token_categories: BTreeSet<Category> = lex
        .entity_tokens
        .iter()
        .filter(|(_, s)| s.contains(w))
        .map(|(c, _)| *c)
        .collect();
    let trigger_categories = lex
        .triggers
        .iter()
        .filter(|(_, s)| s.contains(w))
        .map(|(c, _)| *c)
        .collect();
    WordMatch {
        is_entity_token: !entity_token_categories.is_empty(),
        entity_token_categories,
        is_generic: lex.generic_modifiers.contains(w),
        trigger_categories,
        is_hyphen_entity: hyphenized_by_entity(lex, w),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) {
        fs::write(dir.join(name), body).unwrap();
    }

    #[test]
    fn loads_files_and_skips_comments() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            "triggers.org.txt",
            "# org triggers\nInc\nUniversity\nInc\n",
        );
        write(dir.path(), "modifiers.generic.txt", "of\r\nand\r\n\r\n");
        let lex = load_lexicon(dir.path()).unwrap();
        assert!(lex.triggers_of(Category::Org).unwrap().contains("Inc"));
        assert_eq!(lex.triggers_of(Category::Org).unwrap().len(), 2);
        let generic: Vec<_> = lex.generic_modifiers.iter().map(String::as_str).collect();
        assert_eq!(generic, vec!["and", "of"]);
        assert!(lex.entity_tokens_of(Category::Org).is_none());
    }

    #[test]
    fn empty_directory() {
        let dir = tempfile::tempdir().unwrap();
        let lex = load_lexicon(dir.path()).unwrap();
        assert!(lex.is_empty());
    }

    #[test]
    fn rejects_multiword_entry() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "entity_tokens.loc.txt", "Boston\nNew York\n");
        let err = load_lexicon(dir.path()).unwrap_err();
        match err {
            Error::Parse { path, line, .. } => {
                assert!(path.ends_with("entity_tokens.loc.txt"));
                assert_eq!(line, 2);
            }
            other => panic!("unexpected {other}"),
        }
    }

    fn sample() -> Lexicon {
        let mut lex = Lexicon::default();
        lex.entity_tokens.insert(
            Category::Loc,
            ["U.S.", "England"].iter().map(|s| s.to_string()).collect(),
        );
        lex.entity_tokens.insert(
            Category::Misc,
            ["Australian"].iter().map(|s| s.to_string()).collect(),
        );
        lex.triggers.insert(
            Category::Org,
            ["University"].iter().map(|s| s.to_string()).collect(),
        );
        lex.generic_modifiers = ["of", "and"].iter().map(|s| s.to_string()).collect();
        lex
    }

    #[test]
    fn hyphen_matching() {
        let lex = sample();
        assert!(match_word(&lex, "U.S.-based").is_hyphen_entity);
        assert!(match_word(&lex, "England-oriented").is_hyphen_entity);
        assert!(!match_word(&lex, "well-known").is_hyphen_entity);
        assert!(!match_word(&lex, "U.S.").is_hyphen_entity);
        assert!(!match_word(&lex, "u.s.-based").is_hyphen_entity);
    }

    #[test]
    fn generic_only() {
        let m = match_word(&sample(), "of");
        assert_eq!(
            m,
            WordMatch {
                is_generic: true,
                ..Default::default()
            }
        );
    }

    #[test]
    fn trigger_category() {
        let m = match_word(&sample(), "University");
        assert_eq!(m.trigger_categories, [Category::Org].into_iter().collect());
        assert!(m.is_non_person_trigger());
        assert!(match_word(&sample(), "Australian").is_nationality());
    }

    #[test]
    fn save_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let mut lex = sample();
        save_lexicon(&lex, dir.path()).unwrap();
        let back = load_lexicon(dir.path()).unwrap();
        // Loading fills in empty sets for absent files.
        for c in Category::WITH_ENTITY_TOKENS {
            lex.entity_tokens.entry(c).or_default();
        }
        for c in Category::ALL {
            lex.triggers.entry(c).or_default();
        }
        assert_eq!(back, lex);
    }
}
