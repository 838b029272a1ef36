use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A target-side token: lemma plus coarse part-of-speech tag, written
/// `lemma|POS`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TaggedToken {
    pub lemma: String,
    pub pos: String,
}

impl TaggedToken {
    pub fn new(lemma: impl Into<String>, pos: impl Into<String>) -> Result<Self> {
        let token = TaggedToken {
            lemma: lemma.into(),
            pos: pos.into(),
        };
        token.check()?;
        Ok(token)
    }

    /// Splits at the last `|`, so `a|b|X` has lemma `a|b` and tag `X`.
    pub fn parse(s: &str) -> Result<Self> {
        let (lemma, pos) = s
            .rsplit_once('|')
            .ok_or_else(|| Error::malformed(1, format!("token `{s}` has no `|` separator")))?;
        TaggedToken::new(lemma, pos)
    }

    fn check(&self) -> Result<()> {
        if self.lemma.is_empty() {
            return Err(Error::malformed(1, "empty lemma"));
        }
        if self.pos.is_empty() {
            return Err(Error::malformed(1, format!("empty tag on `{}`", self.lemma)));
        }
        if self.lemma.chars().any(char::is_whitespace) || self.pos.chars().any(char::is_whitespace)
        {
            return Err(Error::malformed(1, "whitespace inside token"));
        }
        if self.pos.contains('|') {
            return Err(Error::malformed(1, "tag contains `|`"));
        }
        Ok(())
    }

    pub fn lemma_lowercase(&self) -> String {
        self.lemma.to_lowercase()
    }
}

impl fmt::Display for TaggedToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", self.lemma, self.pos)
    }
}

impl FromStr for TaggedToken {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TaggedToken::parse(s)
    }
}

/// Coarse tag inventories used on the target side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tagset {
    /// The 12 universal tags (English and German targets).
    Universal,
    /// TreeTagger French tags with the `:` subtype clipped off (15 tags).
    /// Pronouns and sentence punctuation appear as `PRON` and `.` in the
    /// released data, so those spellings are used here.
    FrenchClipped,
}

const UNIVERSAL_TAGS: [&str; 12] = [
    "ADJ", "ADP", "ADV", "CONJ", "DET", "NOUN", "NUM", "PRON", "PRT", "VERB", ".", "X",
];

const FRENCH_CLIPPED_TAGS: [&str; 15] = [
    "ABR", "ADJ", "ADV", "DET", "INT", "KON", "NAM", "NOM", "NUM", "PRON", "PRP", "PUN", ".",
    "SYM", "VER",
];

impl Tagset {
    pub fn tags(self) -> &'static [&'static str] {
        match self {
            Tagset::Universal => &UNIVERSAL_TAGS,
            Tagset::FrenchClipped => &FRENCH_CLIPPED_TAGS,
        }
    }

    pub fn contains(self, tag: &str) -> bool {
        self.tags().contains(&tag)
    }
}

/// How unknown tags are treated during validation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum TagsetMode {
    /// Unknown tags are a violation.
    Strict,
    /// Unknown tags are kept verbatim and logged.
    #[default]
    Lenient,
}
