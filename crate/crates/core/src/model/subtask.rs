use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::token::Tagset;
use crate::error::{Error, Result};

/// The catch-all class: some other word, or nothing, fills the gap.
pub const OTHER: &str = "OTHER";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Language {
    English,
    French,
    German,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "en-fr")]
    EnFr,
    #[serde(rename = "fr-en")]
    FrEn,
    #[serde(rename = "en-de")]
    EnDe,
    #[serde(rename = "de-en")]
    DeEn,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::EnFr,
        Direction::FrEn,
        Direction::EnDe,
        Direction::DeEn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::EnFr => "en-fr",
            Direction::FrEn => "fr-en",
            Direction::EnDe => "en-de",
            Direction::DeEn => "de-en",
        }
    }

    pub fn source_language(self) -> Language {
        match self {
            Direction::EnFr | Direction::EnDe => Language::English,
            Direction::FrEn => Language::French,
            Direction::DeEn => Language::German,
        }
    }

    pub fn target_language(self) -> Language {
        match self {
            Direction::EnFr => Language::French,
            Direction::FrEn | Direction::DeEn => Language::English,
            Direction::EnDe => Language::German,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Direction::ALL
            .into_iter()
            .find(|d| d.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::malformed(1, format!("unknown direction `{s}`")))
    }
}

/// Definition of one subtask: which source pronouns are selected, which
/// classes are predicted, and how target words fold into those classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubtaskSpec {
    pub direction: Direction,
    pub source_pronouns: BTreeSet<String>,
    pub classes: Vec<String>,
    /// Lowercase target surface form to class name.
    pub lexicon: BTreeMap<String, String>,
}

impl SubtaskSpec {
    pub fn new(direction: Direction) -> Self {
        // (class, extra surface forms folded into it)
        let (pronouns, inventory): (&[&str], &[(&str, &[&str])]) = match direction {
            Direction::EnFr => (
                &["it", "they"],
                &[
                    ("ce", &["c'"]),
                    ("elle", &[]),
                    ("elles", &[]),
                    ("il", &[]),
                    ("ils", &[]),
                    ("cela", &["ça", "ca", "ç'"]),
                    ("on", &[]),
                ],
            ),
            Direction::FrEn => (
                &["elle", "elles", "il", "ils"],
                &[
                    ("he", &[]),
                    ("she", &[]),
                    ("it", &[]),
                    ("they", &[]),
                    ("this", &["that"]),
                    ("these", &["those"]),
                    ("there", &[]),
                ],
            ),
            Direction::EnDe => (
                &["it", "they"],
                &[("er", &[]), ("sie", &[]), ("es", &[]), ("man", &[])],
            ),
            Direction::DeEn => (
                &["er", "sie", "es"],
                &[
                    ("he", &[]),
                    ("she", &[]),
                    ("it", &[]),
                    ("they", &[]),
                    ("you", &[]),
                    ("this", &["that"]),
                    ("these", &["those"]),
                    ("there", &[]),
                ],
            ),
        };

        let mut classes = Vec::with_capacity(inventory.len() + 1);
        let mut lexicon = BTreeMap::new();
        for (class, variants) in inventory {
            classes.push(class.to_string());
            lexicon.insert(class.to_string(), class.to_string());
            for v in *variants {
                lexicon.insert(v.to_string(), class.to_string());
            }
        }
        classes.push(OTHER.to_string());

        SubtaskSpec {
            direction,
            source_pronouns: pronouns.iter().map(|p| p.to_string()).collect(),
            classes,
            lexicon,
        }
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn has_class(&self, class: &str) -> bool {
        self.classes.iter().any(|c| c == class)
    }

    pub fn class_index(&self, class: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == class)
    }

    /// Classes other than `OTHER`, in inventory order.
    pub fn pronoun_classes(&self) -> impl Iterator<Item = &str> + '_ {
        self.classes.iter().map(String::as_str).filter(|c| *c != OTHER)
    }

    /// Case-insensitive lexicon lookup; `None` for words outside the
    /// accepted pronoun set.
    pub fn lookup(&self, surface: &str) -> Option<&str> {
        self.lexicon.get(&surface.to_lowercase()).map(String::as_str)
    }

    /// Total version of [`lookup`](Self::lookup): unmatched words are `OTHER`.
    pub fn class_of(&self, surface: &str) -> &str {
        self.lookup(surface).unwrap_or(OTHER)
    }

    pub fn is_source_pronoun(&self, token: &str) -> bool {
        self.source_pronouns.contains(&token.to_lowercase())
    }

    pub fn target_tagset(&self) -> Tagset {
        match self.direction.target_language() {
            Language::French => Tagset::FrenchClipped,
            Language::English | Language::German => Tagset::Universal,
        }
    }
}
