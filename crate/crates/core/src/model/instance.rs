use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::alignment::{AlignmentSet, Link};
use super::subtask::SubtaskSpec;
use super::token::{TaggedToken, TagsetMode};

/// One position of the target sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TargetItem {
    Token(TaggedToken),
    /// A removed pronoun, indexed by the source position of the pronoun it
    /// translates.
    Placeholder(usize),
}

impl TargetItem {
    pub fn placeholder_index(&self) -> Option<usize> {
        match self {
            TargetItem::Placeholder(k) => Some(*k),
            TargetItem::Token(_) => None,
        }
    }
}

impl fmt::Display for TargetItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetItem::Token(t) => t.fmt(f),
            TargetItem::Placeholder(k) => write!(f, "REPLACE_{k}"),
        }
    }
}

/// One line of the shared-task data.
///
/// `labels[i]` and `replaced[i]` belong to the i-th placeholder in target
/// order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskInstance {
    pub labels: Vec<String>,
    pub replaced: Vec<Vec<TaggedToken>>,
    pub source: Vec<String>,
    pub target: Vec<TargetItem>,
    pub alignment: AlignmentSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    LabelCountMismatch { labels: usize, placeholders: usize },
    ReplacedCountMismatch { groups: usize, placeholders: usize },
    PlaceholderOutOfBounds { index: usize, source_len: usize },
    NotASourcePronoun { index: usize, token: String },
    DuplicatePlaceholder { index: usize },
    UnknownLabel { label: String },
    LinkOutOfBounds { link: Link },
    BadSourceToken { position: usize },
    UnknownTag { tag: String },
    UnrepresentableGroup { group: usize },
}

impl Violation {
    /// Short, stable description of the violation kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::LabelCountMismatch { .. } => "label/placeholder count mismatch",
            Violation::ReplacedCountMismatch { .. } => "replaced/placeholder count mismatch",
            Violation::PlaceholderOutOfBounds { .. } => "placeholder index out of bounds",
            Violation::NotASourcePronoun { .. } => "placeholder source token is not a selected pronoun",
            Violation::DuplicatePlaceholder { .. } => "duplicate placeholder index",
            Violation::UnknownLabel { .. } => "unknown label",
            Violation::LinkOutOfBounds { .. } => "alignment link out of bounds",
            Violation::BadSourceToken { .. } => "empty or whitespace-bearing source token",
            Violation::UnknownTag { .. } => "unknown PoS tag",
            Violation::UnrepresentableGroup { .. } => "replaced group cannot be written unambiguously",
        }
    }

    /// The 1-based instance-format field the violation belongs to.
    pub fn field(&self) -> usize {
        match self {
            Violation::LabelCountMismatch { .. } | Violation::UnknownLabel { .. } => 1,
            Violation::ReplacedCountMismatch { .. } | Violation::UnrepresentableGroup { .. } => 2,
            Violation::BadSourceToken { .. } => 3,
            Violation::PlaceholderOutOfBounds { .. }
            | Violation::NotASourcePronoun { .. }
            | Violation::DuplicatePlaceholder { .. }
            | Violation::UnknownTag { .. } => 4,
            Violation::LinkOutOfBounds { .. } => 5,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind())?;
        match self {
            Violation::LabelCountMismatch {
                labels,
                placeholders,
            } => write!(f, " ({labels} labels, {placeholders} placeholders)"),
            Violation::ReplacedCountMismatch {
                groups,
                placeholders,
            } => write!(f, " ({groups} groups, {placeholders} placeholders)"),
            Violation::PlaceholderOutOfBounds { index, source_len } => {
                write!(f, " (REPLACE_{index}, {source_len} source tokens)")
            }
            Violation::NotASourcePronoun { index, token } => {
                write!(f, " (REPLACE_{index} -> `{token}`)")
            }
            Violation::DuplicatePlaceholder { index } => write!(f, " (REPLACE_{index})"),
            Violation::UnknownLabel { label } => write!(f, " (`{label}`)"),
            Violation::LinkOutOfBounds { link } => write!(f, " ({link})"),
            Violation::BadSourceToken { position } => write!(f, " (position {position})"),
            Violation::UnknownTag { tag } => write!(f, " (`{tag}`)"),
            Violation::UnrepresentableGroup { group } => write!(f, " (group {group})"),
        }
    }
}

impl TaskInstance {
    /// `(target position, source index)` of each placeholder, in target order.
    pub fn placeholders(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.target
            .iter()
            .enumerate()
            .filter_map(|(i, item)| item.placeholder_index().map(|k| (i, k)))
    }

    pub fn num_placeholders(&self) -> usize {
        self.placeholders().count()
    }

    /// The target with every placeholder replaced by its `replaced` group.
    pub fn reference_target(&self) -> Vec<TaggedToken> {
        let mut groups = self.replaced.iter();
        let mut out = Vec::with_capacity(self.target.len());
        for item in &self.target {
            match item {
                TargetItem::Token(t) => out.push(t.clone()),
                TargetItem::Placeholder(_) => {
                    if let Some(g) = groups.next() {
                        out.extend(g.iter().cloned());
                    }
                }
            }
        }
        out
    }

    /// Every violated invariant, in field order. Empty for a valid instance.
    pub fn validate(&self, spec: &SubtaskSpec) -> Vec<Violation> {
        self.validate_with(spec, TagsetMode::Lenient)
    }

    pub fn validate_with(&self, spec: &SubtaskSpec, mode: TagsetMode) -> Vec<Violation> {
        let mut out = Vec::new();
        let placeholders: Vec<usize> = self.placeholders().map(|(_, k)| k).collect();

        if self.labels.len() != placeholders.len() {
            out.push(Violation::LabelCountMismatch {
                labels: self.labels.len(),
                placeholders: placeholders.len(),
            });
        }
        for label in &self.labels {
            if !spec.has_class(label) {
                out.push(Violation::UnknownLabel {
                    label: label.clone(),
                });
            }
        }
        if self.replaced.len() != placeholders.len() {
            out.push(Violation::ReplacedCountMismatch {
                groups: self.replaced.len(),
                placeholders: placeholders.len(),
            });
        }
        for (i, group) in self.replaced.iter().enumerate() {
            if !crate::format::group_is_representable(group) {
                out.push(Violation::UnrepresentableGroup { group: i });
            }
        }
        for (i, tok) in self.source.iter().enumerate() {
            if tok.is_empty() || tok.chars().any(char::is_whitespace) {
                out.push(Violation::BadSourceToken { position: i });
            }
        }

        let mut seen = BTreeSet::new();
        for &k in &placeholders {
            match self.source.get(k) {
                None => out.push(Violation::PlaceholderOutOfBounds {
                    index: k,
                    source_len: self.source.len(),
                }),
                Some(tok) if !spec.is_source_pronoun(tok) => {
                    out.push(Violation::NotASourcePronoun {
                        index: k,
                        token: tok.clone(),
                    })
                }
                Some(_) => {}
            }
            if !seen.insert(k) {
                out.push(Violation::DuplicatePlaceholder { index: k });
            }
        }

        if mode == TagsetMode::Strict {
            let tagset = spec.target_tagset();
            let tags = self
                .target
                .iter()
                .filter_map(|item| match item {
                    TargetItem::Token(t) => Some(t),
                    TargetItem::Placeholder(_) => None,
                })
                .chain(self.replaced.iter().flatten());
            let unknown: BTreeSet<&str> = tags
                .map(|t| t.pos.as_str())
                .filter(|p| !tagset.contains(p))
                .collect();
            out.extend(unknown.into_iter().map(|tag| Violation::UnknownTag {
                tag: tag.to_string(),
            }));
        }

        for link in &self.alignment {
            if link.src >= self.source.len() || link.tgt >= self.target.len() {
                out.push(Violation::LinkOutOfBounds { link: *link });
            }
        }
        out
    }
}

/// Free-function form of [`TaskInstance::validate`].
pub fn validate_instance(inst: &TaskInstance, spec: &SubtaskSpec) -> Vec<Violation> {
    inst.validate(spec)
}
