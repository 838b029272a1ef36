use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One word-alignment link between source position `src` and target
/// position `tgt`. Ordered by source index, then target index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Link {
    pub src: usize,
    pub tgt: usize,
}

impl Link {
    pub const fn new(src: usize, tgt: usize) -> Self {
        Link { src, tgt }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.src, self.tgt)
    }
}

fn parse_index(s: &str) -> Option<usize> {
    // Plain decimal only: no sign, no leading zeros.
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) || (s.len() > 1 && s.starts_with('0'))
    {
        return None;
    }
    s.parse().ok()
}

impl FromStr for Link {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::malformed(1, format!("bad link `{s}`"));
        let (a, b) = s.split_once('-').ok_or_else(bad)?;
        match (parse_index(a), parse_index(b)) {
            (Some(src), Some(tgt)) => Ok(Link { src, tgt }),
            _ => Err(bad()),
        }
    }
}

/// The links of one segment, with set semantics. Iteration and
/// serialization are in `(src, tgt)` order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlignmentSet {
    links: BTreeSet<Link>,
}

impl AlignmentSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(pairs: I) -> Self {
        pairs.into_iter().map(|(s, t)| Link::new(s, t)).collect()
    }

    /// Parses space-separated `s-t` pairs. Duplicates collapse.
    pub fn parse(s: &str) -> Result<Self> {
        s.split_whitespace().map(str::parse).collect()
    }

    pub fn insert(&mut self, link: Link) -> bool {
        self.links.insert(link)
    }

    pub fn remove(&mut self, link: &Link) -> bool {
        self.links.remove(link)
    }

    pub fn contains(&self, link: &Link) -> bool {
        self.links.contains(link)
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &Link> + '_ {
        self.links.iter()
    }

    pub fn links(&self) -> &BTreeSet<Link> {
        &self.links
    }

    /// Target positions linked to `src`, ascending.
    pub fn targets_of(&self, src: usize) -> impl Iterator<Item = usize> + '_ {
        self.links
            .range(Link::new(src, 0)..=Link::new(src, usize::MAX))
            .map(|l| l.tgt)
    }

    pub fn is_source_aligned(&self, src: usize) -> bool {
        self.targets_of(src).next().is_some()
    }

    pub fn intersection(&self, other: &AlignmentSet) -> AlignmentSet {
        self.links.intersection(&other.links).copied().collect()
    }

    pub fn union(&self, other: &AlignmentSet) -> AlignmentSet {
        self.links.union(&other.links).copied().collect()
    }

    pub fn is_subset(&self, other: &AlignmentSet) -> bool {
        self.links.is_subset(&other.links)
    }

    pub fn filter(&self, mut keep: impl FnMut(&Link) -> bool) -> AlignmentSet {
        self.links.iter().copied().filter(|l| keep(l)).collect()
    }

    /// Checks every link against a `src_len` x `tgt_len` grid.
    pub fn check_bounds(&self, src_len: usize, tgt_len: usize) -> Result<()> {
        match self.links.iter().find(|l| l.src >= src_len || l.tgt >= tgt_len) {
            Some(l) => Err(Error::IndexOutOfBounds {
                src: l.src,
                tgt: l.tgt,
                src_len,
                tgt_len,
            }),
            None => Ok(()),
        }
    }

    /// Shifts every target index `>= at` up by one, making room for a token
    /// inserted at position `at`.
    pub fn shift_targets_from(&mut self, at: usize) {
        self.links = self
            .links
            .iter()
            .map(|l| if l.tgt >= at { Link::new(l.src, l.tgt + 1) } else { *l })
            .collect();
    }
}

impl FromIterator<Link> for AlignmentSet {
    fn from_iter<I: IntoIterator<Item = Link>>(iter: I) -> Self {
        AlignmentSet {
            links: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a AlignmentSet {
    type Item = &'a Link;
    type IntoIter = std::collections::btree_set::Iter<'a, Link>;

    fn into_iter(self) -> Self::IntoIter {
        self.links.iter()
    }
}

impl fmt::Display for AlignmentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.links.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}
