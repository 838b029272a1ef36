//! Symmetrisation of directional word alignments and precision/recall
//! evaluation against a gold alignment.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{AlignmentSet, Link};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Heuristic {
    Intersection,
    Union,
    GrowDiag,
    GrowDiagFinal,
    GrowDiagFinalAnd,
}

impl Heuristic {
    pub const ALL: [Heuristic; 5] = [
        Heuristic::Intersection,
        Heuristic::Union,
        Heuristic::GrowDiag,
        Heuristic::GrowDiagFinal,
        Heuristic::GrowDiagFinalAnd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Heuristic::Intersection => "intersection",
            Heuristic::Union => "union",
            Heuristic::GrowDiag => "grow-diag",
            Heuristic::GrowDiagFinal => "grow-diag-final",
            Heuristic::GrowDiagFinalAnd => "grow-diag-final-and",
        }
    }

    /// Short table label.
    pub fn abbreviation(self) -> &'static str {
        match self {
            Heuristic::Intersection => "∩",
            Heuristic::Union => "∪",
            Heuristic::GrowDiag => "gd",
            Heuristic::GrowDiagFinal => "gdf",
            Heuristic::GrowDiagFinalAnd => "gdfa",
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Heuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        Heuristic::ALL
            .into_iter()
            .find(|h| h.name() == s || h.abbreviation() == s)
            .or(match s.as_str() {
                "inter" | "i" => Some(Heuristic::Intersection),
                "u" => Some(Heuristic::Union),
                _ => None,
            })
            .ok_or_else(|| Error::malformed(1, format!("unknown heuristic `{s}`")))
    }
}

const NEIGHBOURS: [(isize, isize); 8] = [
    (-1, 0),
    (0, -1),
    (1, 0),
    (0, 1),
    (-1, -1),
    (-1, 1),
    (1, -1),
    (1, 1),
];

/// Alignment under construction, with per-side coverage.
struct Grid {
    links: AlignmentSet,
    src_aligned: Vec<bool>,
    tgt_aligned: Vec<bool>,
}

impl Grid {
    fn new(start: AlignmentSet, src_len: usize, tgt_len: usize) -> Self {
        let mut g = Grid {
            links: AlignmentSet::new(),
            src_aligned: vec![false; src_len],
            tgt_aligned: vec![false; tgt_len],
        };
        for l in start.iter().copied().collect::<Vec<_>>() {
            g.add(l);
        }
        g
    }

    fn add(&mut self, l: Link) {
        self.links.insert(l);
        self.src_aligned[l.src] = true;
        self.tgt_aligned[l.tgt] = true;
    }

    fn either_unaligned(&self, l: &Link) -> bool {
        !self.src_aligned[l.src] || !self.tgt_aligned[l.tgt]
    }

    fn both_unaligned(&self, l: &Link) -> bool {
        !self.src_aligned[l.src] && !self.tgt_aligned[l.tgt]
    }

    /// Union links adjacent to `l` that are not yet in the alignment.
    fn neighbours_in<'a>(&'a self, l: Link, union: &'a AlignmentSet) -> impl Iterator<Item = Link> + 'a {
        NEIGHBOURS.iter().filter_map(move |&(ds, dt)| {
            let s = l.src.checked_add_signed(ds)?;
            let t = l.tgt.checked_add_signed(dt)?;
            let n = Link::new(s, t);
            (union.contains(&n) && !self.links.contains(&n)).then_some(n)
        })
    }

    /// Repeatedly adds the smallest union link, in `(src, tgt)` order, that
    /// neighbours the alignment and has an unaligned endpoint.
    fn grow_diag(&mut self, union: &AlignmentSet) {
        let mut frontier: BTreeSet<Link> = self
            .links
            .iter()
            .flat_map(|&l| self.neighbours_in(l, union))
            .collect();
        // A candidate rejected once stays rejected: coverage only grows.
        while let Some(l) = frontier.pop_first() {
            if self.links.contains(&l) || !self.either_unaligned(&l) {
                continue;
            }
            self.add(l);
            let next: Vec<Link> = self.neighbours_in(l, union).collect();
            frontier.extend(next);
        }
    }

    /// One pass over the remaining union links in `(src, tgt)` order.
    fn finalize(&mut self, union: &AlignmentSet, accept: impl Fn(&Self, &Link) -> bool) {
        for l in union.iter() {
            if !self.links.contains(l) && accept(self, l) {
                self.add(*l);
            }
        }
    }
}

/// Combines a source-to-target and a target-to-source alignment (both given
/// as `src-tgt` links) into one.
///
/// The grow step adds the smallest eligible link first, so the result is a
/// function of the two link sets alone. `grow-diag-final` first runs the
/// `-and` pass and then adds links with one unaligned endpoint, which makes
/// `grow-diag-final-and` a subset of `grow-diag-final`.
pub fn symmetrize(
    forward: &AlignmentSet,
    backward: &AlignmentSet,
    heuristic: Heuristic,
    src_len: usize,
    tgt_len: usize,
) -> Result<AlignmentSet> {
    forward.check_bounds(src_len, tgt_len)?;
    backward.check_bounds(src_len, tgt_len)?;

    let intersection = forward.intersection(backward);
    let union = forward.union(backward);
    match heuristic {
        Heuristic::Intersection => return Ok(intersection),
        Heuristic::Union => return Ok(union),
        _ => {}
    }

    let mut grid = Grid::new(intersection, src_len, tgt_len);
    grid.grow_diag(&union);
    match heuristic {
        Heuristic::GrowDiagFinalAnd => grid.finalize(&union, Grid::both_unaligned),
        Heuristic::GrowDiagFinal => {
            grid.finalize(&union, Grid::both_unaligned);
            grid.finalize(&union, Grid::either_unaligned);
        }
        _ => {}
    }
    Ok(grid.links)
}

/// One segment to symmetrise.
#[derive(Debug, Clone)]
pub struct SegmentPair {
    pub forward: AlignmentSet,
    pub backward: AlignmentSet,
    pub src_len: usize,
    pub tgt_len: usize,
}

/// Symmetrises every segment; errors carry the 1-based segment number.
pub fn symmetrize_corpus(
    segments: &[SegmentPair],
    heuristic: Heuristic,
    exec: Exec,
) -> Result<Vec<AlignmentSet>> {
    let numbered: Vec<(usize, &SegmentPair)> = segments.iter().enumerate().collect();
    exec.try_map(&numbered, |(i, s)| {
        symmetrize(&s.forward, &s.backward, heuristic, s.src_len, s.tgt_len)
            .map_err(|e| e.at_line(i + 1))
    })
}

/// Smallest box containing every link, as `(src_len, tgt_len)`.
pub fn implied_dimensions<'a>(sets: impl IntoIterator<Item = &'a AlignmentSet>) -> (usize, usize) {
    sets.into_iter()
        .flat_map(|s| s.iter())
        .fold((0, 0), |(s, t), l| (s.max(l.src + 1), t.max(l.tgt + 1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl AlignmentScore {
    pub fn new(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        AlignmentScore {
            precision,
            recall,
            f1,
        }
    }
}

impl fmt::Display for AlignmentScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}\t{:.2}\t{:.2}", self.precision, self.recall, self.f1)
    }
}

/// Link tallies; they add up across segments.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LinkCounts {
    pub hypothesis: usize,
    pub gold: usize,
    pub correct: usize,
}

impl LinkCounts {
    pub fn of(hyp: &AlignmentSet, gold: &AlignmentSet) -> Self {
        LinkCounts {
            hypothesis: hyp.len(),
            gold: gold.len(),
            correct: hyp.iter().filter(|l| gold.contains(l)).count(),
        }
    }

    /// Precision is 1 for an empty hypothesis and recall 1 for an empty gold
    /// set.
    pub fn score(&self) -> AlignmentScore {
        let ratio = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
        AlignmentScore::new(
            ratio(self.correct, self.hypothesis),
            ratio(self.correct, self.gold),
        )
    }
}

impl std::ops::Add for LinkCounts {
    type Output = LinkCounts;

    fn add(self, o: LinkCounts) -> LinkCounts {
        LinkCounts {
            hypothesis: self.hypothesis + o.hypothesis,
            gold: self.gold + o.gold,
            correct: self.correct + o.correct,
        }
    }
}

/// Tallies for all links and, optionally, for the links selected by a
/// predicate (e.g. links touching a pronoun).
fn counts_for(
    hyp: &AlignmentSet,
    gold: &AlignmentSet,
    subset: Option<&dyn Fn(&Link) -> bool>,
) -> (LinkCounts, Option<LinkCounts>) {
    let all = LinkCounts::of(hyp, gold);
    let sub = subset.map(|keep| LinkCounts::of(&hyp.filter(keep), &gold.filter(keep)));
    (all, sub)
}

pub fn evaluate_alignment(
    hyp: &AlignmentSet,
    gold: &AlignmentSet,
    pronoun_links: Option<&dyn Fn(&Link) -> bool>,
) -> (AlignmentScore, Option<AlignmentScore>) {
    let (all, sub) = counts_for(hyp, gold, pronoun_links);
    (all.score(), sub.map(|c| c.score()))
}

/// Corpus-level evaluation: counts are summed over segments before scoring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusAlignmentScore {
    pub all: AlignmentScore,
    pub pronouns: Option<AlignmentScore>,
    pub counts: LinkCounts,
    pub pronoun_counts: Option<LinkCounts>,
}

/// `pronoun_positions[i]` lists the source positions of pronouns in segment
/// `i`; a link counts as a pronoun link when its source end is one of them.
pub fn evaluate_corpus(
    hyp: &[AlignmentSet],
    gold: &[AlignmentSet],
    pronoun_positions: Option<&[Vec<usize>]>,
    exec: Exec,
) -> Result<CorpusAlignmentScore> {
    if hyp.len() != gold.len() {
        return Err(Error::InputMismatch(format!(
            "{} hypothesis segments vs {} gold segments",
            hyp.len(),
            gold.len()
        )));
    }
    if let Some(p) = pronoun_positions {
        if p.len() != gold.len() {
            return Err(Error::InputMismatch(format!(
                "{} pronoun-position lines vs {} gold segments",
                p.len(),
                gold.len()
            )));
        }
    }
    let indices: Vec<usize> = (0..hyp.len()).collect();
    let (all, pron) = exec.map_reduce(
        &indices,
        || (LinkCounts::default(), LinkCounts::default()),
        |&i| match pronoun_positions {
            Some(p) => {
                let positions = &p[i];
                let keep = |l: &Link| positions.contains(&l.src);
                let (a, s) = counts_for(&hyp[i], &gold[i], Some(&keep));
                (a, s.unwrap_or_default())
            }
            None => (LinkCounts::of(&hyp[i], &gold[i]), LinkCounts::default()),
        },
        |(a1, p1), (a2, p2)| (a1 + a2, p1 + p2),
    );
    Ok(CorpusAlignmentScore {
        all: all.score(),
        pronouns: pronoun_positions.map(|_| pron.score()),
        counts: all,
        pronoun_counts: pronoun_positions.map(|_| pron),
    })
}
