//! Joint choice of one option per gap.
//!
//! A [`GapScorer`] scores a left-to-right sequence of decisions through an
//! opaque state; both searches add the same per-step increments in the same
//! order, so equal choice vectors get bit-identical totals. Ties go to the
//! lexicographically smallest choice vector.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::hash::Hash;

/// Above this many joint combinations the search switches to beam search.
pub const EXHAUSTIVE_LIMIT: usize = 10_000;
pub const DEFAULT_BEAM_WIDTH: usize = 8;

pub trait GapScorer {
    /// Everything the future score depends on (for an n-gram model, the
    /// last `n - 1` words).
    type State: Clone + Eq + Hash;

    fn num_slots(&self) -> usize;
    fn num_options(&self) -> usize;
    /// State and score before the first decision.
    fn start(&self) -> (Self::State, f64);
    /// Takes `option` at `slot` from `state`; returns the new state and the
    /// score increment.
    fn extend(&self, state: &Self::State, slot: usize, option: usize) -> (Self::State, f64);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchMode {
    /// Exhaustive up to [`EXHAUSTIVE_LIMIT`] combinations, else beam search
    /// of width [`DEFAULT_BEAM_WIDTH`].
    #[default]
    Auto,
    Exhaustive,
    Beam(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Best {
    pub choices: Vec<usize>,
    pub score: f64,
}

/// `true` when `(a_score, a)` ranks above `(b_score, b)`.
fn better(a_score: f64, a: &[usize], b_score: f64, b: &[usize]) -> bool {
    match a_score.partial_cmp(&b_score) {
        Some(Ordering::Greater) => true,
        Some(Ordering::Equal) => a < b,
        _ => false,
    }
}

pub fn combinations(options: usize, slots: usize) -> Option<usize> {
    u32::try_from(slots).ok().and_then(|s| options.checked_pow(s))
}

pub fn search<S: GapScorer>(scorer: &S, mode: SearchMode) -> Option<Best> {
    match mode {
        SearchMode::Exhaustive => exhaustive(scorer),
        SearchMode::Beam(w) => beam(scorer, w),
        SearchMode::Auto => {
            match combinations(scorer.num_options(), scorer.num_slots()) {
                Some(n) if n <= EXHAUSTIVE_LIMIT => exhaustive(scorer),
                _ => beam(scorer, DEFAULT_BEAM_WIDTH),
            }
        }
    }
}

/// Scores every combination. `None` when there are gaps but no options.
pub fn exhaustive<S: GapScorer>(scorer: &S) -> Option<Best> {
    fn go<S: GapScorer>(
        scorer: &S,
        state: &S::State,
        score: f64,
        choices: &mut Vec<usize>,
        best: &mut Option<Best>,
    ) {
        let slot = choices.len();
        if slot == scorer.num_slots() {
            if best.as_ref().is_none_or(|b| better(score, choices, b.score, &b.choices)) {
                *best = Some(Best {
                    choices: choices.clone(),
                    score,
                });
            }
            return;
        }
        for opt in 0..scorer.num_options() {
            let (next, delta) = scorer.extend(state, slot, opt);
            choices.push(opt);
            go(scorer, &next, score + delta, choices, best);
            choices.pop();
        }
    }

    let (state, score) = scorer.start();
    let mut best = None;
    go(scorer, &state, score, &mut Vec::new(), &mut best);
    best
}

/// Left-to-right beam search. Hypotheses that reach the same state are
/// merged, keeping the better one, before the beam is cut to `width`.
pub fn beam<S: GapScorer>(scorer: &S, width: usize) -> Option<Best> {
    let width = width.max(1);
    let (state, score) = scorer.start();
    let mut hyps: Vec<(Vec<usize>, S::State, f64)> = vec![(Vec::new(), state, score)];

    for slot in 0..scorer.num_slots() {
        let mut merged: HashMap<S::State, usize> = HashMap::new();
        let mut next: Vec<(Vec<usize>, S::State, f64)> = Vec::new();
        for (choices, state, score) in &hyps {
            for opt in 0..scorer.num_options() {
                let (st, delta) = scorer.extend(state, slot, opt);
                let mut c = choices.clone();
                c.push(opt);
                let s = score + delta;
                match merged.get(&st) {
                    Some(&i) => {
                        if better(s, &c, next[i].2, &next[i].0) {
                            next[i] = (c, st, s);
                        }
                    }
                    None => {
                        merged.insert(st.clone(), next.len());
                        next.push((c, st, s));
                    }
                }
            }
        }
        next.sort_by(|a, b| {
            if better(a.2, &a.0, b.2, &b.0) {
                Ordering::Less
            } else if better(b.2, &b.0, a.2, &a.0) {
                Ordering::Greater
            } else {
                Ordering::Equal
            }
        });
        next.truncate(width);
        hyps = next;
        if hyps.is_empty() {
            return None;
        }
    }

    hyps.into_iter()
        .next()
        .map(|(choices, _, score)| Best { choices, score })
}
