//! Interpolated modified Kneser-Ney n-gram model over lemmata.
//!
//! Counts follow the usual adjusted-count scheme: the highest order uses raw
//! counts, lower orders use continuation counts (number of distinct left
//! extensions), except for n-grams starting with the sentence-begin marker,
//! which cannot be extended and keep raw counts. The unigram level is
//! interpolated with a uniform distribution over the predictable vocabulary
//! (everything except `<s>`), which also gives `<unk>` its mass.
//!
//! An order whose count-of-counts do not yield discounts in `(0, k)` falls
//! back to Witten-Bell interpolation.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::Serialize;

use crate::error::{Error, Result};

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

pub type WordId = u32;

const UNK_ID: WordId = 0;
const BOS_ID: WordId = 1;
const EOS_ID: WordId = 2;

const FORMAT_TAG: &str = "pronoun-ngram-lm";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Smoothing {
    /// Modified Kneser-Ney with discounts for counts 1, 2 and 3+.
    KneserNey { d1: f64, d2: f64, d3: f64 },
    WittenBell,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct ContextStats {
    total: u64,
    n1: u64,
    n2: u64,
    n3plus: u64,
}

impl ContextStats {
    fn types(&self) -> u64 {
        self.n1 + self.n2 + self.n3plus
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Level {
    /// Adjusted count of each n-gram of this order.
    counts: HashMap<Vec<WordId>, u64>,
    /// Statistics per history (the n-gram minus its last word).
    contexts: HashMap<Vec<WordId>, ContextStats>,
    smoothing: Smoothing,
}

impl Level {
    fn new(counts: HashMap<Vec<WordId>, u64>, smoothing: Option<Smoothing>) -> Self {
        let mut contexts: HashMap<Vec<WordId>, ContextStats> = HashMap::new();
        for (gram, &c) in &counts {
            let s = contexts.entry(gram[..gram.len() - 1].to_vec()).or_default();
            s.total += c;
            match c {
                1 => s.n1 += 1,
                2 => s.n2 += 1,
                _ => s.n3plus += 1,
            }
        }
        let smoothing = smoothing.unwrap_or_else(|| estimate_discounts(&counts));
        Level {
            counts,
            contexts,
            smoothing,
        }
    }

    /// Interpolates this level's estimate with the lower-order probability.
    fn interpolate(&self, history: &[WordId], word: WordId, lower: f64, key: &mut Vec<WordId>) -> f64 {
        let Some(ctx) = self.contexts.get(history) else {
            return lower;
        };
        key.clear();
        key.extend_from_slice(history);
        key.push(word);
        let c = self.counts.get(key.as_slice()).copied().unwrap_or(0);
        let total = ctx.total as f64;
        match self.smoothing {
            Smoothing::KneserNey { d1, d2, d3 } => {
                let discounted = match c {
                    0 => 0.0,
                    1 => 1.0 - d1,
                    2 => 2.0 - d2,
                    c => c as f64 - d3,
                };
                let gamma = d1 * ctx.n1 as f64 + d2 * ctx.n2 as f64 + d3 * ctx.n3plus as f64;
                (discounted + gamma * lower) / total
            }
            Smoothing::WittenBell => {
                let types = ctx.types() as f64;
                (c as f64 + types * lower) / (total + types)
            }
        }
    }
}

fn estimate_discounts(counts: &HashMap<Vec<WordId>, u64>) -> Smoothing {
    let mut n = [0u64; 5];
    for &c in counts.values() {
        if (1..=4).contains(&c) {
            n[c as usize] += 1;
        }
    }
    if n[1..].contains(&0) {
        return Smoothing::WittenBell;
    }
    let [_, n1, n2, n3, n4] = n.map(|x| x as f64);
    let y = n1 / (n1 + 2.0 * n2);
    let d1 = 1.0 - 2.0 * y * n2 / n1;
    let d2 = 2.0 - 3.0 * y * n3 / n2;
    let d3 = 3.0 - 4.0 * y * n4 / n3;
    let ok = |d: f64, k: f64| d > 0.0 && d < k;
    if ok(d1, 1.0) && ok(d2, 2.0) && ok(d3, 3.0) {
        Smoothing::KneserNey { d1, d2, d3 }
    } else {
        Smoothing::WittenBell
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainOptions {
    pub order: usize,
    /// Words seen fewer times than this are trained as `<unk>`.
    pub min_count: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            order: 5,
            min_count: 1,
        }
    }
}

/// An n-gram language model. Immutable once trained.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    order: usize,
    words: Vec<String>,
    ids: HashMap<String, WordId>,
    /// `levels[k]` holds n-grams of length `k + 1`.
    levels: Vec<Level>,
}

impl NGramModel {
    /// A model with no statistics; scoring requires training or loading.
    pub fn untrained(order: usize) -> Self {
        NGramModel {
            order: order.max(1),
            words: Vec::new(),
            ids: HashMap::new(),
            levels: Vec::new(),
        }
    }

    pub fn is_trained(&self) -> bool {
        !self.levels.is_empty()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Vocabulary including the `<unk>`, `<s>` and `</s>` markers.
    pub fn vocabulary(&self) -> &[String] {
        &self.words
    }

    pub fn smoothing(&self) -> Vec<Smoothing> {
        self.levels.iter().map(|l| l.smoothing).collect()
    }

    pub fn word(&self, id: WordId) -> &str {
        &self.words[id as usize]
    }

    /// Id of `word`, or the `<unk>` id.
    pub fn id(&self, word: &str) -> WordId {
        self.ids.get(word).copied().unwrap_or(UNK_ID)
    }

    pub fn bos(&self) -> WordId {
        BOS_ID
    }

    pub fn eos(&self) -> WordId {
        EOS_ID
    }

    /// Ids that can be predicted (all but `<s>`).
    pub fn predictable(&self) -> impl Iterator<Item = WordId> + '_ {
        (0..self.words.len() as WordId).filter(|&w| w != BOS_ID)
    }

    fn base_probability(&self) -> f64 {
        1.0 / (self.words.len() - 1) as f64
    }

    /// `P(word | history)`; only the last `order - 1` history words matter.
    pub fn prob(&self, history: &[WordId], word: WordId) -> f64 {
        let mut key = Vec::with_capacity(self.order);
        self.prob_with(history, word, &mut key)
    }

    fn prob_with(&self, history: &[WordId], word: WordId, key: &mut Vec<WordId>) -> f64 {
        let max_hist = history.len().min(self.order - 1);
        let mut p = self.base_probability();
        for k in 0..=max_hist {
            let h = &history[history.len() - k..];
            p = self.levels[k].interpolate(h, word, p, key);
        }
        p
    }

    /// Natural-log probability of `word` after `history`.
    pub fn log_prob(&self, history: &[WordId], word: WordId) -> f64 {
        self.prob(history, word).ln()
    }

    /// Every history observed in training, by length.
    pub fn seen_histories(&self) -> Vec<Vec<WordId>> {
        let mut out: Vec<Vec<WordId>> = self
            .levels
            .iter()
            .flat_map(|l| l.contexts.keys().cloned())
            .collect();
        out.sort();
        out
    }

    /// Sum of log-probabilities of `ids` after `history`, with the history
    /// growing as words are consumed. Returns the total and the final
    /// history (trimmed to `order - 1` words).
    pub fn extend(&self, history: &[WordId], ids: &[WordId]) -> (f64, Vec<WordId>) {
        let keep = self.order - 1;
        let mut ctx: Vec<WordId> = history[history.len().saturating_sub(keep)..].to_vec();
        let mut key = Vec::with_capacity(self.order);
        let mut total = 0.0;
        for &w in ids {
            total += self.prob_with(&ctx, w, &mut key).ln();
            ctx.push(w);
            if ctx.len() > keep {
                ctx.remove(0);
            }
        }
        (total, ctx)
    }

    pub fn ids<S: AsRef<str>>(&self, words: &[S]) -> Vec<WordId> {
        words.iter().map(|w| self.id(w.as_ref())).collect()
    }

    /// Log-probability of a sentence, padded with `<s>` and `</s>`.
    pub fn sentence_logprob<S: AsRef<str>>(&self, words: &[S]) -> f64 {
        let mut ids = self.ids(words);
        ids.push(EOS_ID);
        self.extend(&[BOS_ID], &ids).0
    }

    /// Like [`sentence_logprob`](Self::sentence_logprob) without the closing
    /// `</s>`.
    pub fn prefix_logprob<S: AsRef<str>>(&self, words: &[S]) -> f64 {
        self.extend(&[BOS_ID], &self.ids(words)).0
    }

    /// Writes the model as versioned text. Loading recomputes every derived
    /// statistic, so the file lists only vocabulary, discounts and counts.
    pub fn save<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{FORMAT_TAG}\t{FORMAT_VERSION}")?;
        writeln!(w, "order\t{}", self.order)?;
        writeln!(w, "vocab\t{}", self.words.len())?;
        for word in &self.words {
            writeln!(w, "{word}")?;
        }
        for (k, level) in self.levels.iter().enumerate() {
            let smoothing = match level.smoothing {
                Smoothing::KneserNey { d1, d2, d3 } => format!("kn\t{d1}\t{d2}\t{d3}"),
                Smoothing::WittenBell => "wb".to_string(),
            };
            writeln!(w, "level\t{}\t{}\t{smoothing}", k + 1, level.counts.len())?;
            let sorted: BTreeMap<&Vec<WordId>, &u64> = level.counts.iter().collect();
            let mut line = String::new();
            for (gram, c) in sorted {
                line.clear();
                for (i, id) in gram.iter().enumerate() {
                    if i > 0 {
                        line.push(' ');
                    }
                    line.push_str(self.word(*id));
                }
                let _ = write!(line, "\t{c}");
                writeln!(w, "{line}")?;
            }
        }
        Ok(())
    }

    pub fn load<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let mut next = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((i, l)) => Ok((i + 1, l?)),
                None => Err(Error::ModelFormat(format!("unexpected end of file, expected {what}"))),
            }
        };
        let bad = |line: usize, msg: String| Error::ModelFormat(msg).at_line(line);

        let (n, header) = next("header")?;
        match header.split_once('\t') {
            Some((FORMAT_TAG, v)) if v == FORMAT_VERSION.to_string() => {}
            _ => return Err(bad(n, format!("unsupported header `{header}`"))),
        }
        let field = |line: &str, name: &str, n: usize| -> Result<usize> {
            line.strip_prefix(name)
                .and_then(|r| r.strip_prefix('\t'))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| bad(n, format!("expected `{name}<TAB><number>`")))
        };
        let (n, l) = next("order")?;
        let order = field(&l, "order", n)?;
        if order == 0 {
            return Err(bad(n, "order must be at least 1".into()));
        }
        let (n, l) = next("vocab")?;
        let vocab_len = field(&l, "vocab", n)?;
        let mut words = Vec::with_capacity(vocab_len);
        for _ in 0..vocab_len {
            words.push(next("vocabulary entry")?.1);
        }
        if words.len() < 3 || words[0] != UNK || words[1] != BOS || words[2] != EOS {
            return Err(Error::ModelFormat("vocabulary must start with <unk> <s> </s>".into()));
        }
        let ids: HashMap<String, WordId> = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as WordId))
            .collect();

        let mut levels = Vec::with_capacity(order);
        for k in 1..=order {
            let (n, l) = next("level header")?;
            let parts: Vec<&str> = l.split('\t').collect();
            if parts.len() < 4 || parts[0] != "level" || parts[1] != k.to_string() {
                return Err(bad(n, format!("expected header of level {k}")));
            }
            let entries: usize = parts[2].parse().map_err(|_| bad(n, "bad entry count".into()))?;
            let smoothing = match &parts[3..] {
                ["wb"] => Smoothing::WittenBell,
                ["kn", d1, d2, d3] => {
                    let p = |s: &str| s.parse::<f64>().map_err(|_| bad(n, "bad discount".into()));
                    Smoothing::KneserNey {
                        d1: p(d1)?,
                        d2: p(d2)?,
                        d3: p(d3)?,
                    }
                }
                _ => return Err(bad(n, "bad smoothing spec".into())),
            };
            let mut counts = HashMap::with_capacity(entries);
            for _ in 0..entries {
                let (n, l) = next("n-gram entry")?;
                let (gram, c) = l
                    .split_once('\t')
                    .ok_or_else(|| bad(n, "expected `words<TAB>count`".into()))?;
                let gram: Vec<WordId> = gram
                    .split(' ')
                    .map(|w| ids.get(w).copied().ok_or_else(|| bad(n, format!("unknown word `{w}`"))))
                    .collect::<Result<_>>()?;
                if gram.len() != k {
                    return Err(bad(n, format!("expected a {k}-gram")));
                }
                let c: u64 = c.parse().map_err(|_| bad(n, "bad count".into()))?;
                counts.insert(gram, c);
            }
            levels.push(Level::new(counts, Some(smoothing)));
        }
        Ok(NGramModel {
            order,
            words,
            ids,
            levels,
        })
    }
}

/// Trains a model on sentences of lemmata.
pub fn train_lm<S: AsRef<str>>(corpus: &[Vec<S>], opts: TrainOptions) -> Result<NGramModel> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let order = opts.order.max(1);

    let mut freq: HashMap<&str, u64> = HashMap::new();
    for w in corpus.iter().flatten() {
        *freq.entry(w.as_ref()).or_default() += 1;
    }
    let mut kept: Vec<&str> = freq
        .iter()
        .filter(|(w, &c)| c >= opts.min_count && ![UNK, BOS, EOS].contains(w))
        .map(|(w, _)| *w)
        .collect();
    kept.sort_unstable();
    let words: Vec<String> = [UNK, BOS, EOS]
        .into_iter()
        .chain(kept)
        .map(String::from)
        .collect();
    let ids: HashMap<String, WordId> = words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i as WordId))
        .collect();

    // raw[k]: raw counts of (k+1)-grams ending on a predicted word
    let mut raw: Vec<HashMap<Vec<WordId>, u64>> = vec![HashMap::new(); order];
    let mut sent = Vec::new();
    for s in corpus {
        sent.clear();
        sent.push(BOS_ID);
        sent.extend(s.iter().map(|w| ids.get(w.as_ref()).copied().unwrap_or(UNK_ID)));
        sent.push(EOS_ID);
        for end in 1..sent.len() {
            for len in 1..=order.min(end + 1) {
                let gram = &sent[end + 1 - len..=end];
                *raw[len - 1].entry(gram.to_vec()).or_default() += 1;
            }
        }
    }

    let mut adjusted: Vec<HashMap<Vec<WordId>, u64>> = vec![HashMap::new(); order];
    adjusted[order - 1] = raw[order - 1].clone();
    for k in (0..order - 1).rev() {
        let mut left_ext: HashMap<&[WordId], u64> = HashMap::new();
        for gram in raw[k + 1].keys() {
            *left_ext.entry(&gram[1..]).or_default() += 1;
        }
        adjusted[k] = raw[k]
            .iter()
            .map(|(gram, &c)| {
                let a = if gram[0] == BOS_ID {
                    c
                } else {
                    left_ext.get(gram.as_slice()).copied().unwrap_or(c)
                };
                (gram.clone(), a)
            })
            .collect();
    }

    let levels = adjusted.into_iter().map(|c| Level::new(c, None)).collect();
    Ok(NGramModel {
        order,
        words,
        ids,
        levels,
    })
}
