//! Generators and brute-force reference implementations shared by the
//! integration tests. Oracles work on plain tuples and slices so they do not
//! lean on the library's own data structures.

#![allow(dead_code)]

use std::collections::BTreeSet;

use pronoun_core::extract::AnnotatedSegment;
use pronoun_core::model::{
    AlignmentSet, Direction, SubtaskSpec, TaggedToken, TargetItem, TaskInstance, OTHER,
};
use rand::seq::SliceRandom;
use rand::Rng;

pub type Pairs = BTreeSet<(usize, usize)>;

pub fn pairs(a: &AlignmentSet) -> Pairs {
    a.iter().map(|l| (l.src, l.tgt)).collect()
}

pub fn random_pairs<R: Rng>(rng: &mut R, src_len: usize, tgt_len: usize, density: f64) -> Pairs {
    let mut out = Pairs::new();
    for s in 0..src_len {
        for t in 0..tgt_len {
            if rng.gen_bool(density) {
                out.insert((s, t));
            }
        }
    }
    out
}

pub fn to_set(p: &Pairs) -> AlignmentSet {
    AlignmentSet::from_pairs(p.iter().copied())
}

// ---------------------------------------------------------------------------
// Symmetrisation

fn covered(a: &Pairs) -> (BTreeSet<usize>, BTreeSet<usize>) {
    (a.iter().map(|p| p.0).collect(), a.iter().map(|p| p.1).collect())
}

fn touches(a: &Pairs, (s, t): (usize, usize)) -> bool {
    a.iter().any(|&(s2, t2)| (s2, t2) != (s, t) && s.abs_diff(s2) <= 1 && t.abs_diff(t2) <= 1)
}

/// Grow-diag by rescanning everything after each addition: add the smallest
/// union link that touches the alignment and has an unaligned endpoint,
/// until none is left.
pub fn oracle_grow_diag(f: &Pairs, b: &Pairs) -> Pairs {
    let union: Pairs = f.union(b).copied().collect();
    let mut a: Pairs = f.intersection(b).copied().collect();
    loop {
        let (cs, ct) = covered(&a);
        let next = union
            .iter()
            .copied()
            .filter(|l| !a.contains(l))
            .filter(|&l| touches(&a, l))
            .find(|&(s, t)| !cs.contains(&s) || !ct.contains(&t));
        match next {
            Some(l) => {
                a.insert(l);
            }
            None => return a,
        }
    }
}

fn oracle_final_pass(a: &mut Pairs, union: &Pairs, both: bool) {
    for &(s, t) in union {
        if a.contains(&(s, t)) {
            continue;
        }
        let (cs, ct) = covered(a);
        let (us, ut) = (!cs.contains(&s), !ct.contains(&t));
        if (both && us && ut) || (!both && (us || ut)) {
            a.insert((s, t));
        }
    }
}

pub fn oracle_gdfa(f: &Pairs, b: &Pairs) -> Pairs {
    let union: Pairs = f.union(b).copied().collect();
    let mut a = oracle_grow_diag(f, b);
    oracle_final_pass(&mut a, &union, true);
    a
}

pub fn oracle_gdf(f: &Pairs, b: &Pairs) -> Pairs {
    let union: Pairs = f.union(b).copied().collect();
    let mut a = oracle_gdfa(f, b);
    oracle_final_pass(&mut a, &union, false);
    a
}

// ---------------------------------------------------------------------------
// Instance lines

const LEMMAS: &[&str] = &[
    "être", "un", "débat", "idiot", "devoir", "stopper", ".", "le", "la", "qui", "ça", "il",
    "elle", "ce", "a+b", "x|y", "+", "NONE", "REPLACE_1", "c'", "l'", "Ökonomie", "Straße",
    "1,5", "–", "\"", "it", "they",
];
const TAGS: &[&str] = &["PRON", "VER", "NOM", "DET", "ADJ", ".", "KON", "PRP", "X", "NOUN"];
const WORDS: &[&str] = &[
    "'s", "an", "idiotic", "debate", ".", "has", "to", "stop", "REPLACE_0", "NONE", "a+b",
    "x|y", "Haus", "est", "là", "«", "»", "--",
];

pub fn random_token<R: Rng>(rng: &mut R) -> TaggedToken {
    TaggedToken::new(*LEMMAS.choose(rng).unwrap(), *TAGS.choose(rng).unwrap()).unwrap()
}

/// A valid instance for `spec` with 0 to 4 placeholders.
pub fn random_instance<R: Rng>(rng: &mut R, spec: &SubtaskSpec) -> TaskInstance {
    loop {
        let inst = random_instance_candidate(rng, spec);
        if inst.validate(spec).is_empty() {
            return inst;
        }
    }
}

fn random_instance_candidate<R: Rng>(rng: &mut R, spec: &SubtaskSpec) -> TaskInstance {
    let pronouns: Vec<&String> = spec.source_pronouns.iter().collect();
    let src_len = rng.gen_range(1..=15);
    let mut source: Vec<String> = (0..src_len)
        .map(|_| WORDS.choose(rng).unwrap().to_string())
        .collect();
    let n_ph = rng.gen_range(0..=4.min(src_len));
    let mut idx: Vec<usize> = (0..src_len).collect();
    idx.shuffle(rng);
    let ph: Vec<usize> = idx[..n_ph].to_vec();
    for &k in &ph {
        let p = pronouns.choose(rng).unwrap();
        source[k] = if rng.gen_bool(0.2) { p.to_uppercase() } else { p.to_string() };
    }

    let tgt_tokens = rng.gen_range(0..=15);
    let mut target: Vec<TargetItem> =
        (0..tgt_tokens).map(|_| TargetItem::Token(random_token(rng))).collect();
    for &k in &ph {
        let at = rng.gen_range(0..=target.len());
        target.insert(at, TargetItem::Placeholder(k));
    }
    let labels = (0..n_ph)
        .map(|_| spec.classes.choose(rng).unwrap().clone())
        .collect();
    let replaced = (0..n_ph)
        .map(|_| {
            let n = rng.gen_range(0..=3);
            (0..n).map(|_| random_token(rng)).collect()
        })
        .collect();
    let tgt_len = target.len();
    let alignment = if tgt_len == 0 {
        AlignmentSet::new()
    } else {
        to_set(&random_pairs(rng, src_len, tgt_len, 0.15))
    };
    TaskInstance {
        labels,
        replaced,
        source,
        target,
        alignment,
    }
}

// ---------------------------------------------------------------------------
// Extraction

/// Class and replaced token by the rule as stated: the leftmost token whose
/// lemma is a known target pronoun, else the shortest token (leftmost on
/// ties).
pub fn oracle_map_target_class(tokens: &[TaggedToken], spec: &SubtaskSpec) -> (String, Vec<TaggedToken>) {
    for t in tokens {
        let lower = t.lemma.to_lowercase();
        for (surface, class) in &spec.lexicon {
            if surface.to_lowercase() == lower {
                return (class.clone(), vec![t.clone()]);
            }
        }
    }
    if tokens.is_empty() {
        return (OTHER.to_string(), vec![]);
    }
    let lens: Vec<usize> = tokens.iter().map(|t| t.lemma.chars().count()).collect();
    let min = *lens.iter().min().unwrap();
    let first = lens.iter().position(|&l| l == min).unwrap();
    (OTHER.to_string(), vec![tokens[first].clone()])
}

/// Insertion position by exhaustive nearest-link search.
pub fn oracle_insert_position(links: &Pairs, src_len: usize, tgt_len: usize, i: usize) -> usize {
    let mut best: Option<(usize, bool, usize)> = None; // (distance, right side, source index)
    for &(j, _) in links {
        if j == i {
            continue;
        }
        let key = (j.abs_diff(i), j > i, j);
        if best.is_none_or(|b| key < b) {
            best = Some(key);
        }
    }
    match best {
        Some((_, false, j)) => links.iter().filter(|l| l.0 == j).map(|l| l.1).max().unwrap() + 1,
        Some((_, true, j)) => links.iter().filter(|l| l.0 == j).map(|l| l.1).min().unwrap(),
        None if src_len == 0 => 0,
        None => {
            let x = (i * tgt_len) as f64 / src_len as f64;
            ((x + 0.5).floor() as usize).min(tgt_len)
        }
    }
}

const EN_WORDS: &[&str] = &["the", "cat", "is", "here", "he", "she", "saw", "It", "they", "THEY", "it", "."];
const FR_LEMMAS: &[&str] = &[
    "il", "elle", "ils", "elles", "ce", "c'", "cela", "ça", "on", "qui", "le", "chat", "être",
    "ici", "voir", ".", "lequel", "donc",
];
const LABELS: &[&str] = &["SBJ", "OBJ", "NMOD", "P", "ROOT"];

pub fn random_segment<R: Rng>(rng: &mut R) -> AnnotatedSegment {
    let src_len = rng.gen_range(1..=12);
    let tgt_len = rng.gen_range(1..=12);
    let source: Vec<String> = (0..src_len)
        .map(|_| EN_WORDS.choose(rng).unwrap().to_string())
        .collect();
    let labels: Vec<String> = (0..src_len)
        .map(|_| LABELS.choose(rng).unwrap().to_string())
        .collect();
    let target: Vec<TaggedToken> = (0..tgt_len)
        .map(|_| TaggedToken::new(*FR_LEMMAS.choose(rng).unwrap(), *TAGS.choose(rng).unwrap()).unwrap())
        .collect();
    let density = rng.gen_range(0.0..0.3);
    let alignment = to_set(&random_pairs(rng, src_len, tgt_len, density));
    AnnotatedSegment::new(source, target, alignment).with_labels(labels)
}

pub fn en_fr() -> SubtaskSpec {
    SubtaskSpec::new(Direction::EnFr)
}

// ---------------------------------------------------------------------------
// A toy gendered language: every noun has a fixed gender, and the pronoun
// that refers back to it agrees.

const MASC: &[(&str, &str)] = &[("cat", "chat"), ("dog", "chien"), ("car", "camion"), ("book", "livre")];
const FEM: &[(&str, &str)] = &[("mouse", "souris"), ("house", "maison"), ("table", "table"), ("bike", "moto")];
const VERBS: &[(&str, &str)] = &[("sleeps", "dormir"), ("falls", "tomber"), ("waits", "attendre")];
const ADJS: &[(&str, &str)] = &[("big", "grand"), ("old", "vieux"), ("red", "rouge"), ("new", "neuf")];

/// One segment: "the N V , it is A ." with "le/la N V , il/elle être A .",
/// or occasionally the pleonastic "it rains ." -> "pleuvoir ." with `it`
/// unaligned.
pub fn toy_segment<R: Rng>(rng: &mut R) -> (AnnotatedSegment, &'static str) {
    if rng.gen_bool(0.1) {
        let src = ["it", "rains", "."];
        let tgt = [("pleuvoir", "VER"), (".", ".")];
        let seg = AnnotatedSegment::new(
            src.iter().map(|s| s.to_string()).collect(),
            tgt.iter().map(|(l, p)| TaggedToken::new(*l, *p).unwrap()).collect(),
            AlignmentSet::from_pairs([(1, 0), (2, 1)]),
        )
        .with_labels(vec!["SBJ".into(), "ROOT".into(), "P".into()]);
        return (seg, OTHER);
    }
    let masc = rng.gen_bool(0.5);
    let (n_en, n_fr) = *if masc { MASC } else { FEM }.choose(rng).unwrap();
    let (v_en, v_fr) = *VERBS.choose(rng).unwrap();
    let (a_en, a_fr) = *ADJS.choose(rng).unwrap();
    let (det, pron) = if masc { ("le", "il") } else { ("la", "elle") };
    let src = ["the", n_en, v_en, ",", "it", "is", a_en, "."];
    let tgt = [
        (det, "DET"),
        (n_fr, "NOM"),
        (v_fr, "VER"),
        (",", "PUN"),
        (pron, "PRON"),
        ("être", "VER"),
        (a_fr, "ADJ"),
        (".", "."),
    ];
    let labels = ["NMOD", "SBJ", "ROOT", "P", "SBJ", "ROOT", "PRD", "P"];
    let seg = AnnotatedSegment::new(
        src.iter().map(|s| s.to_string()).collect(),
        tgt.iter().map(|(l, p)| TaggedToken::new(*l, *p).unwrap()).collect(),
        AlignmentSet::from_pairs((0..8).map(|i| (i, i))),
    )
    .with_labels(labels.iter().map(|s| s.to_string()).collect());
    (seg, pron)
}

pub fn toy_corpus<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<AnnotatedSegment>> {
    let segs: Vec<AnnotatedSegment> = (0..n).map(|_| toy_segment(rng).0).collect();
    segs.chunks(10).map(|c| c.to_vec()).collect()
}
