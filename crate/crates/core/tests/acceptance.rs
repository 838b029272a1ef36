//! Acceptance checks. Runs without the libtest harness so every criterion
//! prints one PASS/FAIL line; exits non-zero if any fails.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use pronoun_core::align::{evaluate_alignment, symmetrize, Heuristic};
use pronoun_core::eval::{
    accuracy, confusion, expected_random_macro_recall, macro_recall, score_report,
    uniform_random_labels,
};
use pronoun_core::extract::{
    extract_examples, extract_with_report, insert_placeholder_unaligned, map_target_class,
    ExtractOptions,
};
use pronoun_core::format::{parse_instance_line, serialize_instance};
use pronoun_core::lm::{
    build_candidate_set, default_penalty_grid, fill_placeholders_with, lm_training_corpus,
    predict_all, train_lm, tune_none_penalty, CandidateSet, Filler, SearchMode, TrainOptions,
    DEFAULT_OTHER_FILLERS,
};
use pronoun_core::model::{
    AlignmentSet, Direction, SubtaskSpec, TaggedToken, TargetItem, TaskInstance, OTHER,
};
use pronoun_core::Exec;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

// Written as `!cond` so that a NaN comparison fails the check.
macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure!(took < limit, "took {took:.2?}, limit {limit:?}");
    Ok(took)
}

const FIG2: &str = "ce OTHER\tce|PRON qui|PRON\tIt 's an idiotic debate . It has to stop .\tREPLACE_0 être|VER un|DET débat|NOM idiot|ADJ REPLACE_6 devoir|VER stopper|VER .|.\t0-0 1-1 2-2 3-4 4-3 6-5 7-6 8-6 9-7 10-8";

fn fig2_structure() -> TaskInstance {
    let tok = |l: &str, p: &str| TaggedToken::new(l, p).unwrap();
    TaskInstance {
        labels: vec!["ce".into(), OTHER.into()],
        replaced: vec![vec![tok("ce", "PRON")], vec![tok("qui", "PRON")]],
        source: "It 's an idiotic debate . It has to stop ."
            .split(' ')
            .map(String::from)
            .collect(),
        target: vec![
            TargetItem::Placeholder(0),
            TargetItem::Token(tok("être", "VER")),
            TargetItem::Token(tok("un", "DET")),
            TargetItem::Token(tok("débat", "NOM")),
            TargetItem::Token(tok("idiot", "ADJ")),
            TargetItem::Placeholder(6),
            TargetItem::Token(tok("devoir", "VER")),
            TargetItem::Token(tok("stopper", "VER")),
            TargetItem::Token(tok(".", ".")),
        ],
        alignment: AlignmentSet::from_pairs([
            (0, 0),
            (1, 1),
            (2, 2),
            (3, 4),
            (4, 3),
            (6, 5),
            (7, 6),
            (8, 6),
            (9, 7),
            (10, 8),
        ]),
    }
}

fn format_roundtrip() -> Check {
    let start = Instant::now();
    let spec = en_fr();
    let parsed = parse_instance_line(FIG2, &spec).map_err(|e| e.to_string())?;
    ensure!(parsed == fig2_structure(), "example line parsed to {parsed:?}");
    ensure!(serialize_instance(&parsed) == FIG2, "example line does not re-serialize verbatim");

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let specs: Vec<SubtaskSpec> = Direction::ALL.iter().map(|&d| SubtaskSpec::new(d)).collect();
    for i in 0..10_000 {
        let spec = &specs[i % 4];
        let inst = random_instance(&mut rng, spec);
        let line = serialize_instance(&inst);
        let back = parse_instance_line(&line, spec).map_err(|e| format!("line {i} `{line}`: {e}"))?;
        ensure!(back == inst, "line {i} `{line}` parsed to a different instance");
        ensure!(serialize_instance(&back) == line, "line {i} `{line}` re-serialized differently");
    }
    let took = within(Duration::from_secs(5), start)?;
    Ok(format!("10000 generated lines and the example line, {took:.2?}"))
}

fn metric_fixed_points() -> Check {
    let expected = [
        (Direction::EnFr, "12.50"),
        (Direction::FrEn, "12.50"),
        (Direction::EnDe, "20.00"),
        (Direction::DeEn, "11.11"),
    ];
    for (d, want) in expected {
        let got = expected_random_macro_recall(&SubtaskSpec::new(d)).to_string();
        ensure!(got == want, "{d}: random baseline {got}, expected {want}");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mc = Vec::new();
    for d in Direction::ALL {
        let spec = SubtaskSpec::new(d);
        let c = spec.classes.len();
        let gold: Vec<&String> = (0..100_000).map(|_| &spec.classes[rng.gen_range(0..c)]).collect();
        let pred = uniform_random_labels(100_000, &spec.classes, 42, Exec::default());
        let m = confusion(&gold, &pred, &spec.classes).map_err(|e| e.to_string())?;
        let got = macro_recall(&m).map_err(|e| e.to_string())?.value();
        let target = 100.0 / c as f64;
        ensure!((got - target).abs() <= 0.5, "{d}: Monte-Carlo macro-R {got:.3}, expected {target:.3} ± 0.5");
        mc.push(format!("{d} {got:.2}"));

        let m = confusion(&gold, &gold, &spec.classes).map_err(|e| e.to_string())?;
        let perfect = macro_recall(&m).map_err(|e| e.to_string())?;
        ensure!(perfect.to_string() == "100.00", "{d}: perfect predictions score {perfect}");
    }

    let classes: Vec<String> = ["A", "B", "C", "D"].iter().map(|s| s.to_string()).collect();
    let m = confusion(&["A", "A", "B", "C"], &["A", "B", "B", "C"], &classes).map_err(|e| e.to_string())?;
    let (r, a) = (macro_recall(&m).unwrap(), accuracy(&m).unwrap());
    ensure!(r.to_string() == "83.33" && a.to_string() == "75.00", "hand fixture: macro-R {r}, accuracy {a}");
    ensure!(
        r.proportion() == &BigRational::new(5.into(), 6.into()),
        "hand fixture: exact macro-R {:?}",
        r.proportion()
    );
    Ok(format!("random baselines exact; Monte-Carlo {}; hand fixture 83.33/75.00", mc.join(", ")))
}

fn symmetrisation() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let chain = [
        Heuristic::Intersection,
        Heuristic::GrowDiag,
        Heuristic::GrowDiagFinalAnd,
        Heuristic::GrowDiagFinal,
        Heuristic::Union,
    ];
    for case in 0..1000 {
        let (s, t) = (rng.gen_range(1..=20), rng.gen_range(1..=20));
        let density = rng.gen_range(0.02..0.3);
        let f = to_set(&random_pairs(&mut rng, s, t, density));
        let b = to_set(&random_pairs(&mut rng, s, t, density));
        let sets: Vec<AlignmentSet> = chain
            .iter()
            .map(|&h| symmetrize(&f, &b, h, s, t))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for (w, h) in sets.windows(2).zip(chain.windows(2)) {
            ensure!(
                w[0].is_subset(&w[1]),
                "case {case}: {} not a subset of {} (F={f}, B={b})",
                h[0].name(),
                h[1].name()
            );
        }
    }
    for case in 0..200 {
        let (s, t) = (rng.gen_range(1..=12), rng.gen_range(1..=12));
        let density = rng.gen_range(0.05..0.4);
        let f = random_pairs(&mut rng, s, t, density);
        let b = random_pairs(&mut rng, s, t, density);
        let (fs, bs) = (to_set(&f), to_set(&b));
        for (h, oracle) in [
            (Heuristic::GrowDiag, oracle_grow_diag(&f, &b)),
            (Heuristic::GrowDiagFinalAnd, oracle_gdfa(&f, &b)),
            (Heuristic::GrowDiagFinal, oracle_gdf(&f, &b)),
        ] {
            let got = pairs(&symmetrize(&fs, &bs, h, s, t).map_err(|e| e.to_string())?);
            ensure!(got == oracle, "case {case}: {} differs from reference (F={fs}, B={bs})", h.name());
        }
    }
    let took = within(Duration::from_secs(10), start)?;
    Ok(format!("chain on 1000 pairs, reference agreement on 200, {took:.2?}"))
}

fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head.clone());
            out.push(p);
        }
    }
    out
}

fn lm_soundness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let vocab: Vec<String> = (0..40).map(|i| format!("w{i}")).collect();
    let corpus: Vec<Vec<String>> = (0..400)
        .map(|_| {
            let n = rng.gen_range(1..=12);
            // skewed draws so that counts of counts vary
            (0..n)
                .map(|_| {
                    let top = rng.gen_range(1..=40);
                    vocab[rng.gen_range(0..top)].clone()
                })
                .collect()
        })
        .collect();
    let m = train_lm(&corpus, TrainOptions { order: 5, min_count: 1 }).map_err(|e| e.to_string())?;
    let histories = m.seen_histories();
    let mut worst = 0.0f64;
    for h in histories.choose_multiple(&mut rng, 100) {
        let sum: f64 = m.predictable().map(|w| m.prob(h, w)).sum();
        worst = worst.max((sum - 1.0).abs());
        ensure!((sum - 1.0).abs() <= 1e-6, "history {h:?} sums to {sum}");
    }

    let sentences = ["a", "a b", "le chat dormir", "il être très petit", "x y z w v"];
    let mut checked = 0;
    for s in sentences {
        let words: Vec<&str> = s.split(' ').collect();
        let lm = train_lm(std::slice::from_ref(&words), TrainOptions { order: 3, min_count: 1 })
            .map_err(|e| e.to_string())?;
        let own = lm.sentence_logprob(&words);
        for p in permutations(&words) {
            if p != words {
                let other = lm.sentence_logprob(&p);
                ensure!(own > other, "`{s}` scores {own}, permutation {p:?} scores {other}");
            }
            checked += 1;
        }
    }
    Ok(format!("100 histories (max deviation {worst:.1e}); {checked} permutations"))
}

fn baseline_behaviour() -> Check {
    let start = Instant::now();
    let spec = en_fr();
    let opts = ExtractOptions::for_spec(&spec);
    let grid = default_penalty_grid();
    let mut summary = Vec::new();
    for seed in 0..3u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let (train_docs, dev_docs, test_docs) =
            (toy_corpus(&mut rng, 600), toy_corpus(&mut rng, 100), toy_corpus(&mut rng, 100));
        let extract = |docs| extract_examples(docs, &spec, &opts, Exec::default()).map_err(|e| e.to_string());
        let (train, dev, test) = (extract(&train_docs)?, extract(&dev_docs)?, extract(&test_docs)?);

        let model = train_lm(&lm_training_corpus(&train), TrainOptions::default()).map_err(|e| e.to_string())?;
        let cands = build_candidate_set(&train, &spec, DEFAULT_OTHER_FILLERS);
        let tuned = tune_none_penalty(&model, &dev, &cands, &spec, &grid, Exec::default())
            .map_err(|e| e.to_string())?;
        ensure!(grid.contains(&tuned.penalty), "seed {seed}: tuned penalty {} not on the grid", tuned.penalty);
        ensure!(
            tuned.best().macro_recall >= tuned.grid[0].macro_recall,
            "seed {seed}: tuned dev macro-R {} below penalty 0's {}",
            tuned.best().macro_recall,
            tuned.grid[0].macro_recall
        );

        let mut none_counts = Vec::new();
        for &p in &grid {
            let preds = predict_all(&model, &test, &cands, p, SearchMode::Auto, Exec::default())
                .map_err(|e| e.to_string())?;
            none_counts.push(preds.iter().flatten().filter(|x| x.is_none()).count());
        }
        let dev_none: Vec<usize> = tuned.grid.iter().map(|g| g.none_predictions).collect();
        for counts in [&none_counts, &dev_none] {
            ensure!(
                counts.windows(2).all(|w| w[1] <= w[0]),
                "seed {seed}: NONE counts increase along the grid: {counts:?}"
            );
        }

        let preds = predict_all(&model, &test, &cands, tuned.penalty, SearchMode::Auto, Exec::default())
            .map_err(|e| e.to_string())?;
        let labels: Vec<Vec<String>> = preds
            .iter()
            .map(|p| p.iter().map(|x| x.class.clone()).collect())
            .collect();
        let report = score_report(&test, &labels, &spec).map_err(|e| e.to_string())?;
        ensure!(
            report.macro_recall.to_string() == "100.00",
            "seed {seed}: test macro-R {}",
            report.macro_recall
        );
        summary.push(format!("penalty {}", tuned.penalty));
    }
    let took = within(Duration::from_secs(60), start)?;
    Ok(format!("3 toy languages at 100.00 macro-R ({}), {took:.2?}", summary.join(", ")))
}

fn extraction_oracles() -> Check {
    let spec = en_fr();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut segments = Vec::new();
    let (mut classes, mut positions) = (0, 0);
    for case in 0..1000 {
        let seg = random_segment(&mut rng);
        let links = pairs(&seg.alignment);
        for i in 0..seg.source.len() {
            let aligned: Vec<TaggedToken> = seg
                .alignment
                .targets_of(i)
                .map(|t| seg.target[t].clone())
                .collect();
            if !aligned.is_empty() {
                let got = map_target_class(&aligned, &spec);
                ensure!(got == oracle_map_target_class(&aligned, &spec), "case {case}: class of {aligned:?} = {got:?}");
                classes += 1;
            }
            let mut unaligned = seg.clone();
            unaligned.alignment = seg.alignment.filter(|l| l.src != i);
            let links: BTreeSet<_> = links.iter().copied().filter(|l| l.0 != i).collect();
            let got = insert_placeholder_unaligned(&unaligned, i);
            let want = oracle_insert_position(&links, seg.source.len(), seg.target.len(), i);
            ensure!(got == want, "case {case}: position for {i} is {got}, expected {want} ({})", unaligned.alignment);
            positions += 1;
        }
        segments.push(seg);
    }

    let mut fixtures: Vec<Vec<Vec<_>>> = segments.chunks(100).map(|c| vec![c.to_vec()]).collect();
    fixtures.push(segments.chunks(10).map(|c| c.to_vec()).collect());
    fixtures.push(toy_corpus(&mut rng, 200));
    for (i, docs) in fixtures.iter().enumerate() {
        let report = extract_with_report(docs, &spec, &ExtractOptions::for_spec(&spec), Exec::default())
            .map_err(|e| e.to_string())?;
        let before = report.before.as_ref().ok_or("no unfiltered counts")?;
        for ((c, b), (_, a)) in before.counts.iter().zip(&report.after.counts) {
            ensure!(a <= b, "fixture {i}: class {c} has {a} after filtering, {b} before");
        }
    }
    Ok(format!(
        "{classes} class mappings, {positions} insert positions; {} filtering fixtures",
        fixtures.len()
    ))
}

fn joint_fill_equivalence() -> Check {
    let spec = en_fr();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let train = extract_examples(&toy_corpus(&mut rng, 400), &spec, &ExtractOptions::for_spec(&spec), Exec::Sequential)
        .map_err(|e| e.to_string())?;
    let corpus = lm_training_corpus(&train);
    let full = build_candidate_set(&train, &spec, 2);
    ensure!(full.len() <= 10, "candidate set has {} options", full.len());

    let mut fixtures = 0;
    for order in [2, 3, 5] {
        let model = train_lm(&corpus, TrainOptions { order, min_count: 1 }).map_err(|e| e.to_string())?;
        for n_cands in 1..=full.len() {
            let cands = truncated(&full, n_cands);
            for _ in 0..40 {
                let inst = gapped_instance(&mut rng, &corpus, 1 + fixtures % 3);
                for penalty in [0.0, -2.0] {
                    let ex = fill_placeholders_with(&model, &inst, &cands, penalty, SearchMode::Exhaustive)
                        .map_err(|e| e.to_string())?;
                    let bm = fill_placeholders_with(&model, &inst, &cands, penalty, SearchMode::Beam(8))
                        .map_err(|e| e.to_string())?;
                    ensure!(ex == bm, "order {order}, {n_cands} candidates: exhaustive {ex:?} vs beam {bm:?}");
                }
                fixtures += 1;
            }
        }
    }
    Ok(format!("{fixtures} fixtures with 1-3 gaps and 1-10 candidates"))
}

fn truncated(full: &CandidateSet, n: usize) -> CandidateSet {
    let mut opts: Vec<Option<Filler>> = full.options().into_iter().map(|o| o.cloned()).collect();
    opts.truncate(n);
    CandidateSet {
        pronoun_fillers: opts.iter().flatten().filter(|f| f.class != OTHER).cloned().collect(),
        other_fillers: opts.iter().flatten().filter(|f| f.class == OTHER).cloned().collect(),
        include_none: opts.iter().any(Option::is_none),
    }
}

/// A training sentence with 1 to 3 random positions turned into gaps.
fn gapped_instance(rng: &mut ChaCha8Rng, corpus: &[Vec<String>], gaps: usize) -> TaskInstance {
    let sentence = corpus.choose(rng).unwrap();
    let mut target: Vec<TargetItem> = sentence
        .iter()
        .map(|l| TargetItem::Token(TaggedToken::new(l.as_str(), "X").unwrap()))
        .collect();
    let gaps = gaps.min(target.len());
    let mut at: Vec<usize> = (0..target.len()).collect();
    at.shuffle(rng);
    let mut at = at[..gaps].to_vec();
    at.sort();
    for (k, &pos) in at.iter().enumerate() {
        target[pos] = TargetItem::Placeholder(k);
    }
    TaskInstance {
        labels: vec![OTHER.into(); gaps],
        replaced: vec![vec![]; gaps],
        source: vec!["it".into(); gaps],
        target,
        alignment: AlignmentSet::new(),
    }
}

fn alignment_evaluation() -> Check {
    let set = |p: &[(usize, usize)]| AlignmentSet::from_pairs(p.iter().copied());
    let gold = set(&[(0, 0), (2, 2)]);
    let cases = [
        (gold.clone(), (1.0, 1.0, 1.0)),
        (set(&[(0, 0), (1, 1)]), (0.5, 0.5, 0.5)),
        (AlignmentSet::new(), (1.0, 0.0, 0.0)),
    ];
    for (hyp, want) in cases {
        let (s, _) = evaluate_alignment(&hyp, &gold, None);
        ensure!((s.precision, s.recall, s.f1) == want, "hyp {{{hyp}}}: got {s:?}, expected {want:?}");
    }
    Ok("3 fixtures exact, empty hypothesis P=1 R=0".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("format round-trip", format_roundtrip),
        ("metric fixed points", metric_fixed_points),
        ("symmetrisation", symmetrisation),
        ("LM soundness", lm_soundness),
        ("baseline behaviour", baseline_behaviour),
        ("extraction oracles", extraction_oracles),
        ("joint fill equivalence", joint_fill_equivalence),
        ("alignment evaluation", alignment_evaluation),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} ({name}): PASS - {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL - {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
