use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use pronoun_core::align::{evaluate_corpus, implied_dimensions, symmetrize_corpus, CorpusAlignmentScore, SegmentPair};
use pronoun_core::eval::{confusion, macro_recall, score_report, uniform_random_labels, ScoreReport};
use pronoun_core::extract::{extract_with_report, AnnotatedSegment, ExtractOptions};
use pronoun_core::format::{
    read_alignment_file, read_instances_with, read_tagged_corpus, read_token_corpus, write_alignment_file,
    write_instances,
};
use pronoun_core::lm::{
    build_candidate_set, lm_training_corpus, parse_penalty_grid, predict_all, train_lm, CandidateSet, NGramModel,
    Prediction, SearchMode, TrainOptions, TuneResult,
};
use pronoun_core::model::{SubtaskSpec, TagsetMode, TaskInstance};
use pronoun_core::{Error, Exec};
use serde_json::json;

use crate::args::*;
use crate::io::{located, read, write_to};

fn instances(path: &Path, spec: &SubtaskSpec, exec: Exec) -> Result<Vec<TaskInstance>> {
    read(path, |r| read_instances_with(r, spec, TagsetMode::Lenient, exec))
}

fn same_length(what: &[(&Path, usize)]) -> Result<()> {
    let (first, n) = what[0];
    for &(p, m) in &what[1..] {
        if m != n {
            bail!(
                "{}: {m} lines, but {} has {n}; the files must be line-parallel",
                p.display(),
                first.display()
            );
        }
    }
    Ok(())
}

pub fn symmetrize(a: &SymmetrizeArgs, exec: Exec) -> Result<()> {
    let fwd = read(&a.fwd, read_alignment_file)?;
    let bwd = read(&a.bwd, read_alignment_file)?;
    same_length(&[(&a.fwd, fwd.len()), (&a.bwd, bwd.len())])?;
    let lengths = |p: &Option<PathBuf>| -> Result<Option<Vec<usize>>> {
        match p {
            Some(p) => {
                let c = read(p, read_token_corpus)?;
                same_length(&[(&a.fwd, fwd.len()), (p, c.len())])?;
                Ok(Some(c.iter().map(Vec::len).collect()))
            }
            None => Ok(None),
        }
    };
    let (src, tgt) = (lengths(&a.source)?, lengths(&a.target)?);

    let mut segments = Vec::with_capacity(fwd.len());
    for (i, (f, b)) in fwd.into_iter().zip(bwd).enumerate() {
        let (s, t) = implied_dimensions([&f, &b]);
        let src_len = src.as_ref().map_or(s, |v| v[i]);
        let tgt_len = tgt.as_ref().map_or(t, |v| v[i]);
        f.check_bounds(src_len, tgt_len).map_err(|e| located(&a.fwd, e.at_line(i + 1)))?;
        b.check_bounds(src_len, tgt_len).map_err(|e| located(&a.bwd, e.at_line(i + 1)))?;
        segments.push(SegmentPair {
            forward: f,
            backward: b,
            src_len,
            tgt_len,
        });
    }
    let out = symmetrize_corpus(&segments, a.heuristic, exec).map_err(|e| located(&a.fwd, e))?;
    log::info!("symmetrised {} segments with {}", out.len(), a.heuristic.name());
    write_to(a.out.as_deref(), |w| write_alignment_file(w, &out).map_err(to_io))
}

fn to_io(e: Error) -> std::io::Error {
    match e {
        Error::Io(e) => e,
        e => std::io::Error::other(e.to_string()),
    }
}

pub fn extract(a: &ExtractArgs, exec: Exec) -> Result<()> {
    let spec = SubtaskSpec::new(a.direction);
    let source = read(&a.source, read_token_corpus)?;
    let target = read(&a.target_tagged, read_tagged_corpus)?;
    let alignments = read(&a.alignments, read_alignment_file)?;
    let mut lens = vec![
        (a.source.as_path(), source.len()),
        (a.target_tagged.as_path(), target.len()),
        (a.alignments.as_path(), alignments.len()),
    ];
    let labels = match &a.dep_labels {
        Some(p) => {
            let l = read(p, read_token_corpus)?;
            lens.push((p.as_path(), l.len()));
            Some(l)
        }
        None => None,
    };
    same_length(&lens)?;

    let mut opts = ExtractOptions::for_spec(&spec);
    if a.no_subject_filter {
        opts = opts.without_filter();
    }
    opts.emit_all_segments = a.all_segments;
    if opts.subject_filter.is_some() && labels.is_none() {
        bail!(
            "{:?} source pronouns are filtered by dependency label: pass --dep-labels or --no-subject-filter",
            spec.direction.source_language()
        );
    }

    let mut labels = labels.map(Vec::into_iter);
    let segments: Vec<AnnotatedSegment> = source
        .into_iter()
        .zip(target)
        .zip(alignments)
        .map(|((s, t), al)| {
            let seg = AnnotatedSegment::new(s, t, al);
            match labels.as_mut() {
                Some(it) => seg.with_labels(it.next().expect("lengths checked")),
                None => seg,
            }
        })
        .collect();

    let report = extract_with_report(&[segments], &spec, &opts, exec).map_err(|e| {
        let file = match &e {
            Error::AtLine { source, .. } => match **source {
                Error::InputMismatch(_) => a.dep_labels.as_deref().unwrap_or(&a.source),
                _ => &a.alignments,
            },
            _ => &a.alignments,
        };
        located(file, e)
    })?;
    log::info!("extracted {} instances", report.instances.len());
    write_to(a.out.as_deref(), |w| write_instances(w, &report.instances).map_err(to_io))?;
    match &a.report {
        Some(p) => write_to(Some(p), |w| writeln!(w, "{report}"))?,
        None => eprintln!("{report}"),
    }
    Ok(())
}

pub fn train(a: &TrainLmArgs, exec: Exec) -> Result<()> {
    let corpus: Vec<Vec<String>> = match (&a.input, &a.instances, a.direction) {
        (Some(p), _, _) => read(p, read_token_corpus)?,
        (None, Some(p), Some(d)) => lm_training_corpus(&instances(p, &SubtaskSpec::new(d), exec)?),
        _ => bail!("either --in or --instances with --direction is required"),
    };
    let source = a.input.as_ref().or(a.instances.as_ref()).expect("one input is present");
    let opts = TrainOptions {
        order: a.order as usize,
        min_count: a.min_count,
    };
    let model = train_lm(&corpus, opts).map_err(|e| located(source, e))?;
    log::info!(
        "trained order-{} model on {} sentences, {} words in vocabulary",
        model.order(),
        corpus.len(),
        model.vocabulary().len()
    );
    write_to(Some(&a.out), |w| model.save(w).map_err(to_io))
}

fn load_model(path: &Path) -> Result<NGramModel> {
    read(path, NGramModel::load)
}

fn candidates(c: &CandidateArgs, spec: &SubtaskSpec, exec: Exec) -> Result<CandidateSet> {
    match (&c.candidates, &c.train) {
        (Some(p), _) => read(p, |r| CandidateSet::read(r, spec)),
        (None, Some(p)) => Ok(build_candidate_set(&instances(p, spec, exec)?, spec, c.other_fillers)),
        (None, None) => bail!("either --candidates or --train is required"),
    }
}

fn grid(s: &str) -> Result<Vec<f64>> {
    parse_penalty_grid(s).map_err(|e| anyhow::anyhow!("--grid: {e}"))
}

fn tune_table(r: &TuneResult) -> String {
    let mut s = String::from("penalty\tmacro-R\tnone\n");
    for p in &r.grid {
        s.push_str(&format!("{}\t{}\t{}\n", p.penalty, p.macro_recall, p.none_predictions));
    }
    s.push_str(&format!("best\t{}\n", r.penalty));
    s
}

fn tune_on(
    model: &NGramModel,
    dev: &[TaskInstance],
    cands: &CandidateSet,
    spec: &SubtaskSpec,
    grid: &[f64],
    mode: SearchMode,
    exec: Exec,
) -> pronoun_core::Result<TuneResult> {
    if mode == SearchMode::Auto {
        return pronoun_core::lm::tune_none_penalty(model, dev, cands, spec, grid, exec);
    }
    // The library tunes with automatic search; other modes go through the
    // same selection rule here.
    let gold: Vec<&str> = dev.iter().flat_map(|i| i.labels.iter().map(String::as_str)).collect();
    let mut points = Vec::new();
    for &penalty in grid {
        let preds = predict_all(model, dev, cands, penalty, mode, exec)?;
        let flat: Vec<&str> = preds.iter().flatten().map(|p| p.class.as_str()).collect();
        let m = confusion(&gold, &flat, &spec.classes)?;
        points.push(pronoun_core::lm::GridPoint {
            penalty,
            macro_recall: macro_recall(&m)?,
            none_predictions: preds.iter().flatten().filter(|p| p.is_none()).count(),
        });
    }
    let mut best = &points[0];
    for p in &points[1..] {
        if p.macro_recall > best.macro_recall
            || (p.macro_recall == best.macro_recall && p.penalty.abs() < best.penalty.abs())
        {
            best = p;
        }
    }
    Ok(TuneResult {
        penalty: best.penalty,
        grid: points,
    })
}

pub fn tune(a: &TuneArgs, exec: Exec) -> Result<()> {
    let spec = SubtaskSpec::new(a.direction);
    let model = load_model(&a.model)?;
    let dev = instances(&a.dev, &spec, exec)?;
    let cands = candidates(&a.candidates, &spec, exec)?;
    let grid = grid(&a.grid)?;
    let r = tune_on(&model, &dev, &cands, &spec, &grid, a.search, exec).map_err(|e| located(&a.dev, e))?;
    write_to(a.out.as_deref(), |w| w.write_all(tune_table(&r).as_bytes()))
}

fn prediction_lines(preds: &[Vec<Prediction>]) -> String {
    let mut s = String::new();
    for p in preds {
        let labels: Vec<&str> = p.iter().map(|x| x.class.as_str()).collect();
        s.push_str(&labels.join(" "));
        s.push('\n');
    }
    s
}

pub fn predict(a: &PredictArgs, exec: Exec) -> Result<()> {
    let spec = SubtaskSpec::new(a.direction);
    let model = load_model(&a.model)?;
    let insts = instances(&a.input, &spec, exec)?;
    let cands = candidates(&a.candidates, &spec, exec)?;
    let preds =
        predict_all(&model, &insts, &cands, a.none_penalty, a.search, exec).map_err(|e| located(&a.input, e))?;
    write_to(a.out.as_deref(), |w| w.write_all(prediction_lines(&preds).as_bytes()))
}

fn score_files(gold: &Path, pred: &Path, spec: &SubtaskSpec, exec: Exec) -> Result<(Vec<TaskInstance>, ScoreReport)> {
    let gold_insts = instances(gold, spec, exec)?;
    let preds = read(pred, read_token_corpus)?;
    if preds.len() != gold_insts.len() {
        bail!(
            "{}: {} prediction lines for {} gold instances in {}",
            pred.display(),
            preds.len(),
            gold_insts.len(),
            gold.display()
        );
    }
    let report = score_report(&gold_insts, &preds, spec).map_err(|e| located(pred, e))?;
    Ok((gold_insts, report))
}

fn random_report(gold: &[TaskInstance], spec: &SubtaskSpec, seed: u64, exec: Exec) -> Result<ScoreReport> {
    let n: usize = gold.iter().map(|i| i.labels.len()).sum();
    let mut draws = uniform_random_labels(n, &spec.classes, seed, exec).into_iter();
    let preds: Vec<Vec<String>> = gold
        .iter()
        .map(|i| draws.by_ref().take(i.labels.len()).collect())
        .collect();
    Ok(score_report(gold, &preds, spec)?)
}

pub fn score(a: &ScoreArgs, seed: u64, exec: Exec) -> Result<()> {
    let spec = SubtaskSpec::new(a.direction);
    let (gold, report) = score_files(&a.gold, &a.pred, &spec, exec)?;
    let random = if a.random_baseline {
        Some(random_report(&gold, &spec, seed, exec)?)
    } else {
        None
    };
    let text = if a.json {
        let mut v = serde_json::to_value(&report).context("serialising report")?;
        if let Some(r) = &random {
            v["random_baseline"] = json!({
                "seed": seed,
                "macro_recall": r.macro_recall,
                "accuracy": r.accuracy,
            });
        }
        serde_json::to_string_pretty(&v).context("serialising report")? + "\n"
    } else {
        let mut s = report.to_text(&a.system);
        if let Some(r) = &random {
            s.push_str(&format!("\nsystem\tmacro-R\taccuracy\n{}\n", r.table_row(&format!("random (seed {seed})"))));
        }
        s
    };
    write_to(None, |w| w.write_all(text.as_bytes()))
}

fn alignment_text(s: &CorpusAlignmentScore) -> String {
    let mut out = String::from("links\tP\tR\tF1\tcorrect\thyp\tgold\n");
    let c = s.counts;
    out.push_str(&format!("all\t{}\t{}\t{}\t{}\n", s.all, c.correct, c.hypothesis, c.gold));
    if let (Some(p), Some(c)) = (s.pronouns, s.pronoun_counts) {
        out.push_str(&format!("pronouns\t{p}\t{}\t{}\t{}\n", c.correct, c.hypothesis, c.gold));
    }
    out
}

pub fn align_eval(a: &AlignEvalArgs, exec: Exec) -> Result<()> {
    let hyp = read(&a.hyp, read_alignment_file)?;
    let gold = read(&a.gold, read_alignment_file)?;
    same_length(&[(&a.gold, gold.len()), (&a.hyp, hyp.len())])?;
    let positions = match (&a.source, a.direction) {
        (Some(p), Some(d)) => {
            let spec = SubtaskSpec::new(d);
            let src = read(p, read_token_corpus)?;
            same_length(&[(&a.gold, gold.len()), (p, src.len())])?;
            Some(
                src.iter()
                    .map(|s| (0..s.len()).filter(|&i| spec.is_source_pronoun(&s[i])).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
            )
        }
        _ => None,
    };
    let s = evaluate_corpus(&hyp, &gold, positions.as_deref(), exec).map_err(|e| located(&a.hyp, e))?;
    let text = if a.json {
        let v = json!({
            "all": s.all,
            "counts": s.counts,
            "pronouns": s.pronouns,
            "pronoun_counts": s.pronoun_counts,
        });
        serde_json::to_string_pretty(&v).context("serialising scores")? + "\n"
    } else {
        alignment_text(&s)
    };
    write_to(None, |w| w.write_all(text.as_bytes()))
}

pub fn reproduce(a: &ReproduceArgs, exec: Exec) -> Result<()> {
    let spec = SubtaskSpec::new(a.direction);
    let train = instances(&a.train, &spec, exec)?;
    let dev = instances(&a.dev, &spec, exec)?;
    let test = instances(&a.test, &spec, exec)?;
    let grid = grid(&a.grid)?;

    let opts = TrainOptions {
        order: a.order as usize,
        min_count: a.min_count,
    };
    let model = train_lm(&lm_training_corpus(&train), opts).map_err(|e| located(&a.train, e))?;
    let cands = build_candidate_set(&train, &spec, a.other_fillers);
    log::info!("model trained; {} candidate options", cands.len());

    let tuned = tune_on(&model, &dev, &cands, &spec, &grid, a.search, exec).map_err(|e| located(&a.dev, e))?;
    let preds = predict_all(&model, &test, &cands, tuned.penalty, a.search, exec).map_err(|e| located(&a.test, e))?;
    let labels: Vec<Vec<String>> = preds.iter().map(|p| p.iter().map(|x| x.class.clone()).collect()).collect();
    let report = score_report(&test, &labels, &spec).map_err(|e| located(&a.test, e))?;

    if let Some(dir) = &a.out_dir {
        fs::create_dir_all(dir).with_context(|| format!("{}: cannot create directory", dir.display()))?;
        write_to(Some(&dir.join("model.lm")), |w| model.save(w).map_err(to_io))?;
        write_to(Some(&dir.join("candidates.tsv")), |w| cands.write(w).map_err(to_io))?;
        write_to(Some(&dir.join("tune.tsv")), |w| w.write_all(tune_table(&tuned).as_bytes()))?;
        write_to(Some(&dir.join("predictions.txt")), |w| {
            w.write_all(prediction_lines(&preds).as_bytes())
        })?;
        write_to(Some(&dir.join("report.txt")), |w| w.write_all(report.to_text("baseline").as_bytes()))?;
    }
    let text = format!(
        "none-penalty\t{}\n\n{}\n{}",
        tuned.penalty,
        tune_table(&tuned),
        report.to_text("baseline")
    );
    write_to(None, |w| w.write_all(text.as_bytes()))
}
