//! The n-gram baseline: fill every gap of an instance jointly with the
//! option that maximises the target sentence's log-probability, with a
//! constant penalty added each time nothing is inserted.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::{confusion, macro_recall, Percentage};
use crate::exec::Exec;
use crate::lm::candidates::{CandidateSet, Filler};
use crate::lm::ngram::{NGramModel, WordId};
use crate::lm::search::{search, GapScorer, SearchMode};
use crate::model::{SubtaskSpec, TargetItem, TaskInstance, OTHER};

/// The choice made for one gap.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Prediction {
    /// `None` when nothing was inserted.
    pub filler: Option<Filler>,
    pub class: String,
}

impl Prediction {
    pub fn is_none(&self) -> bool {
        self.filler.is_none()
    }
}

/// Lemma sequences an LM is trained on: the reference targets of the
/// instances, gaps restored.
pub fn lm_training_corpus(instances: &[TaskInstance]) -> Vec<Vec<String>> {
    instances
        .iter()
        .map(|i| i.reference_target().into_iter().map(|t| t.lemma).collect())
        .collect()
}

struct InstanceScorer<'a> {
    model: &'a NGramModel,
    /// Words between gaps; the last segment ends with `</s>`.
    segments: Vec<Vec<WordId>>,
    options: Vec<Option<Vec<WordId>>>,
    none_penalty: f64,
}

impl<'a> InstanceScorer<'a> {
    fn new(model: &'a NGramModel, inst: &TaskInstance, cands: &CandidateSet, none_penalty: f64) -> Self {
        let mut segments = vec![Vec::new()];
        for item in &inst.target {
            match item {
                TargetItem::Token(t) => segments.last_mut().unwrap().push(model.id(&t.lemma)),
                TargetItem::Placeholder(_) => segments.push(Vec::new()),
            }
        }
        segments.last_mut().unwrap().push(model.eos());
        let options = cands
            .options()
            .into_iter()
            .map(|o| o.map(|f| model.ids(&f.lemmas)))
            .collect();
        InstanceScorer {
            model,
            segments,
            options,
            none_penalty,
        }
    }
}

impl GapScorer for InstanceScorer<'_> {
    type State = Vec<WordId>;

    fn num_slots(&self) -> usize {
        self.segments.len() - 1
    }

    fn num_options(&self) -> usize {
        self.options.len()
    }

    fn start(&self) -> (Vec<WordId>, f64) {
        let (score, ctx) = self.model.extend(&[self.model.bos()], &self.segments[0]);
        (ctx, score)
    }

    fn extend(&self, state: &Vec<WordId>, slot: usize, option: usize) -> (Vec<WordId>, f64) {
        let (mut ids, penalty) = match &self.options[option] {
            Some(f) => (f.clone(), 0.0),
            None => (Vec::new(), self.none_penalty),
        };
        ids.extend_from_slice(&self.segments[slot + 1]);
        let (score, ctx) = self.model.extend(state, &ids);
        (ctx, score + penalty)
    }
}

pub fn fill_placeholders(
    model: &NGramModel,
    inst: &TaskInstance,
    candidates: &CandidateSet,
    none_penalty: f64,
) -> Result<Vec<Prediction>> {
    fill_placeholders_with(model, inst, candidates, none_penalty, SearchMode::Auto)
}

/// One prediction per gap, in target order. Non-pronoun fillers and the
/// empty option are classed `OTHER`.
pub fn fill_placeholders_with(
    model: &NGramModel,
    inst: &TaskInstance,
    candidates: &CandidateSet,
    none_penalty: f64,
    mode: SearchMode,
) -> Result<Vec<Prediction>> {
    if !model.is_trained() {
        return Err(Error::UntrainedModel);
    }
    let scorer = InstanceScorer::new(model, inst, candidates, none_penalty);
    if scorer.num_slots() == 0 {
        return Ok(Vec::new());
    }
    let best = search(&scorer, mode)
        .ok_or_else(|| Error::InputMismatch("candidate set is empty".into()))?;
    let options = candidates.options();
    Ok(best
        .choices
        .into_iter()
        .map(|c| match options[c] {
            Some(f) => Prediction {
                filler: Some(f.clone()),
                class: f.class.clone(),
            },
            None => Prediction {
                filler: None,
                class: OTHER.to_string(),
            },
        })
        .collect())
}

pub fn predict_all(
    model: &NGramModel,
    instances: &[TaskInstance],
    candidates: &CandidateSet,
    none_penalty: f64,
    mode: SearchMode,
    exec: Exec,
) -> Result<Vec<Vec<Prediction>>> {
    if !model.is_trained() {
        return Err(Error::UntrainedModel);
    }
    exec.try_map(instances, |inst| {
        fill_placeholders_with(model, inst, candidates, none_penalty, mode)
    })
}

/// `start` to `end` inclusive in steps of `|step|`, in whichever direction
/// `end` lies. Points are computed from an integer step count so they do
/// not drift.
pub fn penalty_grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    let bad = |m: &str| Error::InputMismatch(format!("penalty grid: {m}"));
    if !(start.is_finite() && end.is_finite() && step.is_finite()) {
        return Err(bad("values must be finite"));
    }
    if step == 0.0 {
        return Err(bad("step must be non-zero"));
    }
    let step = if end < start { -step.abs() } else { step.abs() };
    let n = ((end - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

/// Parses `start:end:step`, e.g. `0:-4:0.5`.
pub fn parse_penalty_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, c] = parts.as_slice() else {
        return Err(Error::InputMismatch(format!("penalty grid `{s}`: expected start:end:step")));
    };
    let num = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|_| Error::InputMismatch(format!("penalty grid `{s}`: bad number `{x}`")))
    };
    penalty_grid(num(a)?, num(b)?, num(c)?)
}

/// `0, -0.5, ..., -4`.
pub fn default_penalty_grid() -> Vec<f64> {
    (0..=8).map(|i| 0.0 - 0.5 * i as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub penalty: f64,
    pub macro_recall: Percentage,
    pub none_predictions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuneResult {
    pub penalty: f64,
    pub grid: Vec<GridPoint>,
}

impl TuneResult {
    pub fn best(&self) -> &GridPoint {
        self.grid
            .iter()
            .find(|p| p.penalty == self.penalty)
            .expect("chosen penalty is on the grid")
    }
}

/// Picks the grid penalty with the highest dev macro-averaged recall; ties
/// go to the penalty closest to zero.
pub fn tune_none_penalty(
    model: &NGramModel,
    dev: &[TaskInstance],
    candidates: &CandidateSet,
    spec: &SubtaskSpec,
    grid: &[f64],
    exec: Exec,
) -> Result<TuneResult> {
    if grid.is_empty() {
        return Err(Error::InputMismatch("penalty grid is empty".into()));
    }
    let gold: Vec<&str> = dev
        .iter()
        .flat_map(|i| i.labels.iter().map(String::as_str))
        .collect();
    let mut points = Vec::with_capacity(grid.len());
    for &penalty in grid {
        let preds = predict_all(model, dev, candidates, penalty, SearchMode::Auto, exec)?;
        let flat: Vec<&str> = preds.iter().flatten().map(|p| p.class.as_str()).collect();
        let m = confusion(&gold, &flat, &spec.classes)?;
        points.push(GridPoint {
            penalty,
            macro_recall: macro_recall(&m)?,
            none_predictions: preds.iter().flatten().filter(|p| p.is_none()).count(),
        });
        log::debug!("penalty {penalty}: macro-R {}", points.last().unwrap().macro_recall);
    }
    let best = points
        .iter()
        .reduce(|a, b| {
            let closer = b.penalty.abs() < a.penalty.abs();
            if b.macro_recall > a.macro_recall || (b.macro_recall == a.macro_recall && closer) {
                b
            } else {
                a
            }
        })
        .unwrap();
    Ok(TuneResult {
        penalty: best.penalty,
        grid: points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_instance_line;
    use crate::lm::candidates::build_candidate_set;
    use crate::lm::ngram::{train_lm, TrainOptions};
    use crate::model::Direction;

    fn spec() -> SubtaskSpec {
        SubtaskSpec::new(Direction::EnFr)
    }

    fn inst(line: &str) -> TaskInstance {
        parse_instance_line(line, &spec()).unwrap()
    }

    fn toy() -> Vec<TaskInstance> {
        [
            "il\til|PRON\tit runs .\tREPLACE_0 courir|VER .|.\t0-0 1-1 2-2",
            "elle\telle|PRON\tit sings .\tREPLACE_0 chanter|VER .|.\t0-0 1-1 2-2",
            "OTHER\tNONE\tit rains .\tREPLACE_0 pleuvoir|VER .|.\t1-1 2-2",
            "il elle\til|PRON elle|PRON\tit runs and it sings .\tREPLACE_0 courir|VER et|KON REPLACE_3 chanter|VER .|.\t0-0 1-1 2-2 3-3 4-4 5-5",
        ]
        .iter()
        .map(|l| inst(l))
        .collect()
    }

    fn trained() -> NGramModel {
        let corpus = lm_training_corpus(&toy());
        train_lm(&corpus, TrainOptions { order: 3, min_count: 1 }).unwrap()
    }

    #[test]
    fn corpus_restores_gaps() {
        let c = lm_training_corpus(&toy());
        assert_eq!(c[0], ["il", "courir", "."]);
        assert_eq!(c[2], ["pleuvoir", "."]);
    }

    #[test]
    fn fills_from_context() {
        let m = trained();
        let cands = build_candidate_set(&toy(), &spec(), 0);
        let data = toy();
        let got: Vec<Vec<String>> = data
            .iter()
            .map(|i| {
                fill_placeholders(&m, i, &cands, 0.0)
                    .unwrap()
                    .into_iter()
                    .map(|p| p.class)
                    .collect()
            })
            .collect();
        assert_eq!(got[0], ["il"]);
        assert_eq!(got[1], ["elle"]);
        assert_eq!(got[3], ["il", "elle"]);
    }

    #[test]
    fn untrained_model_rejected() {
        let cands = build_candidate_set(&[], &spec(), 0);
        let err = fill_placeholders(&NGramModel::untrained(3), &toy()[0], &cands, 0.0).unwrap_err();
        assert!(matches!(err, Error::UntrainedModel));
    }

    #[test]
    fn penalty_grids() {
        assert_eq!(default_penalty_grid(), parse_penalty_grid("0:-4:0.5").unwrap());
        assert_eq!(default_penalty_grid().len(), 9);
        assert!(default_penalty_grid()[0].is_sign_positive());
        assert_eq!(parse_penalty_grid("-1:-1:0.5").unwrap(), [-1.0]);
        assert_eq!(parse_penalty_grid("0:-0.3:0.1").unwrap().len(), 4);
        assert!(parse_penalty_grid("0:-4:0").is_err());
        assert_eq!(parse_penalty_grid("0:-1:-0.5").unwrap(), [0.0, -0.5, -1.0]);
        assert!(parse_penalty_grid("0:x:1").is_err());
        assert!(parse_penalty_grid("0:4").is_err());
    }

    #[test]
    fn very_negative_penalty_suppresses_none() {
        let m = trained();
        let cands = build_candidate_set(&toy(), &spec(), 0);
        let preds = fill_placeholders(&m, &toy()[2], &cands, -1e6).unwrap();
        assert!(!preds[0].is_none());
    }

    #[test]
    fn tuning_prefers_penalty_nearest_zero_on_ties() {
        let m = trained();
        let data = toy();
        let cands = build_candidate_set(&data, &spec(), 0);
        let r = tune_none_penalty(&m, &data, &cands, &spec(), &default_penalty_grid(), Exec::Sequential)
            .unwrap();
        let best = r.best().macro_recall.clone();
        assert!(r.grid.iter().all(|p| p.macro_recall <= best));
        let first = r.grid.iter().find(|p| p.macro_recall == best).unwrap();
        assert_eq!(first.penalty, r.penalty);
    }

    fn corpus(bare: usize, with_il: usize) -> NGramModel {
        let mut c: Vec<Vec<&str>> = vec![vec!["être", "petit"]; bare];
        c.extend(vec![vec!["il", "être", "petit"]; with_il]);
        train_lm(&c, TrainOptions { order: 3, min_count: 1 }).unwrap()
    }

    fn gap() -> TaskInstance {
        inst("il\til|PRON\tit is small\tREPLACE_0 être|VER petit|ADJ\t0-0 1-1 2-2")
    }

    #[test]
    fn more_frequent_pronoun_wins() {
        let c: Vec<Vec<&str>> = vec![vec!["il", "être", "petit"]; 3]
            .into_iter()
            .chain([vec!["elle", "être", "petit"]])
            .collect();
        let m = train_lm(&c, TrainOptions { order: 3, min_count: 1 }).unwrap();
        let mut cands = CandidateSet {
            pronoun_fillers: vec![Filler::new("il", "il"), Filler::new("elle", "elle")],
            other_fillers: vec![],
            include_none: false,
        };
        assert_eq!(fill_placeholders(&m, &gap(), &cands, 0.0).unwrap()[0].class, "il");
        cands.pronoun_fillers.truncate(1);
        assert_eq!(fill_placeholders(&m, &gap(), &cands, 0.0).unwrap()[0].class, "il");
    }

    #[test]
    fn penalty_crossover() {
        let m = corpus(5, 1);
        let cands = build_candidate_set(&[], &spec(), 0);
        assert!(fill_placeholders(&m, &gap(), &cands, 0.0).unwrap()[0].is_none());
        let p = fill_placeholders(&m, &gap(), &cands, -4.0).unwrap();
        assert_eq!(p[0].class, "il");
    }

    #[test]
    fn tuning_fixtures() {
        let cands = build_candidate_set(&[], &spec(), 0);
        let grid = default_penalty_grid();
        // NONE beats "il" by a margin between 3.5 and 4
        let r = tune_none_penalty(&corpus(50, 1), &[gap()], &cands, &spec(), &grid, Exec::Sequential)
            .unwrap();
        assert_eq!(r.penalty, -4.0);
        // margin between 1 and 1.5
        let r = tune_none_penalty(&corpus(3, 1), &[gap()], &cands, &spec(), &grid, Exec::Sequential)
            .unwrap();
        assert_eq!(r.penalty, -1.5);
        // gold OTHER is matched by NONE up to the crossover, so 0 wins the tie
        let mut other = gap();
        other.labels = vec![OTHER.into()];
        other.replaced = vec![vec![]];
        let r = tune_none_penalty(&corpus(400, 1), &[other], &cands, &spec(), &grid, Exec::Sequential)
            .unwrap();
        assert_eq!(r.penalty, 0.0);
        assert!(r.grid.iter().all(|p| p.macro_recall == r.grid[0].macro_recall));
    }
}
