//! The official scorer: macro-averaged recall over the classes present in
//! the gold standard, with accuracy as the secondary measure.
//!
//! Metrics are kept as exact fractions and only rounded (half up, two
//! decimals) for display.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{ConfusionMatrix, Direction, SubtaskSpec, TaskInstance};

/// A proportion in `[0, 1]`, displayed as a percentage with two decimals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Percentage(BigRational);

impl Percentage {
    pub fn from_ratio(num: u64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        Percentage(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn proportion(&self) -> &BigRational {
        &self.0
    }

    /// Percentage in hundredths, rounded half up.
    pub fn hundredths(&self) -> i64 {
        let half = BigRational::new(1.into(), 2.into());
        let scaled = &self.0 * BigRational::from_integer(10_000.into()) + half;
        scaled.floor().to_integer().to_i64().expect("percentage fits in i64")
    }

    /// Rounded percentage, e.g. `83.33`.
    pub fn rounded(&self) -> f64 {
        self.hundredths() as f64 / 100.0
    }

    /// Unrounded percentage.
    pub fn value(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN) * 100.0
    }
}

impl fmt::Display for Percentage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = self.hundredths();
        write!(f, "{}.{:02}", h / 100, h % 100)
    }
}

impl Serialize for Percentage {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.rounded())
    }
}

/// Tallies `(gold, predicted)` pairs.
pub fn confusion<G, P>(gold: &[G], pred: &[P], classes: &[String]) -> Result<ConfusionMatrix>
where
    G: AsRef<str>,
    P: AsRef<str>,
{
    if gold.len() != pred.len() {
        return Err(Error::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    let index = |label: &str| {
        classes
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    };
    let mut m = ConfusionMatrix::new(classes.to_vec());
    for (g, p) in gold.iter().zip(pred) {
        m.add(index(g.as_ref())?, index(p.as_ref())?);
    }
    Ok(m)
}

/// Parallel tally: chunks are counted separately and merged.
pub fn confusion_par<G, P>(
    gold: &[G],
    pred: &[P],
    classes: &[String],
    exec: Exec,
) -> Result<ConfusionMatrix>
where
    G: AsRef<str> + Sync,
    P: AsRef<str> + Sync,
{
    if gold.len() != pred.len() {
        return Err(Error::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    const CHUNK: usize = 4096;
    let starts: Vec<usize> = (0..gold.len()).step_by(CHUNK).collect();
    let parts = exec.try_map(&starts, |&s| {
        let e = (s + CHUNK).min(gold.len());
        confusion(&gold[s..e], &pred[s..e], classes)
    })?;
    Ok(parts
        .iter()
        .fold(ConfusionMatrix::new(classes.to_vec()), |acc, m| acc.merge(m)))
}

fn class_recalls(m: &ConfusionMatrix) -> impl Iterator<Item = BigRational> + '_ {
    (0..m.len()).filter_map(|i| {
        let row = m.row_sum(i);
        (row > 0).then(|| BigRational::new(BigInt::from(m.get(i, i)), BigInt::from(row)))
    })
}

/// Mean recall over the classes that occur in the gold standard; classes
/// with no gold examples are left out of the average.
pub fn macro_recall(m: &ConfusionMatrix) -> Result<Percentage> {
    let recalls: Vec<BigRational> = class_recalls(m).collect();
    if recalls.is_empty() {
        return Err(Error::EmptyGold);
    }
    let n = BigRational::from_integer(BigInt::from(recalls.len()));
    let sum = recalls.into_iter().fold(BigRational::zero(), |a, r| a + r);
    Ok(Percentage(sum / n))
}

pub fn accuracy(m: &ConfusionMatrix) -> Result<Percentage> {
    match m.total() {
        0 => Err(Error::EmptyGold),
        total => Ok(Percentage::from_ratio(m.trace(), total)),
    }
}

/// `100 / C`: the macro-averaged recall of a constant or uniformly random
/// classifier over `C` classes.
pub fn expected_random_macro_recall(spec: &SubtaskSpec) -> Percentage {
    Percentage::from_ratio(1, spec.num_classes() as u64)
}

/// Draws `n` labels uniformly from `classes`. Chunks use their own seeded
/// streams, so the output depends only on `seed`.
pub fn uniform_random_labels(n: usize, classes: &[String], seed: u64, exec: Exec) -> Vec<String> {
    const CHUNK: usize = 8192;
    let chunks = n.div_ceil(CHUNK);
    exec.map_range(chunks, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let len = CHUNK.min(n - c * CHUNK);
        (0..len)
            .map(|_| classes[rng.gen_range(0..classes.len())].clone())
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassScore {
    pub class: String,
    pub gold: u64,
    pub predicted: u64,
    pub correct: u64,
    /// `None` when the class is absent from the gold standard.
    pub recall: Option<f64>,
    pub precision: f64,
    /// The class was never predicted; precision is reported as 0.
    pub precision_undefined: bool,
    pub f1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScoreReport {
    pub direction: Direction,
    pub examples: u64,
    pub macro_recall: Percentage,
    pub accuracy: Percentage,
    /// Number of classes averaged over (those present in the gold standard).
    pub classes_in_gold: usize,
    pub per_class: Vec<ClassScore>,
    pub confusion: ConfusionMatrix,
}

impl ScoreReport {
    pub fn from_confusion(direction: Direction, m: ConfusionMatrix) -> Result<Self> {
        let macro_recall = macro_recall(&m)?;
        let accuracy = accuracy(&m)?;
        let per_class = (0..m.len())
            .map(|i| {
                let gold = m.row_sum(i);
                let predicted = m.col_sum(i);
                let correct = m.get(i, i);
                let recall = (gold > 0).then(|| correct as f64 / gold as f64);
                let precision = if predicted > 0 {
                    correct as f64 / predicted as f64
                } else {
                    0.0
                };
                let r = recall.unwrap_or(0.0);
                let f1 = if precision + r > 0.0 {
                    2.0 * precision * r / (precision + r)
                } else {
                    0.0
                };
                ClassScore {
                    class: m.classes()[i].clone(),
                    gold,
                    predicted,
                    correct,
                    recall,
                    precision,
                    precision_undefined: predicted == 0,
                    f1,
                }
            })
            .collect();
        Ok(ScoreReport {
            direction,
            examples: m.total(),
            classes_in_gold: (0..m.len()).filter(|&i| m.row_sum(i) > 0).count(),
            macro_recall,
            accuracy,
            per_class,
            confusion: m,
        })
    }

    /// Single result-table row: system name, macro-averaged recall, accuracy.
    pub fn table_row(&self, system: &str) -> String {
        format!("{system}\t{}\t{}", self.macro_recall, self.accuracy)
    }

    pub fn to_text(&self, system: &str) -> String {
        let mut s = String::new();
        s.push_str("system\tmacro-R\taccuracy\n");
        s.push_str(&self.table_row(system));
        s.push_str("\n\nclass\tgold\tpred\tcorrect\tR\tP\tF1\n");
        for c in &self.per_class {
            let recall = c.recall.map_or("-".to_string(), |r| format!("{:.2}", 100.0 * r));
            let flag = if c.precision_undefined { "*" } else { "" };
            s.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{:.2}{}\t{:.2}\n",
                c.class,
                c.gold,
                c.predicted,
                c.correct,
                recall,
                100.0 * c.precision,
                flag,
                100.0 * c.f1
            ));
        }
        s.push_str("\nconfusion (rows gold, columns predicted)\n");
        s.push_str(&self.confusion.classes().join("\t"));
        s.push('\n');
        for (class, row) in self.confusion.classes().iter().zip(self.confusion.rows()) {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            s.push_str(&format!("{}\t{class}\n", cells.join("\t")));
        }
        s.push_str(&format!(
            "\n{} examples, {} of {} classes in gold\n",
            self.examples,
            self.classes_in_gold,
            self.confusion.len()
        ));
        s
    }
}

/// Scores line-aligned predictions (one line of space-separated labels per
/// instance, in placeholder order) against gold instances. Every
/// placeholder is one example.
pub fn score_report(
    gold: &[TaskInstance],
    predictions: &[Vec<String>],
    spec: &SubtaskSpec,
) -> Result<ScoreReport> {
    if gold.len() != predictions.len() {
        return Err(Error::LengthMismatch {
            gold: gold.len(),
            pred: predictions.len(),
        });
    }
    let mut gold_labels = Vec::new();
    let mut pred_labels = Vec::new();
    for (i, (inst, pred)) in gold.iter().zip(predictions).enumerate() {
        if inst.labels.len() != pred.len() {
            return Err(Error::malformed(
                1,
                format!("{} predicted labels for {} placeholders", pred.len(), inst.labels.len()),
            )
            .at_line(i + 1));
        }
        if let Some(bad) = pred.iter().find(|p| !spec.has_class(p)) {
            return Err(Error::UnknownLabel(bad.clone()).at_line(i + 1));
        }
        gold_labels.extend(inst.labels.iter().map(String::as_str));
        pred_labels.extend(pred.iter().map(String::as_str));
    }
    let m = confusion(&gold_labels, &pred_labels, &spec.classes)?;
    ScoreReport::from_confusion(spec.direction, m)
}
