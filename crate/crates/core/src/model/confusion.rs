use serde::{Deserialize, Serialize};

/// Square count grid over an ordered class list; rows are gold classes and
/// columns are predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    classes: Vec<String>,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<String>) -> Self {
        let n = classes.len();
        ConfusionMatrix {
            classes,
            counts: vec![0; n * n],
        }
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn get(&self, gold: usize, pred: usize) -> u64 {
        self.counts[gold * self.len() + pred]
    }

    pub fn add(&mut self, gold: usize, pred: usize) {
        let n = self.len();
        self.counts[gold * n + pred] += 1;
    }

    /// Adds another matrix over the same class list. Associative and
    /// commutative, so partial tallies can be combined in any order.
    pub fn merge(mut self, other: &ConfusionMatrix) -> Self {
        assert_eq!(self.classes, other.classes, "merging matrices over different classes");
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.len()).map(|i| self.get(i, i)).sum()
    }

    /// Gold frequency of class `i`.
    pub fn row_sum(&self, i: usize) -> u64 {
        let n = self.len();
        self.counts[i * n..(i + 1) * n].iter().sum()
    }

    /// Prediction frequency of class `j`.
    pub fn col_sum(&self, j: usize) -> u64 {
        (0..self.len()).map(|i| self.get(i, j)).sum()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> + '_ {
        self.counts.chunks(self.len().max(1))
    }
}
