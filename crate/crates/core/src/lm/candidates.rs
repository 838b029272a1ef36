use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{SubtaskSpec, TaskInstance, OTHER};

/// Default number of non-pronoun fillers.
pub const DEFAULT_OTHER_FILLERS: usize = 20;

/// A lemma sequence that can fill a gap, with the class it stands for.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Filler {
    pub lemmas: Vec<String>,
    pub class: String,
}

impl Filler {
    pub fn new(lemmas: &str, class: &str) -> Self {
        Filler {
            lemmas: lemmas.split_whitespace().map(String::from).collect(),
            class: class.to_string(),
        }
    }
}

impl fmt::Display for Filler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.lemmas.join(" "))
    }
}

/// The fixed options tried at every gap.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidateSet {
    pub pronoun_fillers: Vec<Filler>,
    pub other_fillers: Vec<Filler>,
    /// Whether inserting nothing is an option; it counts as `OTHER`.
    pub include_none: bool,
}

impl CandidateSet {
    /// All options in search order: pronouns, other fillers, then `None`
    /// for inserting nothing.
    pub fn options(&self) -> Vec<Option<&Filler>> {
        self.pronoun_fillers
            .iter()
            .chain(&self.other_fillers)
            .map(Some)
            .chain(self.include_none.then_some(None))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.pronoun_fillers.len() + self.other_fillers.len() + usize::from(self.include_none)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Reads the candidate file format: one `CLASS<TAB>lemmas` line per
    /// filler, where an empty lemma list is the insert-nothing option.
    pub fn read<R: BufRead>(reader: R, spec: &SubtaskSpec) -> Result<Self> {
        let mut set = CandidateSet {
            pronoun_fillers: Vec::new(),
            other_fillers: Vec::new(),
            include_none: false,
        };
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (class, lemmas) = line
                .split_once('\t')
                .ok_or_else(|| Error::malformed(1, "expected `CLASS<TAB>lemmas`").at_line(i + 1))?;
            if !spec.has_class(class) {
                return Err(Error::UnknownLabel(class.to_string()).at_line(i + 1));
            }
            let filler = Filler::new(lemmas, class);
            if filler.lemmas.is_empty() {
                if class != OTHER {
                    return Err(Error::malformed(2, "empty filler must be OTHER").at_line(i + 1));
                }
                set.include_none = true;
            } else if class == OTHER {
                set.other_fillers.push(filler);
            } else {
                set.pronoun_fillers.push(filler);
            }
        }
        Ok(set)
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for f in self.pronoun_fillers.iter().chain(&self.other_fillers) {
            writeln!(w, "{}\t{}", f.class, f)?;
        }
        if self.include_none {
            writeln!(w, "{OTHER}\t")?;
        }
        Ok(())
    }
}

/// One filler per pronoun class (the class name itself), the `k` most
/// frequent replaced groups of `OTHER`-labelled training examples (ties in
/// lexicographic order; groups containing a pronoun-class word are
/// skipped), and the insert-nothing option.
pub fn build_candidate_set(training: &[TaskInstance], spec: &SubtaskSpec, k: usize) -> CandidateSet {
    let pronoun_fillers = spec
        .pronoun_classes()
        .map(|c| Filler::new(c, c))
        .collect();

    let mut freq: HashMap<String, usize> = HashMap::new();
    for inst in training {
        for (label, group) in inst.labels.iter().zip(&inst.replaced) {
            if label != OTHER || group.is_empty() {
                continue;
            }
            if group.iter().any(|t| spec.lookup(&t.lemma).is_some()) {
                continue;
            }
            let key = group.iter().map(|t| t.lemma.as_str()).collect::<Vec<_>>().join(" ");
            *freq.entry(key).or_default() += 1;
        }
    }
    let mut ranked: Vec<(String, usize)> = freq.into_iter().collect();
    ranked.sort_by(|(a, ca), (b, cb)| cb.cmp(ca).then_with(|| a.cmp(b)));
    let other_fillers = ranked
        .into_iter()
        .take(k)
        .map(|(lemmas, _)| Filler::new(&lemmas, OTHER))
        .collect();

    CandidateSet {
        pronoun_fillers,
        other_fillers,
        include_none: true,
    }
}
