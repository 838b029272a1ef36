//! Turns aligned, tagged bitext into task instances.
//!
//! For every selected source pronoun that survives subject filtering, the
//! aligned target token is replaced by a placeholder and its class recorded.
//! Pronouns without a usable link get a placeholder inserted next to the
//! target material of the nearest aligned source word, labelled `OTHER`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{
    AlignmentSet, Language, Link, SubtaskSpec, TaggedToken, TargetItem, TaskInstance, OTHER,
};

/// One sentence pair with its annotation layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedSegment {
    pub source: Vec<String>,
    /// One dependency label per source token, when available.
    pub dep_labels: Option<Vec<String>>,
    pub target: Vec<TaggedToken>,
    pub alignment: AlignmentSet,
}

impl AnnotatedSegment {
    pub fn new(source: Vec<String>, target: Vec<TaggedToken>, alignment: AlignmentSet) -> Self {
        AnnotatedSegment {
            source,
            dep_labels: None,
            target,
            alignment,
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        self.dep_labels = Some(labels);
        self
    }

    fn check(&self) -> Result<()> {
        if let Some(labels) = &self.dep_labels {
            if labels.len() != self.source.len() {
                return Err(Error::InputMismatch(format!(
                    "{} dependency labels for {} source tokens",
                    labels.len(),
                    self.source.len()
                )));
            }
        }
        self.alignment
            .check_bounds(self.source.len(), self.target.len())
    }
}

/// Dependency labels that mark a pronoun as a subject.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectFilter {
    pub keep: BTreeSet<String>,
}

impl SubjectFilter {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(labels: I) -> Self {
        SubjectFilter {
            keep: labels.into_iter().map(Into::into).collect(),
        }
    }

    /// Default filter for a source language. French source pronouns are
    /// unambiguous subjects, so no filter applies. German keeps expletives
    /// (`EP`) alongside subjects (`SB`).
    pub fn default_for(language: Language) -> Option<Self> {
        match language {
            Language::English => Some(SubjectFilter::new(["SBJ"])),
            Language::German => Some(SubjectFilter::new(["SB", "EP"])),
            Language::French => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractOptions {
    pub subject_filter: Option<SubjectFilter>,
    /// Emit an instance for every segment, including those without
    /// placeholders (useful when the output also feeds LM training).
    pub emit_all_segments: bool,
}

impl ExtractOptions {
    pub fn for_spec(spec: &SubtaskSpec) -> Self {
        ExtractOptions {
            subject_filter: SubjectFilter::default_for(spec.direction.source_language()),
            emit_all_segments: false,
        }
    }

    pub fn without_filter(mut self) -> Self {
        self.subject_filter = None;
        self
    }
}

pub fn find_source_pronouns(seg: &AnnotatedSegment, spec: &SubtaskSpec) -> Vec<usize> {
    seg.source
        .iter()
        .enumerate()
        .filter(|(_, tok)| spec.is_source_pronoun(tok))
        .map(|(i, _)| i)
        .collect()
}

/// Keeps the indices whose dependency label is in the filter's keep set. No
/// filter means no filtering.
pub fn filter_subjects(
    indices: &[usize],
    labels: Option<&[String]>,
    filter: Option<&SubjectFilter>,
) -> Result<Vec<usize>> {
    let Some(filter) = filter else {
        return Ok(indices.to_vec());
    };
    let labels = labels.ok_or(Error::MissingLabels)?;
    Ok(indices
        .iter()
        .copied()
        .filter(|&i| labels.get(i).is_some_and(|l| filter.keep.contains(l)))
        .collect())
}

/// Chooses which of the tokens aligned to a pronoun stands for it: the
/// leftmost token in the pronoun lexicon, else the shortest lemma
/// (codepoints), leftmost on ties. Returns the chosen offset and its class.
fn choose_aligned(tokens: &[&TaggedToken], spec: &SubtaskSpec) -> Option<(usize, String)> {
    if let Some((i, class)) = tokens
        .iter()
        .enumerate()
        .find_map(|(i, t)| spec.lookup(&t.lemma).map(|c| (i, c.to_string())))
    {
        return Some((i, class));
    }
    let (i, _) = tokens
        .iter()
        .enumerate()
        .min_by_key(|(i, t)| (t.lemma.chars().count(), *i))?;
    Some((i, OTHER.to_string()))
}

/// Class of a pronoun given its aligned target tokens (in target order),
/// and the token that the placeholder replaces.
pub fn map_target_class(aligned: &[TaggedToken], spec: &SubtaskSpec) -> (String, Vec<TaggedToken>) {
    let refs: Vec<&TaggedToken> = aligned.iter().collect();
    match choose_aligned(&refs, spec) {
        Some((i, class)) => (class, vec![aligned[i].clone()]),
        None => (OTHER.to_string(), Vec::new()),
    }
}

/// Target position for a placeholder standing for the source token at
/// `src_idx`, ignoring that token's own links.
///
/// Searches outward from `src_idx`, left before right at equal distance. A
/// linked source word on the left puts the placeholder after its rightmost
/// target token; one on the right puts it before its leftmost target token.
/// Without any link, the relative source position is carried over.
pub fn placeholder_position(
    alignment: &AlignmentSet,
    src_len: usize,
    tgt_len: usize,
    src_idx: usize,
) -> usize {
    let reach = src_idx.max(src_len.saturating_sub(src_idx + 1));
    for d in 1..=reach {
        if let Some(j) = src_idx.checked_sub(d) {
            if let Some(t) = alignment.targets_of(j).max() {
                return t + 1;
            }
        }
        let j = src_idx + d;
        if j < src_len {
            if let Some(t) = alignment.targets_of(j).min() {
                return t;
            }
        }
    }
    if src_len == 0 {
        return 0;
    }
    // round(src_idx * tgt_len / src_len), halves up
    ((2 * src_idx * tgt_len + src_len) / (2 * src_len)).min(tgt_len)
}

pub fn insert_placeholder_unaligned(seg: &AnnotatedSegment, src_idx: usize) -> usize {
    placeholder_position(&seg.alignment, seg.source.len(), seg.target.len(), src_idx)
}

/// Builds the instance for one segment from the given surviving pronoun
/// positions (ascending).
fn build_instance(
    seg: &AnnotatedSegment,
    pronouns: &[usize],
    spec: &SubtaskSpec,
) -> TaskInstance {
    let mut target: Vec<TargetItem> = seg.target.iter().cloned().map(TargetItem::Token).collect();
    let mut alignment = seg.alignment.clone();
    let mut assigned: BTreeMap<usize, (String, Vec<TaggedToken>)> = BTreeMap::new();
    let mut claimed = BTreeSet::new();
    let mut unaligned = Vec::new();

    for &k in pronouns {
        let positions: Vec<usize> = seg.alignment.targets_of(k).collect();
        let tokens: Vec<&TaggedToken> = positions.iter().map(|&t| &seg.target[t]).collect();
        match choose_aligned(&tokens, spec) {
            // Two pronouns choosing the same target word: the first one in
            // source order keeps it, the other is treated as unaligned.
            Some((i, class)) if claimed.insert(positions[i]) => {
                let t = positions[i];
                target[t] = TargetItem::Placeholder(k);
                assigned.insert(k, (class, vec![seg.target[t].clone()]));
            }
            _ => unaligned.push(k),
        }
    }

    for k in unaligned {
        let at = placeholder_position(&alignment, seg.source.len(), target.len(), k);
        target.insert(at, TargetItem::Placeholder(k));
        alignment.shift_targets_from(at);
        alignment.insert(Link::new(k, at));
        assigned.insert(k, (OTHER.to_string(), Vec::new()));
    }

    let mut labels = Vec::with_capacity(assigned.len());
    let mut replaced = Vec::with_capacity(assigned.len());
    for item in &target {
        if let TargetItem::Placeholder(k) = item {
            let (label, group) = assigned.remove(k).expect("every placeholder has an assignment");
            labels.push(label);
            replaced.push(group);
        }
    }

    TaskInstance {
        labels,
        replaced,
        source: seg.source.clone(),
        target,
        alignment,
    }
}

/// Extracts the instance for one segment, or `None` when no pronoun
/// survives (unless `emit_all_segments` is set).
pub fn extract_segment(
    seg: &AnnotatedSegment,
    spec: &SubtaskSpec,
    opts: &ExtractOptions,
) -> Result<Option<TaskInstance>> {
    seg.check()?;
    let found = find_source_pronouns(seg, spec);
    let kept = filter_subjects(&found, seg.dep_labels.as_deref(), opts.subject_filter.as_ref())?;
    if kept.is_empty() && !opts.emit_all_segments {
        return Ok(None);
    }
    Ok(Some(build_instance(seg, &kept, spec)))
}

/// Extracts instances from documents in order (document, then segment).
/// Errors carry the 1-based running segment number.
pub fn extract_examples(
    documents: &[Vec<AnnotatedSegment>],
    spec: &SubtaskSpec,
    opts: &ExtractOptions,
    exec: Exec,
) -> Result<Vec<TaskInstance>> {
    let segments: Vec<(usize, &AnnotatedSegment)> =
        documents.iter().flatten().enumerate().collect();
    let per_segment = exec.try_map(&segments, |(i, seg)| {
        extract_segment(seg, spec, opts).map_err(|e| e.at_line(i + 1))
    })?;
    Ok(per_segment.into_iter().flatten().collect())
}

/// Per-class counts, listed in class-inventory order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyTable {
    pub counts: Vec<(String, usize)>,
}

impl FrequencyTable {
    pub fn get(&self, class: &str) -> usize {
        self.counts
            .iter()
            .find(|(c, _)| c == class)
            .map_or(0, |(_, n)| *n)
    }

    pub fn total(&self) -> usize {
        self.counts.iter().map(|(_, n)| n).sum()
    }
}

pub fn class_frequency_table(instances: &[TaskInstance], spec: &SubtaskSpec) -> FrequencyTable {
    let mut counts: Vec<(String, usize)> = spec.classes.iter().map(|c| (c.clone(), 0)).collect();
    for label in instances.iter().flat_map(|i| &i.labels) {
        if let Some(i) = spec.class_index(label) {
            counts[i].1 += 1;
        }
    }
    FrequencyTable { counts }
}

/// Output of an extraction run together with class counts before and after
/// subject filtering.
#[derive(Debug, Clone)]
pub struct ExtractionReport {
    pub instances: Vec<TaskInstance>,
    /// Counts without subject filtering; present only when a filter ran.
    pub before: Option<FrequencyTable>,
    pub after: FrequencyTable,
}

pub fn extract_with_report(
    documents: &[Vec<AnnotatedSegment>],
    spec: &SubtaskSpec,
    opts: &ExtractOptions,
    exec: Exec,
) -> Result<ExtractionReport> {
    let instances = extract_examples(documents, spec, opts, exec)?;
    let after = class_frequency_table(&instances, spec);
    let before = match opts.subject_filter {
        Some(_) => {
            let unfiltered = extract_examples(documents, spec, &opts.clone().without_filter(), exec)?;
            Some(class_frequency_table(&unfiltered, spec))
        }
        None => None,
    };
    Ok(ExtractionReport {
        instances,
        before,
        after,
    })
}

impl fmt::Display for ExtractionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.before {
            Some(before) => {
                writeln!(f, "class\tbefore\tafter")?;
                for ((c, b), (_, a)) in before.counts.iter().zip(&self.after.counts) {
                    writeln!(f, "{c}\t{b}\t{a}")?;
                }
                write!(f, "total\t{}\t{}", before.total(), self.after.total())
            }
            None => {
                writeln!(f, "class\tcount")?;
                for (c, n) in &self.after.counts {
                    writeln!(f, "{c}\t{n}")?;
                }
                write!(f, "total\t{}", self.after.total())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::serialize_instance;
    use crate::model::Direction;

    fn toks(s: &str) -> Vec<TaggedToken> {
        s.split(' ').map(|t| TaggedToken::parse(t).unwrap()).collect()
    }

    fn words(s: &str) -> Vec<String> {
        s.split(' ').map(String::from).collect()
    }

    fn en_fr() -> SubtaskSpec {
        SubtaskSpec::new(Direction::EnFr)
    }

    fn example_segment() -> AnnotatedSegment {
        AnnotatedSegment::new(
            words("It 's an idiotic debate . It has to stop ."),
            toks("ce|PRON être|VER un|DET débat|NOM idiot|ADJ qui|PRON devoir|VER stopper|VER .|."),
            AlignmentSet::parse("0-0 1-1 2-2 3-4 4-3 6-5 7-6 8-6 9-7 10-8").unwrap(),
        )
        .with_labels(words("SBJ ROOT NMOD NMOD PRD P SBJ ROOT OPRD IM P"))
    }

    #[test]
    fn example_segment_gives_example_instance() {
        let spec = en_fr();
        let inst = extract_segment(&example_segment(), &spec, &ExtractOptions::for_spec(&spec))
            .unwrap()
            .unwrap();
        assert_eq!(
            serialize_instance(&inst),
            crate::format::tests::EXAMPLE
        );
    }

    #[test]
    fn finds_pronouns() {
        let spec = en_fr();
        let seg = example_segment();
        assert_eq!(find_source_pronouns(&seg, &spec), vec![0, 6]);
        let he = AnnotatedSegment::new(words("He lost his job ."), vec![], AlignmentSet::new());
        assert!(find_source_pronouns(&he, &spec).is_empty());
        let il = AnnotatedSegment::new(words("il est là"), vec![], AlignmentSet::new());
        assert_eq!(find_source_pronouns(&il, &SubtaskSpec::new(Direction::FrEn)), vec![0]);
    }

    #[test]
    fn subject_filter() {
        let en = SubjectFilter::default_for(Language::English);
        let de = SubjectFilter::default_for(Language::German);
        let labels = words("SBJ OBJ EP SB");
        assert_eq!(filter_subjects(&[0, 1], Some(&labels), en.as_ref()).unwrap(), vec![0]);
        assert_eq!(filter_subjects(&[1, 2, 3], Some(&labels), de.as_ref()).unwrap(), vec![2, 3]);
        assert_eq!(filter_subjects(&[1], None, None).unwrap(), vec![1]);
        assert!(SubjectFilter::default_for(Language::French).is_none());
        assert!(matches!(
            filter_subjects(&[0], None, en.as_ref()),
            Err(Error::MissingLabels)
        ));
    }

    #[test]
    fn class_mapping() {
        let spec = en_fr();
        assert_eq!(
            map_target_class(&toks("ce|PRON être|VER"), &spec),
            ("ce".to_string(), toks("ce|PRON"))
        );
        assert_eq!(
            map_target_class(&toks("qui|PRON"), &spec),
            ("OTHER".to_string(), toks("qui|PRON"))
        );
        assert_eq!(
            map_target_class(&toks("lequel|PRON donc|ADV"), &spec),
            ("OTHER".to_string(), toks("donc|ADV"))
        );
        // accented letters count once
        assert_eq!(map_target_class(&toks("été|VER ouii|X"), &spec).1, toks("été|VER"));
    }

    #[test]
    fn unaligned_positions() {
        let a = AlignmentSet::from_pairs([(3, 5)]);
        assert_eq!(placeholder_position(&a, 6, 8, 2), 5);
        let a = AlignmentSet::from_pairs([(1, 0)]);
        assert_eq!(placeholder_position(&a, 6, 8, 2), 1);
        assert_eq!(placeholder_position(&AlignmentSet::new(), 4, 8, 0), 0);
        assert_eq!(placeholder_position(&AlignmentSet::new(), 4, 8, 3), 6);
        // equidistant: left wins
        let a = AlignmentSet::from_pairs([(1, 4), (3, 0)]);
        assert_eq!(placeholder_position(&a, 5, 8, 2), 5);
    }

    #[test]
    fn unaligned_pronoun_gets_inserted_placeholder() {
        let spec = en_fr();
        let seg = AnnotatedSegment::new(
            words("so it rains ."),
            toks("donc|ADV pleuvoir|VER .|."),
            AlignmentSet::parse("0-0 2-1 3-2").unwrap(),
        );
        let inst = extract_segment(&seg, &spec, &ExtractOptions::for_spec(&spec).without_filter())
            .unwrap()
            .unwrap();
        assert_eq!(
            serialize_instance(&inst),
            "OTHER\tNONE\tso it rains .\tdonc|ADV REPLACE_1 pleuvoir|VER .|.\t0-0 1-1 2-2 3-3"
        );
        assert!(inst.validate(&spec).is_empty());
    }

    #[test]
    fn shared_target_word_goes_to_first_pronoun() {
        let spec = en_fr();
        let seg = AnnotatedSegment::new(
            words("it and it"),
            toks("il|PRON et|KON"),
            AlignmentSet::parse("0-0 1-1 2-0").unwrap(),
        );
        let inst = extract_segment(&seg, &spec, &ExtractOptions::for_spec(&spec).without_filter())
            .unwrap()
            .unwrap();
        assert_eq!(inst.labels, ["il", "OTHER"]);
        assert_eq!(inst.num_placeholders(), 2);
        assert!(inst.validate(&spec).is_empty());
    }

    #[test]
    fn no_pronoun_no_instance() {
        let spec = en_fr();
        let seg = AnnotatedSegment::new(words("hello"), toks("bonjour|NOM"), AlignmentSet::parse("0-0").unwrap());
        let opts = ExtractOptions::for_spec(&spec).without_filter();
        assert!(extract_segment(&seg, &spec, &opts).unwrap().is_none());
        let all = ExtractOptions {
            emit_all_segments: true,
            ..opts
        };
        assert_eq!(extract_segment(&seg, &spec, &all).unwrap().unwrap().num_placeholders(), 0);
    }

    #[test]
    fn missing_labels_propagate_with_segment_number() {
        let spec = en_fr();
        let mut seg = example_segment();
        seg.dep_labels = None;
        let docs = vec![vec![example_segment(), seg]];
        let err = extract_examples(&docs, &spec, &ExtractOptions::for_spec(&spec), Exec::Sequential)
            .unwrap_err();
        assert_eq!(err.line(), Some(2));
    }

    #[test]
    fn frequency_tables() {
        let spec = en_fr();
        let empty = class_frequency_table(&[], &spec);
        assert_eq!(empty.total(), 0);
        assert_eq!(empty.counts.len(), 8);

        let docs = vec![vec![example_segment(), example_segment()]];
        let report =
            extract_with_report(&docs, &spec, &ExtractOptions::for_spec(&spec), Exec::default())
                .unwrap();
        assert_eq!(report.after.get("ce"), 2);
        assert_eq!(report.after.get("OTHER"), 2);
        assert_eq!(report.before.as_ref().unwrap().get("ce"), 2);
    }
}
