//! Reading and writing of the newline-delimited UTF-8 text formats.
//!
//! Instance lines have five TAB-separated fields:
//!
//! 1. class labels, space-separated, one per placeholder;
//! 2. replaced tokens as `lemma|POS`, one space-separated group per
//!    placeholder; tokens of a multi-token group are joined with `+` and
//!    an empty group is written `NONE`;
//! 3. source tokens;
//! 4. target tokens, with `REPLACE_<k>` where a pronoun was removed (`k`
//!    is the source index of that pronoun);
//! 5. alignment links `s-t` against the placeholder-bearing target.
//!
//! Alignment files hold one segment per line of `s-t` pairs, tagged
//! corpora one segment per line of `lemma|POS` tokens, and plain corpora
//! (source text, dependency labels, predictions) space-separated tokens.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{
    AlignmentSet, SubtaskSpec, TaggedToken, TagsetMode, TargetItem, TaskInstance,
};

pub const FIELD_SEPARATOR: char = '\t';
pub const GROUP_JOINER: char = '+';
pub const EMPTY_GROUP: &str = "NONE";
pub const PLACEHOLDER_PREFIX: &str = "REPLACE_";

/// A raw instance line kept alongside its parsed form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceLine {
    pub raw: String,
    pub parsed: TaskInstance,
}

impl InstanceLine {
    pub fn parse(raw: &str, spec: &SubtaskSpec) -> Result<Self> {
        Ok(InstanceLine {
            raw: raw.to_string(),
            parsed: parse_instance_line(raw, spec)?,
        })
    }
}

fn parse_placeholder(tok: &str) -> Option<usize> {
    let digits = tok.strip_prefix(PLACEHOLDER_PREFIX)?;
    let canonical = !digits.is_empty()
        && digits.bytes().all(|b| b.is_ascii_digit())
        && (digits.len() == 1 || !digits.starts_with('0'));
    if canonical {
        digits.parse().ok()
    } else {
        None
    }
}

pub(crate) fn encode_group(group: &[TaggedToken]) -> String {
    if group.is_empty() {
        return EMPTY_GROUP.to_string();
    }
    let mut out = String::new();
    for (i, t) in group.iter().enumerate() {
        if i > 0 {
            out.push(GROUP_JOINER);
        }
        out.push_str(&t.lemma);
        out.push('|');
        out.push_str(&t.pos);
    }
    out
}

/// Splits a group at the leftmost `+` that ends a complete `lemma|POS`
/// token, repeatedly.
pub(crate) fn decode_group(s: &str) -> Result<Vec<TaggedToken>> {
    if s == EMPTY_GROUP {
        return Ok(Vec::new());
    }
    let mut tokens = Vec::new();
    let mut start = 0;
    for (pos, _) in s.match_indices(GROUP_JOINER) {
        if pos < start {
            continue;
        }
        if let Ok(t) = TaggedToken::parse(&s[start..pos]) {
            tokens.push(t);
            start = pos + GROUP_JOINER.len_utf8();
        }
    }
    let last = TaggedToken::parse(&s[start..])
        .map_err(|_| Error::malformed(2, format!("bad lemma|POS group `{s}`")))?;
    tokens.push(last);
    Ok(tokens)
}

/// Whether `group` survives an encode/decode cycle unchanged.
pub(crate) fn group_is_representable(group: &[TaggedToken]) -> bool {
    decode_group(&encode_group(group)).is_ok_and(|g| g == group)
}

pub fn parse_instance_line(line: &str, spec: &SubtaskSpec) -> Result<TaskInstance> {
    parse_instance_line_with(line, spec, TagsetMode::Lenient)
}

pub fn parse_instance_line_with(
    line: &str,
    spec: &SubtaskSpec,
    mode: TagsetMode,
) -> Result<TaskInstance> {
    let fields: Vec<&str> = line.split(FIELD_SEPARATOR).collect();
    if fields.len() != 5 {
        return Err(Error::malformed(
            fields.len().min(5),
            format!("expected 5 tab-separated fields, found {}", fields.len()),
        ));
    }

    let labels: Vec<String> = fields[0].split_whitespace().map(String::from).collect();
    if let Some(bad) = labels.iter().find(|l| !spec.has_class(l)) {
        return Err(Error::malformed(1, format!("unknown label `{bad}`")));
    }

    let replaced = fields[1]
        .split_whitespace()
        .map(decode_group)
        .collect::<Result<Vec<_>>>()?;

    let source: Vec<String> = fields[2].split_whitespace().map(String::from).collect();

    let target = fields[3]
        .split_whitespace()
        .map(|tok| match parse_placeholder(tok) {
            Some(k) => Ok(TargetItem::Placeholder(k)),
            None => TaggedToken::parse(tok)
                .map(TargetItem::Token)
                .map_err(|_| Error::malformed(4, format!("bad lemma|POS token `{tok}`"))),
        })
        .collect::<Result<Vec<_>>>()?;

    let alignment = AlignmentSet::parse(fields[4]).map_err(|e| match e {
        Error::MalformedLine { reason, .. } => Error::malformed(5, reason),
        e => e,
    })?;

    let inst = TaskInstance {
        labels,
        replaced,
        source,
        target,
        alignment,
    };
    match inst.validate_with(spec, mode).first() {
        Some(v) => Err(Error::malformed(v.field(), v.to_string())),
        None => Ok(inst),
    }
}

pub fn serialize_instance(inst: &TaskInstance) -> String {
    let mut out = String::new();
    out.push_str(&inst.labels.join(" "));
    out.push(FIELD_SEPARATOR);
    let groups: Vec<String> = inst.replaced.iter().map(|g| encode_group(g)).collect();
    out.push_str(&groups.join(" "));
    out.push(FIELD_SEPARATOR);
    out.push_str(&inst.source.join(" "));
    out.push(FIELD_SEPARATOR);
    let target: Vec<String> = inst.target.iter().map(ToString::to_string).collect();
    out.push_str(&target.join(" "));
    out.push(FIELD_SEPARATOR);
    out.push_str(&inst.alignment.to_string());
    out
}

fn read_lines<R: BufRead>(reader: R) -> Result<Vec<String>> {
    Ok(reader.lines().collect::<std::io::Result<Vec<_>>>()?)
}

fn parse_lines<T, F>(lines: &[String], exec: Exec, parse: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&str) -> Result<T> + Sync + Send,
{
    let numbered: Vec<(usize, &String)> = lines.iter().enumerate().collect();
    exec.try_map(&numbered, |(i, line)| parse(line).map_err(|e| e.at_line(i + 1)))
}

pub fn read_instances<R: BufRead>(reader: R, spec: &SubtaskSpec) -> Result<Vec<TaskInstance>> {
    read_instances_with(reader, spec, TagsetMode::Lenient, Exec::default())
}

pub fn read_instances_with<R: BufRead>(
    reader: R,
    spec: &SubtaskSpec,
    mode: TagsetMode,
    exec: Exec,
) -> Result<Vec<TaskInstance>> {
    let lines = read_lines(reader)?;
    parse_lines(&lines, exec, |l| parse_instance_line_with(l, spec, mode))
}

pub fn write_instances<W: Write>(mut w: W, instances: &[TaskInstance]) -> Result<()> {
    for inst in instances {
        writeln!(w, "{}", serialize_instance(inst))?;
    }
    Ok(())
}

pub fn read_alignment_file<R: BufRead>(reader: R) -> Result<Vec<AlignmentSet>> {
    let lines = read_lines(reader)?;
    parse_lines(&lines, Exec::default(), AlignmentSet::parse)
}

pub fn write_alignment_file<W: Write>(mut w: W, alignments: &[AlignmentSet]) -> Result<()> {
    for a in alignments {
        writeln!(w, "{a}")?;
    }
    Ok(())
}

pub fn read_tagged_corpus<R: BufRead>(reader: R) -> Result<Vec<Vec<TaggedToken>>> {
    let lines = read_lines(reader)?;
    parse_lines(&lines, Exec::default(), |l| {
        l.split_whitespace().map(TaggedToken::parse).collect()
    })
}

/// Plain space-separated tokens per line: tokenized source text, dependency
/// label columns, prediction files.
pub fn read_token_corpus<R: BufRead>(reader: R) -> Result<Vec<Vec<String>>> {
    Ok(read_lines(reader)?
        .iter()
        .map(|l| l.split_whitespace().map(String::from).collect())
        .collect())
}

/// Lines of non-negative integers, e.g. pronoun source positions.
pub fn read_index_lists<R: BufRead>(reader: R) -> Result<Vec<Vec<usize>>> {
    let lines = read_lines(reader)?;
    parse_lines(&lines, Exec::Sequential, |l| {
        l.split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| Error::malformed(1, format!("bad index `{t}`")))
            })
            .collect()
    })
}
