//! Corpus, gold-arc, and comparison-graph I/O.
//!
//! The canonical corpus format is JSON Lines with three record kinds:
//! `header`, `sentence`, and `qa`. A TSV adapter maps externally released
//! files onto the same in-memory corpus through a user-pinned column map.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AnswerSet, Judgment, RawAnnotation, Sentence, Verdict};

pub const CANONICAL_FORMAT: &str = "qamr-corpus";
pub const CANONICAL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: unknown sentence id {sentence_id}")]
    UnknownSentence { line: usize, sentence_id: String },
    #[error("line {line}: duplicate sentence id {id} with differing tokens")]
    ConflictingSentence { line: usize, id: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

fn malformed(line: usize, reason: impl Into<String>) -> IngestError {
    IngestError::Malformed {
        line,
        reason: reason.into(),
    }
}

/// An annotation log plus its sentence inventory.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnnotationCorpus {
    pub sentences: IndexMap<String, Sentence>,
    pub annotations: Vec<RawAnnotation>,
    pub split_label: Option<String>,
}

impl AnnotationCorpus {
    pub fn sentence(&self, id: &str) -> Option<&Sentence> {
        self.sentences.get(id)
    }
}

// ---------------------------------------------------------------------------
// Canonical JSON Lines format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum Record {
    Header {
        format: String,
        version: u32,
        #[serde(skip_serializing_if = "Option::is_none")]
        split: Option<String>,
    },
    Sentence {
        id: String,
        tokens: Vec<String>,
    },
    Qa {
        sentence_id: String,
        worker_id: String,
        target_index: usize,
        question: Vec<String>,
        answer: Vec<usize>,
        judgments: Vec<JudgmentRecord>,
    },
}

#[derive(Serialize, Deserialize)]
struct JudgmentRecord {
    validator_id: String,
    verdict: String,
    #[serde(rename = "ref", skip_serializing_if = "Option::is_none", default)]
    reference: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    answer: Option<Vec<usize>>,
}

impl JudgmentRecord {
    fn from_judgment(j: &Judgment) -> Self {
        match &j.verdict {
            Verdict::Invalid => JudgmentRecord {
                validator_id: j.validator_id.clone(),
                verdict: "invalid".into(),
                reference: None,
                answer: None,
            },
            Verdict::Redundant(r) => JudgmentRecord {
                validator_id: j.validator_id.clone(),
                verdict: "redundant".into(),
                reference: r.clone(),
                answer: None,
            },
            Verdict::Answer(a) => JudgmentRecord {
                validator_id: j.validator_id.clone(),
                verdict: "answer".into(),
                reference: None,
                answer: Some(a.iter().collect()),
            },
        }
    }

    fn into_judgment(self, line: usize) -> Result<Judgment, IngestError> {
        let verdict = match self.verdict.as_str() {
            "invalid" => Verdict::Invalid,
            "redundant" => Verdict::Redundant(self.reference),
            "answer" => {
                let indices = self.answer.unwrap_or_default();
                let set = AnswerSet::new(indices)
                    .ok_or_else(|| malformed(line, "answer verdict with empty index set"))?;
                Verdict::Answer(set)
            }
            other => return Err(malformed(line, format!("unknown verdict code {other:?}"))),
        };
        Ok(Judgment {
            validator_id: self.validator_id,
            verdict,
        })
    }
}

fn check_index(
    line: usize,
    sentence: &Sentence,
    index: usize,
    what: &str,
) -> Result<(), IngestError> {
    if index >= sentence.len() {
        return Err(malformed(
            line,
            format!(
                "{what} index {index} out of range for sentence {} (length {})",
                sentence.id,
                sentence.len()
            ),
        ));
    }
    Ok(())
}

/// Reads the canonical format, validating every index against its sentence.
/// Record order is preserved; QA records may precede their sentence record.
pub fn read_canonical<R: BufRead>(reader: R) -> Result<AnnotationCorpus, IngestError> {
    let mut sentences: IndexMap<String, Sentence> = IndexMap::new();
    let mut split_label = None;
    let mut pending: Vec<(usize, Record)> = Vec::new();

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(&line)
            .map_err(|e| malformed(lineno, format!("invalid record: {e}")))?;
        match record {
            Record::Header { format, split, .. } => {
                if format != CANONICAL_FORMAT {
                    return Err(malformed(lineno, format!("unknown format {format:?}")));
                }
                split_label = split;
            }
            Record::Sentence { id, tokens } => {
                if tokens.is_empty() {
                    return Err(malformed(lineno, format!("sentence {id:?} has no tokens")));
                }
                if let Some(existing) = sentences.get(&id) {
                    if existing.tokens != tokens {
                        return Err(IngestError::ConflictingSentence { line: lineno, id });
                    }
                } else {
                    sentences.insert(id.clone(), Sentence::new(id, tokens));
                }
            }
            qa @ Record::Qa { .. } => pending.push((lineno, qa)),
        }
    }

    let mut annotations = Vec::with_capacity(pending.len());
    for (lineno, record) in pending {
        let Record::Qa {
            sentence_id,
            worker_id,
            target_index,
            question,
            answer,
            judgments,
        } = record
        else {
            unreachable!()
        };
        let sentence = sentences
            .get(&sentence_id)
            .ok_or_else(|| IngestError::UnknownSentence {
                line: lineno,
                sentence_id: sentence_id.clone(),
            })?;
        if question.is_empty() {
            return Err(malformed(lineno, "empty question"));
        }
        check_index(lineno, sentence, target_index, "target")?;
        for &i in &answer {
            check_index(lineno, sentence, i, "answer")?;
        }
        let writer_answer =
            AnswerSet::new(answer).ok_or_else(|| malformed(lineno, "empty answer index set"))?;
        let mut parsed = Vec::with_capacity(judgments.len());
        for j in judgments {
            let judgment = j.into_judgment(lineno)?;
            if let Verdict::Answer(a) = &judgment.verdict {
                for i in a.iter() {
                    check_index(lineno, sentence, i, "judgment answer")?;
                }
            }
            parsed.push(judgment);
        }
        annotations.push(RawAnnotation {
            sentence_id,
            worker_id,
            target_index,
            question,
            writer_answer,
            judgments: parsed,
        });
    }

    Ok(AnnotationCorpus {
        sentences,
        annotations,
        split_label,
    })
}

/// Writes the canonical format: header, sentences, then QA records.
/// `read_canonical(write_canonical(c))` reproduces `c` exactly.
pub fn write_canonical<W: Write>(corpus: &AnnotationCorpus, mut out: W) -> std::io::Result<()> {
    let header = Record::Header {
        format: CANONICAL_FORMAT.into(),
        version: CANONICAL_VERSION,
        split: corpus.split_label.clone(),
    };
    writeln!(out, "{}", serde_json::to_string(&header)?)?;
    for sentence in corpus.sentences.values() {
        let rec = Record::Sentence {
            id: sentence.id.clone(),
            tokens: sentence.tokens.clone(),
        };
        writeln!(out, "{}", serde_json::to_string(&rec)?)?;
    }
    for ann in &corpus.annotations {
        let rec = Record::Qa {
            sentence_id: ann.sentence_id.clone(),
            worker_id: ann.worker_id.clone(),
            target_index: ann.target_index,
            question: ann.question.clone(),
            answer: ann.writer_answer.iter().collect(),
            judgments: ann
                .judgments
                .iter()
                .map(JudgmentRecord::from_judgment)
                .collect(),
        };
        writeln!(out, "{}", serde_json::to_string(&rec)?)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Release TSV adapter
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexSeparator {
    Space,
    Comma,
}

impl IndexSeparator {
    fn split(self, cell: &str) -> Vec<&str> {
        match self {
            IndexSeparator::Space => cell.split_whitespace().collect(),
            IndexSeparator::Comma => cell
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .collect(),
        }
    }
}

/// Column positions for one validator's response.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JudgmentColumns {
    pub validator_id: Option<usize>,
    pub verdict: usize,
}

/// Assigns semantic roles to TSV column positions (0-based).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnMap {
    pub sentence_id: usize,
    pub worker_id: Option<usize>,
    /// Column holding one or more target indices; the first is taken as the
    /// prompt target, and rows from one HIT share it, so it doubles as the
    /// target-word grouping key.
    pub target_index: Option<usize>,
    pub question: usize,
    pub answer: usize,
    #[serde(default)]
    pub judgments: Vec<JudgmentColumns>,
    pub index_separator: IndexSeparator,
    #[serde(default)]
    pub has_header: bool,
}

impl ColumnMap {
    fn max_column(&self) -> usize {
        let mut max = self
            .sentence_id
            .max(self.question)
            .max(self.answer)
            .max(self.worker_id.unwrap_or(0))
            .max(self.target_index.unwrap_or(0));
        for j in &self.judgments {
            max = max.max(j.verdict).max(j.validator_id.unwrap_or(0));
        }
        max
    }
}

/// A row the adapter could not map, kept for the yield report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reject {
    pub line: usize,
    pub reason: String,
    pub raw: String,
}

/// Two-column sentence TSV: id, space-tokenized sentence.
pub fn read_sentence_tsv<R: BufRead>(reader: R) -> Result<IndexMap<String, Sentence>, IngestError> {
    let mut sentences = IndexMap::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (id, text) = line
            .split_once('\t')
            .ok_or_else(|| malformed(lineno, "expected <id>\\t<tokens>"))?;
        let tokens: Vec<String> = text.split_whitespace().map(String::from).collect();
        if tokens.is_empty() {
            return Err(malformed(lineno, format!("sentence {id:?} has no tokens")));
        }
        if let Some(existing) = sentences.get(id) {
            let existing: &Sentence = existing;
            if existing.tokens != tokens {
                return Err(IngestError::ConflictingSentence {
                    line: lineno,
                    id: id.to_string(),
                });
            }
        } else {
            sentences.insert(id.to_string(), Sentence::new(id, tokens));
        }
    }
    Ok(sentences)
}

fn parse_verdict_cell(
    cell: &str,
    sep: IndexSeparator,
    line: usize,
) -> Result<Option<Verdict>, IngestError> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Ok(None);
    }
    let lower = cell.to_lowercase();
    if lower == "invalid" {
        return Ok(Some(Verdict::Invalid));
    }
    if let Some(rest) = lower.strip_prefix("redundant") {
        let reference = rest.trim_start_matches([':', ' ', '\t']).trim().to_string();
        let reference = if reference.is_empty() {
            None
        } else {
            Some(reference)
        };
        return Ok(Some(Verdict::Redundant(reference)));
    }
    let mut indices = Vec::new();
    for part in sep.split(cell) {
        let index: usize = part
            .parse()
            .map_err(|_| malformed(line, format!("unparseable index {part:?} in judgment")))?;
        indices.push(index);
    }
    let set = AnswerSet::new(indices)
        .ok_or_else(|| malformed(line, "judgment answer with no indices"))?;
    Ok(Some(Verdict::Answer(set)))
}

fn parse_tsv_row(
    lineno: usize,
    row: &str,
    map: &ColumnMap,
    sentences: &IndexMap<String, Sentence>,
) -> Result<RawAnnotation, IngestError> {
    let cells: Vec<&str> = row.split('\t').collect();
    if cells.len() <= map.max_column() {
        return Err(malformed(
            lineno,
            format!(
                "row has {} columns, column map needs {}",
                cells.len(),
                map.max_column() + 1
            ),
        ));
    }
    let sentence_id = cells[map.sentence_id].trim().to_string();
    let sentence = sentences
        .get(&sentence_id)
        .ok_or_else(|| IngestError::UnknownSentence {
            line: lineno,
            sentence_id: sentence_id.clone(),
        })?;
    let worker_id = map
        .worker_id
        .map(|c| cells[c].trim().to_string())
        .unwrap_or_else(|| "unknown".to_string());
    let question: Vec<String> = cells[map.question]
        .split_whitespace()
        .map(String::from)
        .collect();
    if question.is_empty() {
        return Err(malformed(lineno, "empty question"));
    }
    let mut answer_indices = Vec::new();
    for part in map.index_separator.split(cells[map.answer]) {
        let index: usize = part
            .parse()
            .map_err(|_| malformed(lineno, format!("unparseable index {part:?} in answer")))?;
        check_index(lineno, sentence, index, "answer")?;
        answer_indices.push(index);
    }
    let writer_answer =
        AnswerSet::new(answer_indices).ok_or_else(|| malformed(lineno, "empty answer column"))?;
    let target_index = match map.target_index {
        Some(c) => {
            let parts = map.index_separator.split(cells[c]);
            let first = parts
                .first()
                .ok_or_else(|| malformed(lineno, "empty target column"))?;
            let index: usize = first
                .parse()
                .map_err(|_| malformed(lineno, format!("unparseable target index {first:?}")))?;
            check_index(lineno, sentence, index, "target")?;
            index
        }
        None => writer_answer.iter().next().expect("non-empty"),
    };
    let mut judgments = Vec::new();
    for (slot, jc) in map.judgments.iter().enumerate() {
        let Some(verdict) = parse_verdict_cell(cells[jc.verdict], map.index_separator, lineno)?
        else {
            continue;
        };
        if let Verdict::Answer(a) = &verdict {
            for i in a.iter() {
                check_index(lineno, sentence, i, "judgment answer")?;
            }
        }
        let validator_id = jc
            .validator_id
            .map(|c| cells[c].trim().to_string())
            .filter(|s| !s.is_empty())
            .unwrap_or_else(|| format!("validator-{slot}"));
        judgments.push(Judgment {
            validator_id,
            verdict,
        });
    }
    Ok(RawAnnotation {
        sentence_id,
        worker_id,
        target_index,
        question,
        writer_answer,
        judgments,
    })
}

/// Maps a released TSV file onto a corpus. Rows that fail the column map are
/// collected as rejects unless `strict` is set, in which case the first
/// failure aborts.
pub fn read_release_tsv<R: BufRead>(
    reader: R,
    map: &ColumnMap,
    sentences: IndexMap<String, Sentence>,
    strict: bool,
) -> Result<(AnnotationCorpus, Vec<Reject>), IngestError> {
    let mut annotations = Vec::new();
    let mut rejects = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        if line.trim().is_empty() || (map.has_header && lineno == 1) {
            continue;
        }
        match parse_tsv_row(lineno, &line, map, &sentences) {
            Ok(ann) => annotations.push(ann),
            Err(e @ IngestError::Io(_)) => return Err(e),
            Err(e) if strict => return Err(e),
            Err(e) => rejects.push(Reject {
                line: lineno,
                reason: e.to_string(),
                raw: line,
            }),
        }
    }
    Ok((
        AnnotationCorpus {
            sentences,
            annotations,
            split_label: None,
        },
        rejects,
    ))
}

// ---------------------------------------------------------------------------
// Gold SRL arcs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArcSource {
    Propbank,
    Nombank,
    Qasrl,
    Other,
}

impl ArcSource {
    fn parse(tag: &str, line: usize) -> Result<Self, IngestError> {
        match tag.to_lowercase().as_str() {
            "propbank" => Ok(ArcSource::Propbank),
            "nombank" => Ok(ArcSource::Nombank),
            "qasrl" => Ok(ArcSource::Qasrl),
            "other" => Ok(ArcSource::Other),
            _ => Err(malformed(line, format!("unknown source tag {tag:?}"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ArcSource::Propbank => "propbank",
            ArcSource::Nombank => "nombank",
            ArcSource::Qasrl => "qasrl",
            ArcSource::Other => "other",
        }
    }
}

/// A labeled predicate-to-argument arc.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldArc {
    pub predicate_index: usize,
    pub argument: AnswerSet,
    pub label: String,
    pub source: ArcSource,
}

/// Gold arcs grouped per sentence, input order preserved.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GoldArcSet {
    pub arcs: IndexMap<String, Vec<GoldArc>>,
}

impl GoldArcSet {
    pub fn total(&self) -> usize {
        self.arcs.values().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ArcReadOptions {
    /// Drop arcs whose label begins with `R-` (reference roles).
    pub drop_r: bool,
    /// Drop arcs whose label ends with `-DIS` (discourse arguments).
    pub drop_dis: bool,
}

/// Line format: `sentence_id pred_index label source idx idx ...`, with `|`
/// separating multiple answer lists ("_" stands for an empty label).
/// Multiple lists are unioned for qasrl-source arcs; other sources must
/// carry exactly one list.
pub fn read_gold_arcs<R: BufRead>(
    reader: R,
    opts: ArcReadOptions,
) -> Result<GoldArcSet, IngestError> {
    let mut set = GoldArcSet::default();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() < 5 {
            return Err(malformed(
                lineno,
                "expected: sentence_id pred_index label source indices...",
            ));
        }
        let sentence_id = fields[0].to_string();
        let predicate_index: usize = fields[1].parse().map_err(|_| {
            malformed(
                lineno,
                format!("unparseable predicate index {:?}", fields[1]),
            )
        })?;
        let label = if fields[2] == "_" {
            String::new()
        } else {
            fields[2].to_string()
        };
        let source = ArcSource::parse(fields[3], lineno)?;

        let mut lists: Vec<Vec<usize>> = vec![Vec::new()];
        for field in &fields[4..] {
            if *field == "|" {
                lists.push(Vec::new());
                continue;
            }
            let index: usize = field
                .parse()
                .map_err(|_| malformed(lineno, format!("unparseable index {field:?}")))?;
            lists.last_mut().unwrap().push(index);
        }
        if lists.iter().any(Vec::is_empty) {
            return Err(malformed(lineno, "empty answer index list"));
        }
        if lists.len() > 1 && source != ArcSource::Qasrl {
            return Err(malformed(
                lineno,
                "multiple answer lists are only defined for qasrl arcs",
            ));
        }
        let argument = AnswerSet::new(lists.into_iter().flatten())
            .ok_or_else(|| malformed(lineno, "empty answer index list"))?;

        if opts.drop_r && label.starts_with("R-") {
            continue;
        }
        if opts.drop_dis && label.ends_with("-DIS") {
            continue;
        }
        set.arcs.entry(sentence_id).or_default().push(GoldArc {
            predicate_index,
            argument,
            label,
            source,
        });
    }
    Ok(set)
}

// ---------------------------------------------------------------------------
// Triple-format comparison graphs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphEdge {
    pub from: String,
    pub to: String,
    pub label: String,
}

/// Neutral graph representation for AMR-like comparison targets and for the
/// induced-graph output format.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GenericGraph {
    pub nodes: IndexMap<String, Vec<String>>,
    pub edges: Vec<GraphEdge>,
    pub root: Option<String>,
}

impl GenericGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

/// Lines of `node <id> <content...>`, `edge <from> <to> <label...>` (label
/// may be empty), and `root <id>`; `#` comments ignored.
pub fn read_graph_triples<R: BufRead>(reader: R) -> Result<GenericGraph, IngestError> {
    let mut graph = GenericGraph::default();
    let mut edge_lines: Vec<(usize, GraphEdge)> = Vec::new();
    let mut root_line: Option<(usize, String)> = None;
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let content = if let Some(pos) = line.find('#') {
            &line[..pos]
        } else {
            &line[..]
        };
        let content = content.trim_end();
        if content.trim().is_empty() {
            continue;
        }
        let mut parts = content.splitn(2, char::is_whitespace);
        let kind = parts.next().unwrap();
        let rest = parts.next().unwrap_or("").trim_start();
        match kind {
            "node" => {
                let mut fields = rest.splitn(2, char::is_whitespace);
                let id = fields
                    .next()
                    .filter(|s| !s.is_empty())
                    .ok_or_else(|| malformed(lineno, "node line needs an id"))?;
                let content: Vec<String> = fields
                    .next()
                    .unwrap_or("")
                    .split_whitespace()
                    .map(String::from)
                    .collect();
                if graph.nodes.contains_key(id) {
                    return Err(malformed(lineno, format!("duplicate node id {id:?}")));
                }
                graph.nodes.insert(id.to_string(), content);
            }
            "edge" => {
                let mut fields = rest.splitn(3, char::is_whitespace);
                let from = fields
                    .next()
                    .filter(|s| !s.is_empty())
                    .ok_or_else(|| malformed(lineno, "edge line needs endpoints"))?;
                let to = fields
                    .next()
                    .ok_or_else(|| malformed(lineno, "edge line needs a target id"))?;
                let label = fields.next().unwrap_or("").to_string();
                edge_lines.push((
                    lineno,
                    GraphEdge {
                        from: from.to_string(),
                        to: to.to_string(),
                        label,
                    },
                ));
            }
            "root" => {
                if root_line.is_some() {
                    return Err(malformed(lineno, "multiple root lines"));
                }
                root_line = Some((lineno, rest.trim().to_string()));
            }
            other => return Err(malformed(lineno, format!("unknown record kind {other:?}"))),
        }
    }
    for (lineno, edge) in edge_lines {
        for endpoint in [&edge.from, &edge.to] {
            if !graph.nodes.contains_key(endpoint) {
                return Err(malformed(
                    lineno,
                    format!("edge references unknown node {endpoint:?}"),
                ));
            }
        }
        if graph
            .edges
            .iter()
            .any(|e| e.from == edge.from && e.to == edge.to && e.label == edge.label)
        {
            return Err(malformed(lineno, "duplicate edge"));
        }
        graph.edges.push(edge);
    }
    if let Some((lineno, id)) = root_line {
        if !graph.nodes.contains_key(&id) {
            return Err(malformed(
                lineno,
                format!("root references unknown node {id:?}"),
            ));
        }
        graph.root = Some(id);
    }
    Ok(graph)
}

pub fn write_graph_triples<W: Write>(graph: &GenericGraph, mut out: W) -> std::io::Result<()> {
    for (id, content) in &graph.nodes {
        if content.is_empty() {
            writeln!(out, "node {id}")?;
        } else {
            writeln!(out, "node {id} {}", content.join(" "))?;
        }
    }
    if let Some(root) = &graph.root {
        writeln!(out, "root {root}")?;
    }
    for edge in &graph.edges {
        if edge.label.is_empty() {
            writeln!(out, "edge {} {}", edge.from, edge.to)?;
        } else {
            writeln!(out, "edge {} {} {}", edge.from, edge.to, edge.label)?;
        }
    }
    Ok(())
}

/// Quick lookup used when validating arc files against a corpus.
pub fn validate_arcs(
    arcs: &GoldArcSet,
    sentences: &IndexMap<String, Sentence>,
) -> Result<(), String> {
    let lengths: HashMap<&str, usize> = sentences
        .values()
        .map(|s| (s.id.as_str(), s.len()))
        .collect();
    for (sid, sentence_arcs) in &arcs.arcs {
        let Some(&len) = lengths.get(sid.as_str()) else {
            return Err(format!("arc references unknown sentence {sid:?}"));
        };
        for arc in sentence_arcs {
            if arc.predicate_index >= len {
                return Err(format!(
                    "sentence {sid:?}: predicate index {} out of range (length {len})",
                    arc.predicate_index
                ));
            }
            if arc.argument.max() >= len {
                return Err(format!(
                    "sentence {sid:?}: argument index {} out of range (length {len})",
                    arc.argument.max()
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn sentence_record() -> &'static str {
        r#"{"type":"sentence","id":"s1","tokens":["Pierre","Vinken","joined"]}"#
    }

    #[test]
    fn read_canonical_basic() {
        let qa = r#"{"type":"qa","sentence_id":"s1","worker_id":"w1","target_index":2,"question":["Who","joined","?"],"answer":[0,1],"judgments":[{"validator_id":"v1","verdict":"answer","answer":[0,1]},{"validator_id":"v2","verdict":"answer","answer":[0]}]}"#;
        let input = format!("{}\n{qa}\n", sentence_record());
        let corpus = read_canonical(Cursor::new(input)).unwrap();
        assert_eq!(corpus.sentences.len(), 1);
        assert_eq!(corpus.annotations.len(), 1);
        assert_eq!(corpus.annotations[0].judgments.len(), 2);
    }

    #[test]
    fn read_canonical_empty() {
        let corpus = read_canonical(Cursor::new("")).unwrap();
        assert!(corpus.sentences.is_empty());
        assert!(corpus.annotations.is_empty());
    }

    #[test]
    fn read_canonical_rejects_out_of_range() {
        let qa = r#"{"type":"qa","sentence_id":"s1","worker_id":"w1","target_index":0,"question":["Who","?"],"answer":[7],"judgments":[]}"#;
        let input = format!("{}\n{qa}\n", sentence_record());
        let err = read_canonical(Cursor::new(input)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("out of range"), "{msg}");
    }

    #[test]
    fn read_canonical_rejects_conflicting_sentence() {
        let other = r#"{"type":"sentence","id":"s1","tokens":["Different"]}"#;
        let input = format!("{}\n{other}\n", sentence_record());
        let err = read_canonical(Cursor::new(input)).unwrap_err();
        assert!(matches!(
            err,
            IngestError::ConflictingSentence { line: 2, .. }
        ));
    }

    #[test]
    fn read_canonical_rejects_unknown_verdict() {
        let qa = r#"{"type":"qa","sentence_id":"s1","worker_id":"w","target_index":0,"question":["Who"],"answer":[0],"judgments":[{"validator_id":"v","verdict":"maybe"}]}"#;
        let input = format!("{}\n{qa}\n", sentence_record());
        let err = read_canonical(Cursor::new(input)).unwrap_err();
        assert!(err.to_string().contains("unknown verdict"));
    }

    #[test]
    fn write_canonical_empty_is_header_only() {
        let mut buf = Vec::new();
        write_canonical(&AnnotationCorpus::default(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.contains(r#""type":"header""#));
    }

    #[test]
    fn tsv_space_separated_answer() {
        let sentences = read_sentence_tsv(Cursor::new("s1\ta b c d e f g h\n")).unwrap();
        let map = ColumnMap {
            sentence_id: 0,
            worker_id: Some(1),
            target_index: Some(2),
            question: 3,
            answer: 4,
            judgments: vec![],
            index_separator: IndexSeparator::Space,
            has_header: false,
        };
        let row = "s1\tw1\t4\tWhat is it ?\t4 5 6\n";
        let (corpus, rejects) = read_release_tsv(Cursor::new(row), &map, sentences, false).unwrap();
        assert!(rejects.is_empty());
        let ann = &corpus.annotations[0];
        assert_eq!(ann.writer_answer.iter().collect::<Vec<_>>(), vec![4, 5, 6]);
        assert_eq!(ann.target_index, 4);
    }

    #[test]
    fn tsv_rejects_and_continues() {
        let sentences = read_sentence_tsv(Cursor::new("s1\ta b c\n")).unwrap();
        let map = ColumnMap {
            sentence_id: 0,
            worker_id: None,
            target_index: None,
            question: 1,
            answer: 2,
            judgments: vec![],
            index_separator: IndexSeparator::Space,
            has_header: false,
        };
        let rows = "s1\tWhat ?\t0 1\ns1\tWhat ?\tnot-a-number\ns1\tWhat ?\t2\n";
        let (corpus, rejects) =
            read_release_tsv(Cursor::new(rows), &map, sentences.clone(), false).unwrap();
        assert_eq!(corpus.annotations.len(), 2);
        assert_eq!(rejects.len(), 1);
        assert_eq!(rejects[0].line, 2);

        let err = read_release_tsv(Cursor::new(rows), &map, sentences, true).unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn gold_arcs_drop_flags() {
        let input = "\
# comment line
s1 3 R-A0 propbank 0 1
s1 3 ARGM-DIS propbank 5
s1 3 A1 propbank 0 1
s1 2 _ qasrl 0 1 | 4 5
";
        let arcs = read_gold_arcs(
            Cursor::new(input),
            ArcReadOptions {
                drop_r: true,
                drop_dis: true,
            },
        )
        .unwrap();
        let s1 = &arcs.arcs["s1"];
        assert_eq!(s1.len(), 2);
        assert_eq!(s1[0].label, "A1");
        // qasrl multi-answer union
        assert_eq!(s1[1].argument.iter().collect::<Vec<_>>(), vec![0, 1, 4, 5]);
        assert_eq!(s1[1].label, "");
    }

    #[test]
    fn gold_arcs_empty_stream() {
        let arcs = read_gold_arcs(Cursor::new(""), ArcReadOptions::default()).unwrap();
        assert_eq!(arcs.total(), 0);
    }

    #[test]
    fn gold_arcs_unknown_source() {
        let err = read_gold_arcs(
            Cursor::new("s1 0 A0 treebank 1\n"),
            ArcReadOptions::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("unknown source"));
    }

    #[test]
    fn triples_basic() {
        let input = "node a Pierre\nnode b the board\nedge a b What will he join ?\n";
        let graph = read_graph_triples(Cursor::new(input)).unwrap();
        assert_eq!(graph.nodes.len(), 2);
        assert_eq!(graph.edges.len(), 1);
        assert_eq!(graph.edges[0].label, "What will he join ?");
        assert!(graph.root.is_none());
    }

    #[test]
    fn triples_dangling_edge() {
        let input = "node a x\nedge a b l\n";
        let err = read_graph_triples(Cursor::new(input)).unwrap_err();
        assert!(err.to_string().contains("unknown node"));
    }

    #[test]
    fn triples_duplicate_node() {
        let input = "node a x\nnode a y\n";
        let err = read_graph_triples(Cursor::new(input)).unwrap_err();
        assert!(err.to_string().contains("duplicate node"));
    }

    #[test]
    fn triples_roundtrip_empty_label() {
        let input = "node a x\nnode b y\nroot a\nedge a b\n";
        let graph = read_graph_triples(Cursor::new(input)).unwrap();
        assert_eq!(graph.edges[0].label, "");
        let mut buf = Vec::new();
        write_graph_triples(&graph, &mut buf).unwrap();
        let reread = read_graph_triples(Cursor::new(buf)).unwrap();
        assert_eq!(graph, reread);
    }
}
