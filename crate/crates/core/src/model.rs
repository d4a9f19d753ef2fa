//! Core domain types shared by every module: sentences, token spans,
//! answer index sets, QA pairs, and raw annotation records.
//!
//! Token indices are 0-based everywhere; spans are half-open `[start, end)`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A tokenized input sentence with a stable id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub id: String,
    pub tokens: Vec<String>,
}

impl Sentence {
    pub fn new(id: impl Into<String>, tokens: Vec<String>) -> Self {
        Sentence {
            id: id.into(),
            tokens,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Surface tokens covered by `span`.
    pub fn span_tokens(&self, span: Span) -> &[String] {
        &self.tokens[span.start..span.end]
    }

    /// Span text joined with single spaces.
    pub fn span_text(&self, span: Span) -> String {
        self.span_tokens(span).join(" ")
    }
}

/// Half-open token interval `[start, end)` with `start < end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    /// Panics if `start >= end`; spans are never empty.
    pub fn new(start: usize, end: usize) -> Self {
        assert!(start < end, "empty span [{start}, {end})");
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// True iff `other` lies entirely within `self`.
    pub fn contains(&self, other: Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn contains_index(&self, index: usize) -> bool {
        self.start <= index && index < self.end
    }

    /// True iff the two intervals share at least one position.
    pub fn intersects(&self, other: Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> {
        self.start..self.end
    }

    /// Stable textual id used in the triple graph format.
    pub fn id_string(&self) -> String {
        format!("{}-{}", self.start, self.end)
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{})", self.start, self.end)
    }
}

/// A non-empty, possibly non-contiguous set of sentence token indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BTreeSet<usize>", into = "BTreeSet<usize>")]
pub struct AnswerSet {
    indices: BTreeSet<usize>,
}

impl TryFrom<BTreeSet<usize>> for AnswerSet {
    type Error = String;

    fn try_from(indices: BTreeSet<usize>) -> Result<Self, Self::Error> {
        AnswerSet::new(indices).ok_or_else(|| "answer index set is empty".to_string())
    }
}

impl From<AnswerSet> for BTreeSet<usize> {
    fn from(set: AnswerSet) -> Self {
        set.indices
    }
}

impl AnswerSet {
    /// Returns `None` for an empty index set.
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Option<Self> {
        let indices: BTreeSet<usize> = indices.into_iter().collect();
        if indices.is_empty() {
            None
        } else {
            Some(AnswerSet { indices })
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.contains(&index)
    }

    /// True iff every position of `span` is in the set.
    pub fn contains_span(&self, span: Span) -> bool {
        span.indices().all(|i| self.indices.contains(&i))
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn max(&self) -> usize {
        *self.indices.iter().next_back().expect("non-empty")
    }

    pub fn intersection_size(&self, other: &AnswerSet) -> usize {
        self.indices.intersection(&other.indices).count()
    }

    pub fn union_size(&self, other: &AnswerSet) -> usize {
        self.indices.union(&other.indices).count()
    }
}

/// A question paired with its answer token set, tied to one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaPair {
    pub sentence_id: String,
    pub question: Vec<String>,
    pub answer: AnswerSet,
}

/// A sentence's full set of QA pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Qamr {
    pub sentence_id: String,
    pub pairs: Vec<QaPair>,
}

/// One validator's response to a written question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub validator_id: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Invalid,
    /// Redundant with another question; the reference id is optional.
    Redundant(Option<String>),
    Answer(AnswerSet),
}

/// One row of the annotation log: a written question with the target word
/// it was prompted on and the validator judgments it received.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawAnnotation {
    pub sentence_id: String,
    pub worker_id: String,
    pub target_index: usize,
    pub question: Vec<String>,
    pub writer_answer: AnswerSet,
    pub judgments: Vec<Judgment>,
}

/// Maximal runs of consecutive indices, sorted and disjoint; their union
/// reproduces the input set exactly.
pub fn contiguous_runs(answer: &AnswerSet) -> Vec<Span> {
    let mut runs = Vec::new();
    let mut iter = answer.iter();
    let first = iter.next().expect("answer sets are non-empty");
    let mut start = first;
    let mut prev = first;
    for i in iter {
        if i != prev + 1 {
            runs.push(Span::new(start, prev + 1));
            start = i;
        }
        prev = i;
    }
    runs.push(Span::new(start, prev + 1));
    runs
}

/// Case folding only; punctuation and digits pass through untouched.
pub fn normalize_token(token: &str) -> String {
    token.to_lowercase()
}
