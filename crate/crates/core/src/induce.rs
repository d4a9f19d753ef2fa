//! Three-step graph induction: occurrence finding, node identification and
//! scoring, predicate-argument extraction, and structure induction.
//!
//! The output is a rooted graph over pairwise-disjoint sentence spans whose
//! labeled edges carry the questions that evidence them. Empty-label edges
//! mark arguments that co-occurred with a predicate in a question but were
//! never attached through an answer.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::ingest::{GenericGraph, GraphEdge};
use crate::model::{contiguous_runs, normalize_token, QaPair, Qamr, Sentence, Span};
use crate::stopwords::StopwordSet;

/// Where a span was observed: inside the question or the answer of pair `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Question(usize),
    Answer(usize),
}

impl Location {
    pub fn pair(self) -> usize {
        match self {
            Location::Question(i) | Location::Answer(i) => i,
        }
    }

    pub fn is_question(self) -> bool {
        matches!(self, Location::Question(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Occurrence {
    pub span: Span,
    pub location: Location,
}

/// Occurrence counts for one node; the predicate score is
/// `c_q / (c_q + c_a)`, compared exactly as a rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NodeStats {
    pub span: Span,
    pub c_q: u32,
    pub c_a: u32,
}

impl NodeStats {
    pub fn score(&self) -> f64 {
        f64::from(self.c_q) / f64::from(self.c_q + self.c_a)
    }
}

/// Exact rational comparison of c_q/(c_q+c_a) by cross-multiplication.
fn cmp_score(a: &NodeStats, b: &NodeStats) -> std::cmp::Ordering {
    let lhs = u64::from(a.c_q) * u64::from(b.c_q + b.c_a);
    let rhs = u64::from(b.c_q) * u64::from(a.c_q + a.c_a);
    lhs.cmp(&rhs)
}

/// Highest score first, then leftmost span start, then shortest span.
fn cmp_predicate_rank(a: &NodeStats, b: &NodeStats) -> std::cmp::Ordering {
    cmp_score(b, a)
        .then(a.span.start.cmp(&b.span.start))
        .then(a.span.len().cmp(&b.span.len()))
}

/// One QA pair read as a single proposition: a question predicate, the
/// answer-internal head receiving the labeled edge, and the remaining
/// question nodes as candidate empty-label attachments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaStructure {
    pub pair: usize,
    pub predicate: Span,
    pub answer_head: Span,
    pub question_args: Vec<Span>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum PaError {
    #[error("question contains no node")]
    NoQuestionNode,
    #[error("answer contains no node other than the predicate")]
    NoAnswerNode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QamrEdge {
    pub from: Span,
    pub to: Span,
    /// The verbatim question evidencing the edge; `None` marks a relation
    /// missing from the QAMR.
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QamrGraph {
    pub sentence_id: String,
    pub nodes: Vec<Span>,
    pub edges: Vec<QamrEdge>,
    pub root: Option<Span>,
}

impl QamrGraph {
    pub fn labeled_edges(&self) -> impl Iterator<Item = &QamrEdge> {
        self.edges.iter().filter(|e| e.label.is_some())
    }

    /// Triple-format view: node ids are `start-end`, contents the surface
    /// tokens of each span.
    pub fn to_generic(&self, sentence: &Sentence) -> GenericGraph {
        let mut graph = GenericGraph::default();
        for node in &self.nodes {
            graph
                .nodes
                .insert(node.id_string(), sentence.span_tokens(*node).to_vec());
        }
        graph.root = self.root.map(|r| r.id_string());
        for edge in &self.edges {
            graph.edges.push(GraphEdge {
                from: edge.from.id_string(),
                to: edge.to.id_string(),
                label: edge.label.clone().unwrap_or_default(),
            });
        }
        graph
    }

    /// Indented tree rendering from the root; empty-label edges are marked
    /// EMPTY and nodes reachable from nowhere are listed last.
    pub fn render_tree(&self, sentence: &Sentence) -> String {
        let mut out = String::new();
        let mut children: BTreeMap<Span, Vec<&QamrEdge>> = BTreeMap::new();
        for edge in &self.edges {
            children.entry(edge.from).or_default().push(edge);
        }
        let mut visited = BTreeSet::new();
        fn walk(
            node: Span,
            depth: usize,
            out: &mut String,
            children: &BTreeMap<Span, Vec<&QamrEdge>>,
            sentence: &Sentence,
            visited: &mut BTreeSet<Span>,
        ) {
            let indent = "  ".repeat(depth);
            out.push_str(&format!(
                "{indent}{} {}\n",
                node.id_string(),
                sentence.span_text(node)
            ));
            if !visited.insert(node) {
                return;
            }
            if let Some(edges) = children.get(&node) {
                for edge in edges {
                    let indent = "  ".repeat(depth + 1);
                    match &edge.label {
                        Some(q) => out.push_str(&format!("{indent}-[{q}]->\n")),
                        None => out.push_str(&format!("{indent}-[EMPTY]->\n")),
                    }
                    walk(edge.to, depth + 2, out, children, sentence, visited);
                }
            }
        }
        if let Some(root) = self.root {
            out.push_str("root:\n");
            walk(root, 1, &mut out, &children, sentence, &mut visited);
        }
        let unreached: Vec<Span> = self
            .nodes
            .iter()
            .copied()
            .filter(|n| !visited.contains(n))
            .collect();
        if !unreached.is_empty() {
            out.push_str("unattached:\n");
            for node in unreached {
                if visited.contains(&node) {
                    continue;
                }
                walk(node, 1, &mut out, &children, sentence, &mut visited);
            }
        }
        out
    }
}

/// Whether empty-label edges are attempted after every labeled edge
/// (default) or interleaved within each predicate-score class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EmptyEdgeOrder {
    #[default]
    AfterLabeled,
    Interleaved,
}

#[derive(Debug, Clone, Default)]
pub struct InduceOptions {
    pub stopwords: StopwordSet,
    pub empty_edge_order: EmptyEdgeOrder,
}

// ---------------------------------------------------------------------------
// Step 1a: occurrences
// ---------------------------------------------------------------------------

/// Answer occurrences are the contiguous runs of each answer. Question
/// occurrences come from greedy longest-match over the question tokens:
/// at each position the longest matching sentence subsequence is taken
/// (preferring sentence positions that intersect an answer occurrence of
/// the same QAMR, then leftmost), leading and trailing stopword or
/// punctuation tokens are trimmed off, and all-skippable matches are
/// dropped — "will" alone never becomes an occurrence, while it survives
/// inside "will join" as part of the trimmed "join".
pub fn find_occurrences(
    sentence: &Sentence,
    qamr: &Qamr,
    stopwords: &StopwordSet,
) -> Vec<Occurrence> {
    let sentence_norm: Vec<String> = sentence.tokens.iter().map(|t| normalize_token(t)).collect();

    let answer_runs: Vec<Vec<Span>> = qamr
        .pairs
        .iter()
        .map(|p| contiguous_runs(&p.answer))
        .collect();
    let all_answer_runs: Vec<Span> = answer_runs.iter().flatten().copied().collect();

    let mut occurrences = Vec::new();
    for (pair_index, pair) in qamr.pairs.iter().enumerate() {
        let question_norm: Vec<String> = pair.question.iter().map(|t| normalize_token(t)).collect();
        let mut qi = 0;
        while qi < question_norm.len() {
            let mut best_len = 0;
            let mut positions: Vec<usize> = Vec::new();
            for start in 0..sentence_norm.len() {
                let mut len = 0;
                while start + len < sentence_norm.len()
                    && qi + len < question_norm.len()
                    && sentence_norm[start + len] == question_norm[qi + len]
                {
                    len += 1;
                }
                if len > best_len {
                    best_len = len;
                    positions.clear();
                }
                if len == best_len && len > 0 {
                    positions.push(start);
                }
            }
            if best_len == 0 {
                qi += 1;
                continue;
            }
            let chosen = positions
                .iter()
                .copied()
                .find(|&p| {
                    let span = Span::new(p, p + best_len);
                    all_answer_runs.iter().any(|r| r.intersects(span))
                })
                .unwrap_or(positions[0]);
            let mut start = chosen;
            let mut end = chosen + best_len;
            while start < end && stopwords.is_skippable(&sentence.tokens[start]) {
                start += 1;
            }
            while end > start && stopwords.is_skippable(&sentence.tokens[end - 1]) {
                end -= 1;
            }
            if start < end {
                occurrences.push(Occurrence {
                    span: Span::new(start, end),
                    location: Location::Question(pair_index),
                });
            }
            qi += best_len;
        }
        for run in &answer_runs[pair_index] {
            occurrences.push(Occurrence {
                span: *run,
                location: Location::Answer(pair_index),
            });
        }
    }
    occurrences
}

// ---------------------------------------------------------------------------
// Step 1b: minimal nodes
// ---------------------------------------------------------------------------

/// Splits every occurrence span at the boundaries of the occurrence spans it
/// overlaps, to a fixpoint. The result is the set of minimal spans: pairwise
/// disjoint, covering exactly the union of the occurrences, cut at every
/// occurrence boundary that falls strictly inside another span.
pub fn identify_nodes(occurrences: &[Occurrence]) -> Vec<Span> {
    let spans: BTreeSet<Span> = occurrences.iter().map(|o| o.span).collect();
    let mut cuts: BTreeSet<usize> = BTreeSet::new();
    for span in &spans {
        cuts.insert(span.start);
        cuts.insert(span.end);
    }
    // union of the occurrence spans, as disjoint intervals
    let mut covered: Vec<Span> = Vec::new();
    for span in &spans {
        match covered.last_mut() {
            Some(last) if span.start <= last.end => {
                last.end = last.end.max(span.end);
            }
            _ => covered.push(*span),
        }
    }
    let mut nodes = Vec::new();
    for region in covered {
        let inner: Vec<usize> = cuts
            .iter()
            .copied()
            .filter(|&c| region.start <= c && c <= region.end)
            .collect();
        for pair in inner.windows(2) {
            nodes.push(Span::new(pair[0], pair[1]));
        }
    }
    nodes
}

// ---------------------------------------------------------------------------
// Step 2: scoring and predicate-argument extraction
// ---------------------------------------------------------------------------

/// A node counts toward c_q for every question occurrence containing it and
/// toward c_a for every answer occurrence containing it; embedded
/// containment counts.
pub fn score_nodes(nodes: &[Span], occurrences: &[Occurrence]) -> Vec<NodeStats> {
    nodes
        .iter()
        .map(|&span| {
            let mut c_q = 0;
            let mut c_a = 0;
            for occ in occurrences {
                if occ.span.contains(span) {
                    if occ.location.is_question() {
                        c_q += 1;
                    } else {
                        c_a += 1;
                    }
                }
            }
            NodeStats { span, c_q, c_a }
        })
        .collect()
}

fn stats_for(stats: &[NodeStats], span: Span) -> NodeStats {
    *stats
        .iter()
        .find(|s| s.span == span)
        .expect("span is a node")
}

/// Predicate = highest-ranked node among those occurring in the question;
/// answer head = highest-ranked node inside the answer, predicate excluded.
pub fn extract_pa(
    pair_index: usize,
    pair: &QaPair,
    occurrences: &[Occurrence],
    stats: &[NodeStats],
) -> Result<PaStructure, PaError> {
    let mut question_nodes: Vec<NodeStats> = stats
        .iter()
        .copied()
        .filter(|n| {
            occurrences.iter().any(|o| {
                matches!(o.location, Location::Question(i) if i == pair_index)
                    && o.span.contains(n.span)
            })
        })
        .collect();
    if question_nodes.is_empty() {
        return Err(PaError::NoQuestionNode);
    }
    question_nodes.sort_by(cmp_predicate_rank);
    let predicate = question_nodes[0].span;

    let mut answer_nodes: Vec<NodeStats> = stats
        .iter()
        .copied()
        .filter(|n| n.span != predicate && pair.answer.contains_span(n.span))
        .collect();
    if answer_nodes.is_empty() {
        return Err(PaError::NoAnswerNode);
    }
    answer_nodes.sort_by(cmp_predicate_rank);
    let answer_head = answer_nodes[0].span;

    let question_args: Vec<Span> = question_nodes
        .iter()
        .map(|n| n.span)
        .filter(|&s| s != predicate)
        .collect();
    Ok(PaStructure {
        pair: pair_index,
        predicate,
        answer_head,
        question_args,
    })
}

/// Steps 1–2 for every pair; erroring pairs are reported alongside.
pub fn extract_pa_all(
    sentence: &Sentence,
    qamr: &Qamr,
    stopwords: &StopwordSet,
) -> (Vec<PaStructure>, Vec<(usize, PaError)>) {
    let occurrences = find_occurrences(sentence, qamr, stopwords);
    let nodes = identify_nodes(&occurrences);
    let stats = score_nodes(&nodes, &occurrences);
    let mut pas = Vec::new();
    let mut failures = Vec::new();
    for (i, pair) in qamr.pairs.iter().enumerate() {
        match extract_pa(i, pair, &occurrences, &stats) {
            Ok(pa) => pas.push(pa),
            Err(e) => failures.push((i, e)),
        }
    }
    (pas, failures)
}

// ---------------------------------------------------------------------------
// Step 3: structure induction
// ---------------------------------------------------------------------------

/// Token extent of an edge: min start to max end of its endpoint spans.
fn extent(edge: (Span, Span)) -> (usize, usize) {
    (edge.0.start.min(edge.1.start), edge.0.end.max(edge.1.end))
}

/// Two edges cross iff their extents strictly partially overlap and they
/// share no endpoint node (arcs sharing an anchor never cross).
fn edges_cross(a: (Span, Span), b: (Span, Span)) -> bool {
    if a.0 == b.0 || a.0 == b.1 || a.1 == b.0 || a.1 == b.1 {
        return false;
    }
    let (a1, b1) = extent(a);
    let (a2, b2) = extent(b);
    (a1 < a2 && a2 < b1 && b1 < b2) || (a2 < a1 && a1 < b2 && b2 < b1)
}

fn creates_cycle(edges: &[QamrEdge], from: Span, to: Span) -> bool {
    // cycle iff `from` is already reachable from `to`
    let mut stack = vec![to];
    let mut seen = BTreeSet::new();
    while let Some(node) = stack.pop() {
        if node == from {
            return true;
        }
        if !seen.insert(node) {
            continue;
        }
        for edge in edges {
            if edge.from == node {
                stack.push(edge.to);
            }
        }
    }
    false
}

struct Candidate {
    from: Span,
    to: Span,
    label: Option<String>,
    score: NodeStats,
    pair: usize,
    seq: usize,
}

/// Runs the full induction. Candidate edges are attempted by decreasing
/// predicate score (ties: predicate span leftmost, then pair input order);
/// an edge is rejected if it duplicates an existing (from, to) pair, creates
/// a directed cycle, or crosses an accepted edge. Empty-label candidates are
/// only attempted while their target still has no incoming edge.
pub fn induce_graph(sentence: &Sentence, qamr: &Qamr, opts: &InduceOptions) -> QamrGraph {
    let occurrences = find_occurrences(sentence, qamr, &opts.stopwords);
    let nodes = identify_nodes(&occurrences);
    let stats = score_nodes(&nodes, &occurrences);

    let mut labeled: Vec<Candidate> = Vec::new();
    let mut empty: Vec<Candidate> = Vec::new();
    for (i, pair) in qamr.pairs.iter().enumerate() {
        let Ok(pa) = extract_pa(i, pair, &occurrences, &stats) else {
            continue;
        };
        let score = stats_for(&stats, pa.predicate);
        labeled.push(Candidate {
            from: pa.predicate,
            to: pa.answer_head,
            label: Some(pair.question.join(" ")),
            score,
            pair: i,
            seq: 0,
        });
        for (k, arg) in pa.question_args.iter().enumerate() {
            empty.push(Candidate {
                from: pa.predicate,
                to: *arg,
                label: None,
                score,
                pair: i,
                seq: k + 1,
            });
        }
    }

    let rank = |c: &Candidate| (c.from.start, c.pair, c.seq);
    let order = |a: &Candidate, b: &Candidate| {
        cmp_score(&b.score, &a.score).then_with(|| rank(a).cmp(&rank(b)))
    };
    let candidates: Vec<Candidate> = match opts.empty_edge_order {
        EmptyEdgeOrder::AfterLabeled => {
            labeled.sort_by(order);
            empty.sort_by(order);
            labeled.into_iter().chain(empty).collect()
        }
        EmptyEdgeOrder::Interleaved => {
            // labeled before empty within each score class
            let mut all: Vec<Candidate> = labeled.into_iter().chain(empty).collect();
            all.sort_by(|a, b| {
                cmp_score(&b.score, &a.score)
                    .then(a.label.is_none().cmp(&b.label.is_none()))
                    .then_with(|| rank(a).cmp(&rank(b)))
            });
            all
        }
    };

    let mut edges: Vec<QamrEdge> = Vec::new();
    let mut used: BTreeSet<(Span, Span)> = BTreeSet::new();
    let mut attached: BTreeSet<Span> = BTreeSet::new();
    for cand in candidates {
        if cand.from == cand.to || used.contains(&(cand.from, cand.to)) {
            continue;
        }
        if cand.label.is_none() && attached.contains(&cand.to) {
            continue;
        }
        if creates_cycle(&edges, cand.from, cand.to) {
            continue;
        }
        if edges
            .iter()
            .any(|e| edges_cross((e.from, e.to), (cand.from, cand.to)))
        {
            continue;
        }
        used.insert((cand.from, cand.to));
        attached.insert(cand.to);
        edges.push(QamrEdge {
            from: cand.from,
            to: cand.to,
            label: cand.label,
        });
    }

    let root = stats
        .iter()
        .min_by(|a, b| cmp_predicate_rank(a, b))
        .map(|s| s.span);

    QamrGraph {
        sentence_id: qamr.sentence_id.clone(),
        nodes,
        edges,
        root,
    }
}
