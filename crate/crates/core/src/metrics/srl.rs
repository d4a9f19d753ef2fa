//! Alignment of QA pairs to gold predicate-argument arcs, arc recall, and
//! the annotator recall curve.

use std::collections::BTreeMap;

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ingest::{AnnotationCorpus, GoldArc, GoldArcSet};
use crate::model::{AnswerSet, Qamr, Sentence};

use super::NodeMatchConfig;

/// How answer/argument overlap is measured; Jaccard is the pinned default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverlapMode {
    #[default]
    Jaccard,
    IntersectionOverAnswer,
}

/// Best arc for one QA pair, if any arc qualifies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlignmentEntry {
    pub best_arc: Option<usize>,
    pub overlap: f64,
}

/// Overlap as an exact rational for tie-free comparison.
fn overlap_parts(answer: &AnswerSet, arc: &GoldArc, mode: OverlapMode) -> (usize, usize) {
    let intersection = answer.intersection_size(&arc.argument);
    let denominator = match mode {
        OverlapMode::Jaccard => answer.union_size(&arc.argument),
        OverlapMode::IntersectionOverAnswer => answer.len(),
    };
    (intersection, denominator)
}

/// Aligns one QA pair to the arc with the highest relative overlap between
/// argument span and answer span, among arcs whose predicate token occurs
/// in the question (lemma-table-extended when provided). Ties go to the arc
/// appearing first in the input; zero overlap leaves the pair unaligned.
pub fn align_qa(
    question: &[String],
    answer: &AnswerSet,
    arcs: &[GoldArc],
    sentence: &Sentence,
    cfg: &NodeMatchConfig,
    mode: OverlapMode,
) -> AlignmentEntry {
    let question_tokens: Vec<String> = cfg.map_tokens(question);
    let mut best: Option<(usize, (usize, usize))> = None;
    for (index, arc) in arcs.iter().enumerate() {
        let predicate = cfg.map_token(&sentence.tokens[arc.predicate_index]);
        if !question_tokens.contains(&predicate) {
            continue;
        }
        let (num, den) = overlap_parts(answer, arc, mode);
        if num == 0 {
            continue;
        }
        let better = match best {
            None => true,
            // strict improvement only: first-in-input wins ties
            Some((_, (bn, bd))) => (num as u64) * (bd as u64) > (bn as u64) * (den as u64),
        };
        if better {
            best = Some((index, (num, den)));
        }
    }
    match best {
        Some((index, (num, den))) => AlignmentEntry {
            best_arc: Some(index),
            overlap: num as f64 / den as f64,
        },
        None => AlignmentEntry {
            best_arc: None,
            overlap: 0.0,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecallResult {
    pub covered: usize,
    pub total: usize,
}

impl RecallResult {
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.covered as f64 / self.total as f64
        }
    }
}

/// Fraction of gold arcs aligned by at least one QA pair.
pub fn arc_recall(
    qamrs: &[Qamr],
    arcs: &GoldArcSet,
    sentences: &IndexMap<String, Sentence>,
    cfg: &NodeMatchConfig,
    mode: OverlapMode,
) -> RecallResult {
    let mut covered = 0;
    let mut total = 0;
    for (sentence_id, sentence_arcs) in &arcs.arcs {
        total += sentence_arcs.len();
        let Some(sentence) = sentences.get(sentence_id) else {
            continue;
        };
        let mut hit = vec![false; sentence_arcs.len()];
        for qamr in qamrs.iter().filter(|q| &q.sentence_id == sentence_id) {
            for pair in &qamr.pairs {
                let entry = align_qa(
                    &pair.question,
                    &pair.answer,
                    sentence_arcs,
                    sentence,
                    cfg,
                    mode,
                );
                if let Some(index) = entry.best_arc {
                    hit[index] = true;
                }
            }
        }
        covered += hit.iter().filter(|h| **h).count();
    }
    RecallResult { covered, total }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub n: usize,
    pub recall: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveMode {
    /// Exact average over all C(m, n) annotator subsets per grouping.
    Exhaustive,
    Sampled {
        seed: u64,
        trials: usize,
    },
}

fn binomial(m: usize, n: usize) -> u128 {
    if n > m {
        return 0;
    }
    let mut result: u128 = 1;
    for i in 0..n {
        result = result * (m - i) as u128 / (i + 1) as u128;
    }
    result
}

struct Grouping {
    sentence_id: String,
    /// worker -> arc indices (into the sentence's arc list) covered by at
    /// least one of the worker's pairs in this grouping
    coverage: IndexMap<String, Vec<usize>>,
}

fn build_groupings(
    corpus: &AnnotationCorpus,
    arcs: &GoldArcSet,
    cfg: &NodeMatchConfig,
    mode: OverlapMode,
) -> Vec<Grouping> {
    let mut groupings: IndexMap<(String, usize), Grouping> = IndexMap::new();
    for annotation in &corpus.annotations {
        let key = (annotation.sentence_id.clone(), annotation.target_index);
        let grouping = groupings.entry(key).or_insert_with(|| Grouping {
            sentence_id: annotation.sentence_id.clone(),
            coverage: IndexMap::new(),
        });
        let worker_arcs = grouping
            .coverage
            .entry(annotation.worker_id.clone())
            .or_default();
        let (Some(sentence), Some(sentence_arcs)) = (
            corpus.sentences.get(&annotation.sentence_id),
            arcs.arcs.get(&annotation.sentence_id),
        ) else {
            continue;
        };
        let entry = align_qa(
            &annotation.question,
            &annotation.writer_answer,
            sentence_arcs,
            sentence,
            cfg,
            mode,
        );
        if let Some(index) = entry.best_arc {
            if !worker_arcs.contains(&index) {
                worker_arcs.push(index);
            }
        }
    }
    groupings.into_values().collect()
}

/// Recall when `n` annotators are sampled per target-word grouping.
///
/// Exhaustive mode computes the exact expectation: per arc, the chance that
/// no sampled annotator covers it is a product of hypergeometric subset
/// fractions over the groupings of its sentence, since groupings sample
/// independently. Groupings with fewer than `n` annotators are subsampled
/// from what exists; the returned warnings say how many fell short of five.
pub fn recall_curve(
    corpus: &AnnotationCorpus,
    arcs: &GoldArcSet,
    ns: &[usize],
    mode: CurveMode,
    cfg: &NodeMatchConfig,
    overlap: OverlapMode,
) -> (Vec<CurvePoint>, Vec<String>) {
    let groupings = build_groupings(corpus, arcs, cfg, overlap);
    let mut warnings = Vec::new();
    let short = groupings.iter().filter(|g| g.coverage.len() < 5).count();
    if short > 0 {
        warnings.push(format!(
            "{short} of {} target-word groupings have fewer than 5 annotators; subsampling from what exists",
            groupings.len()
        ));
    }
    let total: usize = arcs.arcs.values().map(Vec::len).sum();
    let mut points = Vec::new();
    for &n in ns {
        if total == 0 {
            points.push(CurvePoint { n, recall: 0.0 });
            continue;
        }
        let recall = match mode {
            CurveMode::Exhaustive => {
                let mut expected_covered = 0.0;
                for (sentence_id, sentence_arcs) in &arcs.arcs {
                    for arc_index in 0..sentence_arcs.len() {
                        let mut p_uncovered = 1.0;
                        for grouping in groupings.iter().filter(|g| &g.sentence_id == sentence_id) {
                            let m = grouping.coverage.len();
                            if m == 0 {
                                continue;
                            }
                            let k = grouping
                                .coverage
                                .values()
                                .filter(|arcs| arcs.contains(&arc_index))
                                .count();
                            let take = n.min(m);
                            let denom = binomial(m, take);
                            let numer = binomial(m - k, take);
                            p_uncovered *= numer as f64 / denom as f64;
                        }
                        expected_covered += 1.0 - p_uncovered;
                    }
                }
                expected_covered / total as f64
            }
            CurveMode::Sampled { seed, trials } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(n as u64));
                let mut sum = 0.0;
                for _ in 0..trials.max(1) {
                    // covered arcs per sentence under one random draw
                    let mut covered: BTreeMap<&str, Vec<bool>> = arcs
                        .arcs
                        .iter()
                        .map(|(sid, a)| (sid.as_str(), vec![false; a.len()]))
                        .collect();
                    for grouping in &groupings {
                        let mut workers: Vec<&String> = grouping.coverage.keys().collect();
                        let take = n.min(workers.len());
                        workers.shuffle(&mut rng);
                        for worker in workers.into_iter().take(take) {
                            if let Some(flags) = covered.get_mut(grouping.sentence_id.as_str()) {
                                for &arc_index in &grouping.coverage[worker] {
                                    flags[arc_index] = true;
                                }
                            }
                        }
                    }
                    let hit: usize = covered
                        .values()
                        .map(|flags| flags.iter().filter(|f| **f).count())
                        .sum();
                    sum += hit as f64 / total as f64;
                }
                sum / trials.max(1) as f64
            }
        };
        points.push(CurvePoint { n, recall });
    }
    (points, warnings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::ArcSource;
    use crate::model::{Judgment, QaPair, RawAnnotation, Verdict};

    fn tokens(text: &str) -> Vec<String> {
        text.split(' ').map(String::from).collect()
    }

    fn answer(indices: &[usize]) -> AnswerSet {
        AnswerSet::new(indices.iter().copied()).unwrap()
    }

    fn arc(predicate: usize, argument: &[usize]) -> GoldArc {
        GoldArc {
            predicate_index: predicate,
            argument: answer(argument),
            label: "A0".into(),
            source: ArcSource::Propbank,
        }
    }

    fn sentence() -> Sentence {
        Sentence::new("s1", tokens("Pierre Vinken will join the board today"))
    }

    #[test]
    fn exact_overlap_is_one() {
        let arcs = vec![arc(3, &[0, 1])];
        let entry = align_qa(
            &tokens("Who will join ?"),
            &answer(&[0, 1]),
            &arcs,
            &sentence(),
            &NodeMatchConfig::default(),
            OverlapMode::Jaccard,
        );
        assert_eq!(entry.best_arc, Some(0));
        assert_eq!(entry.overlap, 1.0);
    }

    #[test]
    fn jaccard_arithmetic() {
        let arcs = vec![arc(3, &[2, 3, 4])];
        let entry = align_qa(
            &tokens("Who will join ?"),
            &answer(&[1, 2, 3]),
            &arcs,
            &sentence(),
            &NodeMatchConfig::default(),
            OverlapMode::Jaccard,
        );
        assert_eq!(entry.overlap, 0.5); // 2 / 4
    }

    #[test]
    fn predicate_absent_means_unaligned() {
        let arcs = vec![arc(3, &[0, 1])];
        let entry = align_qa(
            &tokens("Who is he ?"),
            &answer(&[0, 1]),
            &arcs,
            &sentence(),
            &NodeMatchConfig::default(),
            OverlapMode::Jaccard,
        );
        assert_eq!(entry.best_arc, None);
    }

    #[test]
    fn ties_go_to_first_arc() {
        let arcs = vec![arc(3, &[0, 1]), arc(3, &[0, 1])];
        let entry = align_qa(
            &tokens("Who will join ?"),
            &answer(&[0, 1]),
            &arcs,
            &sentence(),
            &NodeMatchConfig::default(),
            OverlapMode::Jaccard,
        );
        assert_eq!(entry.best_arc, Some(0));
    }

    fn arc_set(arcs: Vec<GoldArc>) -> GoldArcSet {
        let mut set = GoldArcSet::default();
        set.arcs.insert("s1".into(), arcs);
        set
    }

    fn sentences() -> IndexMap<String, Sentence> {
        let mut map = IndexMap::new();
        map.insert("s1".to_string(), sentence());
        map
    }

    #[test]
    fn recall_all_and_none() {
        let arcs = arc_set(vec![arc(3, &[0, 1]), arc(3, &[4, 5])]);
        let qamr = Qamr {
            sentence_id: "s1".into(),
            pairs: vec![
                QaPair {
                    sentence_id: "s1".into(),
                    question: tokens("Who will join ?"),
                    answer: answer(&[0, 1]),
                },
                QaPair {
                    sentence_id: "s1".into(),
                    question: tokens("What will he join ?"),
                    answer: answer(&[4, 5]),
                },
            ],
        };
        let cfg = NodeMatchConfig::default();
        let full = arc_recall(&[qamr], &arcs, &sentences(), &cfg, OverlapMode::Jaccard);
        assert_eq!(full.fraction(), 1.0);
        let empty = arc_recall(&[], &arcs, &sentences(), &cfg, OverlapMode::Jaccard);
        assert_eq!(empty.fraction(), 0.0);
    }

    fn qc_annotation(worker: &str, target: usize, question: &str, ans: &[usize]) -> RawAnnotation {
        RawAnnotation {
            sentence_id: "s1".into(),
            worker_id: worker.into(),
            target_index: target,
            question: tokens(question),
            writer_answer: answer(ans),
            judgments: vec![Judgment {
                validator_id: "v".into(),
                verdict: Verdict::Answer(answer(ans)),
            }],
        }
    }

    fn five_annotator_corpus() -> AnnotationCorpus {
        // one grouping, five annotators; workers w0 and w1 cover the arc
        let annotations = (0..5)
            .map(|i| {
                let q = if i < 2 {
                    "Who will join ?"
                } else {
                    "Who is he ?"
                };
                qc_annotation(&format!("w{i}"), 3, q, &[0, 1])
            })
            .collect();
        AnnotationCorpus {
            sentences: sentences(),
            annotations,
            split_label: None,
        }
    }

    #[test]
    fn curve_n5_equals_full_recall() {
        let corpus = five_annotator_corpus();
        let arcs = arc_set(vec![arc(3, &[0, 1]), arc(3, &[4, 5])]);
        let cfg = NodeMatchConfig::default();
        let (points, warnings) = recall_curve(
            &corpus,
            &arcs,
            &[5],
            CurveMode::Exhaustive,
            &cfg,
            OverlapMode::Jaccard,
        );
        assert!(warnings.is_empty());
        // arc 0 covered by somebody, arc 1 by nobody
        assert_eq!(points[0].recall, 0.5);
    }

    #[test]
    fn curve_n1_is_mean_single_annotator_recall() {
        let corpus = five_annotator_corpus();
        let arcs = arc_set(vec![arc(3, &[0, 1])]);
        let cfg = NodeMatchConfig::default();
        let (points, _) = recall_curve(
            &corpus,
            &arcs,
            &[1],
            CurveMode::Exhaustive,
            &cfg,
            OverlapMode::Jaccard,
        );
        // 2 of 5 annotators cover the single arc
        assert!((points[0].recall - 0.4).abs() < 1e-12);
    }

    #[test]
    fn curve_monotone_and_sampled_close() {
        let corpus = five_annotator_corpus();
        let arcs = arc_set(vec![arc(3, &[0, 1]), arc(3, &[4, 5])]);
        let cfg = NodeMatchConfig::default();
        let ns: Vec<usize> = (1..=5).collect();
        let (points, _) = recall_curve(
            &corpus,
            &arcs,
            &ns,
            CurveMode::Exhaustive,
            &cfg,
            OverlapMode::Jaccard,
        );
        for pair in points.windows(2) {
            assert!(pair[1].recall >= pair[0].recall - 1e-12);
        }
        let (sampled, _) = recall_curve(
            &corpus,
            &arcs,
            &[3],
            CurveMode::Sampled {
                seed: 11,
                trials: 4000,
            },
            &cfg,
            OverlapMode::Jaccard,
        );
        let exhaustive_n3 = points[2].recall;
        assert!((sampled[0].recall - exhaustive_n3).abs() < 0.02);
    }
}
