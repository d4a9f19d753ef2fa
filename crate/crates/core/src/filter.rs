//! Judgment aggregation, question filtering, and corpus statistics.

use serde::Serialize;

use crate::ingest::AnnotationCorpus;
use crate::model::{normalize_token, AnswerSet, QaPair, Qamr, RawAnnotation, Sentence, Verdict};

pub const WH_WORDS: [&str; 8] = [
    "who", "what", "when", "where", "why", "how", "which", "whose",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Valid,
    Invalid,
    Redundant,
}

/// An annotation with its validator judgments folded into a single status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidatedQa {
    pub sentence_id: String,
    pub worker_id: String,
    pub target_index: usize,
    pub question: Vec<String>,
    pub writer_answer: AnswerSet,
    pub validator_answers: Vec<AnswerSet>,
    pub status: Status,
    /// Set when the annotation carried no judgments at all; such questions
    /// pass aggregation and the caller decides policy.
    pub unvalidated: bool,
}

/// Invalid if any judgment is Invalid; else Redundant if any is Redundant;
/// else Valid. Zero judgments aggregate to Valid with the flag set.
pub fn aggregate(annotation: &RawAnnotation) -> ValidatedQa {
    let mut status = Status::Valid;
    let mut validator_answers = Vec::new();
    for judgment in &annotation.judgments {
        match &judgment.verdict {
            Verdict::Invalid => status = Status::Invalid,
            Verdict::Redundant(_) => {
                if status == Status::Valid {
                    status = Status::Redundant;
                }
            }
            Verdict::Answer(a) => validator_answers.push(a.clone()),
        }
    }
    ValidatedQa {
        sentence_id: annotation.sentence_id.clone(),
        worker_id: annotation.worker_id.clone(),
        target_index: annotation.target_index,
        question: annotation.question.clone(),
        writer_answer: annotation.writer_answer.clone(),
        validator_answers,
        status,
        unvalidated: annotation.judgments.is_empty(),
    }
}

/// True iff the normalized first token is one of the eight wh-words.
pub fn is_wh_question(question: &[String]) -> bool {
    question
        .first()
        .map(|t| WH_WORDS.contains(&normalize_token(t).as_str()))
        .unwrap_or(false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidityViolation {
    /// Criterion 1: the question shares no normalized token with the sentence.
    NoSentenceWord,
    /// Criterion 4 proxy: the question does not begin with a wh-word, which
    /// flags yes/no-question risk. Criteria 2, 3, and 5 are human judgments
    /// and are not checked.
    NotWhInitial,
}

pub fn validity_check(question: &[String], sentence: &Sentence) -> Vec<ValidityViolation> {
    let mut violations = Vec::new();
    let shares_token = question.iter().any(|q| {
        let q = normalize_token(q);
        sentence.tokens.iter().any(|t| normalize_token(t) == q)
    });
    if !shares_token {
        violations.push(ValidityViolation::NoSentenceWord);
    }
    if !is_wh_question(question) {
        violations.push(ValidityViolation::NotWhInitial);
    }
    violations
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FilterOptions {
    /// Questions with fewer judgments than this are dropped; 0 lets
    /// unvalidated questions through.
    pub require_judgments: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitStats {
    pub label: String,
    pub sentences: usize,
    pub qa_pairs: usize,
    pub filtered: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterStats {
    pub total_questions: usize,
    pub valid_both: usize,
    pub wh_pass: usize,
    pub filtered_total: usize,
    pub splits: Vec<SplitStats>,
}

impl FilterStats {
    pub fn valid_rate(&self) -> f64 {
        if self.total_questions == 0 {
            0.0
        } else {
            self.valid_both as f64 / self.total_questions as f64
        }
    }

    /// Share of valid questions that also pass the wh-filter.
    pub fn wh_rate(&self) -> f64 {
        if self.valid_both == 0 {
            0.0
        } else {
            self.wh_pass as f64 / self.valid_both as f64
        }
    }
}

fn keeps(annotation: &RawAnnotation, opts: FilterOptions) -> bool {
    if annotation.judgments.len() < opts.require_judgments {
        return false;
    }
    aggregate(annotation).status == Status::Valid && is_wh_question(&annotation.question)
}

/// Keeps exactly the valid, wh-initial questions, grouped per sentence in
/// corpus order with input order preserved inside each sentence.
pub fn filter_corpus(corpus: &AnnotationCorpus, opts: FilterOptions) -> (Vec<Qamr>, FilterStats) {
    let mut kept: indexmap::IndexMap<&str, Vec<QaPair>> = corpus
        .sentences
        .keys()
        .map(|id| (id.as_str(), Vec::new()))
        .collect();
    let mut valid_both = 0;
    let mut wh_pass = 0;
    for annotation in &corpus.annotations {
        let valid = annotation.judgments.len() >= opts.require_judgments
            && aggregate(annotation).status == Status::Valid;
        if valid {
            valid_both += 1;
            if is_wh_question(&annotation.question) {
                wh_pass += 1;
                kept.get_mut(annotation.sentence_id.as_str())
                    .expect("corpus invariant: sentence resolves")
                    .push(QaPair {
                        sentence_id: annotation.sentence_id.clone(),
                        question: annotation.question.clone(),
                        answer: annotation.writer_answer.clone(),
                    });
            }
        }
    }
    let qamrs: Vec<Qamr> = kept
        .into_iter()
        .filter(|(_, pairs)| !pairs.is_empty())
        .map(|(sentence_id, pairs)| Qamr {
            sentence_id: sentence_id.to_string(),
            pairs,
        })
        .collect();
    let label = corpus.split_label.clone().unwrap_or_else(|| "all".into());
    let stats = FilterStats {
        total_questions: corpus.annotations.len(),
        valid_both,
        wh_pass,
        filtered_total: wh_pass,
        splits: vec![SplitStats {
            label,
            sentences: corpus.sentences.len(),
            qa_pairs: corpus.annotations.len(),
            filtered: wh_pass,
        }],
    };
    (qamrs, stats)
}

/// Keeps only the annotations that survive filtering, as a corpus (sentence
/// inventory retained in full).
pub fn filter_annotations(corpus: &AnnotationCorpus, opts: FilterOptions) -> AnnotationCorpus {
    AnnotationCorpus {
        sentences: corpus.sentences.clone(),
        annotations: corpus
            .annotations
            .iter()
            .filter(|a| keeps(a, opts))
            .cloned()
            .collect(),
        split_label: corpus.split_label.clone(),
    }
}

/// Per-split table over several corpora plus grand totals.
pub fn corpus_stats(corpora: &[&AnnotationCorpus], opts: FilterOptions) -> FilterStats {
    let mut splits = Vec::new();
    let mut total_questions = 0;
    let mut valid_both = 0;
    let mut wh_pass = 0;
    for corpus in corpora {
        let (_, stats) = filter_corpus(corpus, opts);
        total_questions += stats.total_questions;
        valid_both += stats.valid_both;
        wh_pass += stats.wh_pass;
        splits.extend(stats.splits);
    }
    FilterStats {
        total_questions,
        valid_both,
        wh_pass,
        filtered_total: wh_pass,
        splits,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Judgment;
    use indexmap::IndexMap;
    use proptest::prelude::*;

    fn answer(indices: &[usize]) -> AnswerSet {
        AnswerSet::new(indices.iter().copied()).unwrap()
    }

    fn judgment(verdict: Verdict) -> Judgment {
        Judgment {
            validator_id: "v".into(),
            verdict,
        }
    }

    fn annotation(question: &[&str], judgments: Vec<Judgment>) -> RawAnnotation {
        RawAnnotation {
            sentence_id: "s1".into(),
            worker_id: "w".into(),
            target_index: 0,
            question: question.iter().map(|s| s.to_string()).collect(),
            writer_answer: answer(&[0]),
            judgments,
        }
    }

    #[test]
    fn aggregate_both_answers_is_valid() {
        let a = annotation(
            &["Who", "?"],
            vec![
                judgment(Verdict::Answer(answer(&[0]))),
                judgment(Verdict::Answer(answer(&[1]))),
            ],
        );
        let v = aggregate(&a);
        assert_eq!(v.status, Status::Valid);
        assert_eq!(v.validator_answers.len(), 2);
        assert!(!v.unvalidated);
    }

    #[test]
    fn aggregate_either_invalid_wins() {
        let a = annotation(
            &["Who", "?"],
            vec![
                judgment(Verdict::Answer(answer(&[0]))),
                judgment(Verdict::Invalid),
            ],
        );
        assert_eq!(aggregate(&a).status, Status::Invalid);
    }

    #[test]
    fn aggregate_unvalidated_passes_flagged() {
        let a = annotation(&["Who", "?"], vec![]);
        let v = aggregate(&a);
        assert_eq!(v.status, Status::Valid);
        assert!(v.unvalidated);
    }

    #[test]
    fn aggregate_invalid_beats_redundant() {
        let a = annotation(
            &["Who", "?"],
            vec![
                judgment(Verdict::Redundant(None)),
                judgment(Verdict::Invalid),
            ],
        );
        assert_eq!(aggregate(&a).status, Status::Invalid);
    }

    #[test]
    fn wh_question_cases() {
        let q = |s: &str| s.split(' ').map(String::from).collect::<Vec<_>>();
        assert!(is_wh_question(&q("Who will join ?")));
        assert!(!is_wh_question(&q("Did he join ?")));
        assert!(is_wh_question(&q("HOW old is he ?")));
    }

    fn vinken() -> Sentence {
        Sentence::new(
            "s1",
            "Pierre Vinken , 61 years old , will join the board as a nonexecutive director Nov. 29"
                .split(' ')
                .map(String::from)
                .collect(),
        )
    }

    #[test]
    fn validity_check_cases() {
        let s = vinken();
        let q = |s: &str| s.split(' ').map(String::from).collect::<Vec<_>>();
        assert!(validity_check(&q("Who is 61 years old ?"), &s).is_empty());
        assert_eq!(
            validity_check(&q("What happened there ?"), &s),
            vec![ValidityViolation::NoSentenceWord]
        );
        assert_eq!(
            validity_check(&q("Is he old ?"), &s),
            vec![ValidityViolation::NotWhInitial]
        );
    }

    fn corpus_of(annotations: Vec<RawAnnotation>) -> AnnotationCorpus {
        let mut sentences = IndexMap::new();
        let s = vinken();
        sentences.insert(s.id.clone(), s);
        AnnotationCorpus {
            sentences,
            annotations,
            split_label: Some("dev".into()),
        }
    }

    #[test]
    fn filter_keeps_all_when_all_pass() {
        let anns = vec![
            annotation(
                &["Who", "joined", "?"],
                vec![judgment(Verdict::Answer(answer(&[0])))],
            ),
            annotation(
                &["What", "board", "?"],
                vec![judgment(Verdict::Answer(answer(&[9])))],
            ),
        ];
        let corpus = corpus_of(anns);
        let (qamrs, stats) = filter_corpus(&corpus, FilterOptions::default());
        assert_eq!(stats.filtered_total, stats.total_questions);
        assert_eq!(qamrs.len(), 1);
        assert_eq!(qamrs[0].pairs.len(), 2);
    }

    #[test]
    fn filter_is_idempotent() {
        let anns = vec![
            annotation(
                &["Who", "joined", "?"],
                vec![judgment(Verdict::Answer(answer(&[0])))],
            ),
            annotation(
                &["Did", "he", "?"],
                vec![judgment(Verdict::Answer(answer(&[0])))],
            ),
            annotation(&["Who", "?"], vec![judgment(Verdict::Invalid)]),
        ];
        let corpus = corpus_of(anns);
        let opts = FilterOptions::default();
        let once = filter_annotations(&corpus, opts);
        let twice = filter_annotations(&once, opts);
        assert_eq!(once, twice);
        assert_eq!(once.annotations.len(), 1);
    }

    #[test]
    fn require_judgments_drops_unvalidated() {
        let anns = vec![
            annotation(&["Who", "?"], vec![]),
            annotation(&["Who", "?"], vec![judgment(Verdict::Answer(answer(&[0])))]),
        ];
        let corpus = corpus_of(anns);
        let (_, stats) = filter_corpus(
            &corpus,
            FilterOptions {
                require_judgments: 1,
            },
        );
        assert_eq!(stats.filtered_total, 1);
    }

    #[test]
    fn stats_empty_corpus() {
        let corpus = AnnotationCorpus::default();
        let stats = corpus_stats(&[&corpus], FilterOptions::default());
        assert_eq!(stats.total_questions, 0);
        assert_eq!(stats.filtered_total, 0);
        assert_eq!(stats.valid_rate(), 0.0);
    }

    // random-annotation strategy for the property tests
    fn arb_annotation() -> impl Strategy<Value = RawAnnotation> {
        let verdict = prop_oneof![
            Just(Verdict::Invalid),
            Just(Verdict::Redundant(None)),
            proptest::collection::btree_set(0usize..17, 1..4)
                .prop_map(|s| Verdict::Answer(AnswerSet::new(s).unwrap())),
        ];
        let first = prop_oneof![
            Just("Who".to_string()),
            Just("what".to_string()),
            Just("Did".to_string()),
        ];
        (
            first,
            proptest::collection::vec(verdict, 0..3),
            proptest::collection::btree_set(0usize..17, 1..4),
        )
            .prop_map(|(first, verdicts, ans)| RawAnnotation {
                sentence_id: "s1".into(),
                worker_id: "w".into(),
                target_index: 0,
                question: vec![first, "x".into()],
                writer_answer: AnswerSet::new(ans).unwrap(),
                judgments: verdicts
                    .into_iter()
                    .enumerate()
                    .map(|(i, verdict)| Judgment {
                        validator_id: format!("v{i}"),
                        verdict,
                    })
                    .collect(),
            })
    }

    proptest! {
        // filtered_total equals the definitional cross-check count
        #[test]
        fn filtered_total_definition(anns in proptest::collection::vec(arb_annotation(), 0..24)) {
            let corpus = corpus_of(anns);
            let (_, stats) = filter_corpus(&corpus, FilterOptions::default());
            let expected = corpus
                .annotations
                .iter()
                .filter(|a| aggregate(a).status == Status::Valid && is_wh_question(&a.question))
                .count();
            prop_assert_eq!(stats.filtered_total, expected);
            prop_assert!(stats.filtered_total <= stats.valid_both);
            prop_assert!(stats.valid_both <= stats.total_questions);
        }

        // removing a judgment never turns a Valid question Invalid
        #[test]
        fn aggregate_monotone_under_deletion(ann in arb_annotation()) {
            let status = aggregate(&ann).status;
            for i in 0..ann.judgments.len() {
                let mut fewer = ann.clone();
                fewer.judgments.remove(i);
                let smaller = aggregate(&fewer).status;
                if status == Status::Valid {
                    prop_assert_eq!(smaller, Status::Valid);
                }
            }
        }
    }
}
