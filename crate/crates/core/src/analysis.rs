//! Corpus analyses: wh-phrase distribution, external phrases, and the
//! "what kind"/"what type" prefix rate.

use indexmap::IndexMap;
use serde::Serialize;

use crate::filter::WH_WORDS;
use crate::model::{normalize_token, Qamr, Sentence};
use crate::stopwords::StopwordSet;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WhDistribution {
    /// Counts in the fixed who/what/when/where/why/how/which/whose order.
    pub counts: Vec<(String, usize)>,
    /// Questions whose first token is none of the eight (zero on a
    /// properly filtered corpus).
    pub other: usize,
    pub total: usize,
}

impl WhDistribution {
    /// Fractions over the wh-initial questions; they sum to 1 when any exist.
    pub fn fractions(&self) -> Vec<(String, f64)> {
        let wh_total: usize = self.counts.iter().map(|(_, c)| c).sum();
        self.counts
            .iter()
            .map(|(w, c)| {
                let f = if wh_total == 0 {
                    0.0
                } else {
                    *c as f64 / wh_total as f64
                };
                (w.clone(), f)
            })
            .collect()
    }
}

pub fn wh_distribution(qamrs: &[Qamr]) -> WhDistribution {
    let mut counts: IndexMap<&str, usize> = WH_WORDS.iter().map(|w| (*w, 0)).collect();
    let mut other = 0;
    let mut total = 0;
    for qamr in qamrs {
        for pair in &qamr.pairs {
            total += 1;
            let first = pair.question.first().map(|t| normalize_token(t));
            match first.as_deref().and_then(|f| counts.get_mut(f)) {
                Some(slot) => *slot += 1,
                None => other += 1,
            }
        }
    }
    WhDistribution {
        counts: counts
            .into_iter()
            .map(|(w, c)| (w.to_string(), c))
            .collect(),
        other,
        total,
    }
}

/// Wh-words whose immediate successor phrase types the answer.
const TYPING_WH: [&str; 4] = ["who", "what", "which", "how"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhraseCount {
    /// Normalized phrase tokens.
    pub phrase: Vec<String>,
    pub count: usize,
    /// Occurrences directly after who/what/which/how.
    pub after_wh: usize,
}

impl PhraseCount {
    /// "after-wh" when the majority of occurrences follow a typing wh-word.
    pub fn category(&self) -> &'static str {
        if self.after_wh * 2 > self.count {
            "after-wh"
        } else {
            "other"
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExternalPhraseReport {
    pub phrases: Vec<PhraseCount>,
    pub unique_phrases: usize,
    pub total_occurrences: usize,
    pub questions_total: usize,
    pub questions_with_external: usize,
    /// Hash of the stopword list the rates depend on.
    pub stopword_sha256: String,
}

impl ExternalPhraseReport {
    pub fn rate(&self) -> f64 {
        if self.questions_total == 0 {
            0.0
        } else {
            self.questions_with_external as f64 / self.questions_total as f64
        }
    }

    /// Top `k` phrases by count, ties broken alphabetically.
    pub fn top(&self, k: usize) -> Vec<&PhraseCount> {
        let mut sorted: Vec<&PhraseCount> = self.phrases.iter().collect();
        sorted.sort_by(|a, b| b.count.cmp(&a.count).then(a.phrase.cmp(&b.phrase)));
        sorted.truncate(k);
        sorted
    }
}

/// Maximal runs of question tokens that occur nowhere in the sentence
/// (normalized) and are neither stopwords nor pure punctuation.
pub fn external_phrases(
    qamrs: &[Qamr],
    sentences: &IndexMap<String, Sentence>,
    stopwords: &StopwordSet,
) -> ExternalPhraseReport {
    let mut phrases: IndexMap<Vec<String>, PhraseCount> = IndexMap::new();
    let mut questions_total = 0;
    let mut questions_with_external = 0;
    let mut total_occurrences = 0;
    for qamr in qamrs {
        let sentence_tokens: Vec<String> = sentences
            .get(&qamr.sentence_id)
            .map(|s| s.tokens.iter().map(|t| normalize_token(t)).collect())
            .unwrap_or_default();
        for pair in &qamr.pairs {
            questions_total += 1;
            let mut found_any = false;
            let mut run: Vec<String> = Vec::new();
            let mut run_start = 0;
            let normalized: Vec<String> =
                pair.question.iter().map(|t| normalize_token(t)).collect();
            for (i, token) in normalized.iter().enumerate() {
                let external =
                    !sentence_tokens.contains(token) && !stopwords.is_skippable(&pair.question[i]);
                if external {
                    if run.is_empty() {
                        run_start = i;
                    }
                    run.push(token.clone());
                } else if !run.is_empty() {
                    record_phrase(
                        &mut phrases,
                        std::mem::take(&mut run),
                        run_start,
                        &normalized,
                    );
                    found_any = true;
                    total_occurrences += 1;
                }
            }
            if !run.is_empty() {
                record_phrase(&mut phrases, run, run_start, &normalized);
                found_any = true;
                total_occurrences += 1;
            }
            if found_any {
                questions_with_external += 1;
            }
        }
    }
    ExternalPhraseReport {
        unique_phrases: phrases.len(),
        phrases: phrases.into_values().collect(),
        total_occurrences,
        questions_total,
        questions_with_external,
        stopword_sha256: stopwords.sha256().to_string(),
    }
}

fn record_phrase(
    phrases: &mut IndexMap<Vec<String>, PhraseCount>,
    run: Vec<String>,
    run_start: usize,
    question: &[String],
) {
    let after_wh = run_start > 0 && TYPING_WH.contains(&question[run_start - 1].as_str());
    let entry = phrases.entry(run.clone()).or_insert_with(|| PhraseCount {
        phrase: run,
        count: 0,
        after_wh: 0,
    });
    entry.count += 1;
    if after_wh {
        entry.after_wh += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WhatKindRate {
    pub matching: usize,
    pub total: usize,
}

impl WhatKindRate {
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.matching as f64 / self.total as f64
        }
    }

    pub fn empty_denominator(&self) -> bool {
        self.total == 0
    }
}

/// Fraction of questions beginning "what kind" or "what type".
pub fn what_kind_rate(qamrs: &[Qamr]) -> WhatKindRate {
    let mut matching = 0;
    let mut total = 0;
    for qamr in qamrs {
        for pair in &qamr.pairs {
            total += 1;
            let two: Vec<String> = pair
                .question
                .iter()
                .take(2)
                .map(|t| normalize_token(t))
                .collect();
            if two == ["what", "kind"] || two == ["what", "type"] {
                matching += 1;
            }
        }
    }
    WhatKindRate { matching, total }
}
