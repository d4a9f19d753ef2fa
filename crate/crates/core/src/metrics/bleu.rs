//! Multi-BLEU (mean of BLEU-1..4) for question similarity, and the fuzzy
//! question-generation P/R scorer built on it.

use crate::model::normalize_token;

use super::Prf;

const MAX_ORDER: usize = 4;

fn ngram_counts(tokens: &[String], order: usize) -> Vec<(&[String], usize)> {
    let mut counts: Vec<(&[String], usize)> = Vec::new();
    if tokens.len() < order {
        return counts;
    }
    for gram in tokens.windows(order) {
        match counts.iter_mut().find(|(g, _)| *g == gram) {
            Some((_, c)) => *c += 1,
            None => counts.push((gram, 1)),
        }
    }
    counts
}

/// Clipped n-gram precision; 0/0 counts as 0 for orders the candidate is
/// too short to fill.
fn modified_precision(candidate: &[String], reference: &[String], order: usize) -> f64 {
    let cand_counts = ngram_counts(candidate, order);
    let total: usize = cand_counts.iter().map(|(_, c)| *c).sum();
    if total == 0 {
        return 0.0;
    }
    let ref_counts = ngram_counts(reference, order);
    let clipped: usize = cand_counts
        .iter()
        .map(|(gram, c)| {
            let allowed = ref_counts
                .iter()
                .find(|(g, _)| g == gram)
                .map(|(_, rc)| *rc)
                .unwrap_or(0);
            (*c).min(allowed)
        })
        .sum();
    clipped as f64 / total as f64
}

/// Arithmetic mean of the BLEU-1..4 scores, each the brevity-penalized
/// geometric mean of the clipped n-gram precisions up to its order.
/// Tokens are case-folded before matching.
pub fn multi_bleu(candidate: &[String], reference: &[String]) -> f64 {
    let candidate: Vec<String> = candidate.iter().map(|t| normalize_token(t)).collect();
    let reference: Vec<String> = reference.iter().map(|t| normalize_token(t)).collect();
    if candidate.is_empty() {
        return 0.0;
    }
    let c = candidate.len() as f64;
    let r = reference.len() as f64;
    let brevity_penalty = if c < r { (1.0 - r / c).exp() } else { 1.0 };
    let precisions: Vec<f64> = (1..=MAX_ORDER)
        .map(|order| modified_precision(&candidate, &reference, order))
        .collect();
    let mut sum = 0.0;
    for order in 1..=MAX_ORDER {
        let bleu_k = if precisions[..order].contains(&0.0) {
            0.0
        } else {
            let log_mean = precisions[..order].iter().map(|p| p.ln()).sum::<f64>() / order as f64;
            brevity_penalty * log_mean.exp()
        };
        sum += bleu_k;
    }
    sum / MAX_ORDER as f64
}

/// Greedy one-to-one question matching. Below threshold 1.0 a predicted
/// question matches a gold one when `multi_bleu > threshold`; at exactly
/// 1.0 the matcher switches to exact normalized string equality.
pub fn qg_pr(predicted: &[Vec<String>], gold: &[Vec<String>], threshold: f64) -> Prf {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (pi, pred) in predicted.iter().enumerate() {
        for (gi, gold_q) in gold.iter().enumerate() {
            if threshold >= 1.0 {
                let p: Vec<String> = pred.iter().map(|t| normalize_token(t)).collect();
                let g: Vec<String> = gold_q.iter().map(|t| normalize_token(t)).collect();
                if p == g {
                    candidates.push((1.0, pi, gi));
                }
            } else {
                let score = multi_bleu(pred, gold_q);
                if score > threshold {
                    candidates.push((score, pi, gi));
                }
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .expect("scores are finite")
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let mut pred_used = vec![false; predicted.len()];
    let mut gold_used = vec![false; gold.len()];
    let mut matched = 0;
    for (_, pi, gi) in candidates {
        if !pred_used[pi] && !gold_used[gi] {
            pred_used[pi] = true;
            gold_used[gi] = true;
            matched += 1;
        }
    }
    Prf::new(matched, predicted.len(), gold.len())
}
