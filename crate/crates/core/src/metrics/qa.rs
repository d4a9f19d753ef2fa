//! SQuAD-style answer scoring: exact match and token-bag F1 over
//! normalized answer strings, maximum taken over multiple references.

use std::collections::BTreeMap;

/// Lowercases, strips ASCII punctuation characters from every token, and
/// drops tokens that become empty or are articles (a, an, the).
pub fn squad_normalize(tokens: &[String]) -> Vec<String> {
    tokens
        .iter()
        .filter_map(|t| {
            let cleaned: String = t
                .to_lowercase()
                .chars()
                .filter(|c| !c.is_ascii_punctuation())
                .collect();
            if cleaned.is_empty() || matches!(cleaned.as_str(), "a" | "an" | "the") {
                None
            } else {
                Some(cleaned)
            }
        })
        .collect()
}

/// 1 iff the normalized prediction equals some normalized reference.
pub fn answer_em(prediction: &[String], references: &[Vec<String>]) -> u8 {
    let pred = squad_normalize(prediction);
    references.iter().any(|r| squad_normalize(r) == pred).into()
}

fn bag(tokens: &[String]) -> BTreeMap<&str, usize> {
    let mut counts = BTreeMap::new();
    for t in tokens {
        *counts.entry(t.as_str()).or_insert(0) += 1;
    }
    counts
}

fn bag_f1(pred: &[String], gold: &[String]) -> f64 {
    if pred.is_empty() && gold.is_empty() {
        return 1.0;
    }
    if pred.is_empty() || gold.is_empty() {
        return 0.0;
    }
    let pred_bag = bag(pred);
    let gold_bag = bag(gold);
    let common: usize = pred_bag
        .iter()
        .map(|(t, c)| c.min(gold_bag.get(t).unwrap_or(&0)))
        .sum();
    if common == 0 {
        return 0.0;
    }
    let p = common as f64 / pred.len() as f64;
    let r = common as f64 / gold.len() as f64;
    2.0 * p * r / (p + r)
}

/// Token-bag F1 against the best reference.
pub fn answer_f1(prediction: &[String], references: &[Vec<String>]) -> f64 {
    let pred = squad_normalize(prediction);
    references
        .iter()
        .map(|r| bag_f1(&pred, &squad_normalize(r)))
        .fold(0.0, f64::max)
}
