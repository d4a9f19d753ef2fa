//! Scoring: concept agreement, unlabeled SMATCH, SRL-arc alignment and
//! recall curves, and QA/QG evaluation measures.

pub mod bleu;
pub mod concept;
pub mod qa;
pub mod smatch;
pub mod srl;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::model::normalize_token;

/// Precision/recall/F1 with the raw counts they were computed from.
///
/// Zero-denominator convention: precision is 1.0 when nothing was predicted
/// and nothing matched; recall analogously; F1 is 0 when P + R = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Prf {
    pub matched: usize,
    pub predicted_total: usize,
    pub gold_total: usize,
}

impl Prf {
    pub fn new(matched: usize, predicted_total: usize, gold_total: usize) -> Self {
        debug_assert!(matched <= predicted_total || predicted_total == 0);
        Prf {
            matched,
            predicted_total,
            gold_total,
        }
    }

    pub fn precision(&self) -> f64 {
        if self.predicted_total == 0 {
            1.0
        } else {
            self.matched as f64 / self.predicted_total as f64
        }
    }

    pub fn recall(&self) -> f64 {
        if self.gold_total == 0 {
            1.0
        } else {
            self.matched as f64 / self.gold_total as f64
        }
    }

    pub fn f1(&self) -> f64 {
        let p = self.precision();
        let r = self.recall();
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    /// The same counts read in the opposite direction.
    pub fn swapped(&self) -> Prf {
        Prf {
            matched: self.matched,
            predicted_total: self.gold_total,
            gold_total: self.predicted_total,
        }
    }
}

impl std::fmt::Display for Prf {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "P={:.4} R={:.4} F1={:.4} (matched={} predicted={} gold={})",
            self.precision(),
            self.recall(),
            self.f1(),
            self.matched,
            self.predicted_total,
            self.gold_total
        )
    }
}

/// How two nodes' contents are considered equivalent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatchMode {
    /// Case-folded equality of the head (rightmost) content token.
    #[default]
    Surface,
    /// Any shared normalized token between the content bags.
    ContentOverlap,
}

/// Node equivalence configuration; the lemma table is an injection point for
/// surface-to-lemma mappings supplied by the user.
#[derive(Debug, Clone, Default)]
pub struct NodeMatchConfig {
    pub mode: MatchMode,
    pub lemma_table: Option<BTreeMap<String, String>>,
}

impl NodeMatchConfig {
    /// Normalizes and lemma-maps a token.
    pub fn map_token(&self, token: &str) -> String {
        let norm = normalize_token(token);
        match &self.lemma_table {
            Some(table) => table.get(&norm).cloned().unwrap_or(norm),
            None => norm,
        }
    }

    pub fn map_tokens(&self, tokens: &[String]) -> Vec<String> {
        tokens.iter().map(|t| self.map_token(t)).collect()
    }

    /// Match quality between two content bags: 0 means no match. Under
    /// Surface mode this is 1 iff the mapped head tokens are equal; under
    /// ContentOverlap it is the shared-token count.
    pub fn quality(&self, a: &[String], b: &[String]) -> usize {
        match self.mode {
            MatchMode::Surface => {
                let ha = a.last().map(|t| self.map_token(t));
                let hb = b.last().map(|t| self.map_token(t));
                usize::from(ha.is_some() && ha == hb)
            }
            MatchMode::ContentOverlap => {
                let mapped_b: Vec<String> = self.map_tokens(b);
                self.map_tokens(a)
                    .iter()
                    .filter(|t| mapped_b.contains(t))
                    .count()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prf_zero_denominators() {
        let nothing = Prf::new(0, 0, 5);
        assert_eq!(nothing.precision(), 1.0);
        assert_eq!(nothing.recall(), 0.0);
        assert_eq!(nothing.f1(), 0.0);
        let empty = Prf::new(0, 0, 0);
        assert_eq!(empty.f1(), 1.0);
    }

    #[test]
    fn prf_arithmetic() {
        let prf = Prf::new(2, 2, 4);
        assert_eq!(prf.precision(), 1.0);
        assert_eq!(prf.recall(), 0.5);
        assert!((prf.f1() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn lemma_mapping() {
        let mut table = BTreeMap::new();
        table.insert("join-01".to_string(), "join".to_string());
        let cfg = NodeMatchConfig {
            mode: MatchMode::Surface,
            lemma_table: Some(table),
        };
        assert_eq!(cfg.map_token("Join-01"), "join");
        assert_eq!(cfg.quality(&["join-01".into()], &["join".into()]), 1);
    }

    #[test]
    fn content_overlap_quality() {
        let cfg = NodeMatchConfig {
            mode: MatchMode::ContentOverlap,
            lemma_table: None,
        };
        let a = vec!["the".to_string(), "Board".to_string()];
        let b = vec!["board".to_string(), "room".to_string()];
        assert_eq!(cfg.quality(&a, &b), 1);
        assert_eq!(cfg.quality(&a, &["x".to_string()]), 0);
    }
}
