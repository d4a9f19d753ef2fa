//! Concept agreement: greedy one-to-one node matching between an induced
//! graph and a reference graph, scored only on sentence elements.

use crate::ingest::GenericGraph;
use crate::model::Sentence;

use super::{NodeMatchConfig, Prf};

/// Greedy one-to-one node matching under `cfg`, highest quality first with
/// (gold position, predicted position) as the deterministic tie-break.
/// Gold nodes whose content shares no mapped token with the sentence are
/// excluded from the gold total, so relations invented outside the sentence
/// (entity types, normalized dates) do not count against recall.
pub fn concept_agreement(
    gold: &GenericGraph,
    predicted: &GenericGraph,
    sentence: &Sentence,
    cfg: &NodeMatchConfig,
) -> Prf {
    let sentence_tokens: Vec<String> = cfg.map_tokens(&sentence.tokens);
    let gold_nodes: Vec<&Vec<String>> = gold
        .nodes
        .values()
        .filter(|content| {
            content
                .iter()
                .any(|t| sentence_tokens.contains(&cfg.map_token(t)))
        })
        .collect();
    let pred_nodes: Vec<&Vec<String>> = predicted.nodes.values().collect();

    let mut candidates: Vec<(usize, usize, usize)> = Vec::new();
    for (gi, gold_content) in gold_nodes.iter().enumerate() {
        for (pi, pred_content) in pred_nodes.iter().enumerate() {
            let quality = cfg.quality(gold_content, pred_content);
            if quality > 0 {
                candidates.push((quality, gi, pi));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut gold_used = vec![false; gold_nodes.len()];
    let mut pred_used = vec![false; pred_nodes.len()];
    let mut matched = 0;
    for (_, gi, pi) in candidates {
        if !gold_used[gi] && !pred_used[pi] {
            gold_used[gi] = true;
            pred_used[pi] = true;
            matched += 1;
        }
    }
    Prf::new(matched, pred_nodes.len(), gold_nodes.len())
}
