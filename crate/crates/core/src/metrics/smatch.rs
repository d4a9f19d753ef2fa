//! Unlabeled SMATCH: maximum triple-overlap F1 over one-to-one node
//! mappings, searched by restarted hill-climbing, plus the brute-force
//! exact oracle used to test the climber.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ingest::GenericGraph;

use super::{NodeMatchConfig, Prf};

#[derive(Debug, Error)]
pub enum SmatchError {
    #[error("graph has {nodes} nodes, budget is {budget}")]
    NodeBudgetExceeded { nodes: usize, budget: usize },
    #[error("exact search needs min(node counts) <= {limit}, got {nodes}")]
    SizeExceeded { nodes: usize, limit: usize },
}

#[derive(Debug, Clone)]
pub struct SmatchOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Count instance triples alongside relation triples (default on).
    pub include_instances: bool,
    pub node_budget: usize,
    pub match_cfg: NodeMatchConfig,
}

impl Default for SmatchOptions {
    fn default() -> Self {
        SmatchOptions {
            restarts: 16,
            seed: 0,
            include_instances: true,
            node_budget: 256,
            match_cfg: NodeMatchConfig::default(),
        }
    }
}

const EXACT_LIMIT: usize = 8;

/// Triples of one graph: an instance triple per node and a rel(from, to)
/// triple per edge with the label dropped. Rel triples form a multiset
/// since differently-labeled edges collapse onto the same pair.
struct TripleSet<'g> {
    contents: Vec<&'g Vec<String>>,
    rels: Vec<((usize, usize), usize)>,
    rel_total: usize,
}

impl<'g> TripleSet<'g> {
    fn build(graph: &'g GenericGraph) -> Self {
        let contents: Vec<&Vec<String>> = graph.nodes.values().collect();
        let index_of = |id: &str| {
            graph
                .nodes
                .get_index_of(id)
                .expect("edge endpoints resolve")
        };
        let mut rels: Vec<((usize, usize), usize)> = Vec::new();
        for edge in &graph.edges {
            let key = (index_of(&edge.from), index_of(&edge.to));
            match rels.iter_mut().find(|(k, _)| *k == key) {
                Some((_, count)) => *count += 1,
                None => rels.push((key, 1)),
            }
        }
        let rel_total = graph.edges.len();
        TripleSet {
            contents,
            rels,
            rel_total,
        }
    }

    fn len(&self) -> usize {
        self.contents.len()
    }

    fn rel_count(&self, key: (usize, usize)) -> usize {
        self.rels
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, c)| *c)
            .unwrap_or(0)
    }
}

fn contents_match(cfg: &NodeMatchConfig, a: &[String], b: &[String]) -> bool {
    if a.is_empty() && b.is_empty() {
        return true;
    }
    cfg.quality(a, b) > 0
}

/// Matched triple count attained by `mapping` (g1 index -> g2 index).
fn matched_count(
    mapping: &[Option<usize>],
    t1: &TripleSet,
    t2: &TripleSet,
    cfg: &NodeMatchConfig,
    include_instances: bool,
) -> usize {
    let mut matched = 0;
    if include_instances {
        for (i, &m) in mapping.iter().enumerate() {
            if let Some(j) = m {
                if contents_match(cfg, t1.contents[i], t2.contents[j]) {
                    matched += 1;
                }
            }
        }
    }
    for &((a, b), count) in &t1.rels {
        if let (Some(ma), Some(mb)) = (mapping[a], mapping[b]) {
            matched += count.min(t2.rel_count((ma, mb)));
        }
    }
    matched
}

fn prf_for(matched: usize, t1: &TripleSet, t2: &TripleSet, include_instances: bool) -> Prf {
    let inst = |t: &TripleSet| if include_instances { t.len() } else { 0 };
    Prf::new(matched, inst(t1) + t1.rel_total, inst(t2) + t2.rel_total)
}

/// Content-quality greedy start: best-matching pairs first, remaining nodes
/// filled in index order. On identical graphs this is the identity mapping.
fn greedy_mapping(t1: &TripleSet, t2: &TripleSet, cfg: &NodeMatchConfig) -> Vec<Option<usize>> {
    let mut candidates: Vec<(usize, usize, usize)> = Vec::new();
    for (i, a) in t1.contents.iter().enumerate() {
        for (j, b) in t2.contents.iter().enumerate() {
            let quality = if a.is_empty() && b.is_empty() {
                1
            } else {
                cfg.quality(a, b)
            };
            if quality > 0 {
                candidates.push((quality, i, j));
            }
        }
    }
    candidates.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut mapping = vec![None; t1.len()];
    let mut used = vec![false; t2.len()];
    for (_, i, j) in candidates {
        if mapping[i].is_none() && !used[j] {
            mapping[i] = Some(j);
            used[j] = true;
        }
    }
    let mut free: Vec<usize> = (0..t2.len()).filter(|&j| !used[j]).collect();
    for slot in mapping.iter_mut() {
        if slot.is_none() {
            if let Some(j) = free.first().copied() {
                *slot = Some(j);
                free.remove(0);
            }
        }
    }
    mapping
}

fn random_mapping(n1: usize, n2: usize, rng: &mut ChaCha8Rng) -> Vec<Option<usize>> {
    let mut targets: Vec<usize> = (0..n2).collect();
    targets.shuffle(rng);
    let mut sources: Vec<usize> = (0..n1).collect();
    sources.shuffle(rng);
    let mut mapping = vec![None; n1];
    for (k, &i) in sources.iter().enumerate() {
        mapping[i] = targets.get(k).copied();
    }
    mapping
}

/// Repeatedly applies the best single reassignment or swap until no move
/// improves the matched-triple count.
fn hill_climb(
    mapping: &mut Vec<Option<usize>>,
    t1: &TripleSet,
    t2: &TripleSet,
    cfg: &NodeMatchConfig,
    include_instances: bool,
) -> usize {
    let n1 = t1.len();
    let n2 = t2.len();
    let mut current = matched_count(mapping, t1, t2, cfg, include_instances);
    loop {
        let mut best_gain = 0usize;
        let mut best_move: Option<Vec<Option<usize>>> = None;
        let mut used = vec![false; n2];
        for m in mapping.iter().flatten() {
            used[*m] = true;
        }
        // reassign node i to a free target
        let free: Vec<usize> = (0..n2).filter(|&j| !used[j]).collect();
        for i in 0..n1 {
            for &j in &free {
                let previous = mapping[i];
                mapping[i] = Some(j);
                let score = matched_count(mapping, t1, t2, cfg, include_instances);
                mapping[i] = previous;
                if score > current + best_gain {
                    best_gain = score - current;
                    let mut next = mapping.clone();
                    next[i] = Some(j);
                    best_move = Some(next);
                }
            }
        }
        // swap the targets of two nodes
        for i in 0..n1 {
            for k in i + 1..n1 {
                if mapping[i] == mapping[k] {
                    continue;
                }
                mapping.swap(i, k);
                let score = matched_count(mapping, t1, t2, cfg, include_instances);
                mapping.swap(i, k);
                if score > current + best_gain {
                    best_gain = score - current;
                    let mut next = mapping.clone();
                    next.swap(i, k);
                    best_move = Some(next);
                }
            }
        }
        match best_move {
            Some(next) => {
                *mapping = next;
                current += best_gain;
            }
            None => return current,
        }
    }
}

fn check_budget(graph: &GenericGraph, budget: usize) -> Result<(), SmatchError> {
    if graph.node_count() > budget {
        return Err(SmatchError::NodeBudgetExceeded {
            nodes: graph.node_count(),
            budget,
        });
    }
    Ok(())
}

/// Hill-climbing unlabeled SMATCH with one greedy start plus
/// `restarts - 1` seeded random starts (per-restart seed = seed + i).
/// Also returns the node mapping attaining the reported score, for audit.
pub fn unlabeled_smatch_with_mapping(
    g1: &GenericGraph,
    g2: &GenericGraph,
    opts: &SmatchOptions,
) -> Result<(Prf, Vec<(String, String)>), SmatchError> {
    check_budget(g1, opts.node_budget)?;
    check_budget(g2, opts.node_budget)?;
    let t1 = TripleSet::build(g1);
    let t2 = TripleSet::build(g2);

    let mut best_mapping = greedy_mapping(&t1, &t2, &opts.match_cfg);
    let mut best = hill_climb(
        &mut best_mapping,
        &t1,
        &t2,
        &opts.match_cfg,
        opts.include_instances,
    );
    for restart in 1..opts.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(restart as u64));
        let mut mapping = random_mapping(t1.len(), t2.len(), &mut rng);
        let score = hill_climb(
            &mut mapping,
            &t1,
            &t2,
            &opts.match_cfg,
            opts.include_instances,
        );
        if score > best {
            best = score;
            best_mapping = mapping;
        }
    }

    let names: Vec<(String, String)> = best_mapping
        .iter()
        .enumerate()
        .filter_map(|(i, m)| {
            m.map(|j| {
                (
                    g1.nodes.get_index(i).unwrap().0.clone(),
                    g2.nodes.get_index(j).unwrap().0.clone(),
                )
            })
        })
        .collect();
    Ok((prf_for(best, &t1, &t2, opts.include_instances), names))
}

pub fn unlabeled_smatch(
    g1: &GenericGraph,
    g2: &GenericGraph,
    opts: &SmatchOptions,
) -> Result<Prf, SmatchError> {
    unlabeled_smatch_with_mapping(g1, g2, opts).map(|(prf, _)| prf)
}

/// Exact maximum over all one-to-one mappings; the testing oracle for the
/// hill climber. Requires `min(node counts) <= 8`.
pub fn smatch_exact(
    g1: &GenericGraph,
    g2: &GenericGraph,
    opts: &SmatchOptions,
) -> Result<Prf, SmatchError> {
    let (n1, n2) = (g1.node_count(), g2.node_count());
    if n1.min(n2) > EXACT_LIMIT {
        return Err(SmatchError::SizeExceeded {
            nodes: n1.min(n2),
            limit: EXACT_LIMIT,
        });
    }
    if n1 > n2 {
        // enumerate from the smaller side; counts swap with the direction
        return smatch_exact(g2, g1, opts).map(|prf| prf.swapped());
    }
    let t1 = TripleSet::build(g1);
    let t2 = TripleSet::build(g2);
    if n1 == 0 {
        return Ok(prf_for(0, &t1, &t2, opts.include_instances));
    }
    let mut best = 0;
    let mut stack: Vec<(Vec<Option<usize>>, Vec<bool>, usize)> =
        vec![(vec![None; n1], vec![false; n2], 0)];
    while let Some((mapping, used, depth)) = stack.pop() {
        if depth == n1 {
            best = best.max(matched_count(
                &mapping,
                &t1,
                &t2,
                &opts.match_cfg,
                opts.include_instances,
            ));
            continue;
        }
        for j in 0..n2 {
            if used[j] {
                continue;
            }
            let mut next_mapping = mapping.clone();
            let mut next_used = used.clone();
            next_mapping[depth] = Some(j);
            next_used[j] = true;
            stack.push((next_mapping, next_used, depth + 1));
        }
        // matched counts are monotone in mapping extension, so full
        // assignments dominate partial ones and unmapped slots need no branch
    }
    Ok(prf_for(best, &t1, &t2, opts.include_instances))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::read_graph_triples;
    use rand::Rng;
    use std::io::Cursor;

    fn graph(text: &str) -> GenericGraph {
        read_graph_triples(Cursor::new(text)).unwrap()
    }

    #[test]
    fn identity_is_perfect() {
        let g =
            graph("node a join\nnode b Pierre\nnode c board\nedge a b who ?\nedge a c what ?\n");
        let prf = unlabeled_smatch(&g, &g, &SmatchOptions::default()).unwrap();
        assert_eq!(prf.f1(), 1.0);
    }

    #[test]
    fn disjoint_contents_score_zero() {
        let g1 = graph("node a alpha\nnode b beta\n");
        let g2 = graph("node x gamma\nnode y delta\n");
        let prf = unlabeled_smatch(&g1, &g2, &SmatchOptions::default()).unwrap();
        assert_eq!(prf.f1(), 0.0);
    }

    #[test]
    fn single_node_same_content() {
        let g1 = graph("node a join\n");
        let g2 = graph("node z join\n");
        let prf = smatch_exact(&g1, &g2, &SmatchOptions::default()).unwrap();
        assert_eq!(prf.f1(), 1.0);
    }

    #[test]
    fn labels_are_ignored() {
        let g1 = graph("node a x\nnode b y\nedge a b some label\n");
        let g2 = graph("node a x\nnode b y\nedge a b a very different label\n");
        let prf = unlabeled_smatch(&g1, &g2, &SmatchOptions::default()).unwrap();
        assert_eq!(prf.f1(), 1.0);
    }

    #[test]
    fn reported_mapping_attains_score() {
        let g1 = graph("node a x\nnode b y\nnode c z\nedge a b l1\nedge b c l2\n");
        let g2 = graph("node p y\nnode q x\nnode r z\nedge q p m1\nedge p r m2\n");
        let opts = SmatchOptions::default();
        let (prf, mapping) = unlabeled_smatch_with_mapping(&g1, &g2, &opts).unwrap();
        // recompute the matched count from the emitted mapping
        let t1 = TripleSet::build(&g1);
        let t2 = TripleSet::build(&g2);
        let mut as_indices = vec![None; g1.node_count()];
        for (a, b) in &mapping {
            as_indices[g1.nodes.get_index_of(a.as_str()).unwrap()] =
                Some(g2.nodes.get_index_of(b.as_str()).unwrap());
        }
        let recount = matched_count(&as_indices, &t1, &t2, &opts.match_cfg, true);
        assert_eq!(recount, prf.matched);
        assert_eq!(prf.f1(), 1.0);
    }

    #[test]
    fn budget_enforced() {
        let g = graph("node a x\nnode b y\n");
        let opts = SmatchOptions {
            node_budget: 1,
            ..SmatchOptions::default()
        };
        assert!(matches!(
            unlabeled_smatch(&g, &g, &opts),
            Err(SmatchError::NodeBudgetExceeded { .. })
        ));
    }

    pub(crate) fn random_graph(rng: &mut ChaCha8Rng, nodes: usize, vocab: &[&str]) -> GenericGraph {
        let mut text = String::new();
        for i in 0..nodes {
            let word = vocab[rng.gen_range(0..vocab.len())];
            text.push_str(&format!("node n{i} {word}\n"));
        }
        let edges = rng.gen_range(0..=nodes * 2);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..edges {
            let a = rng.gen_range(0..nodes);
            let b = rng.gen_range(0..nodes);
            if a != b && seen.insert((a, b)) {
                text.push_str(&format!("edge n{a} n{b} l\n"));
            }
        }
        graph(&text)
    }

    #[test]
    fn climber_never_exceeds_oracle() {
        let vocab = ["red", "fox", "dog", "run", "old"];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let opts = SmatchOptions::default();
        for trial in 0..50 {
            let g1 = random_graph(&mut rng, 4, &vocab);
            let g2 = random_graph(&mut rng, 5, &vocab);
            let opts = SmatchOptions {
                seed: trial,
                ..opts.clone()
            };
            let climbed = unlabeled_smatch(&g1, &g2, &opts).unwrap();
            let exact = smatch_exact(&g1, &g2, &opts).unwrap();
            assert!(climbed.matched <= exact.matched);
        }
    }

    #[test]
    fn exact_swap_symmetry() {
        let vocab = ["a", "b", "c"];
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let opts = SmatchOptions::default();
        for _ in 0..20 {
            let g1 = random_graph(&mut rng, 3, &vocab);
            let g2 = random_graph(&mut rng, 4, &vocab);
            let fwd = smatch_exact(&g1, &g2, &opts).unwrap();
            let rev = smatch_exact(&g2, &g1, &opts).unwrap();
            assert_eq!(fwd.matched, rev.matched);
            assert_eq!(fwd.precision(), rev.recall());
            assert_eq!(fwd.recall(), rev.precision());
        }
    }
}
