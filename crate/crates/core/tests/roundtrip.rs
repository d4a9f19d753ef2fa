//! Property tests for the on-disk formats over randomly generated corpora.

use proptest::prelude::*;

use qamr::ingest::{
    read_canonical, read_graph_triples, write_canonical, write_graph_triples, AnnotationCorpus,
    GenericGraph, GraphEdge,
};
use qamr::model::{AnswerSet, Judgment, RawAnnotation, Sentence, Verdict};

fn arb_corpus() -> impl Strategy<Value = AnnotationCorpus> {
    let token = prop_oneof![
        Just("Pierre".to_string()),
        Just("board".to_string()),
        Just("61".to_string()),
        Just("Nov.".to_string()),
        Just("'s".to_string()),
        Just("?".to_string()),
    ];
    let sentences = proptest::collection::vec(
        proptest::collection::vec(token.clone(), 2..8),
        1..4,
    )
    .prop_map(|tokenlists| {
        tokenlists
            .into_iter()
            .enumerate()
            .map(|(i, tokens)| Sentence::new(format!("s{i}"), tokens))
            .collect::<Vec<_>>()
    });
    let split = prop_oneof![
        Just(None),
        Just(Some("train".to_string())),
        Just(Some("ptb".to_string())),
    ];
    (sentences, split, proptest::collection::vec(0usize..1000, 0..12)).prop_perturb(
        |(sentences, split, seeds), mut rng| {
            let mut corpus = AnnotationCorpus {
                sentences: sentences
                    .iter()
                    .map(|s| (s.id.clone(), s.clone()))
                    .collect(),
                annotations: Vec::new(),
                split_label: split,
            };
            for seed in seeds {
                let sentence = &sentences[seed % sentences.len()];
                let len = sentence.len();
                let answer = AnswerSet::new([rng.gen_range(0..len)]).unwrap();
                let judgments = (0..rng.gen_range(0..3usize))
                    .map(|v| {
                        let verdict = match rng.gen_range(0..4) {
                            0 => Verdict::Invalid,
                            1 => Verdict::Redundant(None),
                            2 => Verdict::Redundant(Some(format!("q{}", rng.gen_range(0..9)))),
                            _ => Verdict::Answer(
                                AnswerSet::new([rng.gen_range(0..len)]).unwrap(),
                            ),
                        };
                        Judgment {
                            validator_id: format!("v{v}"),
                            verdict,
                        }
                    })
                    .collect();
                corpus.annotations.push(RawAnnotation {
                    sentence_id: sentence.id.clone(),
                    worker_id: format!("w{}", rng.gen_range(0..4)),
                    target_index: rng.gen_range(0..len),
                    question: vec!["Who".into(), sentence.tokens[0].clone(), "?".into()],
                    writer_answer: answer,
                    judgments,
                });
            }
            corpus
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn canonical_write_read_is_identity(corpus in arb_corpus()) {
        let mut bytes = Vec::new();
        write_canonical(&corpus, &mut bytes).unwrap();
        let reread = read_canonical(std::io::Cursor::new(&bytes)).unwrap();
        prop_assert_eq!(&corpus, &reread);

        // a second trip produces identical bytes as well
        let mut again = Vec::new();
        write_canonical(&reread, &mut again).unwrap();
        prop_assert_eq!(bytes, again);
    }
}

fn arb_graph() -> impl Strategy<Value = GenericGraph> {
    let content = prop_oneof![
        Just(vec![]),
        Just(vec!["join".to_string()]),
        Just(vec!["the".to_string(), "board".to_string()]),
    ];
    proptest::collection::vec(content, 1..6).prop_perturb(|contents, mut rng| {
        let mut graph = GenericGraph::default();
        for (i, content) in contents.iter().enumerate() {
            graph.nodes.insert(format!("n{i}"), content.clone());
        }
        let n = contents.len();
        for _ in 0..rng.gen_range(0..n * 2) {
            let from = format!("n{}", rng.gen_range(0..n));
            let to = format!("n{}", rng.gen_range(0..n));
            let label = if rng.gen_bool(0.5) {
                String::new()
            } else {
                "What will he join ?".to_string()
            };
            if !graph
                .edges
                .iter()
                .any(|e| e.from == from && e.to == to && e.label == label)
            {
                graph.edges.push(GraphEdge { from, to, label });
            }
        }
        if rng.gen_bool(0.5) {
            graph.root = Some(format!("n{}", rng.gen_range(0..n)));
        }
        graph
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn triples_write_read_is_identity(graph in arb_graph()) {
        let mut bytes = Vec::new();
        write_graph_triples(&graph, &mut bytes).unwrap();
        let reread = read_graph_triples(std::io::Cursor::new(&bytes)).unwrap();
        prop_assert_eq!(graph, reread);
    }
}
