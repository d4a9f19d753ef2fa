//! `induce` and `score-graph`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use qamr::filter::filter_corpus;
use qamr::induce::{induce_graph, EmptyEdgeOrder, InduceOptions};
use qamr::ingest::{read_graph_triples, write_graph_triples};
use qamr::metrics::concept::concept_agreement;
use qamr::metrics::smatch::{unlabeled_smatch_with_mapping, SmatchOptions};
use qamr::metrics::{MatchMode, NodeMatchConfig, Prf};
use qamr::Qamr;

use crate::report::Report;

use super::{filter_options, load_stopwords, open, read_corpus};

#[derive(Clone, Copy, ValueEnum)]
pub enum EmptyOrderArg {
    AfterLabeled,
    Interleaved,
}

#[derive(Args)]
pub struct InduceArgs {
    /// Canonical corpus
    #[arg(long = "in")]
    input: PathBuf,
    /// Triple-format graph output; multi-sentence corpora are emitted as
    /// blocks separated by `# sentence <id>` comments
    #[arg(long)]
    out: PathBuf,
    /// Skip judgment aggregation and the wh-filter
    #[arg(long)]
    no_filter: bool,
    #[arg(long, default_value_t = 0)]
    require_judgments: usize,
    #[arg(long, value_enum, default_value = "after-labeled")]
    empty_edge_order: EmptyOrderArg,
    /// Override the bundled stopword list
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Print a human-readable tree per sentence after the report
    #[arg(long)]
    pretty: bool,
}

pub fn induce(args: InduceArgs, jobs: usize) -> Result<()> {
    let mut report = Report::new("induce");
    report.config("no-filter", args.no_filter);
    report.config("require-judgments", args.require_judgments);
    report.config(
        "empty-edge-order",
        match args.empty_edge_order {
            EmptyOrderArg::AfterLabeled => "after-labeled",
            EmptyOrderArg::Interleaved => "interleaved",
        },
    );
    report.config("jobs", jobs);
    report.input(&args.input)?;
    if let Some(path) = &args.stopwords {
        report.input(path)?;
    }

    let corpus = read_corpus(&args.input)?;
    let stopwords = load_stopwords(args.stopwords.as_deref())?;
    report.config("stopwords-sha256", stopwords.sha256());
    let qamrs: Vec<Qamr> = if args.no_filter {
        super::unfiltered_qamrs(&corpus)
    } else {
        filter_corpus(&corpus, filter_options(args.require_judgments)).0
    };

    let opts = InduceOptions {
        stopwords,
        empty_edge_order: match args.empty_edge_order {
            EmptyOrderArg::AfterLabeled => EmptyEdgeOrder::AfterLabeled,
            EmptyOrderArg::Interleaved => EmptyEdgeOrder::Interleaved,
        },
    };

    // parallel per sentence, merged back in input order
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .context("building worker pool")?;
    let graphs: Vec<_> = pool.install(|| {
        use rayon::prelude::*;
        qamrs
            .par_iter()
            .map(|qamr| {
                let sentence = corpus
                    .sentences
                    .get(&qamr.sentence_id)
                    .expect("corpus invariant: sentence resolves");
                (
                    qamr.sentence_id.clone(),
                    induce_graph(sentence, qamr, &opts),
                )
            })
            .collect()
    });

    let out =
        File::create(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    let mut out = BufWriter::new(out);
    for (i, (sentence_id, graph)) in graphs.iter().enumerate() {
        if graphs.len() > 1 {
            if i > 0 {
                writeln!(out)?;
            }
            writeln!(out, "# sentence {sentence_id}")?;
        }
        let sentence = &corpus.sentences[sentence_id];
        write_graph_triples(&graph.to_generic(sentence), &mut out)?;
    }
    drop(out);

    print!("{}", report.header());
    println!("sentences {}", graphs.len());
    println!(
        "nodes {}",
        graphs.iter().map(|(_, g)| g.nodes.len()).sum::<usize>()
    );
    println!(
        "edges {} ({} labeled)",
        graphs.iter().map(|(_, g)| g.edges.len()).sum::<usize>(),
        graphs
            .iter()
            .map(|(_, g)| g.labeled_edges().count())
            .sum::<usize>()
    );
    if args.pretty {
        for (sentence_id, graph) in &graphs {
            println!("sentence {sentence_id}");
            print!("{}", graph.render_tree(&corpus.sentences[sentence_id]));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, ValueEnum)]
pub enum MatchModeArg {
    Surface,
    ContentOverlap,
}

pub fn node_match_config(
    mode: MatchModeArg,
    lemma_table: Option<&std::path::Path>,
) -> Result<NodeMatchConfig> {
    let lemma_table = match lemma_table {
        None => None,
        Some(path) => {
            use std::io::BufRead;
            let mut table = std::collections::BTreeMap::new();
            for (lineno, line) in open(path)?.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((surface, lemma)) = line.split_once('\t') else {
                    bail!(
                        "{}:{}: expected <surface>\\t<lemma>",
                        path.display(),
                        lineno + 1
                    );
                };
                table.insert(surface.trim().to_lowercase(), lemma.trim().to_lowercase());
            }
            Some(table)
        }
    };
    Ok(NodeMatchConfig {
        mode: match mode {
            MatchModeArg::Surface => MatchMode::Surface,
            MatchModeArg::ContentOverlap => MatchMode::ContentOverlap,
        },
        lemma_table,
    })
}

#[derive(Args)]
pub struct ScoreGraphArgs {
    /// Predicted graph in triple format (e.g. from `induce`)
    #[arg(long)]
    pred: PathBuf,
    /// Gold graph in triple format
    #[arg(long)]
    gold: PathBuf,
    /// Canonical corpus providing the sentence tokens
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    sentence_id: String,
    #[arg(long, value_enum, default_value = "surface")]
    match_mode: MatchModeArg,
    /// Optional `<surface>\t<lemma>` table
    #[arg(long)]
    lemma_table: Option<PathBuf>,
    #[arg(long, default_value_t = 16)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Score relation triples only, without instance triples
    #[arg(long)]
    no_instances: bool,
    #[arg(long, default_value_t = 256)]
    node_budget: usize,
}

fn print_prf(name: &str, prf: Prf) {
    println!(
        "{name} precision {:.4} recall {:.4} f1 {:.4} matched {} predicted {} gold {}",
        prf.precision(),
        prf.recall(),
        prf.f1(),
        prf.matched,
        prf.predicted_total,
        prf.gold_total
    );
}

pub fn score_graph(args: ScoreGraphArgs) -> Result<()> {
    let mut report = Report::new("score-graph");
    report.config("sentence-id", &args.sentence_id);
    report.config(
        "match-mode",
        match args.match_mode {
            MatchModeArg::Surface => "surface",
            MatchModeArg::ContentOverlap => "content-overlap",
        },
    );
    report.config("restarts", args.restarts);
    report.config("seed", args.seed);
    report.config("include-instances", !args.no_instances);
    report.input(&args.pred)?;
    report.input(&args.gold)?;
    report.input(&args.corpus)?;
    if let Some(path) = &args.lemma_table {
        report.input(path)?;
    }

    let pred = read_graph_triples(open(&args.pred)?)?;
    let gold = read_graph_triples(open(&args.gold)?)?;
    let corpus = read_corpus(&args.corpus)?;
    let Some(sentence) = corpus.sentence(&args.sentence_id) else {
        bail!("sentence {} not found in corpus", args.sentence_id);
    };
    let cfg = node_match_config(args.match_mode, args.lemma_table.as_deref())?;

    let concept = concept_agreement(&gold, &pred, sentence, &cfg);
    let smatch_opts = SmatchOptions {
        restarts: args.restarts,
        seed: args.seed,
        include_instances: !args.no_instances,
        node_budget: args.node_budget,
        match_cfg: cfg,
    };
    let (smatch, mapping) = unlabeled_smatch_with_mapping(&pred, &gold, &smatch_opts)?;

    print!("{}", report.header());
    print_prf("concept-agreement", concept);
    print_prf("unlabeled-smatch", smatch);
    for (a, b) in mapping {
        println!("mapping {a} {b}");
    }
    Ok(())
}
