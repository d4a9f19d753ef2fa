//! `align` and `recall-curve`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use qamr::filter::{filter_annotations, filter_corpus};
use qamr::ingest::{read_gold_arcs, validate_arcs, ArcReadOptions, GoldArcSet};
use qamr::metrics::srl::{align_qa, arc_recall, CurveMode, OverlapMode};
use qamr::Qamr;

use crate::report::Report;

use super::graph::{node_match_config, MatchModeArg};
use super::{filter_options, open, read_corpus};

#[derive(Clone, Copy, ValueEnum)]
pub enum OverlapArg {
    Jaccard,
    IntersectionOverAnswer,
}

impl OverlapArg {
    fn mode(self) -> OverlapMode {
        match self {
            OverlapArg::Jaccard => OverlapMode::Jaccard,
            OverlapArg::IntersectionOverAnswer => OverlapMode::IntersectionOverAnswer,
        }
    }

    fn name(self) -> &'static str {
        match self {
            OverlapArg::Jaccard => "jaccard",
            OverlapArg::IntersectionOverAnswer => "intersection-over-answer",
        }
    }
}

#[derive(Args)]
pub struct ArcFileArgs {
    /// Gold arcs: `sentence_id pred_index label source indices...`
    #[arg(long)]
    pub arcs: PathBuf,
    /// Drop reference (`R-`) roles
    #[arg(long)]
    pub drop_r: bool,
    /// Drop discourse (`-DIS`) arguments
    #[arg(long)]
    pub drop_dis: bool,
}

impl ArcFileArgs {
    fn read(&self) -> Result<GoldArcSet> {
        Ok(read_gold_arcs(
            open(&self.arcs)?,
            ArcReadOptions {
                drop_r: self.drop_r,
                drop_dis: self.drop_dis,
            },
        )?)
    }
}

#[derive(Args)]
pub struct AlignArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    arcs: ArcFileArgs,
    /// Per-pair alignment table destination
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "jaccard")]
    overlap: OverlapArg,
    #[arg(long, value_enum, default_value = "surface")]
    match_mode: MatchModeArg,
    #[arg(long)]
    lemma_table: Option<PathBuf>,
    #[arg(long)]
    no_filter: bool,
    #[arg(long, default_value_t = 0)]
    require_judgments: usize,
}

fn corpus_qamrs(
    corpus: &qamr::AnnotationCorpus,
    no_filter: bool,
    require_judgments: usize,
) -> Vec<Qamr> {
    if no_filter {
        super::unfiltered_qamrs(corpus)
    } else {
        filter_corpus(corpus, filter_options(require_judgments)).0
    }
}

pub fn align(args: AlignArgs, jobs: usize) -> Result<()> {
    let mut report = Report::new("align");
    report.config("overlap", args.overlap.name());
    report.config("drop-r", args.arcs.drop_r);
    report.config("drop-dis", args.arcs.drop_dis);
    report.config("no-filter", args.no_filter);
    report.config("jobs", jobs);
    report.input(&args.corpus)?;
    report.input(&args.arcs.arcs)?;
    if let Some(path) = &args.lemma_table {
        report.input(path)?;
    }

    let corpus = read_corpus(&args.corpus)?;
    let arcs = args.arcs.read()?;
    validate_arcs(&arcs, &corpus.sentences).map_err(anyhow::Error::msg)?;
    let cfg = node_match_config(args.match_mode, args.lemma_table.as_deref())?;
    let qamrs = corpus_qamrs(&corpus, args.no_filter, args.require_judgments);
    let mode = args.overlap.mode();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .context("building worker pool")?;
    let rows: Vec<Vec<String>> = pool.install(|| {
        use rayon::prelude::*;
        qamrs
            .par_iter()
            .map(|qamr| {
                let mut lines = Vec::new();
                let Some(sentence) = corpus.sentences.get(&qamr.sentence_id) else {
                    return lines;
                };
                let sentence_arcs = arcs.arcs.get(&qamr.sentence_id);
                for (i, pair) in qamr.pairs.iter().enumerate() {
                    let entry = sentence_arcs
                        .map(|sa| align_qa(&pair.question, &pair.answer, sa, sentence, &cfg, mode));
                    match entry.and_then(|e| e.best_arc.map(|a| (a, e.overlap))) {
                        Some((arc, overlap)) => lines.push(format!(
                            "{}\t{}\t{}\t{:.4}",
                            qamr.sentence_id, i, arc, overlap
                        )),
                        None => lines.push(format!("{}\t{}\t-\t0.0000", qamr.sentence_id, i)),
                    }
                }
                lines
            })
            .collect()
    });

    if let Some(out_path) = &args.out {
        let mut out = BufWriter::new(File::create(out_path)?);
        writeln!(out, "sentence_id\tpair\tbest_arc\toverlap")?;
        for lines in &rows {
            for line in lines {
                writeln!(out, "{line}")?;
            }
        }
    }

    let recall = arc_recall(&qamrs, &arcs, &corpus.sentences, &cfg, mode);
    print!("{}", report.header());
    println!(
        "aligned_pairs {}",
        rows.iter()
            .flatten()
            .filter(|l| !l.contains("\t-\t"))
            .count()
    );
    println!("total_pairs {}", rows.iter().map(Vec::len).sum::<usize>());
    println!(
        "arc_recall {:.4} ({} of {})",
        recall.fraction(),
        recall.covered,
        recall.total
    );
    Ok(())
}

#[derive(Clone, Copy, ValueEnum)]
pub enum CurveModeArg {
    Exhaustive,
    Sampled,
}

#[derive(Args)]
pub struct RecallCurveArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    arcs: ArcFileArgs,
    /// Evaluate n = 1..=max_n annotators
    #[arg(long, default_value_t = 5)]
    max_n: usize,
    #[arg(long, value_enum, default_value = "exhaustive")]
    mode: CurveModeArg,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "jaccard")]
    overlap: OverlapArg,
    #[arg(long, value_enum, default_value = "surface")]
    match_mode: MatchModeArg,
    #[arg(long)]
    lemma_table: Option<PathBuf>,
    #[arg(long)]
    no_filter: bool,
    #[arg(long, default_value_t = 0)]
    require_judgments: usize,
}

pub fn recall_curve(args: RecallCurveArgs) -> Result<()> {
    if args.max_n == 0 {
        bail!("--max-n must be at least 1");
    }
    let mut report = Report::new("recall-curve");
    report.config("max-n", args.max_n);
    let mode = match args.mode {
        CurveModeArg::Exhaustive => {
            report.config("mode", "exhaustive");
            CurveMode::Exhaustive
        }
        CurveModeArg::Sampled => {
            report.config("mode", "sampled");
            report.config("trials", args.trials);
            CurveMode::Sampled {
                seed: args.seed,
                trials: args.trials,
            }
        }
    };
    report.config("seed", args.seed);
    report.config("overlap", args.overlap.name());
    report.config("no-filter", args.no_filter);
    report.input(&args.corpus)?;
    report.input(&args.arcs.arcs)?;

    let corpus = read_corpus(&args.corpus)?;
    let arcs = args.arcs.read()?;
    validate_arcs(&arcs, &corpus.sentences).map_err(anyhow::Error::msg)?;
    let cfg = node_match_config(args.match_mode, args.lemma_table.as_deref())?;
    let working = if args.no_filter {
        corpus
    } else {
        filter_annotations(&corpus, filter_options(args.require_judgments))
    };
    let ns: Vec<usize> = (1..=args.max_n).collect();
    let (points, warnings) =
        qamr::metrics::srl::recall_curve(&working, &arcs, &ns, mode, &cfg, args.overlap.mode());

    print!("{}", report.header());
    for warning in &warnings {
        println!("# warning: {warning}");
    }
    println!("n\trecall");
    for point in &points {
        println!("{}\t{:.4}", point.n, point.recall);
    }
    Ok(())
}
