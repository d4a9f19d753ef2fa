//! Single binary exposing the pipeline as subcommands with reproducible,
//! seedable runs. Exit codes: 0 success, 1 input validation failure,
//! 2 usage error.

mod commands;
mod report;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{corpus, evals, graph, ledger, srl};

#[derive(Parser)]
#[command(name = "qamr", version, about = "QA meaning representation toolkit")]
struct Cli {
    /// Worker threads for per-sentence stages; outputs are merged in input
    /// order so the thread count never changes bytes.
    #[arg(long, global = true, env = "QAMR_JOBS", default_value_t = 1)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a released TSV file to the canonical corpus format
    Ingest(corpus::IngestArgs),
    /// Aggregate judgments and keep valid wh-initial questions
    Filter(corpus::FilterArgs),
    /// Per-split corpus statistics table
    Stats(corpus::StatsArgs),
    /// Induce one graph per sentence from a corpus
    Induce(graph::InduceArgs),
    /// Concept agreement and unlabeled SMATCH against a gold triple graph
    ScoreGraph(graph::ScoreGraphArgs),
    /// Align QA pairs to gold SRL arcs and report arc recall
    Align(srl::AlignArgs),
    /// Recall as a function of annotators sampled per target-word grouping
    RecallCurve(srl::RecallCurveArgs),
    /// Wh-distribution, external phrases, and prefix rates
    Analyze(evals::AnalyzeArgs),
    /// SQuAD-style exact match and token F1 over answer predictions
    EvalQa(evals::EvalQaArgs),
    /// Question-generation precision/recall with multi-BLEU fuzzy matching
    EvalQg(evals::EvalQgArgs),
    /// Generation and validation payouts over a batch ledger
    Payout(ledger::PayoutArgs),
    /// Replay a time-ordered annotation log through quality control
    QcReplay(ledger::QcReplayArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(args) => corpus::ingest(args),
        Command::Filter(args) => corpus::filter(args),
        Command::Stats(args) => corpus::stats(args),
        Command::Induce(args) => graph::induce(args, cli.jobs),
        Command::ScoreGraph(args) => graph::score_graph(args),
        Command::Align(args) => srl::align(args, cli.jobs),
        Command::RecallCurve(args) => srl::recall_curve(args),
        Command::Analyze(args) => evals::analyze(args),
        Command::EvalQa(args) => evals::eval_qa(args),
        Command::EvalQg(args) => evals::eval_qg(args),
        Command::Payout(args) => ledger::payout(args),
        Command::QcReplay(args) => ledger::qc_replay(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
