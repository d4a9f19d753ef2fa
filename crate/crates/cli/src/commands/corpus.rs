//! `ingest`, `filter`, and `stats`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use qamr::filter::{corpus_stats, filter_annotations, filter_corpus, FilterStats};
use qamr::ingest::{read_release_tsv, read_sentence_tsv, write_canonical, ColumnMap};

use crate::report::Report;

use super::{filter_options, open, read_corpus};

#[derive(Args)]
pub struct IngestArgs {
    /// QA rows as tab-separated values
    #[arg(long = "in")]
    input: PathBuf,
    /// Sentence inventory: `<id>\t<space-tokenized sentence>` per line
    #[arg(long)]
    sentences: PathBuf,
    /// Column map JSON pinning the TSV layout
    #[arg(long)]
    column_map: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Abort on the first unmappable row instead of collecting rejects
    #[arg(long)]
    strict: bool,
    /// Split label recorded in the output header
    #[arg(long)]
    split: Option<String>,
    /// Where to write rejected rows (default: summary on stdout only)
    #[arg(long)]
    rejects: Option<PathBuf>,
}

pub fn ingest(args: IngestArgs) -> Result<()> {
    let mut report = Report::new("ingest");
    report.config("strict", args.strict);
    if let Some(split) = &args.split {
        report.config("split", split);
    }
    report.input(&args.input)?;
    report.input(&args.sentences)?;
    report.input(&args.column_map)?;

    let map: ColumnMap = serde_json::from_reader(open(&args.column_map)?)
        .with_context(|| format!("parsing column map {}", args.column_map.display()))?;
    let sentences = read_sentence_tsv(open(&args.sentences)?)?;
    let (mut corpus, rejects) = read_release_tsv(open(&args.input)?, &map, sentences, args.strict)?;
    corpus.split_label = args.split;
    // the release sentence tables span every split; keep only what this
    // split's annotations reference
    let referenced: std::collections::HashSet<&str> = corpus
        .annotations
        .iter()
        .map(|a| a.sentence_id.as_str())
        .collect();
    let referenced: std::collections::HashSet<String> =
        referenced.into_iter().map(String::from).collect();
    corpus.sentences.retain(|id, _| referenced.contains(id));

    let out =
        File::create(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    write_canonical(&corpus, BufWriter::new(out))?;

    if let Some(path) = &args.rejects {
        let mut out = BufWriter::new(File::create(path)?);
        for reject in &rejects {
            writeln!(
                out,
                "line {}: {}\t{}",
                reject.line, reject.reason, reject.raw
            )?;
        }
    }

    print!("{}", report.header());
    println!("sentences {}", corpus.sentences.len());
    println!("annotations {}", corpus.annotations.len());
    println!("rejects {}", rejects.len());
    Ok(())
}

#[derive(Args)]
pub struct FilterArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Filtered corpus destination (canonical format)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Drop questions carrying fewer judgments than this
    #[arg(long, default_value_t = 0)]
    require_judgments: usize,
    /// Print the per-split statistics table
    #[arg(long)]
    stats: bool,
}

fn print_stats_table(stats: &FilterStats) {
    println!("split\tsentences\tqa_pairs\tfiltered");
    for split in &stats.splits {
        println!(
            "{}\t{}\t{}\t{}",
            split.label, split.sentences, split.qa_pairs, split.filtered
        );
    }
    println!(
        "total\t{}\t{}\t{}",
        stats.splits.iter().map(|s| s.sentences).sum::<usize>(),
        stats.total_questions,
        stats.filtered_total
    );
    println!(
        "valid_both {} ({:.2}%)",
        stats.valid_both,
        stats.valid_rate() * 100.0
    );
    println!(
        "wh_pass {} ({:.2}% of valid)",
        stats.wh_pass,
        stats.wh_rate() * 100.0
    );
    println!("filtered_total {}", stats.filtered_total);
}

pub fn filter(args: FilterArgs) -> Result<()> {
    let mut report = Report::new("filter");
    report.config("require-judgments", args.require_judgments);
    report.input(&args.input)?;
    let corpus = read_corpus(&args.input)?;
    let opts = filter_options(args.require_judgments);
    let (_, stats) = filter_corpus(&corpus, opts);

    if let Some(out_path) = &args.out {
        let filtered = filter_annotations(&corpus, opts);
        let out = File::create(out_path)
            .with_context(|| format!("cannot create {}", out_path.display()))?;
        write_canonical(&filtered, BufWriter::new(out))?;
    }

    print!("{}", report.header());
    if args.stats {
        print_stats_table(&stats);
    } else {
        println!("kept {} of {}", stats.filtered_total, stats.total_questions);
    }
    Ok(())
}

#[derive(Args)]
pub struct StatsArgs {
    /// Canonical corpus files, one per split
    #[arg(long = "in", required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = 0)]
    require_judgments: usize,
    /// Emit machine-readable JSON records after the table
    #[arg(long)]
    records: bool,
}

pub fn stats(args: StatsArgs) -> Result<()> {
    let mut report = Report::new("stats");
    report.config("require-judgments", args.require_judgments);
    for input in &args.inputs {
        report.input(input)?;
    }
    let mut corpora = Vec::new();
    for input in &args.inputs {
        corpora.push(read_corpus(input)?);
    }
    if corpora.iter().filter(|c| c.split_label.is_none()).count() > 1 {
        bail!("multiple inputs without split labels; re-ingest with --split");
    }
    let refs: Vec<&_> = corpora.iter().collect();
    let stats = corpus_stats(&refs, filter_options(args.require_judgments));

    print!("{}", report.header());
    print_stats_table(&stats);
    if args.records {
        for split in &stats.splits {
            println!("{}", serde_json::to_string(split)?);
        }
    }
    Ok(())
}
