//! `analyze`, `eval-qa`, and `eval-qg`.

use std::io::BufRead;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use indexmap::IndexMap;
use qamr::analysis::{external_phrases, wh_distribution, what_kind_rate};
use qamr::filter::filter_corpus;
use qamr::metrics::bleu::qg_pr;
use qamr::metrics::qa::{answer_em, answer_f1};
use serde::Deserialize;

use crate::report::Report;

use super::{filter_options, load_stopwords, open, read_corpus};

#[derive(Args)]
pub struct AnalyzeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// How many external phrases to list
    #[arg(long, default_value_t = 50)]
    top_k: usize,
    #[arg(long)]
    no_filter: bool,
    #[arg(long, default_value_t = 0)]
    require_judgments: usize,
}

pub fn analyze(args: AnalyzeArgs) -> Result<()> {
    let mut report = Report::new("analyze");
    report.config("top-k", args.top_k);
    report.config("no-filter", args.no_filter);
    report.input(&args.input)?;
    if let Some(path) = &args.stopwords {
        report.input(path)?;
    }

    let corpus = read_corpus(&args.input)?;
    let stopwords = load_stopwords(args.stopwords.as_deref())?;
    report.config("stopwords-sha256", stopwords.sha256());
    let qamrs = if args.no_filter {
        super::unfiltered_qamrs(&corpus)
    } else {
        filter_corpus(&corpus, filter_options(args.require_judgments)).0
    };

    let wh = wh_distribution(&qamrs);
    let external = external_phrases(&qamrs, &corpus.sentences, &stopwords);
    let kind = what_kind_rate(&qamrs);

    print!("{}", report.header());
    println!("questions {}", wh.total);
    println!("wh\tcount\tfraction");
    for ((word, count), (_, fraction)) in wh.counts.iter().zip(wh.fractions()) {
        println!("{word}\t{count}\t{fraction:.4}");
    }
    if wh.other > 0 {
        println!("other\t{}\t-", wh.other);
    }
    println!(
        "external_phrase_rate {:.4} ({} of {} questions)",
        external.rate(),
        external.questions_with_external,
        external.questions_total
    );
    println!(
        "external_phrases_unique {} occurrences {}",
        external.unique_phrases, external.total_occurrences
    );
    println!(
        "what_kind_rate {:.4} ({} of {}){}",
        kind.fraction(),
        kind.matching,
        kind.total,
        if kind.empty_denominator() {
            " empty-denominator"
        } else {
            ""
        }
    );
    println!("phrase\tcount\tafter_wh\tcategory");
    for phrase in external.top(args.top_k) {
        println!(
            "{}\t{}\t{}\t{}",
            phrase.phrase.join(" "),
            phrase.count,
            phrase.after_wh,
            phrase.category()
        );
    }
    Ok(())
}

#[derive(Deserialize)]
struct QaPrediction {
    id: String,
    answer: Vec<String>,
}

#[derive(Deserialize)]
struct QaReference {
    id: String,
    answers: Vec<Vec<String>>,
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut records = Vec::new();
    for (lineno, line) in open(path)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line)
            .with_context(|| format!("{}:{}", path.display(), lineno + 1))?;
        records.push(record);
    }
    Ok(records)
}

#[derive(Args)]
pub struct EvalQaArgs {
    /// JSONL: {"id": ..., "answer": [tokens]}
    #[arg(long)]
    pred: PathBuf,
    /// JSONL: {"id": ..., "answers": [[tokens], ...]}
    #[arg(long)]
    gold: PathBuf,
    /// Also print one line per item
    #[arg(long)]
    per_item: bool,
}

pub fn eval_qa(args: EvalQaArgs) -> Result<()> {
    let mut report = Report::new("eval-qa");
    report.input(&args.pred)?;
    report.input(&args.gold)?;

    let predictions: Vec<QaPrediction> = read_jsonl(&args.pred)?;
    let references: Vec<QaReference> = read_jsonl(&args.gold)?;
    let pred_by_id: IndexMap<&str, &QaPrediction> =
        predictions.iter().map(|p| (p.id.as_str(), p)).collect();
    let ref_ids: IndexMap<&str, ()> = references.iter().map(|r| (r.id.as_str(), ())).collect();

    // denominator is the reference set; unanswered items score zero
    let mut em_sum = 0u64;
    let mut f1_sum = 0.0f64;
    let mut unanswered = 0u64;
    let mut per_item = Vec::new();
    for reference in &references {
        let (em, f1) = match pred_by_id.get(reference.id.as_str()) {
            Some(prediction) => (
                answer_em(&prediction.answer, &reference.answers),
                answer_f1(&prediction.answer, &reference.answers),
            ),
            None => {
                unanswered += 1;
                (0, 0.0)
            }
        };
        em_sum += u64::from(em);
        f1_sum += f1;
        if args.per_item {
            per_item.push(format!("{}\t{}\t{:.4}", reference.id, em, f1));
        }
    }
    let spurious = predictions
        .iter()
        .filter(|p| !ref_ids.contains_key(p.id.as_str()))
        .count();

    print!("{}", report.header());
    println!("references {}", references.len());
    println!("unanswered {unanswered}");
    println!("missing_reference {spurious}");
    let denominator = references.len().max(1) as f64;
    println!("exact_match {:.4}", em_sum as f64 / denominator);
    println!("f1 {:.4}", f1_sum / denominator);
    if args.per_item {
        println!("id\tem\tf1");
        for line in per_item {
            println!("{line}");
        }
    }
    Ok(())
}

#[derive(Deserialize)]
struct QuestionSet {
    sentence_id: String,
    questions: Vec<Vec<String>>,
}

#[derive(Args)]
pub struct EvalQgArgs {
    /// JSONL: {"sentence_id": ..., "questions": [[tokens], ...]}
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    /// Fuzzy multi-BLEU threshold; 1.0 switches to exact string matching
    #[arg(long, default_value_t = 0.8)]
    threshold: f64,
}

pub fn eval_qg(args: EvalQgArgs) -> Result<()> {
    let mut report = Report::new("eval-qg");
    report.config("threshold", args.threshold);
    report.input(&args.pred)?;
    report.input(&args.gold)?;

    let predictions: Vec<QuestionSet> = read_jsonl(&args.pred)?;
    let references: Vec<QuestionSet> = read_jsonl(&args.gold)?;
    let gold_by_id: IndexMap<&str, &QuestionSet> = references
        .iter()
        .map(|r| (r.sentence_id.as_str(), r))
        .collect();

    // micro-averaged over sentences; gold questions for sentences the
    // predictions skip still count toward the gold total
    let mut matched = 0;
    let mut predicted_total = 0;
    let gold_total: usize = references.iter().map(|r| r.questions.len()).sum();
    for prediction in &predictions {
        predicted_total += prediction.questions.len();
        let gold = gold_by_id
            .get(prediction.sentence_id.as_str())
            .map(|g| g.questions.as_slice())
            .unwrap_or(&[]);
        let prf = qg_pr(&prediction.questions, gold, args.threshold);
        matched += prf.matched;
    }
    let prf = qamr::metrics::Prf::new(matched, predicted_total, gold_total);

    print!("{}", report.header());
    println!(
        "qg precision {:.4} recall {:.4} f1 {:.4} matched {} predicted {} gold {}",
        prf.precision(),
        prf.recall(),
        prf.f1(),
        prf.matched,
        prf.predicted_total,
        prf.gold_total
    );
    Ok(())
}
