//! `payout` and `qc-replay`.

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use indexmap::IndexMap;
use qamr::ledger::{
    generation_pay, parse_batches, parse_event_log, replay_qc, validation_pay, BatchRecord,
    PayPolicy, QcConfig, TraceAction,
};

use crate::report::Report;

use super::open;

#[derive(Args)]
pub struct PayoutArgs {
    /// Batch ledger: `gen <worker> <targets> <written> <validated>` or
    /// `val <worker> <questions>` per line
    #[arg(long = "in")]
    input: PathBuf,
    /// Base pay requires written (not validated) pairs per target word
    #[arg(long)]
    base_on_written: bool,
}

pub fn payout(args: PayoutArgs) -> Result<()> {
    let mut report = Report::new("payout");
    report.config("base-on-written", args.base_on_written);
    report.input(&args.input)?;

    let batches = parse_batches(open(&args.input)?)?;
    let policy = PayPolicy {
        base_on_written: args.base_on_written,
    };

    #[derive(Default)]
    struct Totals {
        generation_cents: u64,
        validation_cents: u64,
        batches: u64,
        base_unmet: u64,
    }
    let mut per_worker: IndexMap<String, Totals> = IndexMap::new();
    for batch in &batches {
        match batch {
            BatchRecord::Generation(generation) => {
                let pay = generation_pay(generation, policy);
                let entry = per_worker.entry(generation.worker_id.clone()).or_default();
                entry.generation_cents += pay.cents;
                entry.batches += 1;
                entry.base_unmet += u64::from(pay.base_unmet);
            }
            BatchRecord::Validation {
                worker_id,
                questions,
            } => {
                let entry = per_worker.entry(worker_id.clone()).or_default();
                entry.validation_cents += validation_pay(*questions);
                entry.batches += 1;
            }
        }
    }

    print!("{}", report.header());
    println!("worker\tbatches\tgeneration_cents\tvalidation_cents\tbase_unmet");
    let mut generation_total = 0u64;
    let mut validation_total = 0u64;
    for (worker, totals) in &per_worker {
        println!(
            "{worker}\t{}\t{}\t{}\t{}",
            totals.batches, totals.generation_cents, totals.validation_cents, totals.base_unmet
        );
        generation_total += totals.generation_cents;
        validation_total += totals.validation_cents;
    }
    let total = generation_total + validation_total;
    println!("generation_total_cents {generation_total}");
    println!("validation_total_cents {validation_total}");
    println!("total_cents {total}");
    println!("total_dollars {}.{:02}", total / 100, total % 100);
    Ok(())
}

#[derive(Args)]
pub struct QcReplayArgs {
    /// Event log: `<ts> generate <worker> <qid>` or
    /// `<ts> validate <worker> <qid> <verdict>` per line
    #[arg(long = "in")]
    input: PathBuf,
    /// Judged-question minimum before disqualification arms
    #[arg(long, default_value_t = 20)]
    warmup: u32,
    /// Generators fall when valid judgments drop below this percentage
    #[arg(long, default_value_t = 75)]
    generator_threshold: u32,
    /// Validators fall when agreement stops exceeding this percentage
    #[arg(long, default_value_t = 70)]
    validator_threshold: u32,
}

pub fn qc_replay(args: QcReplayArgs) -> Result<()> {
    let mut report = Report::new("qc-replay");
    report.config("warmup", args.warmup);
    report.config("generator-threshold", args.generator_threshold);
    report.config("validator-threshold", args.validator_threshold);
    report.input(&args.input)?;

    let events = parse_event_log(open(&args.input)?)?;
    let outcome = replay_qc(
        &events,
        QcConfig {
            warmup: args.warmup,
            generator_threshold_pct: args.generator_threshold,
            validator_threshold_pct: args.validator_threshold,
        },
    )?;

    print!("{}", report.header());
    println!("events {}", events.len());
    println!("worker\trole\twritten\tjudged\tvalid\tpairs\tagreements\tstatus");
    for worker in &outcome.workers {
        println!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:?}",
            worker.worker_id,
            worker.role.as_str(),
            worker.questions_written,
            worker.questions_judged,
            worker.valid_judgments,
            worker.agreement_pairs,
            worker.agreements,
            worker.status
        );
    }
    println!("trace {}", outcome.trace.len());
    for entry in &outcome.trace {
        match &entry.action {
            TraceAction::Disqualified {
                numerator,
                denominator,
            } => println!(
                "event {} ts {} {} {} disqualified {}/{}",
                entry.event_index,
                entry.timestamp,
                entry.worker_id,
                entry.role.as_str(),
                numerator,
                denominator
            ),
            TraceAction::Excluded => println!(
                "event {} ts {} {} {} excluded",
                entry.event_index,
                entry.timestamp,
                entry.worker_id,
                entry.role.as_str()
            ),
        }
    }
    Ok(())
}
