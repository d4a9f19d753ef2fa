//! Payout computation and the quality-control state machine, replayed
//! deterministically over time-ordered annotation logs.

use std::collections::BTreeMap;
use std::io::BufRead;

use indexmap::IndexMap;
use serde::Serialize;
use thiserror::Error;

use crate::model::{AnswerSet, Verdict};

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("event {index}: timestamp {timestamp} precedes {previous}")]
    OutOfOrder {
        index: usize,
        timestamp: u64,
        previous: u64,
    },
}

fn malformed(line: usize, reason: impl Into<String>) -> LedgerError {
    LedgerError::Malformed {
        line,
        reason: reason.into(),
    }
}

// ---------------------------------------------------------------------------
// Payouts
// ---------------------------------------------------------------------------

/// One generation HIT: how many target words it presented and how much of
/// the written work survived validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationBatch {
    pub worker_id: String,
    pub target_count: u32,
    pub qa_written: u32,
    pub qa_validated: u32,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PayPolicy {
    /// Base pay requires one written (rather than validated) pair per
    /// target word.
    pub base_on_written: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GenerationPay {
    pub cents: u64,
    pub base_unmet: bool,
}

/// Base pay of 20c once every target word has a QA pair, plus an increasing
/// bonus of 3(k+1)c for the k-th validated pair beyond the targets.
pub fn generation_pay(batch: &GenerationBatch, policy: PayPolicy) -> GenerationPay {
    let base_met = if policy.base_on_written {
        batch.qa_written >= batch.target_count
    } else {
        batch.qa_validated >= batch.target_count
    };
    if !base_met {
        return GenerationPay {
            cents: 0,
            base_unmet: true,
        };
    }
    let extra = batch.qa_validated.saturating_sub(batch.target_count);
    let mut cents = 20;
    for k in 1..=u64::from(extra) {
        cents += 3 * (k + 1);
    }
    GenerationPay {
        cents,
        base_unmet: false,
    }
}

/// 10c per batch plus 2c for each question validated past four.
pub fn validation_pay(questions_in_batch: u32) -> u64 {
    10 + 2 * u64::from(questions_in_batch.saturating_sub(4))
}

/// Answer spans agree iff they overlap at all.
pub fn answers_agree(a: &AnswerSet, b: &AnswerSet) -> bool {
    a.intersection_size(b) > 0
}

/// Answer verdicts agree by overlap; invalid/redundant verdicts agree iff
/// the kinds are equal; mixed kinds disagree.
pub fn verdicts_agree(a: &Verdict, b: &Verdict) -> bool {
    match (a, b) {
        (Verdict::Invalid, Verdict::Invalid) => true,
        (Verdict::Redundant(_), Verdict::Redundant(_)) => true,
        (Verdict::Answer(x), Verdict::Answer(y)) => answers_agree(x, y),
        _ => false,
    }
}

// ---------------------------------------------------------------------------
// Quality-control replay
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    Generate {
        question_id: String,
    },
    Validate {
        question_id: String,
        verdict: Verdict,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub timestamp: u64,
    pub worker_id: String,
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Generator,
    Validator,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Generator => "generator",
            Role::Validator => "validator",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WorkerStatus {
    Active,
    Disqualified,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WorkerRecord {
    pub worker_id: String,
    pub role: Role,
    pub questions_written: u32,
    pub questions_judged: u32,
    pub valid_judgments: u32,
    pub agreement_pairs: u32,
    pub agreements: u32,
    pub status: WorkerStatus,
}

impl WorkerRecord {
    fn new(worker_id: &str, role: Role) -> Self {
        WorkerRecord {
            worker_id: worker_id.to_string(),
            role,
            questions_written: 0,
            questions_judged: 0,
            valid_judgments: 0,
            agreement_pairs: 0,
            agreements: 0,
            status: WorkerStatus::Active,
        }
    }

    pub fn valid_rate(&self) -> f64 {
        if self.questions_judged == 0 {
            0.0
        } else {
            f64::from(self.valid_judgments) / f64::from(self.questions_judged)
        }
    }

    pub fn agreement_rate(&self) -> f64 {
        if self.agreement_pairs == 0 {
            0.0
        } else {
            f64::from(self.agreements) / f64::from(self.agreement_pairs)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QcConfig {
    /// Judged-question minimum before either rule arms.
    pub warmup: u32,
    /// Generators are disqualified when valid judgments fall below this
    /// percentage of judged questions.
    pub generator_threshold_pct: u32,
    /// Validators are disqualified when agreement does not stay above this
    /// percentage of compared pairs.
    pub validator_threshold_pct: u32,
}

impl Default for QcConfig {
    fn default() -> Self {
        QcConfig {
            warmup: 20,
            generator_threshold_pct: 75,
            validator_threshold_pct: 70,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "action")]
pub enum TraceAction {
    Disqualified { numerator: u32, denominator: u32 },
    Excluded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub event_index: usize,
    pub timestamp: u64,
    pub worker_id: String,
    pub role: Role,
    #[serde(flatten)]
    pub action: TraceAction,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QcOutcome {
    /// First-seen order.
    pub workers: Vec<WorkerRecord>,
    pub trace: Vec<TraceEntry>,
}

struct Replay {
    workers: IndexMap<(String, Role), WorkerRecord>,
    writers: BTreeMap<String, String>,
    judgments: BTreeMap<String, Vec<(String, Verdict)>>,
    trace: Vec<TraceEntry>,
    cfg: QcConfig,
}

impl Replay {
    fn record(&mut self, worker: &str, role: Role) -> &mut WorkerRecord {
        self.workers
            .entry((worker.to_string(), role))
            .or_insert_with(|| WorkerRecord::new(worker, role))
    }

    fn is_disqualified(&self, worker: &str, role: Role) -> bool {
        self.workers
            .get(&(worker.to_string(), role))
            .map(|r| r.status == WorkerStatus::Disqualified)
            .unwrap_or(false)
    }

    fn check_generator(&mut self, worker: &str, index: usize, timestamp: u64) {
        let cfg = self.cfg;
        let record = self.record(worker, Role::Generator);
        if record.status == WorkerStatus::Disqualified || record.questions_judged < cfg.warmup {
            return;
        }
        // falls below the threshold: strict comparison, exact in integers
        if record.valid_judgments * 100 < record.questions_judged * cfg.generator_threshold_pct {
            record.status = WorkerStatus::Disqualified;
            let (numerator, denominator) = (record.valid_judgments, record.questions_judged);
            self.trace.push(TraceEntry {
                event_index: index,
                timestamp,
                worker_id: worker.to_string(),
                role: Role::Generator,
                action: TraceAction::Disqualified {
                    numerator,
                    denominator,
                },
            });
        }
    }

    fn check_validator(&mut self, worker: &str, index: usize, timestamp: u64) {
        let cfg = self.cfg;
        let record = self.record(worker, Role::Validator);
        if record.status == WorkerStatus::Disqualified
            || record.questions_judged < cfg.warmup
            || record.agreement_pairs == 0
        {
            return;
        }
        // must stay above the threshold: disqualify at or below it
        if record.agreements * 100 <= record.agreement_pairs * cfg.validator_threshold_pct {
            record.status = WorkerStatus::Disqualified;
            let (numerator, denominator) = (record.agreements, record.agreement_pairs);
            self.trace.push(TraceEntry {
                event_index: index,
                timestamp,
                worker_id: worker.to_string(),
                role: Role::Validator,
                action: TraceAction::Disqualified {
                    numerator,
                    denominator,
                },
            });
        }
    }
}

/// Replays a chronologically ordered annotation log. Generators are
/// disqualified the first time their cumulative valid rate falls below the
/// threshold (after warm-up), validators when cumulative pairwise agreement
/// stops exceeding theirs. Events by already-disqualified workers are
/// trace-marked excluded and update nobody's statistics.
pub fn replay_qc(events: &[Event], cfg: QcConfig) -> Result<QcOutcome, LedgerError> {
    let mut replay = Replay {
        workers: IndexMap::new(),
        writers: BTreeMap::new(),
        judgments: BTreeMap::new(),
        trace: Vec::new(),
        cfg,
    };
    let mut previous_ts = 0u64;
    for (index, event) in events.iter().enumerate() {
        if event.timestamp < previous_ts {
            return Err(LedgerError::OutOfOrder {
                index,
                timestamp: event.timestamp,
                previous: previous_ts,
            });
        }
        previous_ts = event.timestamp;
        let role = match event.kind {
            EventKind::Generate { .. } => Role::Generator,
            EventKind::Validate { .. } => Role::Validator,
        };
        if replay.is_disqualified(&event.worker_id, role) {
            replay.trace.push(TraceEntry {
                event_index: index,
                timestamp: event.timestamp,
                worker_id: event.worker_id.clone(),
                role,
                action: TraceAction::Excluded,
            });
            continue;
        }
        match &event.kind {
            EventKind::Generate { question_id } => {
                replay
                    .record(&event.worker_id, Role::Generator)
                    .questions_written += 1;
                replay
                    .writers
                    .insert(question_id.clone(), event.worker_id.clone());
            }
            EventKind::Validate {
                question_id,
                verdict,
            } => {
                replay
                    .record(&event.worker_id, Role::Validator)
                    .questions_judged += 1;
                // pairwise agreement against earlier co-validators
                let earlier = replay
                    .judgments
                    .get(question_id)
                    .cloned()
                    .unwrap_or_default();
                let mut touched: Vec<String> = Vec::new();
                for (other_worker, other_verdict) in &earlier {
                    if other_worker == &event.worker_id {
                        continue;
                    }
                    let agree = verdicts_agree(verdict, other_verdict);
                    for worker in [other_worker.as_str(), event.worker_id.as_str()] {
                        let record = replay.record(worker, Role::Validator);
                        record.agreement_pairs += 1;
                        if agree {
                            record.agreements += 1;
                        }
                    }
                    if !touched.iter().any(|w| w == other_worker) {
                        touched.push(other_worker.clone());
                    }
                }
                replay
                    .judgments
                    .entry(question_id.clone())
                    .or_default()
                    .push((event.worker_id.clone(), verdict.clone()));
                // the writer's valid rate moves with every completed validation
                if let Some(writer) = replay.writers.get(question_id).cloned() {
                    if !replay.is_disqualified(&writer, Role::Generator) {
                        let record = replay.record(&writer, Role::Generator);
                        record.questions_judged += 1;
                        if matches!(verdict, Verdict::Answer(_)) {
                            record.valid_judgments += 1;
                        }
                        replay.check_generator(&writer, index, event.timestamp);
                    }
                }
                for worker in &touched {
                    replay.check_validator(worker, index, event.timestamp);
                }
                replay.check_validator(&event.worker_id, index, event.timestamp);
            }
        }
    }
    Ok(QcOutcome {
        workers: replay.workers.into_values().collect(),
        trace: replay.trace,
    })
}

// ---------------------------------------------------------------------------
// Text formats
// ---------------------------------------------------------------------------

fn parse_verdict_token(token: &str, line: usize) -> Result<Verdict, LedgerError> {
    if token == "invalid" {
        return Ok(Verdict::Invalid);
    }
    if let Some(rest) = token.strip_prefix("redundant") {
        let reference = rest.strip_prefix(':').map(str::to_string);
        return Ok(Verdict::Redundant(reference.filter(|r| !r.is_empty())));
    }
    if let Some(rest) = token.strip_prefix("answer:") {
        let mut indices = Vec::new();
        for part in rest.split(',') {
            let index: usize = part
                .parse()
                .map_err(|_| malformed(line, format!("unparseable index {part:?}")))?;
            indices.push(index);
        }
        let set = AnswerSet::new(indices)
            .ok_or_else(|| malformed(line, "answer verdict with no indices"))?;
        return Ok(Verdict::Answer(set));
    }
    Err(malformed(line, format!("unknown verdict {token:?}")))
}

/// Line format: `<ts> generate <worker> <question_id>` or
/// `<ts> validate <worker> <question_id> <verdict>` where verdict is
/// `invalid`, `redundant[:ref]`, or `answer:i,j,k`; `#` comments ignored.
pub fn parse_event_log<R: BufRead>(reader: R) -> Result<Vec<Event>, LedgerError> {
    let mut events = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| malformed(lineno, e.to_string()))?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() < 4 {
            return Err(malformed(lineno, "expected: <ts> <kind> <worker> <ids...>"));
        }
        let timestamp: u64 = fields[0]
            .parse()
            .map_err(|_| malformed(lineno, format!("unparseable timestamp {:?}", fields[0])))?;
        let worker_id = fields[2].to_string();
        let kind = match fields[1] {
            "generate" => EventKind::Generate {
                question_id: fields[3].to_string(),
            },
            "validate" => {
                if fields.len() < 5 {
                    return Err(malformed(lineno, "validate needs a verdict"));
                }
                EventKind::Validate {
                    question_id: fields[3].to_string(),
                    verdict: parse_verdict_token(fields[4], lineno)?,
                }
            }
            other => return Err(malformed(lineno, format!("unknown event kind {other:?}"))),
        };
        events.push(Event {
            timestamp,
            worker_id,
            kind,
        });
    }
    Ok(events)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BatchRecord {
    Generation(GenerationBatch),
    Validation { worker_id: String, questions: u32 },
}

/// Line format: `gen <worker> <targets> <written> <validated>` or
/// `val <worker> <questions>`; `#` comments ignored.
pub fn parse_batches<R: BufRead>(reader: R) -> Result<Vec<BatchRecord>, LedgerError> {
    let mut batches = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| malformed(lineno, e.to_string()))?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let parse_u32 = |s: &str| -> Result<u32, LedgerError> {
            s.parse()
                .map_err(|_| malformed(lineno, format!("unparseable count {s:?}")))
        };
        match fields[0] {
            "gen" if fields.len() == 5 => {
                let batch = GenerationBatch {
                    worker_id: fields[1].to_string(),
                    target_count: parse_u32(fields[2])?,
                    qa_written: parse_u32(fields[3])?,
                    qa_validated: parse_u32(fields[4])?,
                };
                if batch.target_count == 0 {
                    return Err(malformed(lineno, "target count must be at least 1"));
                }
                if batch.qa_validated > batch.qa_written {
                    return Err(malformed(lineno, "validated count exceeds written count"));
                }
                batches.push(BatchRecord::Generation(batch));
            }
            "val" if fields.len() == 3 => {
                let questions = parse_u32(fields[2])?;
                if questions == 0 {
                    return Err(malformed(
                        lineno,
                        "validation batch needs at least 1 question",
                    ));
                }
                batches.push(BatchRecord::Validation {
                    worker_id: fields[1].to_string(),
                    questions,
                });
            }
            _ => return Err(malformed(lineno, "expected `gen w t n v` or `val w n`")),
        }
    }
    Ok(batches)
}
