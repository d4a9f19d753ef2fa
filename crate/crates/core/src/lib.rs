//! Toolkit for question-answer meaning representations: deterministic
//! induction of graphs over sentence spans from crowd-sourced QA pairs,
//! the metric suite used to evaluate them (concept agreement, unlabeled
//! SMATCH, SRL-arc alignment recall, QA/QG scoring), corpus analyses, and
//! the annotation-pipeline bookkeeping (validation aggregation, filtering,
//! payouts, quality control).

pub mod analysis;
pub mod filter;
pub mod induce;
pub mod ingest;
pub mod ledger;
pub mod metrics;
pub mod model;
pub mod stopwords;

pub use induce::{induce_graph, InduceOptions, QamrGraph};
pub use ingest::{AnnotationCorpus, GenericGraph, GoldArcSet};
pub use model::{AnswerSet, QaPair, Qamr, RawAnnotation, Sentence, Span};
pub use stopwords::StopwordSet;
