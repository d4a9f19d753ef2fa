pub mod corpus;
pub mod evals;
pub mod graph;
pub mod ledger;
pub mod srl;

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use anyhow::{Context, Result};
use qamr::filter::FilterOptions;
use qamr::ingest::{read_canonical, AnnotationCorpus};
use qamr::StopwordSet;

pub fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| {
        format!("cannot open {}", path.display())
    })?))
}

pub fn read_corpus(path: &Path) -> Result<AnnotationCorpus> {
    read_canonical(open(path)?).with_context(|| format!("reading {}", path.display()))
}

pub fn load_stopwords(path: Option<&Path>) -> Result<StopwordSet> {
    match path {
        None => Ok(StopwordSet::bundled()),
        Some(path) => {
            let mut text = String::new();
            open(path)?.read_to_string(&mut text)?;
            Ok(StopwordSet::from_text(&text))
        }
    }
}

pub fn filter_options(require_judgments: usize) -> FilterOptions {
    FilterOptions { require_judgments }
}

/// Every annotation as a QA pair, grouped per sentence, filtering skipped.
pub fn unfiltered_qamrs(corpus: &AnnotationCorpus) -> Vec<qamr::Qamr> {
    let mut qamrs = Vec::new();
    for sid in corpus.sentences.keys() {
        let pairs: Vec<qamr::QaPair> = corpus
            .annotations
            .iter()
            .filter(|a| &a.sentence_id == sid)
            .map(|a| qamr::QaPair {
                sentence_id: a.sentence_id.clone(),
                question: a.question.clone(),
                answer: a.writer_answer.clone(),
            })
            .collect();
        if !pairs.is_empty() {
            qamrs.push(qamr::Qamr {
                sentence_id: sid.clone(),
                pairs,
            });
        }
    }
    qamrs
}
