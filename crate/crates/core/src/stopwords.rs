//! The repo-pinned English function-word list. Occurrence trimming during
//! graph induction and the external-phrase analysis both depend on it, so
//! reports that use it embed its content hash.

use std::collections::BTreeSet;

use sha2::{Digest, Sha256};

use crate::model::normalize_token;

const BUNDLED: &str = include_str!("../data/stopwords.txt");

#[derive(Debug, Clone)]
pub struct StopwordSet {
    words: BTreeSet<String>,
    sha256: String,
}

impl StopwordSet {
    /// The list shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_text(BUNDLED)
    }

    /// One word per line; blank lines and `#` comments ignored.
    pub fn from_text(text: &str) -> Self {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(normalize_token)
            .collect();
        let mut hasher = Sha256::new();
        hasher.update(text.as_bytes());
        let sha256 = hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        StopwordSet { words, sha256 }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(&normalize_token(token))
    }

    /// Stopwords and pure-punctuation tokens are both skipped when trimming
    /// question matches and extracting external phrases.
    pub fn is_skippable(&self, token: &str) -> bool {
        self.contains(token) || !token.chars().any(|c| c.is_alphanumeric())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Hash of the list text, echoed in reports whose rates depend on it.
    pub fn sha256(&self) -> &str {
        &self.sha256
    }
}

impl Default for StopwordSet {
    fn default() -> Self {
        Self::bundled()
    }
}
