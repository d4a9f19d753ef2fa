//! Report headers: every subcommand's output embeds the toolkit version,
//! the config it ran with (including seeds), and content hashes of its
//! inputs, so runs are reproducible and diffable.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

pub struct Report {
    lines: Vec<String>,
}

impl Report {
    pub fn new(subcommand: &str) -> Self {
        Report {
            lines: vec![format!("# qamr {} {subcommand}", env!("CARGO_PKG_VERSION"))],
        }
    }

    pub fn config(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.lines.push(format!("# {key}: {value}"));
        self
    }

    pub fn input(&mut self, path: &Path) -> Result<&mut Self> {
        let bytes =
            fs::read(path).with_context(|| format!("cannot read input {}", path.display()))?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for byte in digest {
            let _ = write!(hex, "{byte:02x}");
        }
        self.lines
            .push(format!("# input sha256 {hex} {}", path.display()));
        Ok(self)
    }

    pub fn header(&self) -> String {
        let mut out = String::new();
        for line in &self.lines {
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}
