//! Corpus files: JSON lines, a header record first, then one dialog per line.
//!
//! Field-by-field schema in `docs/corpus-schema.md`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::turn::Dialog;

pub const CORPUS_FORMAT: &str = "dialoop.corpus";
pub const CORPUS_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusHeader {
    pub format: String,
    pub version: u32,
    /// Hash of the world the dialogs were generated against, so a corpus is
    /// never silently combined with a mismatched ontology.
    pub world_hash: String,
    pub dialog_count: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: bad corpus header: {source}")]
    BadHeader {
        line: usize,
        source: serde_json::Error,
    },
    #[error("line {line}: unsupported corpus format {format} v{version}")]
    UnsupportedFormat {
        line: usize,
        format: String,
        version: u32,
    },
    #[error("line {line}: bad dialog record: {source}")]
    BadRecord {
        line: usize,
        source: serde_json::Error,
    },
    #[error("line {line}: expected {expected} dialogs, file has {actual}")]
    CountMismatch {
        line: usize,
        expected: usize,
        actual: usize,
    },
    #[error("empty corpus file (missing header line)")]
    Empty,
}

pub fn write_corpus(
    path: impl AsRef<Path>,
    world_hash: &str,
    dialogs: &[Dialog],
) -> Result<(), CorpusError> {
    let mut out = BufWriter::new(File::create(path)?);
    let header = CorpusHeader {
        format: CORPUS_FORMAT.to_string(),
        version: CORPUS_VERSION,
        world_hash: world_hash.to_string(),
        dialog_count: dialogs.len(),
    };
    serde_json::to_writer(&mut out, &header).map_err(std::io::Error::from)?;
    out.write_all(b"\n")?;
    for dialog in dialogs {
        serde_json::to_writer(&mut out, dialog).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_corpus(path: impl AsRef<Path>) -> Result<(CorpusHeader, Vec<Dialog>), CorpusError> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate();

    let (_, first) = lines.next().ok_or(CorpusError::Empty)?;
    let header: CorpusHeader = serde_json::from_str(&first?)
        .map_err(|source| CorpusError::BadHeader { line: 1, source })?;
    if header.format != CORPUS_FORMAT || header.version != CORPUS_VERSION {
        return Err(CorpusError::UnsupportedFormat {
            line: 1,
            format: header.format,
            version: header.version,
        });
    }

    let mut dialogs = Vec::with_capacity(header.dialog_count);
    let mut last_line = 1;
    for (idx, line) in lines {
        let line_no = idx + 1;
        last_line = line_no;
        let text = line?;
        if text.trim().is_empty() {
            continue;
        }
        let dialog: Dialog = serde_json::from_str(&text)
            .map_err(|source| CorpusError::BadRecord { line: line_no, source })?;
        dialogs.push(dialog);
    }
    if dialogs.len() != header.dialog_count {
        return Err(CorpusError::CountMismatch {
            line: last_line,
            expected: header.dialog_count,
            actual: dialogs.len(),
        });
    }
    Ok((header, dialogs))
}
