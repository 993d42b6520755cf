//! Single-file model checkpoints: an eight-byte magic, a JSON header with
//! the architecture, the vocabulary hash, and a parameter manifest, then
//! the raw f64 little-endian weights in manifest order. Weights round-trip
//! bit for bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::model::{GenerativeModel, ModelConfig, Params};

const MAGIC: &[u8; 8] = b"DLPCKPT1";

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    config: ModelConfig,
    vocab_hash: String,
    params: Vec<ParamEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ParamEntry {
    name: String,
    rows: usize,
    cols: usize,
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("not a model checkpoint (bad magic)")]
    BadMagic,
    #[error("malformed checkpoint header: {0}")]
    Header(#[from] serde_json::Error),
    #[error("checkpoint holds non-finite weights")]
    NonFinite,
}

pub fn save(
    model: &GenerativeModel,
    vocab_hash: &str,
    path: impl AsRef<Path>,
) -> Result<(), CheckpointError> {
    let header = Header {
        config: model.cfg,
        vocab_hash: vocab_hash.to_string(),
        params: model
            .params
            .iter()
            .map(|(name, v)| ParamEntry { name: name.to_string(), rows: v.nrows(), cols: v.ncols() })
            .collect(),
    };
    let header_bytes = serde_json::to_vec(&header)?;

    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(header_bytes.len() as u32).to_le_bytes())?;
    w.write_all(&header_bytes)?;
    for (_, v) in model.params.iter() {
        for &x in v.iter() {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Returns the model and the vocabulary hash it was trained against.
pub fn load(path: impl AsRef<Path>) -> Result<(GenerativeModel, String), CheckpointError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let mut len = [0u8; 4];
    r.read_exact(&mut len)?;
    let mut header_bytes = vec![0u8; u32::from_le_bytes(len) as usize];
    r.read_exact(&mut header_bytes)?;
    let header: Header = serde_json::from_slice(&header_bytes)?;

    let mut entries = Vec::with_capacity(header.params.len());
    let mut buf = [0u8; 8];
    for entry in &header.params {
        let mut v = Array2::zeros((entry.rows, entry.cols));
        for x in v.iter_mut() {
            r.read_exact(&mut buf)?;
            *x = f64::from_le_bytes(buf);
        }
        entries.push((entry.name.clone(), v));
    }
    let model = GenerativeModel { cfg: header.config, params: Params::from_entries(entries) };
    if !model.params.all_finite() {
        return Err(CheckpointError::NonFinite);
    }
    Ok((model, header.vocab_hash))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_round_trip_bit_for_bit() {
        let model = GenerativeModel::new(ModelConfig::tiny(19), 77);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        save(&model, "abc123", &path).unwrap();

        let (loaded, hash) = load(&path).unwrap();
        assert_eq!(hash, "abc123");
        assert_eq!(loaded.cfg, model.cfg);
        assert_eq!(loaded.params, model.params);

        // Same input, same distribution, exactly.
        let tokens = [1u32, 6, 3];
        assert_eq!(model.forward(&tokens).unwrap(), loaded.forward(&tokens).unwrap());
    }

    #[test]
    fn foreign_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("not-a-model");
        std::fs::write(&path, b"something else entirely").unwrap();
        assert!(matches!(load(&path), Err(CheckpointError::BadMagic)));
    }

    #[test]
    fn nan_weights_fail_to_load() {
        let mut model = GenerativeModel::new(ModelConfig::tiny(19), 78);
        model.params.get_mut("wpe")[[1, 1]] = f64::NAN;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        save(&model, "h", &path).unwrap();
        assert!(matches!(load(&path), Err(CheckpointError::NonFinite)));
    }
}
