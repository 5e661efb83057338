//! Binary checkpoint: magic, TOML manifest, little-endian f32 payload and a
//! SHA-256 digest of everything before it.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::params::{raw, raw_mut, NetConfig, Params, Tensor};

const MAGIC: &[u8; 8] = b"TTRCKPT1";
const DIGEST_LEN: usize = 32;
pub const ACTOR_INPUT_ORDER: &str = "ahead,candidate";

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("checksum mismatch (truncated or corrupted file)")]
    Checksum,
    #[error("not a checkpoint file")]
    Magic,
    #[error("bad manifest: {0}")]
    Manifest(String),
    #[error("tensor {name}: expected shape {expected:?}, found {found:?}")]
    Shape { name: String, expected: (usize, usize), found: (usize, usize) },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: u32,
    pub seed: u64,
    pub stage: u8,
    pub episodes: u64,
    pub net: NetConfig,
    pub actor_input_order: String,
    pub tensors: Vec<TensorEntry>,
}

/// Training provenance stored with the parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CheckpointMeta {
    pub seed: u64,
    pub stage: u8,
    pub episodes: u64,
}

fn entries(net: &NetConfig) -> Vec<TensorEntry> {
    let mut out: Vec<TensorEntry> = Tensor::ALL
        .iter()
        .map(|t| {
            let (rows, cols) = t.shape(net);
            TensorEntry { name: t.name().to_string(), rows, cols }
        })
        .collect();
    for name in ["gin.bn.running_mean", "gin.bn.running_var"] {
        out.push(TensorEntry { name: name.to_string(), rows: 1, cols: net.hidden });
    }
    out
}

pub fn encode(params: &Params<f32>, meta: CheckpointMeta) -> Vec<u8> {
    let manifest = Manifest {
        format: 1,
        seed: meta.seed,
        stage: meta.stage,
        episodes: meta.episodes,
        net: params.cfg,
        actor_input_order: ACTOR_INPUT_ORDER.to_string(),
        tensors: entries(&params.cfg),
    };
    let text = toml::to_string(&manifest).expect("manifest serializes");
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(text.len() as u32).to_le_bytes());
    out.extend_from_slice(text.as_bytes());
    let values = raw(params).iter().flatten().chain(&params.running_mean).chain(&params.running_var);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

pub fn decode(bytes: &[u8]) -> Result<(Params<f32>, CheckpointMeta), CheckpointError> {
    if bytes.len() < DIGEST_LEN {
        return Err(CheckpointError::Checksum);
    }
    let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
    if Sha256::digest(body).as_slice() != digest {
        return Err(CheckpointError::Checksum);
    }
    if body.len() < MAGIC.len() + 4 || &body[..MAGIC.len()] != MAGIC {
        return Err(CheckpointError::Magic);
    }
    let len = u32::from_le_bytes(body[8..12].try_into().expect("4 bytes")) as usize;
    let text = body
        .get(12..12 + len)
        .and_then(|b| std::str::from_utf8(b).ok())
        .ok_or_else(|| CheckpointError::Manifest("manifest length out of range".into()))?;
    let manifest: Manifest = toml::from_str(text).map_err(|e| CheckpointError::Manifest(e.to_string()))?;
    if manifest.actor_input_order != ACTOR_INPUT_ORDER {
        return Err(CheckpointError::Manifest(format!("unknown actor input order `{}`", manifest.actor_input_order)));
    }
    let expected = entries(&manifest.net);
    if expected.len() != manifest.tensors.len() {
        return Err(CheckpointError::Manifest("tensor list does not match the architecture".into()));
    }
    for (e, f) in expected.iter().zip(&manifest.tensors) {
        if e.name != f.name {
            return Err(CheckpointError::Manifest(format!("expected tensor {}, found {}", e.name, f.name)));
        }
        if (e.rows, e.cols) != (f.rows, f.cols) {
            return Err(CheckpointError::Shape { name: e.name.clone(), expected: (e.rows, e.cols), found: (f.rows, f.cols) });
        }
    }
    let payload = &body[12 + len..];
    let total: usize = expected.iter().map(|e| e.rows * e.cols).sum();
    if payload.len() != 4 * total {
        return Err(CheckpointError::Manifest(format!("payload holds {} bytes, expected {}", payload.len(), 4 * total)));
    }
    let mut values = payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")));
    let mut params = Params::<f32>::zeros(manifest.net);
    for tensor in raw_mut(&mut params).iter_mut() {
        for x in tensor.iter_mut() {
            *x = values.next().expect("length checked");
        }
    }
    for x in params.running_mean.iter_mut().chain(params.running_var.iter_mut()) {
        *x = values.next().expect("length checked");
    }
    let meta = CheckpointMeta { seed: manifest.seed, stage: manifest.stage, episodes: manifest.episodes };
    Ok((params, meta))
}

pub fn save_checkpoint(path: impl AsRef<Path>, params: &Params<f32>, meta: CheckpointMeta) -> Result<(), CheckpointError> {
    let path = path.as_ref();
    fs::write(path, encode(params, meta)).map_err(|source| CheckpointError::Io { path: path.display().to_string(), source })
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(Params<f32>, CheckpointMeta), CheckpointError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| CheckpointError::Io { path: path.display().to_string(), source })?;
    decode(&bytes)
}
