use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"RBTH";
pub const CHECKPOINT_VERSION: u16 = 1;

pub fn feature_spec_hash(spec: &str) -> u64 {
    let d = Sha256::digest(spec.as_bytes());
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

/// Parameter vector plus the feature layout it was trained for.
///
/// Layout: `RBTH`, u16 version, u64 feature-spec hash, u32 count, then
/// `count` little-endian f64 values.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub feature_hash: u64,
    pub params: Vec<f64>,
}

impl Checkpoint {
    pub fn new(spec: &str, params: Vec<f64>) -> Self {
        Self {
            feature_hash: feature_spec_hash(spec),
            params,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(18 + 8 * self.params.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&self.feature_hash.to_le_bytes());
        out.extend_from_slice(&(self.params.len() as u32).to_le_bytes());
        for p in &self.params {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 18 || &bytes[..4] != MAGIC {
            return Err(Error::Corrupt("checkpoint: bad magic or truncated header".into()));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != CHECKPOINT_VERSION {
            return Err(Error::UnsupportedVersion {
                what: "checkpoint",
                found: version,
                expected: CHECKPOINT_VERSION,
            });
        }
        let feature_hash = u64::from_le_bytes(bytes[6..14].try_into().expect("8 bytes"));
        let count = u32::from_le_bytes(bytes[14..18].try_into().expect("4 bytes")) as usize;
        let body = &bytes[18..];
        if body.len() != count * 8 {
            return Err(Error::Corrupt(format!(
                "checkpoint: {} parameter bytes, header implies {}",
                body.len(),
                count * 8
            )));
        }
        let params = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Ok(Self { feature_hash, params })
    }

    /// Fails unless the checkpoint was trained for `spec`.
    pub fn expect_spec(&self, spec: &str) -> Result<()> {
        if self.feature_hash != feature_spec_hash(spec) {
            return Err(Error::config(format!(
                "checkpoint was trained for a different feature layout than {spec}"
            )));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}
