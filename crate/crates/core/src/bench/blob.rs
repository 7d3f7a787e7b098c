//! Trained-model files: a versioned bincode blob plus a JSON sidecar.
//!
//! Blob layout: magic `CLVY`, little-endian `u16` version, then the bincode
//! payload. The sidecar lives next to the blob as `<file>.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::LinearGainPolicy;
use crate::error::{Error, Result};
use crate::learn::Regressor;

pub const MODEL_MAGIC: &[u8; 4] = b"CLVY";
pub const MODEL_VERSION: u16 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ModelPayload {
    /// One regressor for every step (search policies, aggregation variants).
    Stationary(Regressor),
    /// One regressor per step (forward-training variants).
    PerStep(Vec<Regressor>),
    /// Linear weights over the six information gains.
    LinearGains(LinearGainPolicy),
}

impl ModelPayload {
    pub fn schema_id(&self) -> String {
        match self {
            ModelPayload::Stationary(r) => r.schema().id(),
            ModelPayload::PerStep(rs) => rs.first().map_or_else(|| "empty".into(), |r| r.schema().id()),
            ModelPayload::LinearGains(_) => "ipp-gains-v1".into(),
        }
    }

    pub fn regressor_kind(&self) -> String {
        match self {
            ModelPayload::Stationary(r) => r.kind().name().into(),
            ModelPayload::PerStep(rs) => rs.first().map_or("none", |r| r.kind().name()).into(),
            ModelPayload::LinearGains(_) => "linear-gains".into(),
        }
    }

    /// The regressors to score with, in step order.
    pub fn regressors(&self) -> &[Regressor] {
        match self {
            ModelPayload::Stationary(r) => std::slice::from_ref(r),
            ModelPayload::PerStep(rs) => rs,
            ModelPayload::LinearGains(_) => &[],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub version: u16,
    /// Training method tag, e.g. `sail` or `ipp-reward-agg`.
    pub method: String,
    pub schema_id: String,
    pub regressor_kind: String,
    pub train_config_hash: String,
}

impl ModelMeta {
    pub fn new(method: impl Into<String>, payload: &ModelPayload, train_config_hash: impl Into<String>) -> Self {
        ModelMeta {
            version: MODEL_VERSION,
            method: method.into(),
            schema_id: payload.schema_id(),
            regressor_kind: payload.regressor_kind(),
            train_config_hash: train_config_hash.into(),
        }
    }
}

/// First 16 hex digits of the SHA-256 of `value`'s JSON form.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("config serializes");
    let digest = Sha256::digest(&json);
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sidecar_path(blob: &Path) -> PathBuf {
    let mut s = blob.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn encode_model(payload: &ModelPayload) -> Result<Vec<u8>> {
    let mut out = MODEL_MAGIC.to_vec();
    out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    bincode::serialize_into(&mut out, payload).map_err(|e| Error::format("model blob", e.to_string()))?;
    Ok(out)
}

pub fn decode_model(bytes: &[u8]) -> Result<ModelPayload> {
    if bytes.len() < 6 || &bytes[..4] != MODEL_MAGIC {
        return Err(Error::format("model blob", "bad magic"));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != MODEL_VERSION {
        return Err(Error::format("model blob", format!("unsupported version {version}")));
    }
    bincode::deserialize(&bytes[6..]).map_err(|e| Error::format("model blob", e.to_string()))
}

pub fn save_model(path: &Path, payload: &ModelPayload, meta: &ModelMeta) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, encode_model(payload)?).map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    let json = serde_json::to_string_pretty(meta).expect("meta serializes");
    fs::write(&side, json + "\n").map_err(|e| Error::io(&side, e))
}

/// Loads a blob and its sidecar, checking that they agree.
pub fn load_model(path: &Path) -> Result<(ModelPayload, ModelMeta)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let payload = decode_model(&bytes)?;
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let meta: ModelMeta = serde_json::from_str(&text).map_err(|e| Error::format("model metadata", e.to_string()))?;
    if meta.schema_id != payload.schema_id() {
        return Err(Error::format(
            "model metadata",
            format!("sidecar schema {} does not match blob schema {}", meta.schema_id, payload.schema_id()),
        ));
    }
    Ok((payload, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::{RegressorConfig, Schema};

    #[test]
    fn round_trip_preserves_predictions() {
        let r = Regressor::new(Schema::Search, RegressorConfig::default(), 4).unwrap();
        let payload = ModelPayload::Stationary(r.clone());
        let meta = ModelMeta::new("sail", &payload, config_hash(&RegressorConfig::default()));
        assert_eq!(meta.schema_id, "search-v1");
        assert_eq!(meta.regressor_kind, "mlp");
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m/sail.bin");
        save_model(&p, &payload, &meta).unwrap();
        let (back, m2) = load_model(&p).unwrap();
        assert_eq!(m2, meta);
        let x = [0.3; 17];
        let ModelPayload::Stationary(b) = back else { panic!() };
        assert_eq!(b.predict_slice(&x).to_bits(), r.predict_slice(&x).to_bits());
        assert!(dir.path().join("m/sail.bin.json").exists());
    }

    #[test]
    fn rejects_bad_magic_and_version() {
        let payload = ModelPayload::LinearGains(LinearGainPolicy { theta: [1.0; 6] });
        let mut bytes = encode_model(&payload).unwrap();
        assert_eq!(decode_model(&bytes).unwrap(), payload);
        bytes[4] = 9;
        assert!(decode_model(&bytes).is_err());
        assert!(decode_model(b"P5\n").is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = RegressorConfig::default();
        let mut b = a.clone();
        b.lr = 0.02;
        assert_eq!(config_hash(&a), config_hash(&a.clone()));
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 16);
    }
}
