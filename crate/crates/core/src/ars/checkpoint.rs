//! Binary policy checkpoints.
//!
//! Layout: the 8-byte magic `ECOARSPL`, then little-endian `f64` values:
//! format version, p, action count (always 1), θ (p values), normalisation
//! mean (p), normalisation variance (p), observation count. A JSON sidecar
//! next to the file (`<file>.json`) holds the configuration that produced it.

use std::path::{Path, PathBuf};

use super::{LinearPolicy, RunningStat};
use crate::error::PolicyError;

pub const MAGIC: &[u8; 8] = b"ECOARSPL";
pub const FORMAT_VERSION: f64 = 1.0;

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn encode(policy: &LinearPolicy) -> Vec<u8> {
    let p = policy.dim();
    let mut values = Vec::with_capacity(4 + 3 * p);
    values.extend([FORMAT_VERSION, p as f64, 1.0]);
    values.extend(&policy.theta);
    values.extend(policy.norm_mean());
    values.extend(policy.norm_var());
    values.push(policy.obs_count() as f64);

    let mut out = Vec::with_capacity(MAGIC.len() + 8 * values.len());
    out.extend_from_slice(MAGIC);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<LinearPolicy, PolicyError> {
    let malformed = |m: &str| PolicyError::Malformed(m.to_string());
    let body = bytes
        .strip_prefix(MAGIC.as_slice())
        .ok_or_else(|| malformed("missing magic header"))?;
    if body.len() % 8 != 0 {
        return Err(malformed("payload is not a whole number of f64 values"));
    }
    let values: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    if values.len() < 3 {
        return Err(malformed("truncated header"));
    }
    if values[0] != FORMAT_VERSION {
        return Err(PolicyError::Malformed(format!("unsupported version {}", values[0])));
    }
    let p = values[1];
    if p.fract() != 0.0 || p < 1.0 {
        return Err(malformed("bad dimension"));
    }
    let p = p as usize;
    if values[2] != 1.0 {
        return Err(malformed("only single-output policies are supported"));
    }
    if values.len() != 3 + 3 * p + 1 {
        return Err(PolicyError::Malformed(format!(
            "expected {} values for p={p}, found {}",
            3 + 3 * p + 1,
            values.len()
        )));
    }
    let theta = values[3..3 + p].to_vec();
    let mean = values[3 + p..3 + 2 * p].to_vec();
    let var = &values[3 + 2 * p..3 + 3 * p];
    let count = values[3 + 3 * p];
    if count < 0.0 || count.fract() != 0.0 {
        return Err(malformed("bad observation count"));
    }
    let count = count as u64;
    let stats = if count == 0 {
        RunningStat::new(p)
    } else {
        RunningStat::from_parts(count, mean, var)
    };
    LinearPolicy::from_parts(theta, stats)
}

/// Writes the checkpoint and its JSON sidecar.
pub fn save(path: &Path, policy: &LinearPolicy, sidecar: &serde_json::Value) -> Result<(), PolicyError> {
    std::fs::write(path, encode(policy))?;
    let text = serde_json::to_string_pretty(sidecar).map_err(|e| PolicyError::Malformed(e.to_string()))?;
    std::fs::write(sidecar_path(path), text)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<LinearPolicy, PolicyError> {
    decode(&std::fs::read(path)?)
}

/// Loads a checkpoint and checks it against the expected observation size.
pub fn load_for(path: &Path, expected_dim: usize) -> Result<LinearPolicy, PolicyError> {
    let policy = load(path)?;
    if policy.dim() != expected_dim {
        return Err(PolicyError::DimensionMismatch {
            expected: policy.dim(),
            found: expected_dim,
        });
    }
    Ok(policy)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_policy() -> LinearPolicy {
        let mut stat = RunningStat::new(3);
        stat.push(&[1.0, 2.0, 3.0]);
        stat.push(&[2.0, 0.5, -3.0]);
        LinearPolicy::from_parts(vec![0.1, -0.25, 3.5], stat).unwrap()
    }

    #[test]
    fn round_trip() {
        let p = sample_policy();
        let back = decode(&encode(&p)).unwrap();
        assert_eq!(back.theta, p.theta);
        assert_eq!(back.norm_mean(), p.norm_mean());
        assert_eq!(back.norm_var(), p.norm_var());
        assert_eq!(back.obs_count(), 2);
    }

    #[test]
    fn zero_policy_round_trip() {
        let p = LinearPolicy::zeros(20);
        assert_eq!(decode(&encode(&p)).unwrap(), p);
        assert_eq!(encode(&p).len(), 8 + 8 * (3 + 60 + 1));
    }

    #[test]
    fn rejects_garbage() {
        assert!(decode(b"nonsense").is_err());
        let mut bytes = encode(&sample_policy());
        bytes.truncate(bytes.len() - 8);
        assert!(decode(&bytes).is_err());
    }

    #[test]
    fn file_round_trip_with_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("policy.bin");
        save(&path, &sample_policy(), &serde_json::json!({"omega1": 6.0})).unwrap();
        assert!(sidecar_path(&path).exists());
        assert_eq!(load(&path).unwrap().theta, sample_policy().theta);
        let err = load_for(&path, 5).unwrap_err();
        assert!(err.to_string().contains("p=3") && err.to_string().contains("p=5"));
    }
}
