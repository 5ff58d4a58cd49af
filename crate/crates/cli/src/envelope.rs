use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::job::JobSpec;
use crate::JobError;

pub const TOOL: &str = "amenlab";

/// A job, its result, and a SHA-256 digest of the canonical JSON of both.
/// There are no timestamps, so deterministic jobs give identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope {
    pub tool: String,
    pub version: String,
    pub job: JobSpec,
    pub result: Value,
    pub digest: String,
}

impl Envelope {
    pub fn new(job: JobSpec, result: Value) -> Result<Self, JobError> {
        let mut envelope = Envelope {
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            job,
            result,
            digest: String::new(),
        };
        envelope.digest = envelope.compute_digest()?;
        Ok(envelope)
    }

    /// Hex SHA-256 of the compact, key-sorted JSON of everything but the digest.
    pub fn compute_digest(&self) -> Result<String, JobError> {
        let canonical = json!({
            "tool": self.tool,
            "version": self.version,
            "job": serde_json::to_value(&self.job)?,
            "result": self.result,
        });
        let bytes = serde_json::to_vec(&canonical)?;
        Ok(hex::encode(Sha256::digest(&bytes)))
    }

    pub fn digest_matches(&self) -> Result<bool, JobError> {
        Ok(self.compute_digest()? == self.digest)
    }

    pub fn to_pretty(&self) -> Result<String, JobError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use amenlab_core::group::GroupDescriptor;

    fn job() -> JobSpec {
        JobSpec::WeightedFolner {
            group: GroupDescriptor::integers(),
            m: 1,
            n: 2,
        }
    }

    #[test]
    fn digest_ignores_key_order_and_detects_edits() {
        let a = Envelope::new(job(), json!({"x": 1, "y": [1, 2]})).unwrap();
        let b = Envelope::new(job(), serde_json::from_str(r#"{"y":[1,2],"x":1}"#).unwrap()).unwrap();
        assert_eq!(a.digest, b.digest);
        assert!(a.digest_matches().unwrap());
        let mut tampered = a.clone();
        tampered.result = json!({"x": 2, "y": [1, 2]});
        assert!(!tampered.digest_matches().unwrap());
    }

    #[test]
    fn envelope_round_trips() {
        let a = Envelope::new(job(), json!({"value": "4/3"})).unwrap();
        let text = a.to_pretty().unwrap();
        let back: Envelope = serde_json::from_str(&text).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.to_pretty().unwrap(), text);
    }
}
