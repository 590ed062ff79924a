//! Run manifests: what a report was computed from.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub inputs: Vec<InputDigest>,
    pub catalogs: Vec<String>,
    pub outputs: Vec<String>,
    /// Digest over every input digest, in order.
    pub input_digest: String,
}

impl Default for RunManifest {
    fn default() -> Self {
        RunManifest::new("")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: Vec::new(),
            catalogs: Vec::new(),
            outputs: Vec::new(),
            input_digest: sha256_hex(b""),
        }
    }

    pub fn add_input(&mut self, path: &str, content: &[u8]) {
        self.inputs.push(InputDigest {
            path: path.to_string(),
            sha256: sha256_hex(content),
        });
        let mut h = Sha256::new();
        for i in &self.inputs {
            h.update(i.sha256.as_bytes());
            h.update(b"\n");
        }
        self.input_digest = hex::encode(h.finalize());
    }

    pub fn to_json(&self) -> String {
        crate::doc::to_pretty_json(self)
    }
}
