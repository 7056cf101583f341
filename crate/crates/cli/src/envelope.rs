use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// One per run, printed to stdout.
#[derive(Debug, Serialize)]
pub struct ResultEnvelope {
    pub command: String,
    /// SHA-256 over the command parameters, config snapshot and input files.
    pub input_digest: String,
    pub config: BTreeMap<&'static str, String>,
    pub outputs: Value,
    pub version: &'static str,
}

#[derive(Default)]
pub struct InputDigest(Sha256);

impl InputDigest {
    /// Adds a length-prefixed chunk so concatenations cannot collide.
    pub fn add(&mut self, bytes: &[u8]) {
        self.0.update((bytes.len() as u64).to_le_bytes());
        self.0.update(bytes);
    }

    pub fn finish(self) -> String {
        hex::encode(self.0.finalize())
    }
}
