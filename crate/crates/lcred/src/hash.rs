//! Content hashes: SHA-256 over the canonical JSON serialization, hex encoded.

use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn content_hash<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("serializable value");
    hex::encode(Sha256::digest(&bytes))
}

pub fn short(hash: &str) -> &str {
    &hash[..hash.len().min(16)]
}
