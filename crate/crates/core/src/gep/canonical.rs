//! Canonical serialization used for content addressing.
//!
//! The canonical form of a value is its JSON encoding with:
//!
//! * object keys sorted lexicographically (byte order) at every depth,
//! * no insignificant whitespace,
//! * UTF-8 output,
//! * floats written in shortest round-trip decimal form (never locale-formatted),
//! * timestamps as RFC 3339 UTC strings.
//!
//! The asset id is the lowercase hex SHA-256 of these bytes. Ids produced here
//! are a repository convention and do not match ids issued by other hubs.

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::AssetId;

/// Serialize `value` canonically.
///
/// Panics only if the value cannot be represented as JSON (map keys that are
/// not strings), which none of the asset types can produce.
pub fn canonical_bytes<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    // serde_json's Value map is a BTreeMap unless `preserve_order` is enabled,
    // so routing through Value sorts keys at every level.
    let tree = serde_json::to_value(value).expect("asset types serialize to JSON");
    serde_json::to_vec(&tree).expect("JSON value serializes")
}

pub fn hash_asset(payload: &[u8]) -> AssetId {
    AssetId::from_digest(&Sha256::digest(payload))
}
