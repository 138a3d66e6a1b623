use std::collections::BTreeMap;

use hmac::{Hmac, Mac};
use sha2::Sha256;

use super::{AgentId, AssetId};

/// Detached authenticator over an asset digest.
pub trait Signer {
    fn sign(&self, agent: &AgentId, digest: &AssetId) -> Option<String>;

    fn verify(&self, agent: &AgentId, digest: &AssetId, signature: &str) -> bool {
        self.sign(agent, digest).is_some_and(|s| s == signature)
    }
}

/// HMAC-SHA256 keyed by a per-agent secret.
#[derive(Debug, Clone, Default)]
pub struct KeyedHashSigner {
    secrets: BTreeMap<AgentId, Vec<u8>>,
}

impl KeyedHashSigner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_secret(mut self, agent: AgentId, secret: impl Into<Vec<u8>>) -> Self {
        self.secrets.insert(agent, secret.into());
        self
    }
}

impl Signer for KeyedHashSigner {
    fn sign(&self, agent: &AgentId, digest: &AssetId) -> Option<String> {
        let secret = self.secrets.get(agent)?;
        let mut mac = Hmac::<Sha256>::new_from_slice(secret).expect("HMAC accepts any key length");
        mac.update(digest.as_str().as_bytes());
        Some(AssetId::from_digest(&mac.finalize().into_bytes()).into())
    }
}
