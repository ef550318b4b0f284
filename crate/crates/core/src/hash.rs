//! Content hashing for stable identifiers.
//!
//! Identifiers (mention ids, cluster ids, minted IRIs) are SHA-256 digests of
//! a length-prefixed field encoding, so that `("ab", "c")` and `("a", "bc")`
//! never collide. Embedding lookups use the plain digest of the normalized
//! text instead, which is easy to reproduce from other languages.

use alloc::string::String;
use sha2::{Digest, Sha256};

/// Number of digest bytes kept in compact identifiers (128 bits).
pub const ID_BYTES: usize = 16;

/// Incremental hasher over a sequence of tagged fields.
#[derive(Clone, Default)]
pub struct FieldHasher {
    inner: Sha256,
}

impl FieldHasher {
    /// Starts a hash in the given domain (e.g. `"mention"`), so that equal
    /// field lists in different domains yield different ids.
    pub fn new(domain: &str) -> Self {
        let mut h = Self { inner: Sha256::new() };
        h.field(domain);
        h
    }

    pub fn field(&mut self, value: &str) -> &mut Self {
        self.inner.update((value.len() as u64).to_le_bytes());
        self.inner.update(value.as_bytes());
        self
    }

    pub fn list<'a, I>(&mut self, values: I) -> &mut Self
    where
        I: IntoIterator<Item = &'a str>,
        I::IntoIter: ExactSizeIterator,
    {
        let values = values.into_iter();
        self.inner.update((values.len() as u64).to_le_bytes());
        for v in values {
            self.field(v);
        }
        self
    }

    /// Lowercase hex of the first [`ID_BYTES`] bytes of the digest.
    pub fn finish_id(&self) -> String {
        let digest = self.inner.clone().finalize();
        hex::encode(&digest[..ID_BYTES])
    }
}

/// Full lowercase SHA-256 hex digest of the UTF-8 bytes of `text`.
pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Raw 32-byte SHA-256 digest of the concatenated parts.
pub fn sha256_bytes(parts: &[&[u8]]) -> [u8; 32] {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
    }
    h.finalize().into()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_boundaries_matter() {
        let a = FieldHasher::new("t").field("ab").field("c").finish_id();
        let b = FieldHasher::new("t").field("a").field("bc").finish_id();
        assert_ne!(a, b);
        assert_eq!(a.len(), 2 * ID_BYTES);
    }

    #[test]
    fn domain_separates() {
        let a = FieldHasher::new("person").field("x").finish_id();
        let b = FieldHasher::new("quote").field("x").finish_id();
        assert_ne!(a, b);
    }

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
