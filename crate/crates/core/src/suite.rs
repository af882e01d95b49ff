//! HPKE algorithm identifiers and the size properties derived from them.

use std::fmt;

use thiserror::Error;

/// Error returned when a suite references an identifier outside the registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("unsupported cipher suite (kem={kem:#06x}, kdf={kdf:#06x}, aead={aead:#06x})")]
pub struct UnsupportedSuite {
    pub kem: u16,
    pub kdf: u16,
    pub aead: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kem {
    P256,
    P521,
    X25519,
    X448,
}

impl Kem {
    pub const ALL: [Kem; 4] = [Kem::P256, Kem::P521, Kem::X25519, Kem::X448];

    pub fn id(self) -> u16 {
        match self {
            Kem::P256 => 0x0010,
            Kem::P521 => 0x0012,
            Kem::X25519 => 0x0020,
            Kem::X448 => 0x0021,
        }
    }

    pub fn from_id(id: u16) -> Option<Self> {
        Kem::ALL.into_iter().find(|k| k.id() == id)
    }

    /// Size of a serialized public key, which is also the size of `enc`.
    pub fn public_key_size(self) -> usize {
        match self {
            Kem::P256 => 65,
            Kem::P521 => 133,
            Kem::X25519 => 32,
            Kem::X448 => 56,
        }
    }

    pub fn enc_size(self) -> usize {
        self.public_key_size()
    }

    pub fn secret_key_size(self) -> usize {
        match self {
            Kem::P256 => 32,
            Kem::P521 => 66,
            Kem::X25519 => 32,
            Kem::X448 => 56,
        }
    }

    /// Length of the KEM shared secret (`Nsecret`).
    pub fn shared_secret_size(self) -> usize {
        match self {
            Kem::P256 | Kem::X25519 => 32,
            Kem::P521 | Kem::X448 => 64,
        }
    }

    /// The KDF bound to the DHKEM construction for this group.
    pub fn kdf(self) -> Kdf {
        match self {
            Kem::P256 | Kem::X25519 => Kdf::HkdfSha256,
            Kem::P521 | Kem::X448 => Kdf::HkdfSha512,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kem::P256 => "P-256",
            Kem::P521 => "P-521",
            Kem::X25519 => "X25519",
            Kem::X448 => "X448",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kdf {
    HkdfSha256,
    HkdfSha384,
    HkdfSha512,
}

impl Kdf {
    pub const ALL: [Kdf; 3] = [Kdf::HkdfSha256, Kdf::HkdfSha384, Kdf::HkdfSha512];

    pub fn id(self) -> u16 {
        match self {
            Kdf::HkdfSha256 => 0x0001,
            Kdf::HkdfSha384 => 0x0002,
            Kdf::HkdfSha512 => 0x0003,
        }
    }

    pub fn from_id(id: u16) -> Option<Self> {
        Kdf::ALL.into_iter().find(|k| k.id() == id)
    }

    pub fn hash_size(self) -> usize {
        match self {
            Kdf::HkdfSha256 => 32,
            Kdf::HkdfSha384 => 48,
            Kdf::HkdfSha512 => 64,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kdf::HkdfSha256 => "HKDF-SHA256",
            Kdf::HkdfSha384 => "HKDF-SHA384",
            Kdf::HkdfSha512 => "HKDF-SHA512",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Aead {
    Aes128Gcm,
    Aes256Gcm,
    ChaCha20Poly1305,
}

impl Aead {
    pub const ALL: [Aead; 3] = [Aead::Aes128Gcm, Aead::Aes256Gcm, Aead::ChaCha20Poly1305];

    pub fn id(self) -> u16 {
        match self {
            Aead::Aes128Gcm => 0x0001,
            Aead::Aes256Gcm => 0x0002,
            Aead::ChaCha20Poly1305 => 0x0003,
        }
    }

    pub fn from_id(id: u16) -> Option<Self> {
        Aead::ALL.into_iter().find(|a| a.id() == id)
    }

    pub fn key_size(self) -> usize {
        match self {
            Aead::Aes128Gcm => 16,
            Aead::Aes256Gcm | Aead::ChaCha20Poly1305 => 32,
        }
    }

    pub fn nonce_size(self) -> usize {
        12
    }

    pub fn tag_size(self) -> usize {
        16
    }

    pub fn name(self) -> &'static str {
        match self {
            Aead::Aes128Gcm => "AES-128-GCM",
            Aead::Aes256Gcm => "AES-256-GCM",
            Aead::ChaCha20Poly1305 => "ChaCha20-Poly1305",
        }
    }
}

/// A registered (KEM, KDF, AEAD) triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CipherSuite {
    pub kem: Kem,
    pub kdf: Kdf,
    pub aead: Aead,
}

impl CipherSuite {
    /// X25519 / HKDF-SHA256 / AES-128-GCM.
    pub const DEFAULT: CipherSuite = CipherSuite {
        kem: Kem::X25519,
        kdf: Kdf::HkdfSha256,
        aead: Aead::Aes128Gcm,
    };

    pub fn new(kem: Kem, kdf: Kdf, aead: Aead) -> Self {
        Self { kem, kdf, aead }
    }

    pub fn from_ids(kem: u16, kdf: u16, aead: u16) -> Result<Self, UnsupportedSuite> {
        match (Kem::from_id(kem), Kdf::from_id(kdf), Aead::from_id(aead)) {
            (Some(kem), Some(kdf), Some(aead)) => Ok(Self { kem, kdf, aead }),
            _ => Err(UnsupportedSuite { kem, kdf, aead }),
        }
    }

    /// Every registered combination, 36 in total.
    pub fn all() -> impl Iterator<Item = CipherSuite> {
        Kem::ALL.into_iter().flat_map(|kem| {
            Kdf::ALL
                .into_iter()
                .flat_map(move |kdf| Aead::ALL.into_iter().map(move |aead| CipherSuite { kem, kdf, aead }))
        })
    }

    pub fn ids(self) -> (u16, u16, u16) {
        (self.kem.id(), self.kdf.id(), self.aead.id())
    }

    pub fn key_size(self) -> usize {
        self.aead.key_size()
    }

    pub fn nonce_size(self) -> usize {
        self.aead.nonce_size()
    }

    pub fn tag_size(self) -> usize {
        self.aead.tag_size()
    }

    pub fn enc_size(self) -> usize {
        self.kem.enc_size()
    }
}

impl Default for CipherSuite {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl fmt::Display for CipherSuite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.kem.name(), self.kdf.name(), self.aead.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_roundtrips_ids() {
        assert_eq!(CipherSuite::all().count(), 36);
        for suite in CipherSuite::all() {
            let (k, d, a) = suite.ids();
            assert_eq!(CipherSuite::from_ids(k, d, a), Ok(suite));
        }
    }

    #[test]
    fn derived_sizes() {
        let sizes: Vec<_> = Kem::ALL.iter().map(|k| k.enc_size()).collect();
        assert_eq!(sizes, vec![65, 133, 32, 56]);
        let keys: Vec<_> = Aead::ALL.iter().map(|a| a.key_size()).collect();
        assert_eq!(keys, vec![16, 32, 32]);
        assert!(Aead::ALL.iter().all(|a| a.nonce_size() == 12 && a.tag_size() == 16));
    }

    #[test]
    fn unregistered_ids_rejected() {
        assert!(CipherSuite::from_ids(0xFFFF, 1, 1).is_err());
        assert!(CipherSuite::from_ids(0x20, 4, 1).is_err());
        assert!(CipherSuite::from_ids(0x20, 1, 0xFFFF).is_err());
    }
}
