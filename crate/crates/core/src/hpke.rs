//! Base-mode, single-shot HPKE (RFC 9180) composed from RustCrypto primitives.
//!
//! Only what ODoH needs lives here: key generation for the four DHKEM groups,
//! `seal`/`open` for one message per context, and the raw AEAD used for
//! response encryption. Each DH group, hash and cipher comes from its
//! dedicated crate; this module owns the labeled key schedule that glues them
//! together.

use aes_gcm::{Aes128Gcm, Aes256Gcm};
use chacha20poly1305::aead::{Aead as _, KeyInit, Payload};
use chacha20poly1305::ChaCha20Poly1305;
use hkdf::{Hkdf, HkdfExtract};
use p256::elliptic_curve::sec1::ToSec1Point;
use sha2::{Sha256, Sha384, Sha512};
use thiserror::Error;

use crate::suite::{Aead, CipherSuite, Kdf, Kem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum HpkeError {
    #[error("invalid public key encoding")]
    InvalidPublicKey,
    #[error("invalid private key encoding")]
    InvalidPrivateKey,
    #[error("diffie-hellman produced a degenerate shared secret")]
    DegenerateSharedSecret,
    #[error("invalid symmetric key length")]
    InvalidKeyLength,
    #[error("AEAD open failed")]
    OpenFailed,
    #[error("AEAD seal failed")]
    SealFailed,
    #[error("system random number generator failed")]
    Rng,
}

const VERSION_LABEL: &[u8] = b"HPKE-v1";
const MODE_BASE: u8 = 0x00;

/// Fills `buf` from the operating system CSPRNG.
pub fn fill_random(buf: &mut [u8]) -> Result<(), HpkeError> {
    getrandom::fill(buf).map_err(|_| HpkeError::Rng)
}

pub fn random_bytes(len: usize) -> Result<Vec<u8>, HpkeError> {
    let mut out = vec![0u8; len];
    fill_random(&mut out)?;
    Ok(out)
}

fn labeled_extract(kdf: Kdf, suite_id: &[u8], salt: &[u8], label: &[u8], ikm: &[u8]) -> Vec<u8> {
    macro_rules! run {
        ($h:ty) => {{
            let mut ext = HkdfExtract::<$h>::new(Some(salt));
            ext.input_ikm(VERSION_LABEL);
            ext.input_ikm(suite_id);
            ext.input_ikm(label);
            ext.input_ikm(ikm);
            ext.finalize().0.to_vec()
        }};
    }
    match kdf {
        Kdf::HkdfSha256 => run!(Sha256),
        Kdf::HkdfSha384 => run!(Sha384),
        Kdf::HkdfSha512 => run!(Sha512),
    }
}

fn labeled_expand(kdf: Kdf, suite_id: &[u8], prk: &[u8], label: &[u8], info: &[u8], len: usize) -> Vec<u8> {
    let len_prefix = (len as u16).to_be_bytes();
    let parts: [&[u8]; 5] = [&len_prefix, VERSION_LABEL, suite_id, label, info];
    let mut okm = vec![0u8; len];
    macro_rules! run {
        ($h:ty) => {{
            // prk always comes from labeled_extract with the same hash, and len
            // never exceeds 255 * hash length.
            let hk = Hkdf::<$h>::from_prk(prk).expect("prk has hash length");
            hk.expand_multi_info(&parts, &mut okm).expect("okm length within bounds");
        }};
    }
    match kdf {
        Kdf::HkdfSha256 => run!(Sha256),
        Kdf::HkdfSha384 => run!(Sha384),
        Kdf::HkdfSha512 => run!(Sha512),
    }
    okm
}

fn kem_suite_id(kem: Kem) -> Vec<u8> {
    let mut id = b"KEM".to_vec();
    id.extend_from_slice(&kem.id().to_be_bytes());
    id
}

fn hpke_suite_id(suite: CipherSuite) -> Vec<u8> {
    let (k, d, a) = suite.ids();
    let mut id = b"HPKE".to_vec();
    id.extend_from_slice(&k.to_be_bytes());
    id.extend_from_slice(&d.to_be_bytes());
    id.extend_from_slice(&a.to_be_bytes());
    id
}

/// Generates a fresh key pair, returning `(secret, public)` encodings.
pub fn generate_keypair(kem: Kem) -> Result<(Vec<u8>, Vec<u8>), HpkeError> {
    let secret = match kem {
        Kem::X25519 => random_bytes(32)?,
        Kem::X448 => {
            let raw = random_bytes(56)?;
            x448::Secret::from_bytes(&raw)
                .ok_or(HpkeError::InvalidPrivateKey)?
                .as_bytes()
                .to_vec()
        }
        Kem::P256 => loop {
            let raw = random_bytes(32)?;
            if p256::SecretKey::from_slice(&raw).is_ok() {
                break raw;
            }
        },
        Kem::P521 => loop {
            let mut raw = random_bytes(66)?;
            raw[0] &= 0x01;
            if p521::SecretKey::from_slice(&raw).is_ok() {
                break raw;
            }
        },
    };
    let public = public_key_from_secret(kem, &secret)?;
    Ok((secret, public))
}

/// Derives the serialized public key for a serialized secret key.
pub fn public_key_from_secret(kem: Kem, secret: &[u8]) -> Result<Vec<u8>, HpkeError> {
    if secret.len() != kem.secret_key_size() {
        return Err(HpkeError::InvalidPrivateKey);
    }
    Ok(match kem {
        Kem::X25519 => {
            let bytes: [u8; 32] = secret.try_into().map_err(|_| HpkeError::InvalidPrivateKey)?;
            let sk = x25519_dalek::StaticSecret::from(bytes);
            x25519_dalek::PublicKey::from(&sk).as_bytes().to_vec()
        }
        Kem::X448 => {
            let sk = x448::Secret::from_bytes(secret).ok_or(HpkeError::InvalidPrivateKey)?;
            x448::PublicKey::from(&sk).as_bytes().to_vec()
        }
        Kem::P256 => {
            let sk = p256::SecretKey::from_slice(secret).map_err(|_| HpkeError::InvalidPrivateKey)?;
            sk.public_key().to_sec1_point(false).as_bytes().to_vec()
        }
        Kem::P521 => {
            let sk = p521::SecretKey::from_slice(secret).map_err(|_| HpkeError::InvalidPrivateKey)?;
            sk.public_key().to_sec1_point(false).as_bytes().to_vec()
        }
    })
}

fn dh(kem: Kem, secret: &[u8], public: &[u8]) -> Result<Vec<u8>, HpkeError> {
    if public.len() != kem.public_key_size() {
        return Err(HpkeError::InvalidPublicKey);
    }
    match kem {
        Kem::X25519 => {
            let sk: [u8; 32] = secret.try_into().map_err(|_| HpkeError::InvalidPrivateKey)?;
            let pk: [u8; 32] = public.try_into().map_err(|_| HpkeError::InvalidPublicKey)?;
            let shared = x25519_dalek::StaticSecret::from(sk).diffie_hellman(&x25519_dalek::PublicKey::from(pk));
            if !shared.was_contributory() {
                return Err(HpkeError::DegenerateSharedSecret);
            }
            Ok(shared.as_bytes().to_vec())
        }
        Kem::X448 => {
            let sk = x448::Secret::from_bytes(secret).ok_or(HpkeError::InvalidPrivateKey)?;
            let pk = x448::PublicKey::from_bytes(public).ok_or(HpkeError::InvalidPublicKey)?;
            let shared = sk.as_diffie_hellman(&pk).ok_or(HpkeError::DegenerateSharedSecret)?;
            Ok(shared.as_bytes().to_vec())
        }
        Kem::P256 => {
            let sk = p256::SecretKey::from_slice(secret).map_err(|_| HpkeError::InvalidPrivateKey)?;
            let pk = p256::PublicKey::from_sec1_bytes(public).map_err(|_| HpkeError::InvalidPublicKey)?;
            let shared = p256::ecdh::diffie_hellman(sk.to_nonzero_scalar(), pk.as_affine());
            Ok(shared.raw_secret_bytes().to_vec())
        }
        Kem::P521 => {
            let sk = p521::SecretKey::from_slice(secret).map_err(|_| HpkeError::InvalidPrivateKey)?;
            let pk = p521::PublicKey::from_sec1_bytes(public).map_err(|_| HpkeError::InvalidPublicKey)?;
            let shared = p521::ecdh::diffie_hellman(sk.to_nonzero_scalar(), pk.as_affine());
            Ok(shared.raw_secret_bytes().to_vec())
        }
    }
}

fn extract_and_expand(kem: Kem, dh: &[u8], kem_context: &[u8]) -> Vec<u8> {
    let suite_id = kem_suite_id(kem);
    let kdf = kem.kdf();
    let eae_prk = labeled_extract(kdf, &suite_id, b"", b"eae_prk", dh);
    labeled_expand(kdf, &suite_id, &eae_prk, b"shared_secret", kem_context, kem.shared_secret_size())
}

/// DHKEM encapsulation with a fresh ephemeral key. Returns `(shared_secret, enc)`.
fn encap(kem: Kem, pk_r: &[u8]) -> Result<(Vec<u8>, Vec<u8>), HpkeError> {
    let (sk_e, pk_e) = generate_keypair(kem)?;
    let dh = dh(kem, &sk_e, pk_r)?;
    let mut kem_context = pk_e.clone();
    kem_context.extend_from_slice(pk_r);
    Ok((extract_and_expand(kem, &dh, &kem_context), pk_e))
}

fn decap(kem: Kem, sk_r: &[u8], enc: &[u8]) -> Result<Vec<u8>, HpkeError> {
    let dh = dh(kem, sk_r, enc)?;
    let pk_r = public_key_from_secret(kem, sk_r)?;
    let mut kem_context = enc.to_vec();
    kem_context.extend_from_slice(&pk_r);
    Ok(extract_and_expand(kem, &dh, &kem_context))
}

/// Base-mode key schedule. Returns `(key, base_nonce)`.
fn key_schedule(suite: CipherSuite, shared_secret: &[u8], info: &[u8]) -> (Vec<u8>, Vec<u8>) {
    let suite_id = hpke_suite_id(suite);
    let kdf = suite.kdf;
    let psk_id_hash = labeled_extract(kdf, &suite_id, b"", b"psk_id_hash", b"");
    let info_hash = labeled_extract(kdf, &suite_id, b"", b"info_hash", info);
    let mut context = vec![MODE_BASE];
    context.extend_from_slice(&psk_id_hash);
    context.extend_from_slice(&info_hash);
    let secret = labeled_extract(kdf, &suite_id, shared_secret, b"secret", b"");
    let key = labeled_expand(kdf, &suite_id, &secret, b"key", &context, suite.key_size());
    let nonce = labeled_expand(kdf, &suite_id, &secret, b"base_nonce", &context, suite.nonce_size());
    (key, nonce)
}

/// Single-shot seal to `pk_r`. Returns `(enc, ciphertext)`.
pub fn seal(
    suite: CipherSuite,
    pk_r: &[u8],
    info: &[u8],
    aad: &[u8],
    plaintext: &[u8],
) -> Result<(Vec<u8>, Vec<u8>), HpkeError> {
    let (shared_secret, enc) = encap(suite.kem, pk_r)?;
    let (key, nonce) = key_schedule(suite, &shared_secret, info);
    let ct = aead_seal(suite.aead, &key, &nonce, aad, plaintext)?;
    Ok((enc, ct))
}

/// Single-shot open with the recipient secret key.
pub fn open(
    suite: CipherSuite,
    sk_r: &[u8],
    enc: &[u8],
    info: &[u8],
    aad: &[u8],
    ciphertext: &[u8],
) -> Result<Vec<u8>, HpkeError> {
    let shared_secret = decap(suite.kem, sk_r, enc).map_err(|e| match e {
        HpkeError::InvalidPrivateKey => e,
        _ => HpkeError::OpenFailed,
    })?;
    let (key, nonce) = key_schedule(suite, &shared_secret, info);
    aead_open(suite.aead, &key, &nonce, aad, ciphertext)
}

pub fn aead_seal(aead: Aead, key: &[u8], nonce: &[u8], aad: &[u8], plaintext: &[u8]) -> Result<Vec<u8>, HpkeError> {
    if key.len() != aead.key_size() {
        return Err(HpkeError::InvalidKeyLength);
    }
    let payload = Payload { msg: plaintext, aad };
    macro_rules! run {
        ($c:ty) => {{
            let cipher = <$c>::new_from_slice(key).map_err(|_| HpkeError::InvalidKeyLength)?;
            let nonce = nonce.try_into().map_err(|_| HpkeError::SealFailed)?;
            cipher.encrypt(&nonce, payload).map_err(|_| HpkeError::SealFailed)
        }};
    }
    match aead {
        Aead::Aes128Gcm => run!(Aes128Gcm),
        Aead::Aes256Gcm => run!(Aes256Gcm),
        Aead::ChaCha20Poly1305 => run!(ChaCha20Poly1305),
    }
}

pub fn aead_open(aead: Aead, key: &[u8], nonce: &[u8], aad: &[u8], ciphertext: &[u8]) -> Result<Vec<u8>, HpkeError> {
    if key.len() != aead.key_size() {
        return Err(HpkeError::InvalidKeyLength);
    }
    let payload = Payload { msg: ciphertext, aad };
    macro_rules! run {
        ($c:ty) => {{
            let cipher = <$c>::new_from_slice(key).map_err(|_| HpkeError::InvalidKeyLength)?;
            let nonce = nonce.try_into().map_err(|_| HpkeError::OpenFailed)?;
            cipher.decrypt(&nonce, payload).map_err(|_| HpkeError::OpenFailed)
        }};
    }
    match aead {
        Aead::Aes128Gcm => run!(Aes128Gcm),
        Aead::Aes256Gcm => run!(Aes256Gcm),
        Aead::ChaCha20Poly1305 => run!(ChaCha20Poly1305),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hex(s: &str) -> Vec<u8> {
        (0..s.len()).step_by(2).map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap()).collect()
    }

    #[test]
    fn key_sizes_match_registry() {
        for kem in Kem::ALL {
            let (sk, pk) = generate_keypair(kem).unwrap();
            assert_eq!(sk.len(), kem.secret_key_size(), "{kem:?}");
            assert_eq!(pk.len(), kem.public_key_size(), "{kem:?}");
        }
    }

    #[test]
    fn seal_open_every_suite() {
        for suite in CipherSuite::all() {
            let (sk, pk) = generate_keypair(suite.kem).unwrap();
            let (enc, ct) = seal(suite, &pk, b"info", b"aad", b"hello").unwrap();
            assert_eq!(enc.len(), suite.enc_size());
            assert_eq!(ct.len(), 5 + suite.tag_size());
            assert_eq!(open(suite, &sk, &enc, b"info", b"aad", &ct).unwrap(), b"hello");
            assert_eq!(open(suite, &sk, &enc, b"other", b"aad", &ct), Err(HpkeError::OpenFailed));
            assert_eq!(open(suite, &sk, &enc, b"info", b"", &ct), Err(HpkeError::OpenFailed));
        }
    }

    // RFC 9180 A.1.1 (DHKEM(X25519, HKDF-SHA256), HKDF-SHA256, AES-128-GCM): the
    // recipient secret, encapsulated key and first ciphertext of the base-mode vector.
    #[test]
    fn rfc9180_base_vector_opens() {
        let sk_r = hex("4612c550263fc8ad58375df3f557aac531d26850903e55a9f23f21d8534e8ac8");
        let enc = hex("37fda3567bdbd628e88668c3c8d7e97d1d1253b6d4ea6d44c150f741f1bf4431");
        let info = hex("4f6465206f6e2061204772656369616e2055726e");
        let aad = hex("436f756e742d30");
        let ct = hex("f938558b5d72f1a23810b4be2ab4f84331acc02fc97babc53a52ae8218a355a96d8770ac83d07bea87e13c512a");
        let pt = open(CipherSuite::DEFAULT, &sk_r, &enc, &info, &aad, &ct).unwrap();
        assert_eq!(pt, b"Beauty is truth, truth beauty");
        let pk_r = public_key_from_secret(Kem::X25519, &sk_r).unwrap();
        assert_eq!(pk_r, hex("3948cfe0ad1ddb695d780e59077195da6c56506b027329794ab02bca80815c4d"));
    }

    #[test]
    fn wrong_key_lengths() {
        assert_eq!(aead_seal(Aead::Aes128Gcm, &[0; 15], &[0; 12], b"", b""), Err(HpkeError::InvalidKeyLength));
        assert_eq!(public_key_from_secret(Kem::X448, &[1; 32]), Err(HpkeError::InvalidPrivateKey));
        let (_, pk) = generate_keypair(Kem::X25519).unwrap();
        assert_eq!(
            seal(CipherSuite::new(Kem::P256, Kdf::HkdfSha256, Aead::Aes128Gcm), &pk, b"", b"", b"").unwrap_err(),
            HpkeError::InvalidPublicKey
        );
    }
}
