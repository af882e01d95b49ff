//! HPKE base mode checked against the RFC 9180 test vectors and, for every
//! suite the `hpke` crate implements, against that crate in both directions.

use hpke::aead::{AesGcm128, AesGcm256, ChaCha20Poly1305};
use hpke::kdf::{HkdfSha256, HkdfSha384, HkdfSha512};
use hpke::kem::{DhP256HkdfSha256, DhP521HkdfSha512, X25519HkdfSha256};
use hpke::{Deserializable, OpModeR, OpModeS, Serializable};
use odoh::hpke::{open, public_key_from_secret, seal};
use odoh::suite::{Aead, CipherSuite, Kdf, Kem};
use serde::Deserialize;

#[derive(Deserialize)]
#[allow(non_snake_case)]
struct Vector {
    kem_id: u16,
    kdf_id: u16,
    aead_id: u16,
    info: String,
    skRm: String,
    pkRm: String,
    enc: String,
    aad: String,
    ct: String,
    pt: String,
}

fn h(s: &str) -> Vec<u8> {
    hex::decode(s).expect("fixture hex")
}

#[test]
fn rfc9180_base_vectors_open() {
    let vectors: Vec<Vector> = serde_json::from_str(include_str!("data/hpke_base_vectors.json")).unwrap();
    assert!(vectors.len() >= 24);
    let mut kems = std::collections::BTreeSet::new();
    for v in &vectors {
        let suite = CipherSuite::from_ids(v.kem_id, v.kdf_id, v.aead_id).unwrap();
        kems.insert(v.kem_id);
        assert_eq!(public_key_from_secret(suite.kem, &h(&v.skRm)).unwrap(), h(&v.pkRm), "{suite}");
        let pt = open(suite, &h(&v.skRm), &h(&v.enc), &h(&v.info), &h(&v.aad), &h(&v.ct)).unwrap();
        assert_eq!(pt, h(&v.pt), "{suite}");

        let mut bad = h(&v.ct);
        bad[0] ^= 0x80;
        assert!(open(suite, &h(&v.skRm), &h(&v.enc), &h(&v.info), &h(&v.aad), &bad).is_err());
    }
    assert_eq!(kems.into_iter().collect::<Vec<_>>(), [0x10, 0x12, 0x20, 0x21]);
}

fn cross_check<A, K, M>(suite: CipherSuite)
where
    A: hpke::aead::Aead,
    K: hpke::kdf::Kdf,
    M: hpke::Kem,
{
    let info = b"odoh query";
    let aad = b"key id";
    let pt = b"a DNS message of modest length";
    let (sk, pk) = M::gen_keypair();
    let sk_bytes = sk.to_bytes().to_vec();
    let pk_bytes = pk.to_bytes().to_vec();
    assert_eq!(public_key_from_secret(suite.kem, &sk_bytes).unwrap(), pk_bytes, "{suite}");

    let (enc, ct) = hpke::single_shot_seal::<A, K, M>(&OpModeS::Base, &pk, info, pt, aad).unwrap();
    let opened = open(suite, &sk_bytes, &enc.to_bytes(), info, aad, &ct).unwrap();
    assert_eq!(opened, pt, "{suite}: reference seal, local open");

    let (enc, ct) = seal(suite, &pk_bytes, info, aad, pt).unwrap();
    assert_eq!(enc.len(), suite.enc_size());
    let enc = M::EncappedKey::from_bytes(&enc).unwrap();
    let opened = hpke::single_shot_open::<A, K, M>(&OpModeR::Base, &sk, &enc, info, &ct, aad).unwrap();
    assert_eq!(opened, pt, "{suite}: local seal, reference open");
}

fn cross_check_kdfs_aeads<M: hpke::Kem>(kem: Kem) {
    macro_rules! each_aead {
        ($kdf_ty:ty, $kdf:expr) => {
            cross_check::<AesGcm128, $kdf_ty, M>(CipherSuite::new(kem, $kdf, Aead::Aes128Gcm));
            cross_check::<AesGcm256, $kdf_ty, M>(CipherSuite::new(kem, $kdf, Aead::Aes256Gcm));
            cross_check::<ChaCha20Poly1305, $kdf_ty, M>(CipherSuite::new(kem, $kdf, Aead::ChaCha20Poly1305));
        };
    }
    each_aead!(HkdfSha256, Kdf::HkdfSha256);
    each_aead!(HkdfSha384, Kdf::HkdfSha384);
    each_aead!(HkdfSha512, Kdf::HkdfSha512);
}

#[test]
fn interop_with_reference_x25519() {
    for _ in 0..5 {
        cross_check_kdfs_aeads::<X25519HkdfSha256>(Kem::X25519);
    }
}

#[test]
fn interop_with_reference_p256() {
    for _ in 0..5 {
        cross_check_kdfs_aeads::<DhP256HkdfSha256>(Kem::P256);
    }
}

#[test]
fn interop_with_reference_p521() {
    for _ in 0..5 {
        cross_check_kdfs_aeads::<DhP521HkdfSha512>(Kem::P521);
    }
}
