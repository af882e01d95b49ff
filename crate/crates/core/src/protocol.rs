//! ODoH key configuration, message envelope and query/response encryption.
//!
//! All multi-byte integers on the wire are big-endian. Layouts:
//!
//! ```text
//! ConfigList      = u16 total_len, Config*
//! Config          = u16 version (0x0001), u16 contents_len, Contents
//! Contents        = u16 kem_id, u16 kdf_id, u16 aead_id, u16 pk_len, pk
//! ObliviousMessage= u8 type, u16 key_id_len, key_id, u16 enc_len, encrypted_message
//! QueryPlaintext  = u16 len, response_key, u16 len, dns_message, u16 len, zero padding
//! ```
//!
//! A query's `encrypted_message` is `enc || HPKE ciphertext`, sealed with info
//! `"odoh query"` and the key id as AAD. A response's `encrypted_message` is the
//! AEAD ciphertext of the DNS answer under the client's response key with an
//! all-zero nonce and empty AAD; a response key is used exactly once.

use std::fmt;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::hpke::{self, HpkeError};
use crate::suite::{CipherSuite, UnsupportedSuite};

pub const CONFIG_VERSION: u16 = 0x0001;
pub const QUERY_INFO: &[u8] = b"odoh query";
pub const CONTENT_TYPE: &str = "application/oblivious-dns-message";
pub const KEY_ID_LEN: usize = 32;
pub const DNS_HEADER_LEN: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    UnsupportedSuite(#[from] UnsupportedSuite),
    #[error("malformed config: {0}")]
    MalformedConfig(&'static str),
    #[error("config list must not be empty")]
    EmptyConfigList,
    #[error("malformed message: {0}")]
    MalformedMessage(&'static str),
    #[error("malformed DNS message")]
    MalformedDns,
    #[error("malformed plaintext: {0}")]
    MalformedPlaintext(&'static str),
    #[error("message type does not match the operation")]
    WrongMessageType,
    #[error("unknown key id")]
    UnknownKeyId,
    #[error("decryption failed")]
    DecryptFailure,
    #[error("response key has the wrong length")]
    BadKeyLength,
    #[error("query context already consumed")]
    ContextConsumed,
    #[error("crypto failure: {0}")]
    Crypto(HpkeError),
}

impl From<HpkeError> for ProtocolError {
    fn from(e: HpkeError) -> Self {
        ProtocolError::Crypto(e)
    }
}

/// Small big-endian reader over a byte slice.
pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub(crate) fn u8(&mut self) -> Option<u8> {
        let b = *self.buf.get(self.pos)?;
        self.pos += 1;
        Some(b)
    }

    pub(crate) fn u16(&mut self) -> Option<u16> {
        let bytes = self.take(2)?;
        Some(u16::from_be_bytes([bytes[0], bytes[1]]))
    }

    pub(crate) fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let end = self.pos.checked_add(n)?;
        let out = self.buf.get(self.pos..end)?;
        self.pos = end;
        Some(out)
    }

    fn prefixed(&mut self) -> Option<&'a [u8]> {
        let n = self.u16()? as usize;
        self.take(n)
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.pos >= self.buf.len()
    }
}

fn put_prefixed(out: &mut Vec<u8>, data: &[u8]) {
    debug_assert!(data.len() <= u16::MAX as usize);
    out.extend_from_slice(&(data.len() as u16).to_be_bytes());
    out.extend_from_slice(data);
}

/// SHA-256 digest identifying a [`TargetKeyConfig`].
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct KeyId(pub [u8; KEY_ID_LEN]);

impl KeyId {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Display for KeyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|b| write!(f, "{b:02x}"))
    }
}

impl fmt::Debug for KeyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KeyId(")?;
        for b in &self.0[..8] {
            write!(f, "{b:02x}")?;
        }
        write!(f, "..)")
    }
}

/// The public half a target publishes: suite plus KEM public key.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TargetKeyConfig {
    suite: CipherSuite,
    public_key: Vec<u8>,
}

impl TargetKeyConfig {
    pub fn new(suite: CipherSuite, public_key: Vec<u8>) -> Result<Self, ProtocolError> {
        if public_key.len() != suite.kem.public_key_size() {
            return Err(ProtocolError::MalformedConfig("public key length does not match KEM"));
        }
        Ok(Self { suite, public_key })
    }

    pub fn suite(&self) -> CipherSuite {
        self.suite
    }

    pub fn public_key(&self) -> &[u8] {
        &self.public_key
    }

    pub fn version(&self) -> u16 {
        CONFIG_VERSION
    }

    /// `kem_id || kdf_id || aead_id || u16 pk_len || pk`
    pub fn contents_bytes(&self) -> Vec<u8> {
        let (k, d, a) = self.suite.ids();
        let mut out = Vec::with_capacity(8 + self.public_key.len());
        out.extend_from_slice(&k.to_be_bytes());
        out.extend_from_slice(&d.to_be_bytes());
        out.extend_from_slice(&a.to_be_bytes());
        put_prefixed(&mut out, &self.public_key);
        out
    }

    /// `version || u16 contents_len || contents`
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = CONFIG_VERSION.to_be_bytes().to_vec();
        put_prefixed(&mut out, &self.contents_bytes());
        out
    }

    pub fn key_id(&self) -> KeyId {
        derive_key_id(self)
    }
}

/// SHA-256 over the canonical serialized config contents.
pub fn derive_key_id(config: &TargetKeyConfig) -> KeyId {
    KeyId(Sha256::digest(config.contents_bytes()).into())
}

/// A target's key configuration together with the matching KEM secret key.
#[derive(Clone)]
pub struct TargetKeyPair {
    config: TargetKeyConfig,
    secret_key: Vec<u8>,
    key_id: KeyId,
}

impl fmt::Debug for TargetKeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TargetKeyPair")
            .field("config", &self.config)
            .field("secret_key", &"<redacted>")
            .finish()
    }
}

impl TargetKeyPair {
    /// Rebuilds a key pair from a stored secret key.
    pub fn from_secret(suite: CipherSuite, secret_key: Vec<u8>) -> Result<Self, ProtocolError> {
        let public_key = hpke::public_key_from_secret(suite.kem, &secret_key)?;
        let config = TargetKeyConfig::new(suite, public_key)?;
        let key_id = derive_key_id(&config);
        Ok(Self { config, secret_key, key_id })
    }

    pub fn config(&self) -> &TargetKeyConfig {
        &self.config
    }

    pub fn key_id(&self) -> KeyId {
        self.key_id
    }

    pub fn secret_key(&self) -> &[u8] {
        &self.secret_key
    }
}

/// Generates a fresh target key pair for `suite`.
pub fn generate_key_pair(suite: CipherSuite) -> Result<TargetKeyPair, ProtocolError> {
    let (secret_key, _) = hpke::generate_keypair(suite.kem)?;
    TargetKeyPair::from_secret(suite, secret_key)
}

pub fn serialize_config_list(configs: &[TargetKeyConfig]) -> Result<Vec<u8>, ProtocolError> {
    if configs.is_empty() {
        return Err(ProtocolError::EmptyConfigList);
    }
    let body: Vec<u8> = configs.iter().flat_map(|c| c.to_bytes()).collect();
    if body.len() > u16::MAX as usize {
        return Err(ProtocolError::MalformedConfig("config list too long"));
    }
    let mut out = Vec::with_capacity(2 + body.len());
    put_prefixed(&mut out, &body);
    Ok(out)
}

/// Parses a config list. Configs naming algorithms outside the registry are
/// skipped so that newer targets stay readable; structural errors are fatal.
pub fn parse_config_list(bytes: &[u8]) -> Result<Vec<TargetKeyConfig>, ProtocolError> {
    let mut outer = Reader::new(bytes);
    let body = outer.prefixed().ok_or(ProtocolError::MalformedConfig("truncated list"))?;
    if !outer.is_empty() {
        return Err(ProtocolError::MalformedConfig("trailing bytes after list"));
    }
    let mut r = Reader::new(body);
    let mut configs = Vec::new();
    while !r.is_empty() {
        let version = r.u16().ok_or(ProtocolError::MalformedConfig("truncated version"))?;
        if version != CONFIG_VERSION {
            return Err(ProtocolError::MalformedConfig("unsupported version"));
        }
        let contents = r.prefixed().ok_or(ProtocolError::MalformedConfig("truncated contents"))?;
        let mut c = Reader::new(contents);
        let (kem, kdf, aead) = match (c.u16(), c.u16(), c.u16()) {
            (Some(k), Some(d), Some(a)) => (k, d, a),
            _ => return Err(ProtocolError::MalformedConfig("truncated suite")),
        };
        let pk = c.prefixed().ok_or(ProtocolError::MalformedConfig("truncated public key"))?;
        if !c.is_empty() {
            return Err(ProtocolError::MalformedConfig("contents length mismatch"));
        }
        if let Ok(suite) = CipherSuite::from_ids(kem, kdf, aead) {
            configs.push(TargetKeyConfig::new(suite, pk.to_vec())?);
        }
    }
    Ok(configs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum MessageType {
    Query = 0x01,
    Response = 0x02,
}

/// The on-wire encrypted query/response envelope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObliviousMessage {
    pub message_type: MessageType,
    pub key_id: Vec<u8>,
    pub encrypted_message: Vec<u8>,
}

impl ObliviousMessage {
    pub fn serialized_len(&self) -> usize {
        1 + 2 + self.key_id.len() + 2 + self.encrypted_message.len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        serialize_message(self)
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, ProtocolError> {
        parse_message(bytes)
    }
}

pub fn serialize_message(msg: &ObliviousMessage) -> Vec<u8> {
    let mut out = Vec::with_capacity(msg.serialized_len());
    out.push(msg.message_type as u8);
    put_prefixed(&mut out, &msg.key_id);
    put_prefixed(&mut out, &msg.encrypted_message);
    out
}

pub fn parse_message(bytes: &[u8]) -> Result<ObliviousMessage, ProtocolError> {
    if bytes.len() < 5 {
        return Err(ProtocolError::MalformedMessage("shorter than 5 bytes"));
    }
    let mut r = Reader::new(bytes);
    let message_type = match r.u8() {
        Some(0x01) => MessageType::Query,
        Some(0x02) => MessageType::Response,
        _ => return Err(ProtocolError::MalformedMessage("invalid message type")),
    };
    let key_id = r.prefixed().ok_or(ProtocolError::MalformedMessage("key id overruns input"))?;
    let expected_key_id = match message_type {
        MessageType::Query => KEY_ID_LEN,
        MessageType::Response => 0,
    };
    if key_id.len() != expected_key_id {
        return Err(ProtocolError::MalformedMessage("key id length invalid for message type"));
    }
    let encrypted = r.prefixed().ok_or(ProtocolError::MalformedMessage("ciphertext overruns input"))?;
    if !r.is_empty() {
        return Err(ProtocolError::MalformedMessage("trailing bytes"));
    }
    Ok(ObliviousMessage {
        message_type,
        key_id: key_id.to_vec(),
        encrypted_message: encrypted.to_vec(),
    })
}

/// Inner plaintext of a query: the client's response key and its DNS message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryPlaintext {
    pub response_key: Vec<u8>,
    pub dns_message: Vec<u8>,
    pub padding_len: usize,
}

impl QueryPlaintext {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(6 + self.response_key.len() + self.dns_message.len() + self.padding_len);
        put_prefixed(&mut out, &self.response_key);
        put_prefixed(&mut out, &self.dns_message);
        put_prefixed(&mut out, &vec![0u8; self.padding_len]);
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, ProtocolError> {
        let mut r = Reader::new(bytes);
        let response_key = r.prefixed().ok_or(ProtocolError::MalformedPlaintext("truncated response key"))?;
        let dns_message = r.prefixed().ok_or(ProtocolError::MalformedPlaintext("truncated dns message"))?;
        let padding = r.prefixed().ok_or(ProtocolError::MalformedPlaintext("truncated padding"))?;
        if !r.is_empty() {
            return Err(ProtocolError::MalformedPlaintext("trailing bytes"));
        }
        if padding.iter().any(|&b| b != 0) {
            return Err(ProtocolError::MalformedPlaintext("non-zero padding"));
        }
        Ok(Self {
            response_key: response_key.to_vec(),
            dns_message: dns_message.to_vec(),
            padding_len: padding.len(),
        })
    }
}

/// Client-held secret for one in-flight query.
pub struct QueryContext {
    response_key: Vec<u8>,
    suite: CipherSuite,
    consumed: bool,
}

impl fmt::Debug for QueryContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QueryContext")
            .field("suite", &self.suite)
            .field("consumed", &self.consumed)
            .finish_non_exhaustive()
    }
}

impl QueryContext {
    pub fn response_key(&self) -> &[u8] {
        &self.response_key
    }

    pub fn suite(&self) -> CipherSuite {
        self.suite
    }

    pub fn is_consumed(&self) -> bool {
        self.consumed
    }
}

/// Encrypts `dns_query` to the target described by `config`.
pub fn seal_query(config: &TargetKeyConfig, dns_query: &[u8]) -> Result<(ObliviousMessage, QueryContext), ProtocolError> {
    seal_query_padded(config, dns_query, 0)
}

/// Like [`seal_query`] with `padding_len` zero bytes appended inside the ciphertext.
pub fn seal_query_padded(
    config: &TargetKeyConfig,
    dns_query: &[u8],
    padding_len: usize,
) -> Result<(ObliviousMessage, QueryContext), ProtocolError> {
    if dns_query.len() < DNS_HEADER_LEN {
        return Err(ProtocolError::MalformedDns);
    }
    let suite = config.suite();
    let response_key = hpke::random_bytes(suite.key_size())?;
    let plaintext = QueryPlaintext {
        response_key: response_key.clone(),
        dns_message: dns_query.to_vec(),
        padding_len,
    }
    .to_bytes();
    let key_id = derive_key_id(config);
    let (enc, ct) = hpke::seal(suite, config.public_key(), QUERY_INFO, key_id.as_bytes(), &plaintext)?;
    let mut encrypted_message = enc;
    encrypted_message.extend_from_slice(&ct);
    let msg = ObliviousMessage {
        message_type: MessageType::Query,
        key_id: key_id.0.to_vec(),
        encrypted_message,
    };
    let ctx = QueryContext {
        response_key,
        suite,
        consumed: false,
    };
    Ok((msg, ctx))
}

/// What a target learns from a decrypted query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenedQuery {
    pub dns_query: Vec<u8>,
    pub response_key: Vec<u8>,
}

pub fn open_query(pair: &TargetKeyPair, msg: &ObliviousMessage) -> Result<OpenedQuery, ProtocolError> {
    if msg.message_type != MessageType::Query {
        return Err(ProtocolError::WrongMessageType);
    }
    if msg.key_id != pair.key_id().0 {
        return Err(ProtocolError::UnknownKeyId);
    }
    let suite = pair.config().suite();
    let enc_size = suite.enc_size();
    if msg.encrypted_message.len() < enc_size + suite.tag_size() {
        return Err(ProtocolError::DecryptFailure);
    }
    let (enc, ct) = msg.encrypted_message.split_at(enc_size);
    let plaintext = hpke::open(suite, pair.secret_key(), enc, QUERY_INFO, &msg.key_id, ct)
        .map_err(|_| ProtocolError::DecryptFailure)?;
    let inner = QueryPlaintext::parse(&plaintext)?;
    if inner.response_key.len() != suite.key_size() {
        return Err(ProtocolError::MalformedPlaintext("response key length does not match AEAD"));
    }
    if inner.dns_message.len() < DNS_HEADER_LEN {
        return Err(ProtocolError::MalformedDns);
    }
    Ok(OpenedQuery {
        dns_query: inner.dns_message,
        response_key: inner.response_key,
    })
}

/// Encrypts a DNS answer under the client's one-shot response key.
pub fn seal_response(response_key: &[u8], suite: CipherSuite, dns_response: &[u8]) -> Result<ObliviousMessage, ProtocolError> {
    if response_key.len() != suite.key_size() {
        return Err(ProtocolError::BadKeyLength);
    }
    let nonce = vec![0u8; suite.nonce_size()];
    let encrypted_message = hpke::aead_seal(suite.aead, response_key, &nonce, &[], dns_response)?;
    Ok(ObliviousMessage {
        message_type: MessageType::Response,
        key_id: Vec::new(),
        encrypted_message,
    })
}

/// Decrypts the answer for `ctx`. A context opens at most one response; the
/// context is spent whether or not decryption succeeds.
pub fn open_response(ctx: &mut QueryContext, msg: &ObliviousMessage) -> Result<Vec<u8>, ProtocolError> {
    if ctx.consumed {
        return Err(ProtocolError::ContextConsumed);
    }
    ctx.consumed = true;
    if msg.message_type != MessageType::Response {
        return Err(ProtocolError::WrongMessageType);
    }
    let nonce = vec![0u8; ctx.suite.nonce_size()];
    hpke::aead_open(ctx.suite.aead, &ctx.response_key, &nonce, &[], &msg.encrypted_message)
        .map_err(|_| ProtocolError::DecryptFailure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suite::{Aead, Kdf, Kem};

    fn query(len: usize) -> Vec<u8> {
        let mut q = vec![0u8; len];
        q[5] = 1;
        q
    }

    #[test]
    fn key_pair_sizes() {
        let x = generate_key_pair(CipherSuite::DEFAULT).unwrap();
        assert_eq!(x.config().public_key().len(), 32);
        let p = generate_key_pair(CipherSuite::new(Kem::P256, Kdf::HkdfSha256, Aead::Aes128Gcm)).unwrap();
        assert_eq!(p.config().public_key().len(), 65);
        assert_eq!(p.config().public_key()[0], 0x04);
        assert_ne!(x.config(), generate_key_pair(CipherSuite::DEFAULT).unwrap().config());
        assert!(CipherSuite::from_ids(0xFFFF, 1, 1).map(generate_key_pair).is_err());
    }

    #[test]
    fn debug_never_prints_secret() {
        let kp = generate_key_pair(CipherSuite::DEFAULT).unwrap();
        let hex: String = kp.secret_key().iter().map(|b| format!("{b:02x}")).collect();
        let dbg = format!("{kp:?}");
        assert!(dbg.contains("redacted"));
        assert!(!dbg.contains(&hex));
        assert!(!dbg.contains(&format!("{:?}", kp.secret_key())));
    }

    #[test]
    fn key_id_properties() {
        let kp = generate_key_pair(CipherSuite::DEFAULT).unwrap();
        let c = kp.config();
        assert_eq!(derive_key_id(c), derive_key_id(c));
        let mut pk = c.public_key().to_vec();
        pk[3] ^= 1;
        let other = TargetKeyConfig::new(c.suite(), pk).unwrap();
        assert_ne!(derive_key_id(c), derive_key_id(&other));
        let reparsed = parse_config_list(&serialize_config_list(std::slice::from_ref(c)).unwrap()).unwrap();
        assert_eq!(derive_key_id(&reparsed[0]), derive_key_id(c));
    }

    #[test]
    fn config_list_layout() {
        let kp = generate_key_pair(CipherSuite::DEFAULT).unwrap();
        let bytes = serialize_config_list(&[kp.config().clone()]).unwrap();
        assert_eq!(bytes.len(), 46);
        assert_eq!(&bytes[..8], &[0, 44, 0, 1, 0, 40, 0, 0x20]);
        assert_eq!(serialize_config_list(&[]), Err(ProtocolError::EmptyConfigList));
        for cut in 0..bytes.len() {
            assert!(matches!(parse_config_list(&bytes[..cut]), Err(ProtocolError::MalformedConfig(_))), "cut {cut}");
        }
        let mut bad_version = bytes.clone();
        bad_version[3] = 2;
        assert!(matches!(parse_config_list(&bad_version), Err(ProtocolError::MalformedConfig(_))));
    }

    #[test]
    fn unknown_suites_are_skipped() {
        let kp = generate_key_pair(CipherSuite::DEFAULT).unwrap();
        let mut bytes = serialize_config_list(&[kp.config().clone()]).unwrap();
        bytes[6] = 0xFF;
        bytes[7] = 0xFF;
        assert_eq!(parse_config_list(&bytes).unwrap(), vec![]);
    }

    #[test]
    fn query_overhead_is_107_for_default_suite() {
        let kp = generate_key_pair(CipherSuite::DEFAULT).unwrap();
        let (msg, ctx) = seal_query(kp.config(), &query(29)).unwrap();
        assert_eq!(msg.to_bytes().len(), 136);
        assert_eq!(ctx.response_key().len(), 16);
        assert_eq!(seal_query(kp.config(), &query(11)).unwrap_err(), ProtocolError::MalformedDns);
    }

    #[test]
    fn query_roundtrip_and_errors() {
        let kp = generate_key_pair(CipherSuite::DEFAULT).unwrap();
        let q = query(40);
        let (msg, ctx) = seal_query(kp.config(), &q).unwrap();
        let opened = open_query(&kp, &msg).unwrap();
        assert_eq!(opened.dns_query, q);
        assert_eq!(opened.response_key, ctx.response_key());

        let mut flipped = msg.clone();
        let last = flipped.encrypted_message.len() - 1;
        flipped.encrypted_message[last] ^= 0x01;
        assert_eq!(open_query(&kp, &flipped), Err(ProtocolError::DecryptFailure));

        let other = generate_key_pair(CipherSuite::DEFAULT).unwrap();
        assert_eq!(open_query(&other, &msg), Err(ProtocolError::UnknownKeyId));
    }

    #[test]
    fn padding_must_be_zero() {
        let mut pt = QueryPlaintext {
            response_key: vec![1; 16],
            dns_message: query(12),
            padding_len: 4,
        }
        .to_bytes();
        assert_eq!(QueryPlaintext::parse(&pt).unwrap().padding_len, 4);
        let n = pt.len();
        pt[n - 1] = 7;
        assert_eq!(QueryPlaintext::parse(&pt), Err(ProtocolError::MalformedPlaintext("non-zero padding")));
    }

    #[test]
    fn response_roundtrip_and_errors() {
        let kp = generate_key_pair(CipherSuite::DEFAULT).unwrap();
        let (_, mut ctx) = seal_query(kp.config(), &query(20)).unwrap();
        let resp = seal_response(ctx.response_key(), ctx.suite(), b"answer bytes").unwrap();
        assert_eq!(resp.encrypted_message.len(), 12 + 16);
        assert_eq!(open_response(&mut ctx, &resp).unwrap(), b"answer bytes");
        assert!(ctx.is_consumed());
        assert_eq!(open_response(&mut ctx, &resp), Err(ProtocolError::ContextConsumed));

        let empty = seal_response(&[7; 16], CipherSuite::DEFAULT, b"").unwrap();
        assert_eq!(empty.encrypted_message.len(), 16);
        assert_eq!(seal_response(&[7; 15], CipherSuite::DEFAULT, b"x"), Err(ProtocolError::BadKeyLength));

        let (_, mut ctx2) = seal_query(kp.config(), &query(20)).unwrap();
        let foreign = seal_response(&[9; 16], CipherSuite::DEFAULT, b"answer").unwrap();
        assert_eq!(open_response(&mut ctx2, &foreign), Err(ProtocolError::DecryptFailure));
    }

    #[test]
    fn message_layout() {
        let msg = ObliviousMessage {
            message_type: MessageType::Query,
            key_id: vec![0xAA; 32],
            encrypted_message: vec![0x55; 100],
        };
        let bytes = serialize_message(&msg);
        assert_eq!(bytes.len(), 137);
        assert_eq!(parse_message(&bytes).unwrap(), msg);
        let mut bad = bytes.clone();
        bad[0] = 0x03;
        assert!(matches!(parse_message(&bad), Err(ProtocolError::MalformedMessage(_))));
        assert!(matches!(parse_message(&bytes[..4]), Err(ProtocolError::MalformedMessage(_))));
        assert!(matches!(parse_message(&bytes[..136]), Err(ProtocolError::MalformedMessage(_))));
        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(parse_message(&long), Err(ProtocolError::MalformedMessage(_))));
    }
}
