//! Service configuration: TOML files, `ODOH_TARGET_*` / `ODOH_PROXY_*`
//! environment overrides, and the target key file.
//!
//! Key file format, one key per line, active key first:
//!
//! ```text
//! # kem    kdf    aead   secret key (hex)
//! 0x0020 0x0001 0x0001 9b3a...
//! ```

use std::fmt::Write as _;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

use crate::protocol::{self, ProtocolError, TargetKeyPair};
use crate::proxy::{ProxyConfig, DEFAULT_BURST, DEFAULT_RATE_LIMIT};
use crate::suite::CipherSuite;
use crate::target::{TargetConfig, Upstream};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parsing config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("environment variable {name}: {reason}")]
    Env { name: String, reason: String },
    #[error("key file line {line}: {reason}")]
    KeyFile { line: usize, reason: String },
    #[error("invalid value for {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn env_parse<T: std::str::FromStr>(name: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e: T::Err| ConfigError::Env {
        name: name.to_string(),
        reason: e.to_string(),
    })
}

fn env_list(value: &str) -> Vec<String> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetSettings {
    pub listen: SocketAddr,
    pub upstreams: Vec<String>,
    pub cache_capacity: usize,
    pub upstream_timeout_ms: u64,
    /// Without a key file a fresh X25519 key is generated at startup.
    pub key_file: Option<PathBuf>,
    pub injected_delay_ms: u64,
    pub allow_cleartext: bool,
}

impl Default for TargetSettings {
    fn default() -> Self {
        Self {
            listen: SocketAddr::from(([127, 0, 0, 1], 8443)),
            upstreams: Vec::new(),
            cache_capacity: crate::cache::DEFAULT_CAPACITY,
            upstream_timeout_ms: 2000,
            key_file: None,
            injected_delay_ms: 0,
            allow_cleartext: false,
        }
    }
}

impl TargetSettings {
    pub const ENV_PREFIX: &'static str = "ODOH_TARGET_";

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// Reads `path` if given, then applies the process environment.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut s = match path {
            Some(p) => Self::from_toml(&read(p)?)?,
            None => Self::default(),
        };
        s.apply_env(std::env::vars())?;
        Ok(s)
    }

    /// Applies `ODOH_TARGET_<FIELD>` overrides; lists are comma-separated.
    pub fn apply_env(&mut self, vars: impl IntoIterator<Item = (String, String)>) -> Result<(), ConfigError> {
        for (name, value) in vars {
            let Some(field) = name.strip_prefix(Self::ENV_PREFIX) else {
                continue;
            };
            match field {
                "LISTEN" => self.listen = env_parse(&name, &value)?,
                "UPSTREAMS" => self.upstreams = env_list(&value),
                "CACHE_CAPACITY" => self.cache_capacity = env_parse(&name, &value)?,
                "UPSTREAM_TIMEOUT_MS" => self.upstream_timeout_ms = env_parse(&name, &value)?,
                "KEY_FILE" => self.key_file = Some(PathBuf::from(value)),
                "INJECTED_DELAY_MS" => self.injected_delay_ms = env_parse(&name, &value)?,
                "ALLOW_CLEARTEXT" => self.allow_cleartext = env_parse(&name, &value)?,
                _ => {
                    return Err(ConfigError::Env {
                        name,
                        reason: "unknown setting".into(),
                    })
                }
            }
        }
        Ok(())
    }

    pub fn to_target_config(&self) -> Result<TargetConfig, ConfigError> {
        if self.upstreams.is_empty() {
            return Err(ConfigError::Invalid {
                field: "upstreams",
                reason: "at least one DoH URL is required".into(),
            });
        }
        let key_pairs = match &self.key_file {
            Some(p) => load_key_file(p)?,
            None => vec![protocol::generate_key_pair(CipherSuite::DEFAULT)?],
        };
        let mut cfg = TargetConfig::new(key_pairs, self.upstreams.iter().cloned().map(Upstream::Doh).collect());
        cfg.cache_capacity = self.cache_capacity;
        cfg.upstream_timeout = Duration::from_millis(self.upstream_timeout_ms);
        cfg.injected_delay = Duration::from_millis(self.injected_delay_ms);
        cfg.allow_cleartext = self.allow_cleartext;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProxySettings {
    pub listen: SocketAddr,
    pub allowed_targets: Option<Vec<String>>,
    pub rate_limit: u32,
    pub burst: u32,
    pub forward_timeout_ms: u64,
    pub injected_delay_ms: u64,
    pub insecure_http: bool,
    pub allow_plain_doh: bool,
}

impl Default for ProxySettings {
    fn default() -> Self {
        Self {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            allowed_targets: None,
            rate_limit: DEFAULT_RATE_LIMIT,
            burst: DEFAULT_BURST,
            forward_timeout_ms: 5000,
            injected_delay_ms: 0,
            insecure_http: false,
            allow_plain_doh: false,
        }
    }
}

impl ProxySettings {
    pub const ENV_PREFIX: &'static str = "ODOH_PROXY_";

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut s = match path {
            Some(p) => Self::from_toml(&read(p)?)?,
            None => Self::default(),
        };
        s.apply_env(std::env::vars())?;
        Ok(s)
    }

    pub fn apply_env(&mut self, vars: impl IntoIterator<Item = (String, String)>) -> Result<(), ConfigError> {
        for (name, value) in vars {
            let Some(field) = name.strip_prefix(Self::ENV_PREFIX) else {
                continue;
            };
            match field {
                "LISTEN" => self.listen = env_parse(&name, &value)?,
                "ALLOWED_TARGETS" => self.allowed_targets = Some(env_list(&value)),
                "RATE_LIMIT" => self.rate_limit = env_parse(&name, &value)?,
                "BURST" => self.burst = env_parse(&name, &value)?,
                "FORWARD_TIMEOUT_MS" => self.forward_timeout_ms = env_parse(&name, &value)?,
                "INJECTED_DELAY_MS" => self.injected_delay_ms = env_parse(&name, &value)?,
                "INSECURE_HTTP" => self.insecure_http = env_parse(&name, &value)?,
                "ALLOW_PLAIN_DOH" => self.allow_plain_doh = env_parse(&name, &value)?,
                _ => {
                    return Err(ConfigError::Env {
                        name,
                        reason: "unknown setting".into(),
                    })
                }
            }
        }
        Ok(())
    }

    pub fn to_proxy_config(&self) -> ProxyConfig {
        ProxyConfig {
            allowed_targets: self.allowed_targets.clone(),
            rate_limit: self.rate_limit,
            burst: self.burst,
            forward_timeout: Duration::from_millis(self.forward_timeout_ms),
            injected_delay: Duration::from_millis(self.injected_delay_ms),
            insecure_http: self.insecure_http,
            allow_plain_doh: self.allow_plain_doh,
        }
    }
}

fn parse_id(s: &str) -> Option<u16> {
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u16::from_str_radix(hex, 16).ok(),
        None => s.parse().ok(),
    }
}

fn decode_hex(s: &str) -> Option<Vec<u8>> {
    if !s.len().is_multiple_of(2) {
        return None;
    }
    (0..s.len()).step_by(2).map(|i| u8::from_str_radix(s.get(i..i + 2)?, 16).ok()).collect()
}

pub fn parse_key_file(text: &str) -> Result<Vec<TargetKeyPair>, ConfigError> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |reason: &str| ConfigError::KeyFile {
            line: i + 1,
            reason: reason.to_string(),
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [kem, kdf, aead, secret] = fields[..] else {
            return Err(err("expected: kem kdf aead secret_hex"));
        };
        let ids = (parse_id(kem), parse_id(kdf), parse_id(aead));
        let (Some(kem), Some(kdf), Some(aead)) = ids else {
            return Err(err("bad suite identifier"));
        };
        let suite = CipherSuite::from_ids(kem, kdf, aead).map_err(|e| err(&e.to_string()))?;
        let secret = decode_hex(secret).ok_or_else(|| err("bad hex"))?;
        pairs.push(TargetKeyPair::from_secret(suite, secret).map_err(|e| err(&e.to_string()))?);
    }
    if pairs.is_empty() {
        return Err(ConfigError::KeyFile {
            line: 0,
            reason: "no keys".into(),
        });
    }
    Ok(pairs)
}

pub fn load_key_file(path: &Path) -> Result<Vec<TargetKeyPair>, ConfigError> {
    parse_key_file(&read(path)?)
}

pub fn format_key_file(pairs: &[TargetKeyPair]) -> String {
    let mut out = String::from("# kem kdf aead secret_hex\n");
    for p in pairs {
        let (kem, kdf, aead) = p.config().suite().ids();
        let _ = write!(out, "{kem:#06x} {kdf:#06x} {aead:#06x} ");
        for b in p.secret_key() {
            let _ = write!(out, "{b:02x}");
        }
        out.push('\n');
    }
    out
}
