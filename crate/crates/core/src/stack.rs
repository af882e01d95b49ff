//! A complete loopback deployment: mock resolver, target, co-located target
//! and proxy, each on an ephemeral port with optional injected delays.

use std::sync::Arc;
use std::time::Duration;

use crate::client::{self, ClientError, ClientSession, SessionOptions};
use crate::net::{self, ServeOptions, ServerHandle};
use crate::protocol::{self, ProtocolError, TargetKeyPair};
use crate::proxy::{Proxy, ProxyConfig};
use crate::resolver::{MockResolver, Zone};
use crate::suite::CipherSuite;
use crate::target::{Target, TargetConfig, Upstream, DNS_QUERY_PATH};

#[derive(Debug, Clone)]
pub struct StackOptions {
    pub zone: Zone,
    /// One target key per suite; the first is the active key.
    pub suites: Vec<CipherSuite>,
    pub proxy_delay: Duration,
    pub target_delay: Duration,
    pub resolver_delay: Duration,
    /// Per-connection setup cost on the proxy listener.
    pub proxy_connection_delay: Duration,
    pub cache_capacity: usize,
    /// Base proxy settings; plain HTTP forwarding and DNS bodies are always
    /// enabled on loopback.
    pub proxy: ProxyConfig,
}

impl Default for StackOptions {
    fn default() -> Self {
        Self {
            zone: Zone::new(),
            suites: vec![CipherSuite::DEFAULT],
            proxy_delay: Duration::ZERO,
            target_delay: Duration::ZERO,
            resolver_delay: Duration::ZERO,
            proxy_connection_delay: Duration::ZERO,
            cache_capacity: crate::cache::DEFAULT_CAPACITY,
            proxy: ProxyConfig {
                rate_limit: 6_000_000,
                burst: 100_000,
                ..ProxyConfig::default()
            },
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StackError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("invalid service configuration: {0}")]
    Config(String),
}

/// The running services. Dropping the stack stops them.
#[derive(Debug)]
pub struct LocalStack {
    pub resolver: Arc<MockResolver>,
    pub target: Arc<Target>,
    pub coloc_target: Arc<Target>,
    pub proxy: Arc<Proxy>,
    pub key_pairs: Vec<TargetKeyPair>,
    resolver_server: ServerHandle,
    target_server: ServerHandle,
    coloc_server: ServerHandle,
    proxy_server: ServerHandle,
}

impl LocalStack {
    pub async fn start(opts: StackOptions) -> Result<Self, StackError> {
        let resolver = MockResolver::new(opts.zone.clone(), opts.resolver_delay);
        let resolver_server = net::serve_loopback(resolver.router(), ServeOptions::default()).await?;
        let key_pairs = opts
            .suites
            .iter()
            .map(|s| protocol::generate_key_pair(*s))
            .collect::<Result<Vec<_>, _>>()?;

        let target_config = |upstream: Upstream| {
            let mut cfg = TargetConfig::new(key_pairs.clone(), vec![upstream]);
            cfg.cache_capacity = opts.cache_capacity;
            cfg.injected_delay = opts.target_delay;
            cfg.allow_cleartext = true;
            cfg
        };
        let resolver_url = format!("{}{DNS_QUERY_PATH}", resolver_server.base_url());
        let target = Target::new(target_config(Upstream::Doh(resolver_url))).map_err(|e| StackError::Config(e.to_string()))?;
        let coloc_target =
            Target::new(target_config(Upstream::Local(resolver.clone()))).map_err(|e| StackError::Config(e.to_string()))?;
        let target_server = net::serve_loopback(target.router(), ServeOptions::default()).await?;
        let coloc_server = net::serve_loopback(coloc_target.router(), ServeOptions::default()).await?;

        let proxy = Proxy::new(ProxyConfig {
            injected_delay: opts.proxy_delay,
            insecure_http: true,
            allow_plain_doh: true,
            ..opts.proxy.clone()
        })
        .map_err(|e| StackError::Config(e.to_string()))?;
        let proxy_server = net::serve_loopback(
            proxy.router(),
            ServeOptions {
                connection_delay: opts.proxy_connection_delay,
            },
        )
        .await?;

        Ok(Self {
            resolver,
            target,
            coloc_target,
            proxy,
            key_pairs,
            resolver_server,
            target_server,
            coloc_server,
            proxy_server,
        })
    }

    /// `http://127.0.0.1:port`
    pub fn proxy_url(&self) -> String {
        self.proxy_server.base_url()
    }

    /// `127.0.0.1:port`, the form passed as `targethost`.
    pub fn target_host(&self) -> String {
        self.target_server.host()
    }

    pub fn coloc_target_host(&self) -> String {
        self.coloc_server.host()
    }

    /// The resolver's DoH endpoint URL.
    pub fn resolver_url(&self) -> String {
        format!("{}{DNS_QUERY_PATH}", self.resolver_server.base_url())
    }

    /// Discovers the target's config and opens a session through the proxy.
    pub async fn session(&self, mut opts: SessionOptions) -> Result<ClientSession, ClientError> {
        opts.insecure_http = true;
        let http = opts.http_client();
        let discovery = client::discover_config(&http, &self.target_host(), true).await?;
        ClientSession::with_client(http, &self.proxy_url(), &self.target_host(), discovery.config, opts)
    }
}
