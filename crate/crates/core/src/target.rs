//! The oblivious target: opens sealed queries, answers them from a TTL cache
//! or an upstream DoH resolver, and seals the answer back to the client.
//!
//! Nothing here reads the peer address. The only peer a target sees is the
//! proxy, and handlers, logs and metrics carry no per-client field.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use thiserror::Error;

use crate::cache::{ResponseCache, DEFAULT_CAPACITY};
use crate::dns;
use crate::net::{self, DNS_MESSAGE};
use crate::protocol::{self, ProtocolError, TargetKeyConfig, TargetKeyPair, CONTENT_TYPE};
use crate::resolver::MockResolver;

pub const DNS_QUERY_PATH: &str = "/dns-query";
pub const CLEARTEXT_PATH: &str = "/dns-query-cleartext";
pub const CONFIGS_PATH: &str = "/.well-known/odoh/configs";
pub const CONFIGS_MAX_AGE: &str = "max-age=3600";

/// Where a target sends cache misses.
#[derive(Clone)]
pub enum Upstream {
    /// A DoH endpoint URL, e.g. `https://resolver.example/dns-query`.
    Doh(String),
    /// A resolver running in the same process (co-located deployment).
    Local(Arc<MockResolver>),
}

impl fmt::Debug for Upstream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Upstream::Doh(url) => write!(f, "Doh({url})"),
            Upstream::Local(_) => f.write_str("Local"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TargetConfig {
    /// Active key first; later keys only decrypt (rotation).
    pub key_pairs: Vec<TargetKeyPair>,
    pub upstreams: Vec<Upstream>,
    pub cache_capacity: usize,
    pub upstream_timeout: Duration,
    /// One-way delay added on the way in and on the way out of `/dns-query`.
    pub injected_delay: Duration,
    /// Also serve `/dns-query-cleartext`, the unencrypted measurement path.
    pub allow_cleartext: bool,
}

impl TargetConfig {
    pub fn new(key_pairs: Vec<TargetKeyPair>, upstreams: Vec<Upstream>) -> Self {
        Self {
            key_pairs,
            upstreams,
            cache_capacity: DEFAULT_CAPACITY,
            upstream_timeout: Duration::from_secs(2),
            injected_delay: Duration::ZERO,
            allow_cleartext: false,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TargetConfigError {
    #[error("at least one key pair is required")]
    NoKeys,
    #[error("at least one upstream resolver is required")]
    NoUpstreams,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UpstreamError {
    #[error("upstream unreachable")]
    Unreachable,
    #[error("upstream timed out")]
    Timeout,
    #[error("upstream returned HTTP {0}")]
    BadStatus(u16),
    #[error("upstream returned a malformed DNS response")]
    BadResponse,
}

impl UpstreamError {
    pub fn status(&self) -> StatusCode {
        match self {
            UpstreamError::Timeout => StatusCode::GATEWAY_TIMEOUT,
            _ => StatusCode::BAD_GATEWAY,
        }
    }
}

/// A handler result before it becomes an HTTP response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetResponse {
    pub status: StatusCode,
    pub content_type: Option<&'static str>,
    pub body: Vec<u8>,
}

impl TargetResponse {
    fn error(status: StatusCode) -> Self {
        Self {
            status,
            content_type: None,
            body: Vec::new(),
        }
    }

    fn ok(content_type: &'static str, body: Vec<u8>) -> Self {
        Self {
            status: StatusCode::OK,
            content_type: Some(content_type),
            body,
        }
    }
}

impl IntoResponse for TargetResponse {
    fn into_response(self) -> Response {
        match self.content_type {
            Some(ct) => (self.status, [(header::CONTENT_TYPE, ct)], self.body).into_response(),
            None => self.status.into_response(),
        }
    }
}

#[derive(Debug, Default)]
pub struct TargetMetrics {
    pub queries_total: AtomicU64,
    pub decrypt_failures: AtomicU64,
}

/// `response_key[0] mod n`.
pub fn select_resolver(response_key: &[u8], resolvers: usize) -> usize {
    assert!(resolvers > 0, "resolver list must not be empty");
    response_key.first().map_or(0, |&b| b as usize % resolvers)
}

/// Selected index then the next one, without repeats.
fn attempt_order(first: usize, n: usize) -> Vec<usize> {
    let second = (first + 1) % n;
    if second == first {
        vec![first]
    } else {
        vec![first, second]
    }
}

/// POSTs `query` to a DoH endpoint and returns the raw response.
pub async fn resolve_upstream(
    client: &reqwest::Client,
    query: &[u8],
    resolver_url: &str,
    timeout: Duration,
) -> Result<Vec<u8>, UpstreamError> {
    let classify = |e: reqwest::Error| {
        if e.is_timeout() {
            UpstreamError::Timeout
        } else {
            UpstreamError::Unreachable
        }
    };
    let resp = client
        .post(resolver_url)
        .timeout(timeout)
        .header(header::CONTENT_TYPE, DNS_MESSAGE)
        .header(header::ACCEPT, DNS_MESSAGE)
        .body(query.to_vec())
        .send()
        .await
        .map_err(classify)?;
    if resp.status() != StatusCode::OK {
        return Err(UpstreamError::BadStatus(resp.status().as_u16()));
    }
    Ok(resp.bytes().await.map_err(classify)?.to_vec())
}

pub struct Target {
    config: TargetConfig,
    cache: ResponseCache,
    http: reqwest::Client,
    metrics: TargetMetrics,
}

impl fmt::Debug for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Target")
            .field("keys", &self.config.key_pairs.len())
            .field("upstreams", &self.config.upstreams)
            .finish_non_exhaustive()
    }
}

impl Target {
    pub fn new(config: TargetConfig) -> Result<Arc<Self>, TargetConfigError> {
        if config.key_pairs.is_empty() {
            return Err(TargetConfigError::NoKeys);
        }
        if config.upstreams.is_empty() {
            return Err(TargetConfigError::NoUpstreams);
        }
        let http = net::http_client(net::ClientOptions {
            timeout: config.upstream_timeout,
            ..Default::default()
        });
        Ok(Arc::new(Self {
            cache: ResponseCache::new(config.cache_capacity),
            http,
            metrics: TargetMetrics::default(),
            config,
        }))
    }

    pub fn config(&self) -> &TargetConfig {
        &self.config
    }

    pub fn cache(&self) -> &ResponseCache {
        &self.cache
    }

    pub fn metrics(&self) -> &TargetMetrics {
        &self.metrics
    }

    pub fn configs(&self) -> Vec<TargetKeyConfig> {
        self.config.key_pairs.iter().map(|p| p.config().clone()).collect()
    }

    /// The serialized config list of every active key.
    pub fn serve_configs(&self) -> (StatusCode, Vec<u8>) {
        let body = protocol::serialize_config_list(&self.configs()).expect("target has at least one key");
        (StatusCode::OK, body)
    }

    /// Full ODoH pipeline: parse, open, cache or resolve, seal.
    pub async fn handle_odoh_request(&self, body: &[u8], content_type: Option<&str>) -> TargetResponse {
        self.metrics.queries_total.fetch_add(1, Ordering::Relaxed);
        if content_type != Some(CONTENT_TYPE) {
            return TargetResponse::error(StatusCode::UNSUPPORTED_MEDIA_TYPE);
        }
        let Ok(msg) = protocol::parse_message(body) else {
            return TargetResponse::error(StatusCode::BAD_REQUEST);
        };
        let Some(pair) = self.config.key_pairs.iter().find(|p| p.key_id().0[..] == msg.key_id[..]) else {
            self.metrics.decrypt_failures.fetch_add(1, Ordering::Relaxed);
            return TargetResponse::error(StatusCode::UNAUTHORIZED);
        };
        let opened = match protocol::open_query(pair, &msg) {
            Ok(o) => o,
            Err(e) => {
                let status = match e {
                    ProtocolError::UnknownKeyId | ProtocolError::DecryptFailure => {
                        self.metrics.decrypt_failures.fetch_add(1, Ordering::Relaxed);
                        StatusCode::UNAUTHORIZED
                    }
                    _ => StatusCode::BAD_REQUEST,
                };
                tracing::debug!(%e, "rejected query");
                return TargetResponse::error(status);
            }
        };
        let answer = match self.answer(&opened.dns_query, &opened.response_key).await {
            Ok(a) => a,
            Err(status) => return TargetResponse::error(status),
        };
        match protocol::seal_response(&opened.response_key, pair.config().suite(), &answer) {
            Ok(sealed) => TargetResponse::ok(CONTENT_TYPE, sealed.to_bytes()),
            Err(_) => TargetResponse::error(StatusCode::INTERNAL_SERVER_ERROR),
        }
    }

    /// The same cache and upstream path with no encryption, used to isolate
    /// network cost from crypto cost in measurements.
    pub async fn handle_cleartext_request(&self, body: &[u8], content_type: Option<&str>) -> TargetResponse {
        self.metrics.queries_total.fetch_add(1, Ordering::Relaxed);
        if content_type != Some(DNS_MESSAGE) {
            return TargetResponse::error(StatusCode::UNSUPPORTED_MEDIA_TYPE);
        }
        let mut key = [0u8; 1];
        if crate::hpke::fill_random(&mut key).is_err() {
            return TargetResponse::error(StatusCode::INTERNAL_SERVER_ERROR);
        }
        match self.answer(body, &key).await {
            Ok(a) => TargetResponse::ok(DNS_MESSAGE, a),
            Err(status) => TargetResponse::error(status),
        }
    }

    /// Resolves a plaintext query through the cache; `selector` picks the
    /// upstream on a miss.
    async fn answer(&self, query: &[u8], selector: &[u8]) -> Result<Vec<u8>, StatusCode> {
        let parsed = dns::parse_query(query).map_err(|_| StatusCode::BAD_REQUEST)?;
        let key = parsed.cache_key();
        if let Some(entry) = self.cache.get(&key) {
            return dns::rewrite_for_query(&entry.response, query).map_err(|_| StatusCode::INTERNAL_SERVER_ERROR);
        }
        let response = self.resolve(query, selector).await.map_err(|e| {
            tracing::warn!(error = %e, "upstream resolution failed");
            e.status()
        })?;
        let summary = dns::parse_response(&response).map_err(|_| StatusCode::BAD_GATEWAY)?;
        if summary.id != parsed.header.id {
            return Err(StatusCode::BAD_GATEWAY);
        }
        if matches!(summary.rcode, dns::RCODE_NOERROR | dns::RCODE_NXDOMAIN) {
            self.cache.put(key, response.clone(), summary.min_ttl);
        }
        Ok(response)
    }

    async fn resolve(&self, query: &[u8], selector: &[u8]) -> Result<Vec<u8>, UpstreamError> {
        let n = self.config.upstreams.len();
        let mut last = UpstreamError::Unreachable;
        for idx in attempt_order(select_resolver(selector, n), n) {
            let result = match &self.config.upstreams[idx] {
                Upstream::Doh(url) => resolve_upstream(&self.http, query, url, self.config.upstream_timeout).await,
                Upstream::Local(r) => r.resolve(query).map_err(|_| UpstreamError::BadResponse),
            };
            match result {
                Ok(resp) => return Ok(resp),
                Err(e) => last = e,
            }
        }
        Err(last)
    }

    pub fn metrics_text(&self) -> String {
        format!(
            "queries_total {}\ncache_hits {}\ncache_misses {}\ndecrypt_failures {}\n",
            self.metrics.queries_total.load(Ordering::Relaxed),
            self.cache.hits(),
            self.cache.misses(),
            self.metrics.decrypt_failures.load(Ordering::Relaxed),
        )
    }

    pub fn router(self: &Arc<Self>) -> Router {
        let mut router = Router::new()
            .route(DNS_QUERY_PATH, post(odoh_query))
            .route(CONFIGS_PATH, get(configs))
            .route("/health", get(|| async { "ok" }))
            .route("/metrics", get(metrics));
        if self.config.allow_cleartext {
            router = router.route(CLEARTEXT_PATH, post(cleartext_query));
        }
        router.with_state(self.clone())
    }
}

fn content_type(headers: &HeaderMap) -> Option<&str> {
    headers.get(header::CONTENT_TYPE).and_then(|v| v.to_str().ok())
}

async fn odoh_query(State(target): State<Arc<Target>>, headers: HeaderMap, body: Bytes) -> TargetResponse {
    net::hop_delay(target.config.injected_delay).await;
    let resp = target.handle_odoh_request(&body, content_type(&headers)).await;
    net::hop_delay(target.config.injected_delay).await;
    resp
}

async fn cleartext_query(State(target): State<Arc<Target>>, headers: HeaderMap, body: Bytes) -> TargetResponse {
    net::hop_delay(target.config.injected_delay).await;
    let resp = target.handle_cleartext_request(&body, content_type(&headers)).await;
    net::hop_delay(target.config.injected_delay).await;
    resp
}

async fn configs(State(target): State<Arc<Target>>) -> Response {
    let (status, body) = target.serve_configs();
    (
        status,
        [
            (header::CONTENT_TYPE, "application/octet-stream"),
            (header::CACHE_CONTROL, CONFIGS_MAX_AGE),
        ],
        body,
    )
        .into_response()
}

async fn metrics(State(target): State<Arc<Target>>) -> String {
    target.metrics_text()
}
