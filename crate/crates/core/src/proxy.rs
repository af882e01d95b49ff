//! The oblivious proxy: relays opaque ODoH bodies to a client-chosen target
//! with the client's identity stripped, behind a per-address token bucket.
//!
//! The body is never inspected beyond its length. The client address is
//! used only as a rate-limiter key; it never reaches a log line, a metric
//! or an outbound request.

use std::collections::HashMap;
use std::net::{IpAddr, SocketAddr};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{ConnectInfo, DefaultBodyLimit, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use parking_lot::Mutex;
use thiserror::Error;

use crate::net::{self, DNS_MESSAGE, USER_AGENT};
use crate::protocol::CONTENT_TYPE;

pub const PROXY_PATH: &str = "/proxy";
pub const MAX_BODY_LEN: usize = 8 * 1024;
pub const DEFAULT_RATE_LIMIT: u32 = 300;
pub const DEFAULT_BURST: u32 = 50;

#[derive(Debug, Clone)]
pub struct ProxyConfig {
    /// Hostnames (optionally with port) the proxy may forward to; `None`
    /// allows any target.
    pub allowed_targets: Option<Vec<String>>,
    /// Requests per minute per client address.
    pub rate_limit: u32,
    pub burst: u32,
    pub forward_timeout: Duration,
    /// One-way delay added on the way in and on the way out.
    pub injected_delay: Duration,
    /// Forward over `http://` instead of `https://`.
    pub insecure_http: bool,
    /// Also relay `application/dns-message` bodies (proxied DoH baseline).
    pub allow_plain_doh: bool,
}

impl Default for ProxyConfig {
    fn default() -> Self {
        Self {
            allowed_targets: None,
            rate_limit: DEFAULT_RATE_LIMIT,
            burst: DEFAULT_BURST,
            forward_timeout: Duration::from_secs(5),
            injected_delay: Duration::ZERO,
            insecure_http: false,
            allow_plain_doh: false,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProxyConfigError {
    #[error("rate limit must be positive")]
    ZeroRate,
    #[error("burst must be at least 1")]
    ZeroBurst,
}

#[derive(Debug, Clone, Copy)]
struct Bucket {
    tokens: f64,
    last: Instant,
}

/// Token bucket per client address: capacity `burst`, refilled at
/// `rate_per_minute / 60` tokens per second.
#[derive(Debug)]
pub struct RateLimiter {
    capacity: f64,
    refill_per_sec: f64,
    buckets: Mutex<HashMap<IpAddr, Bucket>>,
}

/// Buckets are swept for idle, full entries once the table grows past this.
const SWEEP_THRESHOLD: usize = 65_536;

impl RateLimiter {
    pub fn new(rate_per_minute: u32, burst: u32) -> Self {
        Self {
            capacity: burst as f64,
            refill_per_sec: rate_per_minute as f64 / 60.0,
            buckets: Mutex::new(HashMap::new()),
        }
    }

    /// Takes one token for `addr` at `now`; false when the bucket is empty.
    pub fn check(&self, addr: IpAddr, now: Instant) -> bool {
        let mut buckets = self.buckets.lock();
        if buckets.len() >= SWEEP_THRESHOLD {
            let (cap, rate) = (self.capacity, self.refill_per_sec);
            buckets.retain(|_, b| b.tokens + now.saturating_duration_since(b.last).as_secs_f64() * rate < cap);
        }
        let b = buckets.entry(addr).or_insert(Bucket {
            tokens: self.capacity,
            last: now,
        });
        let elapsed = now.saturating_duration_since(b.last).as_secs_f64();
        b.tokens = (b.tokens + elapsed * self.refill_per_sec).min(self.capacity);
        b.last = b.last.max(now);
        if b.tokens >= 1.0 {
            b.tokens -= 1.0;
            true
        } else {
            false
        }
    }

    /// Tokens currently available to `addr` at `now`.
    pub fn available(&self, addr: IpAddr, now: Instant) -> f64 {
        self.buckets.lock().get(&addr).map_or(self.capacity, |b| {
            let elapsed = now.saturating_duration_since(b.last).as_secs_f64();
            (b.tokens + elapsed * self.refill_per_sec).min(self.capacity)
        })
    }
}

/// Forwarding instructions carried in the query string.
#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Deserialize)]
pub struct ProxyParams {
    pub targethost: Option<String>,
    pub targetpath: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProxyResponse {
    pub status: StatusCode,
    pub content_type: Option<HeaderValue>,
    pub body: Bytes,
}

impl ProxyResponse {
    fn error(status: StatusCode) -> Self {
        Self {
            status,
            content_type: None,
            body: Bytes::new(),
        }
    }
}

impl IntoResponse for ProxyResponse {
    fn into_response(self) -> Response {
        let mut resp = (self.status, self.body).into_response();
        match self.content_type {
            Some(ct) => resp.headers_mut().insert(header::CONTENT_TYPE, ct),
            None => resp.headers_mut().remove(header::CONTENT_TYPE),
        };
        resp
    }
}

/// Builds the outbound header set: Content-Type, Content-Length and Accept
/// copied from the client, Host set to the target, and a fixed User-Agent.
pub fn sanitize_headers(inbound: &HeaderMap, target_host: &str) -> HeaderMap {
    let mut out = HeaderMap::new();
    for name in [header::CONTENT_TYPE, header::CONTENT_LENGTH, header::ACCEPT] {
        if let Some(v) = inbound.get(&name) {
            out.insert(name, v.clone());
        }
    }
    if let Ok(host) = HeaderValue::from_str(target_host) {
        out.insert(header::HOST, host);
    }
    out.insert(header::USER_AGENT, HeaderValue::from_static(USER_AGENT));
    out
}

/// `host` or `host:port`, with nothing that could change the URL shape.
fn valid_target_host(host: &str) -> bool {
    !host.is_empty()
        && host
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'.' | b'-' | b':' | b'[' | b']' | b'_'))
}

fn valid_target_path(path: &str) -> bool {
    path.starts_with('/') && !path.starts_with("//") && !path.bytes().any(|b| b.is_ascii_whitespace() || b == b'#')
}

fn host_without_port(host: &str) -> &str {
    if let Some(rest) = host.strip_prefix('[') {
        return rest.split(']').next().unwrap_or(rest);
    }
    match host.rsplit_once(':') {
        Some((h, port)) if port.bytes().all(|b| b.is_ascii_digit()) => h,
        _ => host,
    }
}

#[derive(Debug, Default)]
pub struct ProxyMetrics {
    pub forwards_total: AtomicU64,
    pub rate_limited_total: AtomicU64,
    pub upstream_errors_total: AtomicU64,
}

#[derive(Debug)]
pub struct Proxy {
    config: ProxyConfig,
    limiter: RateLimiter,
    http: reqwest::Client,
    metrics: ProxyMetrics,
}

impl Proxy {
    pub fn new(config: ProxyConfig) -> Result<Arc<Self>, ProxyConfigError> {
        if config.rate_limit == 0 {
            return Err(ProxyConfigError::ZeroRate);
        }
        if config.burst == 0 {
            return Err(ProxyConfigError::ZeroBurst);
        }
        let http = net::http_client(net::ClientOptions {
            timeout: config.forward_timeout,
            ..Default::default()
        });
        Ok(Arc::new(Self {
            limiter: RateLimiter::new(config.rate_limit, config.burst),
            http,
            metrics: ProxyMetrics::default(),
            config,
        }))
    }

    pub fn config(&self) -> &ProxyConfig {
        &self.config
    }

    pub fn metrics(&self) -> &ProxyMetrics {
        &self.metrics
    }

    pub fn rate_limiter(&self) -> &RateLimiter {
        &self.limiter
    }

    pub fn rate_limit_check(&self, client_addr: IpAddr, now: Instant) -> bool {
        self.limiter.check(client_addr, now)
    }

    pub async fn handle_proxy_request(
        &self,
        params: &ProxyParams,
        headers: &HeaderMap,
        body: Bytes,
        client_addr: IpAddr,
    ) -> ProxyResponse {
        self.handle_proxy_request_at(params, headers, body, client_addr, Instant::now()).await
    }

    /// As [`Proxy::handle_proxy_request`], with the rate limiter read at `now`.
    pub async fn handle_proxy_request_at(
        &self,
        params: &ProxyParams,
        headers: &HeaderMap,
        body: Bytes,
        client_addr: IpAddr,
        now: Instant,
    ) -> ProxyResponse {
        if !self.limiter.check(client_addr, now) {
            self.metrics.rate_limited_total.fetch_add(1, Ordering::Relaxed);
            return ProxyResponse::error(StatusCode::TOO_MANY_REQUESTS);
        }
        let (Some(host), Some(path)) = (params.targethost.as_deref(), params.targetpath.as_deref()) else {
            return ProxyResponse::error(StatusCode::BAD_REQUEST);
        };
        if !valid_target_host(host) || !valid_target_path(path) {
            return ProxyResponse::error(StatusCode::BAD_REQUEST);
        }
        let ct = headers.get(header::CONTENT_TYPE).and_then(|v| v.to_str().ok());
        let accepted = ct == Some(CONTENT_TYPE) || (self.config.allow_plain_doh && ct == Some(DNS_MESSAGE));
        if !accepted {
            return ProxyResponse::error(StatusCode::UNSUPPORTED_MEDIA_TYPE);
        }
        if body.len() > MAX_BODY_LEN {
            return ProxyResponse::error(StatusCode::PAYLOAD_TOO_LARGE);
        }
        if let Some(allowed) = &self.config.allowed_targets {
            let bare = host_without_port(host);
            if !allowed.iter().any(|a| a == host || a == bare) {
                return ProxyResponse::error(StatusCode::FORBIDDEN);
            }
        }
        self.forward(host, path, headers, body).await
    }

    async fn forward(&self, host: &str, path: &str, headers: &HeaderMap, body: Bytes) -> ProxyResponse {
        let scheme = if self.config.insecure_http { "http" } else { "https" };
        let url = format!("{scheme}://{host}{path}");
        let mut outbound = sanitize_headers(headers, host);
        // The HTTP client derives Content-Length from the body it sends.
        outbound.remove(header::CONTENT_LENGTH);
        self.metrics.forwards_total.fetch_add(1, Ordering::Relaxed);
        let sent = self
            .http
            .post(&url)
            .timeout(self.config.forward_timeout)
            .headers(outbound)
            .body(body)
            .send()
            .await;
        let result = match sent {
            Ok(resp) => {
                let status = resp.status();
                let content_type = resp.headers().get(header::CONTENT_TYPE).cloned();
                resp.bytes().await.map(|body| ProxyResponse {
                    status,
                    content_type,
                    body,
                })
            }
            Err(e) => Err(e),
        };
        match result {
            Ok(resp) => {
                tracing::debug!(target_host = host, status = resp.status.as_u16(), len = resp.body.len(), "relayed");
                resp
            }
            Err(e) => {
                self.metrics.upstream_errors_total.fetch_add(1, Ordering::Relaxed);
                let status = if e.is_timeout() {
                    StatusCode::GATEWAY_TIMEOUT
                } else {
                    StatusCode::BAD_GATEWAY
                };
                tracing::warn!(target_host = host, status = status.as_u16(), "forward failed");
                ProxyResponse::error(status)
            }
        }
    }

    pub fn metrics_text(&self) -> String {
        format!(
            "forwards_total {}\nrate_limited_total {}\nupstream_errors_total {}\n",
            self.metrics.forwards_total.load(Ordering::Relaxed),
            self.metrics.rate_limited_total.load(Ordering::Relaxed),
            self.metrics.upstream_errors_total.load(Ordering::Relaxed),
        )
    }

    pub fn router(self: &Arc<Self>) -> Router {
        Router::new()
            .route(PROXY_PATH, post(proxy_handler))
            .route("/health", get(|| async { "ok" }))
            .route("/metrics", get(metrics))
            .layer(DefaultBodyLimit::max(8 * MAX_BODY_LEN))
            .with_state(self.clone())
    }
}

async fn proxy_handler(
    State(proxy): State<Arc<Proxy>>,
    ConnectInfo(peer): ConnectInfo<SocketAddr>,
    Query(params): Query<ProxyParams>,
    headers: HeaderMap,
    body: Bytes,
) -> ProxyResponse {
    net::hop_delay(proxy.config.injected_delay).await;
    let resp = proxy.handle_proxy_request(&params, &headers, body, peer.ip()).await;
    net::hop_delay(proxy.config.injected_delay).await;
    resp
}

async fn metrics(State(proxy): State<Arc<Proxy>>) -> String {
    proxy.metrics_text()
}
