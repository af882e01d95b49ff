//! The client side: config discovery, proxy/target route selection, and
//! sessions that seal queries, send them through a proxy and open answers.

use std::collections::HashMap;
use std::fmt;
use std::future::Future;
use std::net::IpAddr;
use std::str::FromStr;
use std::time::{Duration, Instant};

use axum::http::{header, StatusCode};
use parking_lot::Mutex;
use rand::{Rng, RngExt, SeedableRng};
use thiserror::Error;
use url::Url;

use crate::dns::{self, DnsError, DnsQuestion, DnsResponseSummary};
use crate::net::{self, ClientOptions, DNS_MESSAGE};
use crate::protocol::{self, ProtocolError, TargetKeyConfig, CONTENT_TYPE};
use crate::proxy::PROXY_PATH;
use crate::target::{CONFIGS_PATH, DNS_QUERY_PATH};

/// Fixed probe question, so probes never carry real browsing intent.
pub const PROBE_NAME: &str = "odoh.test";
/// SvcParamKey carrying a serialized config list in an HTTPS record.
pub const SVC_PARAM_ODOH_CONFIG: u16 = 0x8001;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("discovery failed: {0}")]
    Discovery(String),
    #[error("no supported cipher suite in the target's config list")]
    NoSupportedSuite,
    #[error("HTTP {status}")]
    Http { status: u16 },
    #[error("request timed out")]
    Timeout,
    #[error("transport error: {0}")]
    Transport(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Dns(#[from] DnsError),
    #[error("response id does not match the query")]
    IdMismatch,
    #[error("0x20 casing was not echoed; response rejected")]
    Verify0x20,
    #[error("bad route: {0}")]
    Route(String),
}

impl ClientError {
    /// HTTP status to record for this failure; 0 when no response arrived.
    pub fn http_status(&self) -> u16 {
        match self {
            ClientError::Http { status } => *status,
            _ => 0,
        }
    }
}

fn transport(e: reqwest::Error) -> ClientError {
    if e.is_timeout() {
        ClientError::Timeout
    } else {
        ClientError::Transport(e.to_string())
    }
}

/// POSTs `body` and returns the response body of a 200.
pub async fn post(http: &reqwest::Client, url: &str, content_type: &str, body: Vec<u8>) -> Result<Vec<u8>, ClientError> {
    let resp = http
        .post(url)
        .header(header::CONTENT_TYPE, content_type)
        .header(header::ACCEPT, content_type)
        .body(body)
        .send()
        .await
        .map_err(transport)?;
    if resp.status() != StatusCode::OK {
        return Err(ClientError::Http {
            status: resp.status().as_u16(),
        });
    }
    Ok(resp.bytes().await.map_err(transport)?.to_vec())
}

fn scheme(insecure_http: bool) -> &'static str {
    if insecure_http {
        "http"
    } else {
        "https"
    }
}

/// `{proxy}/proxy?targethost=..&targetpath=..`. A proxy URL without a path
/// gets the default `/proxy` endpoint.
pub fn proxy_endpoint(proxy: &str, targethost: &str, targetpath: &str) -> Result<Url, ClientError> {
    let mut url = Url::parse(proxy).map_err(|e| ClientError::Route(format!("{proxy}: {e}")))?;
    if url.path().is_empty() || url.path() == "/" {
        url.set_path(PROXY_PATH);
    }
    url.query_pairs_mut()
        .clear()
        .append_pair("targethost", targethost)
        .append_pair("targetpath", targetpath);
    Ok(url)
}

/// First config in `list` whose suite is supported.
pub fn select_supported(list: &[u8]) -> Result<TargetKeyConfig, ClientError> {
    let configs = protocol::parse_config_list(list).map_err(|e| ClientError::Discovery(e.to_string()))?;
    configs.into_iter().next().ok_or(ClientError::NoSupportedSuite)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Discovery {
    pub config: TargetKeyConfig,
    /// Obtained without DNSSEC validation.
    pub unverified: bool,
    pub warnings: Vec<String>,
}

pub async fn fetch_configs(http: &reqwest::Client, target: &str, insecure_http: bool) -> Result<Vec<u8>, ClientError> {
    let url = format!("{}://{target}{CONFIGS_PATH}", scheme(insecure_http));
    let resp = http.get(&url).send().await.map_err(|e| ClientError::Discovery(e.to_string()))?;
    if resp.status() != StatusCode::OK {
        return Err(ClientError::Discovery(format!("{url}: HTTP {}", resp.status().as_u16())));
    }
    Ok(resp.bytes().await.map_err(|e| ClientError::Discovery(e.to_string()))?.to_vec())
}

/// Fetches the well-known config list twice; the key id must be stable
/// across fetches, otherwise the newer config is used with a warning.
pub async fn discover_config(http: &reqwest::Client, target: &str, insecure_http: bool) -> Result<Discovery, ClientError> {
    let first = select_supported(&fetch_configs(http, target, insecure_http).await?)?;
    let second = select_supported(&fetch_configs(http, target, insecure_http).await?)?;
    let mut warnings = Vec::new();
    if first.key_id() != second.key_id() {
        warnings.push(format!("{target}: config changed between fetches; using the newer one"));
    }
    Ok(Discovery {
        config: second,
        unverified: false,
        warnings,
    })
}

/// Looks up the HTTPS record for [`PROBE_NAME`] through a bootstrap DoH
/// resolver and takes the config list from its odoh SvcParam.
pub async fn discover_config_dns(http: &reqwest::Client, bootstrap_url: &str) -> Result<Discovery, ClientError> {
    let query = dns::build_query(&DnsQuestion::new(PROBE_NAME, dns::TYPE_HTTPS)?, random_id(), false)?;
    let resp = post(http, bootstrap_url, DNS_MESSAGE, query)
        .await
        .map_err(|e| ClientError::Discovery(e.to_string()))?;
    let summary = dns::parse_response(&resp)?;
    let blob = summary
        .answers
        .iter()
        .filter(|a| a.rtype == dns::TYPE_HTTPS)
        .find_map(|a| extract_odoh_config(&a.rdata))
        .ok_or_else(|| ClientError::Discovery(format!("no odoh config in HTTPS record for {PROBE_NAME}")))?;
    Ok(Discovery {
        config: select_supported(&blob)?,
        unverified: true,
        warnings: vec!["config obtained over DNS without DNSSEC validation".into()],
    })
}

/// HTTPS rdata (priority 1, target ".") carrying `config_list`.
pub fn https_rdata_with_config(config_list: &[u8]) -> Vec<u8> {
    let mut out = vec![0, 1, 0];
    out.extend_from_slice(&SVC_PARAM_ODOH_CONFIG.to_be_bytes());
    out.extend_from_slice(&(config_list.len() as u16).to_be_bytes());
    out.extend_from_slice(config_list);
    out
}

/// The odoh SvcParam value of an HTTPS record, if present.
pub fn extract_odoh_config(rdata: &[u8]) -> Option<Vec<u8>> {
    let mut pos = 2;
    loop {
        let len = *rdata.get(pos)? as usize;
        pos += 1;
        if len == 0 {
            break;
        }
        if len & 0xc0 != 0 {
            return None;
        }
        pos += len;
    }
    while pos + 4 <= rdata.len() {
        let key = u16::from_be_bytes([rdata[pos], rdata[pos + 1]]);
        let len = u16::from_be_bytes([rdata[pos + 2], rdata[pos + 3]]) as usize;
        let value = rdata.get(pos + 4..pos + 4 + len)?;
        if key == SVC_PARAM_ODOH_CONFIG {
            return Some(value.to_vec());
        }
        pos += 4 + len;
    }
    None
}

fn random_id() -> u16 {
    let mut b = [0u8; 2];
    crate::hpke::fill_random(&mut b).expect("OS randomness is available");
    u16::from_be_bytes(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum Strategy {
    RandomPair,
    FastestProxy,
    FastestPair,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::RandomPair, Strategy::FastestProxy, Strategy::FastestPair];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::RandomPair => "random-pair",
            Strategy::FastestProxy => "fastest-proxy",
            Strategy::FastestPair => "fastest-pair",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = ClientError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| ClientError::Route(format!("unknown strategy {s}")))
    }
}

/// Proxy and target candidates, as read from a route file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RouteList {
    pub proxies: Vec<String>,
    pub targets: Vec<String>,
}

/// Parses `[proxies]` and `[targets]` sections, one entry per line.
pub fn parse_route_file(text: &str) -> Result<RouteList, ClientError> {
    let mut routes = RouteList::default();
    let mut section: Option<&mut Vec<String>> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line {
            "[proxies]" => section = Some(&mut routes.proxies),
            "[targets]" => section = Some(&mut routes.targets),
            _ if line.starts_with('[') => return Err(ClientError::Route(format!("line {}: unknown section {line}", i + 1))),
            _ => match section.as_deref_mut() {
                Some(list) => list.push(line.to_string()),
                None => return Err(ClientError::Route(format!("line {}: entry outside a section", i + 1))),
            },
        }
    }
    if routes.proxies.is_empty() || routes.targets.is_empty() {
        return Err(ClientError::Route("route file needs at least one proxy and one target".into()));
    }
    Ok(routes)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteSelection {
    pub strategy: Strategy,
    pub proxy: String,
    pub target: String,
    /// Median probe RTT of the chosen proxy or pair; `None` when not probed.
    pub rtt_ms: Option<f64>,
    /// Every probe as `(proxy, target, median ms)`, infinite on failure.
    pub probes: Vec<(String, String, f64)>,
    pub warning: Option<String>,
}

/// Measures a proxy/target pair.
pub trait Prober {
    /// Median RTT in ms over `count` probe queries; `f64::INFINITY` when
    /// every probe failed.
    fn probe(&self, proxy: &str, target: &str, count: usize) -> impl Future<Output = f64> + Send;
}

/// Index of the smallest finite value; ties go to the earlier index.
fn argmin(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        if v.is_finite() && best.is_none_or(|b| *v < values[b]) {
            best = Some(i);
        }
    }
    best
}

pub async fn select_route_with<P: Prober, R: Rng>(
    strategy: Strategy,
    proxies: &[String],
    targets: &[String],
    probe_count: usize,
    prober: &P,
    rng: &mut R,
) -> Result<RouteSelection, ClientError> {
    if proxies.is_empty() || targets.is_empty() {
        return Err(ClientError::Route("proxy and target lists must be non-empty".into()));
    }
    if probe_count == 0 {
        return Err(ClientError::Route("probe count must be at least 1".into()));
    }
    let random_pair = |rng: &mut R, strategy, probes, warning| RouteSelection {
        strategy,
        proxy: proxies[rng.random_range(0..proxies.len())].clone(),
        target: targets[rng.random_range(0..targets.len())].clone(),
        rtt_ms: None,
        probes,
        warning,
    };
    const ALL_FAILED: &str = "every probe failed; falling back to a random pair";
    match strategy {
        Strategy::RandomPair => Ok(random_pair(rng, strategy, Vec::new(), None)),
        Strategy::FastestProxy => {
            let probe_target = &targets[rng.random_range(0..targets.len())];
            let mut probes = Vec::with_capacity(proxies.len());
            for p in proxies {
                let rtt = prober.probe(p, probe_target, probe_count).await;
                probes.push((p.clone(), probe_target.clone(), rtt));
            }
            let rtts: Vec<f64> = probes.iter().map(|p| p.2).collect();
            match argmin(&rtts) {
                Some(i) => Ok(RouteSelection {
                    strategy,
                    proxy: proxies[i].clone(),
                    target: targets[rng.random_range(0..targets.len())].clone(),
                    rtt_ms: Some(rtts[i]),
                    probes,
                    warning: None,
                }),
                None => Ok(random_pair(rng, strategy, probes, Some(ALL_FAILED.into()))),
            }
        }
        Strategy::FastestPair => {
            let mut probes = Vec::with_capacity(proxies.len() * targets.len());
            for p in proxies {
                for t in targets {
                    let rtt = prober.probe(p, t, probe_count).await;
                    probes.push((p.clone(), t.clone(), rtt));
                }
            }
            let rtts: Vec<f64> = probes.iter().map(|p| p.2).collect();
            match argmin(&rtts) {
                Some(i) => Ok(RouteSelection {
                    strategy,
                    proxy: probes[i].0.clone(),
                    target: probes[i].1.clone(),
                    rtt_ms: Some(rtts[i]),
                    probes,
                    warning: None,
                }),
                None => Ok(random_pair(rng, strategy, probes, Some(ALL_FAILED.into()))),
            }
        }
    }
}

pub async fn select_route<P: Prober>(
    strategy: Strategy,
    proxies: &[String],
    targets: &[String],
    probe_count: usize,
    prober: &P,
) -> Result<RouteSelection, ClientError> {
    let mut rng = rand::rngs::StdRng::from_rng(&mut rand::rng());
    select_route_with(strategy, proxies, targets, probe_count, prober, &mut rng).await
}

/// Median of `samples`, mean of the middle two for an even count.
pub fn median(samples: &mut [f64]) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    Some(if n % 2 == 1 {
        samples[n / 2]
    } else {
        (samples[n / 2 - 1] + samples[n / 2]) / 2.0
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SessionOptions {
    pub reuse_connections: bool,
    pub timeout: Duration,
    pub local_address: Option<IpAddr>,
    pub use_0x20: bool,
    pub insecure_http: bool,
}

impl Default for SessionOptions {
    fn default() -> Self {
        Self {
            reuse_connections: true,
            timeout: Duration::from_secs(5),
            local_address: None,
            use_0x20: false,
            insecure_http: false,
        }
    }
}

impl SessionOptions {
    pub fn http_client(&self) -> reqwest::Client {
        net::http_client(ClientOptions {
            reuse_connections: self.reuse_connections,
            timeout: self.timeout,
            local_address: self.local_address,
        })
    }
}

/// Probes pairs with real ODoH queries for [`PROBE_NAME`].
pub struct NetworkProber {
    opts: SessionOptions,
    http: reqwest::Client,
    configs: Mutex<HashMap<String, TargetKeyConfig>>,
}

impl NetworkProber {
    pub fn new(opts: SessionOptions) -> Self {
        Self {
            http: opts.http_client(),
            opts,
            configs: Mutex::new(HashMap::new()),
        }
    }

    async fn config_for(&self, target: &str) -> Option<TargetKeyConfig> {
        if let Some(c) = self.configs.lock().get(target) {
            return Some(c.clone());
        }
        let found = discover_config(&self.http, target, self.opts.insecure_http).await.ok()?.config;
        self.configs.lock().insert(target.to_string(), found.clone());
        Some(found)
    }
}

impl Prober for NetworkProber {
    async fn probe(&self, proxy: &str, target: &str, count: usize) -> f64 {
        let Some(config) = self.config_for(target).await else {
            return f64::INFINITY;
        };
        let Ok(session) = ClientSession::with_client(self.http.clone(), proxy, target, config, self.opts) else {
            return f64::INFINITY;
        };
        let mut samples = Vec::with_capacity(count);
        for _ in 0..count {
            if let Ok(out) = session.query_once(PROBE_NAME, dns::TYPE_A).await {
                samples.push(out.timings.total_ms);
            }
        }
        median(&mut samples).unwrap_or(f64::INFINITY)
    }
}

/// Median RTT of `count` probe queries through one pair.
pub async fn probe_latency(proxy: &str, target: &str, count: usize, opts: SessionOptions) -> f64 {
    NetworkProber::new(opts).probe(proxy, target, count.max(1)).await
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Timings {
    pub seal_us: f64,
    /// Network round trip through proxy and target.
    pub rtt_ms: f64,
    pub open_us: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone)]
pub struct QueryOutcome {
    pub query: Vec<u8>,
    pub response: Vec<u8>,
    pub summary: DnsResponseSummary,
    pub timings: Timings,
    /// The one-shot key this query's answer was sealed under.
    pub response_key: Vec<u8>,
}

/// One proxy/target route with a discovered config. When connections are
/// reused, one pooled connection per proxy carries every query.
pub struct ClientSession {
    http: reqwest::Client,
    endpoint: String,
    proxy: String,
    target: String,
    config: TargetKeyConfig,
    use_0x20: bool,
}

impl fmt::Debug for ClientSession {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClientSession")
            .field("proxy", &self.proxy)
            .field("target", &self.target)
            .finish_non_exhaustive()
    }
}

impl ClientSession {
    pub fn new(proxy: &str, target: &str, config: TargetKeyConfig, opts: SessionOptions) -> Result<Self, ClientError> {
        Self::with_client(opts.http_client(), proxy, target, config, opts)
    }

    pub fn with_client(
        http: reqwest::Client,
        proxy: &str,
        target: &str,
        config: TargetKeyConfig,
        opts: SessionOptions,
    ) -> Result<Self, ClientError> {
        let endpoint = proxy_endpoint(proxy, target, DNS_QUERY_PATH)?.to_string();
        Ok(Self {
            http,
            endpoint,
            proxy: proxy.to_string(),
            target: target.to_string(),
            config,
            use_0x20: opts.use_0x20,
        })
    }

    pub fn proxy(&self) -> &str {
        &self.proxy
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn config(&self) -> &TargetKeyConfig {
        &self.config
    }

    pub async fn query_once(&self, name: &str, qtype: u16) -> Result<QueryOutcome, ClientError> {
        let started = Instant::now();
        let query = dns::build_query(&DnsQuestion::new(name, qtype)?, random_id(), self.use_0x20)?;
        self.exchange_from(query, started).await
    }

    /// Sends a prepared DNS query.
    pub async fn exchange(&self, query: Vec<u8>) -> Result<QueryOutcome, ClientError> {
        self.exchange_from(query, Instant::now()).await
    }

    async fn exchange_from(&self, query: Vec<u8>, started: Instant) -> Result<QueryOutcome, ClientError> {
        let t = Instant::now();
        let (msg, mut ctx) = protocol::seal_query(&self.config, &query)?;
        let body = msg.to_bytes();
        let seal_us = t.elapsed().as_secs_f64() * 1e6;

        let t = Instant::now();
        let reply = post(&self.http, &self.endpoint, CONTENT_TYPE, body).await?;
        let rtt_ms = t.elapsed().as_secs_f64() * 1e3;

        let t = Instant::now();
        let response = protocol::open_response(&mut ctx, &protocol::parse_message(&reply)?)?;
        let open_us = t.elapsed().as_secs_f64() * 1e6;

        let summary = dns::parse_response(&response)?;
        if summary.id != u16::from_be_bytes([query[0], query[1]]) {
            return Err(ClientError::IdMismatch);
        }
        if self.use_0x20 && !dns::verify_0x20(&query, &response)? {
            return Err(ClientError::Verify0x20);
        }
        Ok(QueryOutcome {
            query,
            response,
            summary,
            timings: Timings {
                seal_us,
                rtt_ms,
                open_us,
                total_ms: started.elapsed().as_secs_f64() * 1e3,
            },
            response_key: ctx.response_key().to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Table(HashMap<(String, String), f64>);

    impl Prober for Table {
        async fn probe(&self, proxy: &str, target: &str, _count: usize) -> f64 {
            self.0[&(proxy.to_string(), target.to_string())]
        }
    }

    fn names(prefix: &str, n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("{prefix}{i}")).collect()
    }

    fn table(rows: &[(&str, &str, f64)]) -> Table {
        Table(rows.iter().map(|(p, t, v)| ((p.to_string(), t.to_string()), *v)).collect())
    }

    #[tokio::test]
    async fn fastest_pair_is_argmin_with_list_order_ties() {
        let t = table(&[("p1", "t1", 30.0), ("p1", "t2", 40.0), ("p2", "t1", 8.0), ("p2", "t2", 8.0)]);
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        let sel = select_route_with(Strategy::FastestPair, &names("p", 2), &names("t", 2), 3, &t, &mut rng)
            .await
            .unwrap();
        assert_eq!((sel.proxy.as_str(), sel.target.as_str()), ("p2", "t1"));
        assert_eq!(sel.rtt_ms, Some(8.0));
        assert_eq!(sel.probes.len(), 4);
    }

    #[tokio::test]
    async fn fastest_proxy_probes_each_proxy_once() {
        let inf = f64::INFINITY;
        let t = table(&[("p1", "t1", inf), ("p2", "t1", 5.0), ("p1", "t2", inf), ("p2", "t2", 6.0)]);
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let sel = select_route_with(Strategy::FastestProxy, &names("p", 2), &names("t", 2), 1, &t, &mut rng)
            .await
            .unwrap();
        assert_eq!(sel.proxy, "p2");
        assert_eq!(sel.probes.len(), 2);
        assert!(sel.warning.is_none());
    }

    #[tokio::test]
    async fn all_failed_falls_back_to_random_pair() {
        let inf = f64::INFINITY;
        let t = table(&[("p1", "t1", inf)]);
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for strategy in Strategy::ALL {
            let sel = select_route_with(strategy, &names("p", 1), &names("t", 1), 2, &t, &mut rng)
                .await
                .unwrap();
            assert_eq!((sel.proxy.as_str(), sel.target.as_str()), ("p1", "t1"));
            assert_eq!(sel.warning.is_some(), strategy != Strategy::RandomPair);
        }
        assert!(select_route_with(Strategy::RandomPair, &[], &names("t", 1), 1, &t, &mut rng).await.is_err());
        assert!(select_route_with(Strategy::FastestPair, &names("p", 1), &names("t", 1), 0, &t, &mut rng).await.is_err());
    }

    #[test]
    fn medians() {
        assert_eq!(median(&mut [5.0]), Some(5.0));
        assert_eq!(median(&mut [9.0, 1.0, 4.0]), Some(4.0));
        assert_eq!(median(&mut [1.0, 2.0, 3.0, 10.0]), Some(2.5));
        assert_eq!(median(&mut []), None);
    }

    #[test]
    fn route_file() {
        let r = parse_route_file("# routes\n[proxies]\nhttp://p1\nhttp://p2\n\n[targets]\nt1:443\n").unwrap();
        assert_eq!(r.proxies, ["http://p1", "http://p2"]);
        assert_eq!(r.targets, ["t1:443"]);
        assert!(parse_route_file("http://p1\n").is_err());
        assert!(parse_route_file("[proxies]\nhttp://p1\n").is_err());
        assert!(parse_route_file("[mirrors]\nx\n").is_err());
    }

    #[test]
    fn endpoint_url() {
        let u = proxy_endpoint("http://127.0.0.1:8080", "t.example:8443", "/dns-query").unwrap();
        assert_eq!(
            u.as_str(),
            "http://127.0.0.1:8080/proxy?targethost=t.example%3A8443&targetpath=%2Fdns-query"
        );
        let custom = proxy_endpoint("https://p.example/relay", "t", "/q").unwrap();
        assert_eq!(custom.path(), "/relay");
    }

    #[test]
    fn https_record_roundtrip() {
        let list = [0u8, 3, 0xaa, 0xbb, 0xcc];
        let rdata = https_rdata_with_config(&list);
        assert_eq!(extract_odoh_config(&rdata).as_deref(), Some(&list[..]));
        let mut other = vec![0, 1, 3, b'f', b'o', b'o', 0, 0, 1, 0, 2, b'h', b'3'];
        assert_eq!(extract_odoh_config(&other), None);
        other.extend_from_slice(&[0x80, 0x01, 0, 1, 7]);
        assert_eq!(extract_odoh_config(&other), Some(vec![7]));
    }

    #[test]
    fn strategy_names() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
    }
}
