//! Measurement harness: crypto and wire-size micro-benchmarks, a paced
//! C×N@R load generator over five protocol modes, and report emission.
//!
//! Percentiles use the nearest-rank definition: the smallest sample such
//! that at least p% of samples are less than or equal to it.

use std::fmt::{self, Write as _};
use std::net::Ipv4Addr;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use rand::{RngExt, SeedableRng};
use thiserror::Error;
use url::Url;

use crate::client::{self, ClientError, ClientSession, SessionOptions};
use crate::dns::{self, Answer, DnsQuestion};
use crate::net::DNS_MESSAGE;
use crate::protocol::{self, TargetKeyConfig};
use crate::suite::CipherSuite;
use crate::target::CLEARTEXT_PATH;

pub const CSV_HEADER: &str = "timestamp,mode,domain,total_ms,seal_us,open_us,http_status";
pub const CDF_HEADER: &str = "total_ms,cum_fraction";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("endpoint unreachable: {0}")]
    EndpointUnreachable(String),
    #[error("no samples")]
    EmptySamples,
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, clap::ValueEnum)]
pub enum BenchMode {
    /// Direct DoH to the resolver.
    Doh,
    /// DoH body relayed by the proxy to the resolver.
    Pdoh,
    /// Unencrypted DNS body over the proxy→target→resolver path.
    CleartextOdoh,
    Odoh,
    /// ODoH against a target with an in-process resolver.
    OdohColoc,
}

impl BenchMode {
    pub const ALL: [BenchMode; 5] = [
        BenchMode::Doh,
        BenchMode::Pdoh,
        BenchMode::CleartextOdoh,
        BenchMode::Odoh,
        BenchMode::OdohColoc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchMode::Doh => "doh",
            BenchMode::Pdoh => "pdoh",
            BenchMode::CleartextOdoh => "cleartext-odoh",
            BenchMode::Odoh => "odoh",
            BenchMode::OdohColoc => "odoh-coloc",
        }
    }
}

impl fmt::Display for BenchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchMode {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BenchMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| BenchError::ConfigInvalid(format!("unknown mode {s}")))
    }
}

/// Service endpoints. Which ones are needed depends on the mode.
#[derive(Debug, Clone, Default)]
pub struct Endpoints {
    /// Proxy base URL.
    pub proxy: Option<String>,
    /// Target `host:port`.
    pub target: Option<String>,
    /// Co-located target `host:port`.
    pub coloc_target: Option<String>,
    /// Resolver DoH URL.
    pub resolver: Option<String>,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub clients: usize,
    pub queries_per_client: usize,
    /// Queries per minute per client.
    pub rate_per_minute: f64,
    pub mode: BenchMode,
    pub domains: Vec<String>,
    pub reuse_connections: bool,
    pub endpoints: Endpoints,
    pub insecure_http: bool,
    pub timeout: Duration,
    /// Inter-arrival jitter as a fraction of the mean interval.
    pub jitter: f64,
}

impl BenchConfig {
    pub fn new(mode: BenchMode, clients: usize, queries_per_client: usize, rate_per_minute: f64) -> Self {
        Self {
            clients,
            queries_per_client,
            rate_per_minute,
            mode,
            domains: Vec::new(),
            reuse_connections: true,
            endpoints: Endpoints::default(),
            insecure_http: false,
            timeout: Duration::from_secs(5),
            jitter: 0.1,
        }
    }

    pub fn interval(&self) -> Duration {
        Duration::from_secs_f64(60.0 / self.rate_per_minute)
    }

    fn validate(&self) -> Result<(), BenchError> {
        let invalid = |m: &str| Err(BenchError::ConfigInvalid(m.into()));
        if self.clients == 0 || self.queries_per_client == 0 {
            return invalid("C and N must be at least 1");
        }
        if !self.rate_per_minute.is_finite() || self.rate_per_minute < 1.0 {
            return invalid("R must be at least 1 query per minute");
        }
        if self.domains.is_empty() {
            return invalid("domain list is empty");
        }
        if !(0.0..1.0).contains(&self.jitter) {
            return invalid("jitter must be in [0, 1)");
        }
        for d in &self.domains {
            DnsQuestion::new(d, dns::TYPE_A).map_err(|e| BenchError::ConfigInvalid(format!("domain {d}: {e}")))?;
        }
        Ok(())
    }
}

/// One line of the domains file per name; `#` starts a comment line.
pub fn load_domains(path: &Path) -> Result<Vec<String>, BenchError> {
    Ok(parse_domains(&std::fs::read_to_string(path)?))
}

pub fn parse_domains(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect()
}

/// One attempted query. Failures carry the HTTP status, or 0 when no
/// response arrived.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencySample {
    /// Start time, microseconds since the Unix epoch.
    pub timestamp_us: u64,
    pub mode: BenchMode,
    pub domain: String,
    pub total_ms: f64,
    pub seal_us: f64,
    pub open_us: f64,
    pub http_status: u16,
    pub ok: bool,
}

fn unix_micros() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_micros() as u64)
}

/// `host:port` of a URL or a bare authority.
fn authority(endpoint: &str) -> Result<String, BenchError> {
    if endpoint.contains("://") {
        let url = Url::parse(endpoint).map_err(|e| BenchError::ConfigInvalid(format!("{endpoint}: {e}")))?;
        let host = url.host_str().ok_or_else(|| BenchError::ConfigInvalid(format!("{endpoint}: no host")))?;
        let port = url
            .port_or_known_default()
            .ok_or_else(|| BenchError::ConfigInvalid(format!("{endpoint}: no port")))?;
        Ok(format!("{host}:{port}"))
    } else {
        Ok(endpoint.to_string())
    }
}

async fn check_reachable(endpoint: &str, timeout: Duration) -> Result<(), BenchError> {
    let addr = authority(endpoint)?;
    match tokio::time::timeout(timeout, tokio::net::TcpStream::connect(&addr)).await {
        Ok(Ok(_)) => Ok(()),
        Ok(Err(e)) => Err(BenchError::EndpointUnreachable(format!("{addr}: {e}"))),
        Err(_) => Err(BenchError::EndpointUnreachable(format!("{addr}: connect timed out"))),
    }
}

/// What a worker sends, resolved once before workers start.
#[derive(Debug, Clone)]
enum Plan {
    /// Plain DNS body POSTed to a URL.
    Plain(String),
    /// Sealed through a proxy to a target.
    Sealed {
        proxy: String,
        target: String,
        config: TargetKeyConfig,
    },
}

fn required<'a>(v: &'a Option<String>, what: &str, mode: BenchMode) -> Result<&'a str, BenchError> {
    v.as_deref()
        .ok_or_else(|| BenchError::ConfigInvalid(format!("mode {mode} needs a {what} endpoint")))
}

async fn plan(cfg: &BenchConfig) -> Result<Plan, BenchError> {
    let ep = &cfg.endpoints;
    let mode = cfg.mode;
    let needed: Vec<&str> = match mode {
        BenchMode::Doh => vec![required(&ep.resolver, "resolver", mode)?],
        BenchMode::Pdoh => vec![required(&ep.proxy, "proxy", mode)?, required(&ep.resolver, "resolver", mode)?],
        BenchMode::CleartextOdoh | BenchMode::Odoh => {
            vec![required(&ep.proxy, "proxy", mode)?, required(&ep.target, "target", mode)?]
        }
        BenchMode::OdohColoc => vec![
            required(&ep.proxy, "proxy", mode)?,
            required(&ep.coloc_target, "co-located target", mode)?,
        ],
    };
    for endpoint in &needed {
        check_reachable(endpoint, cfg.timeout).await?;
    }
    let route_err = |e: ClientError| BenchError::ConfigInvalid(e.to_string());
    Ok(match mode {
        BenchMode::Doh => Plan::Plain(needed[0].to_string()),
        BenchMode::Pdoh => {
            let resolver = Url::parse(needed[1]).map_err(|e| BenchError::ConfigInvalid(e.to_string()))?;
            let url = client::proxy_endpoint(needed[0], &authority(needed[1])?, resolver.path()).map_err(route_err)?;
            Plan::Plain(url.to_string())
        }
        BenchMode::CleartextOdoh => {
            Plan::Plain(client::proxy_endpoint(needed[0], needed[1], CLEARTEXT_PATH).map_err(route_err)?.to_string())
        }
        BenchMode::Odoh | BenchMode::OdohColoc => {
            let http = crate::net::http_client(crate::net::ClientOptions {
                timeout: cfg.timeout,
                ..Default::default()
            });
            let discovery = client::discover_config(&http, needed[1], cfg.insecure_http).await?;
            Plan::Sealed {
                proxy: needed[0].to_string(),
                target: needed[1].to_string(),
                config: discovery.config,
            }
        }
    })
}

enum Sender {
    Plain { http: reqwest::Client, url: String },
    Sealed(ClientSession),
}

impl Sender {
    fn new(plan: &Plan, opts: SessionOptions) -> Result<Self, BenchError> {
        Ok(match plan {
            Plan::Plain(url) => Sender::Plain {
                http: opts.http_client(),
                url: url.clone(),
            },
            Plan::Sealed { proxy, target, config } => Sender::Sealed(ClientSession::new(proxy, target, config.clone(), opts)?),
        })
    }

    async fn send(&self, mode: BenchMode, domain: &str) -> LatencySample {
        let timestamp_us = unix_micros();
        let started = Instant::now();
        let mut sample = LatencySample {
            timestamp_us,
            mode,
            domain: domain.to_string(),
            total_ms: 0.0,
            seal_us: 0.0,
            open_us: 0.0,
            http_status: 0,
            ok: false,
        };
        let result: Result<(), ClientError> = match self {
            Sender::Plain { http, url } => async {
                let id = rand::rng().random::<u16>();
                let query = dns::build_query(&DnsQuestion::new(domain, dns::TYPE_A)?, id, false)?;
                let resp = client::post(http, url, DNS_MESSAGE, query).await?;
                if dns::parse_response(&resp)?.id != id {
                    return Err(ClientError::IdMismatch);
                }
                Ok(())
            }
            .await,
            Sender::Sealed(session) => session.query_once(domain, dns::TYPE_A).await.map(|o| {
                sample.seal_us = o.timings.seal_us;
                sample.open_us = o.timings.open_us;
            }),
        };
        sample.total_ms = started.elapsed().as_secs_f64() * 1e3;
        match result {
            Ok(()) => {
                sample.ok = true;
                sample.http_status = 200;
            }
            Err(e) => sample.http_status = e.http_status(),
        }
        sample
    }
}

/// Runs C paced workers of N queries each and returns one sample per
/// attempt, ordered by start time.
pub async fn run_load(cfg: &BenchConfig) -> Result<Vec<LatencySample>, BenchError> {
    cfg.validate()?;
    let plan = plan(cfg).await?;
    let domains: Arc<[String]> = cfg.domains.clone().into();
    let opts = SessionOptions {
        reuse_connections: cfg.reuse_connections,
        timeout: cfg.timeout,
        insecure_http: cfg.insecure_http,
        ..Default::default()
    };
    let interval = cfg.interval().as_secs_f64();
    let mut workers = tokio::task::JoinSet::new();
    for _ in 0..cfg.clients {
        let sender = Sender::new(&plan, opts)?;
        let domains = domains.clone();
        let (mode, n, jitter) = (cfg.mode, cfg.queries_per_client, cfg.jitter);
        workers.spawn(async move {
            let mut rng = rand::rngs::StdRng::from_rng(&mut rand::rng());
            let mut next = tokio::time::Instant::now() + Duration::from_secs_f64(rng.random_range(0.0..interval));
            let mut samples = Vec::with_capacity(n);
            for _ in 0..n {
                tokio::time::sleep_until(next).await;
                let domain = &domains[rng.random_range(0..domains.len())];
                samples.push(sender.send(mode, domain).await);
                let factor = if jitter > 0.0 {
                    rng.random_range(1.0 - jitter..1.0 + jitter)
                } else {
                    1.0
                };
                next += Duration::from_secs_f64(interval * factor);
            }
            samples
        });
    }
    let mut all = Vec::with_capacity(cfg.clients * cfg.queries_per_client);
    while let Some(done) = workers.join_next().await {
        all.extend(done.map_err(|e| BenchError::Io(std::io::Error::other(e)))?);
    }
    all.sort_by_key(|s| s.timestamp_us);
    Ok(all)
}

/// Nearest-rank percentile of ascending `sorted`.
pub fn nearest_rank(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSummary {
    pub mode: BenchMode,
    pub count: usize,
    pub failures: usize,
    pub failure_rate: f64,
    /// Latency statistics over successful samples; NaN when there are none.
    pub mean_ms: f64,
    pub p50_ms: f64,
    pub p90_ms: f64,
    pub p95_ms: f64,
    pub p99_ms: f64,
}

pub fn summarize(samples: &[LatencySample]) -> Result<Vec<ModeSummary>, BenchError> {
    if samples.is_empty() {
        return Err(BenchError::EmptySamples);
    }
    let mut modes: Vec<BenchMode> = samples.iter().map(|s| s.mode).collect();
    modes.sort();
    modes.dedup();
    Ok(modes
        .into_iter()
        .map(|mode| {
            let of_mode: Vec<&LatencySample> = samples.iter().filter(|s| s.mode == mode).collect();
            let ok = sorted(of_mode.iter().filter(|s| s.ok).map(|s| s.total_ms).collect());
            let pct = |p| nearest_rank(&ok, p).unwrap_or(f64::NAN);
            let failures = of_mode.len() - ok.len();
            ModeSummary {
                mode,
                count: of_mode.len(),
                failures,
                failure_rate: failures as f64 / of_mode.len() as f64,
                mean_ms: if ok.is_empty() {
                    f64::NAN
                } else {
                    ok.iter().sum::<f64>() / ok.len() as f64
                },
                p50_ms: pct(50.0),
                p90_ms: pct(90.0),
                p95_ms: pct(95.0),
                p99_ms: pct(99.0),
            }
        })
        .collect())
}

/// `(total_ms, cumulative fraction)` over ascending totals.
pub fn cdf(totals: &[f64]) -> Vec<(f64, f64)> {
    let s = sorted(totals.to_vec());
    let n = s.len() as f64;
    s.iter().enumerate().map(|(i, v)| (*v, (i + 1) as f64 / n)).collect()
}

#[derive(Debug, Clone)]
pub struct Report {
    pub csv: String,
    pub summary: String,
    pub modes: Vec<ModeSummary>,
    /// One CDF table per mode over successful samples.
    pub cdfs: Vec<(BenchMode, String)>,
}

impl Report {
    /// Writes `samples.csv`, `summary.txt` and `cdf-<mode>.csv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), BenchError> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("samples.csv"), &self.csv)?;
        std::fs::write(dir.join("summary.txt"), &self.summary)?;
        for (mode, table) in &self.cdfs {
            std::fs::write(dir.join(format!("cdf-{mode}.csv")), table)?;
        }
        Ok(())
    }
}

pub fn emit_report(samples: &[LatencySample]) -> Result<Report, BenchError> {
    let modes = summarize(samples)?;
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for s in samples {
        let _ = writeln!(
            csv,
            "{},{},{},{:.3},{:.1},{:.1},{}",
            s.timestamp_us, s.mode, s.domain, s.total_ms, s.seal_us, s.open_us, s.http_status
        );
    }
    let mut summary = format!(
        "{:<15} {:>6} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}\n",
        "mode", "count", "fail%", "mean_ms", "p50_ms", "p90_ms", "p95_ms", "p99_ms"
    );
    for m in &modes {
        let _ = writeln!(
            summary,
            "{:<15} {:>6} {:>9.2} {:>9.3} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
            m.mode.name(),
            m.count,
            m.failure_rate * 100.0,
            m.mean_ms,
            m.p50_ms,
            m.p90_ms,
            m.p95_ms,
            m.p99_ms
        );
    }
    let cdfs = modes
        .iter()
        .map(|m| {
            let totals: Vec<f64> = samples.iter().filter(|s| s.mode == m.mode && s.ok).map(|s| s.total_ms).collect();
            let mut table = String::from(CDF_HEADER);
            table.push('\n');
            for (v, f) in cdf(&totals) {
                let _ = writeln!(table, "{v:.3},{f:.6}");
            }
            (m.mode, table)
        })
        .collect();
    Ok(Report {
        csv,
        summary,
        modes,
        cdfs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CryptoBench {
    pub suite: CipherSuite,
    pub iterations: usize,
    pub seal_p50_us: f64,
    pub seal_p99_us: f64,
    pub open_p50_us: f64,
    pub open_p99_us: f64,
    /// Query seal + open plus response seal + open.
    pub lifecycle_p50_us: f64,
    pub lifecycle_p99_us: f64,
}

pub const MIN_CRYPTO_ITERATIONS: usize = 1000;

/// Times query sealing (client) and opening (target) for `iterations`
/// distinct type-A queries, each sealed to a freshly generated target key.
pub fn micro_crypto_bench(suite: CipherSuite, iterations: usize) -> Result<CryptoBench, BenchError> {
    if iterations < MIN_CRYPTO_ITERATIONS {
        return Err(BenchError::ConfigInvalid(format!(
            "iterations must be at least {MIN_CRYPTO_ITERATIONS}"
        )));
    }
    let crypto = |e: protocol::ProtocolError| BenchError::Client(ClientError::Protocol(e));
    let mut seal = Vec::with_capacity(iterations);
    let mut open = Vec::with_capacity(iterations);
    let mut lifecycle = Vec::with_capacity(iterations);
    let mut rng = rand::rng();
    for i in 0..iterations {
        let pair = protocol::generate_key_pair(suite).map_err(crypto)?;
        let name = format!("d{i}-{:08x}.example.com", rng.random::<u32>());
        let query = dns::build_query(&DnsQuestion::new(&name, dns::TYPE_A).expect("valid name"), rng.random(), false)
            .expect("valid query");

        let t = Instant::now();
        let (msg, mut ctx) = protocol::seal_query(pair.config(), &query).map_err(crypto)?;
        let seal_t = t.elapsed();
        let t = Instant::now();
        let opened = protocol::open_query(&pair, &msg).map_err(crypto)?;
        let open_t = t.elapsed();

        let answer = a_record(&name);
        let response = dns::build_response(&opened.dns_query, dns::RCODE_NOERROR, &[answer]).expect("valid response");
        let t = Instant::now();
        let sealed = protocol::seal_response(&opened.response_key, suite, &response).map_err(crypto)?;
        let back = protocol::open_response(&mut ctx, &sealed).map_err(crypto)?;
        let response_t = t.elapsed();
        debug_assert_eq!(back, response);

        seal.push(seal_t.as_secs_f64() * 1e6);
        open.push(open_t.as_secs_f64() * 1e6);
        lifecycle.push((seal_t + open_t + response_t).as_secs_f64() * 1e6);
    }
    let (seal, open, lifecycle) = (sorted(seal), sorted(open), sorted(lifecycle));
    let p = |v: &[f64], q| nearest_rank(v, q).expect("non-empty");
    Ok(CryptoBench {
        suite,
        iterations,
        seal_p50_us: p(&seal, 50.0),
        seal_p99_us: p(&seal, 99.0),
        open_p50_us: p(&open, 50.0),
        open_p99_us: p(&open, 99.0),
        lifecycle_p50_us: p(&lifecycle, 50.0),
        lifecycle_p99_us: p(&lifecycle, 99.0),
    })
}

fn a_record(name: &str) -> Answer {
    Answer {
        name: name.to_ascii_lowercase(),
        rtype: dns::TYPE_A,
        class: dns::CLASS_IN,
        ttl: 300,
        rdata: Ipv4Addr::new(93, 184, 216, 34).octets().to_vec(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizeBench {
    pub suite: CipherSuite,
    pub count: usize,
    pub mean_query_bytes: f64,
    pub mean_odoh_query_bytes: f64,
    /// Smallest and largest per-query overhead (serialized message minus
    /// the DNS query).
    pub query_overhead: (usize, usize),
    pub mean_response_bytes: f64,
    pub mean_odoh_response_bytes: f64,
    /// Smallest and largest per-answer overhead (encrypted answer minus the
    /// DNS response).
    pub response_overhead: (usize, usize),
}

/// Seals a type-A query and a one-record answer for every domain and
/// reports the mean sizes and the overhead range.
pub fn micro_size_bench(domains: &[String], suite: CipherSuite) -> Result<SizeBench, BenchError> {
    if domains.is_empty() {
        return Err(BenchError::ConfigInvalid("domain list is empty".into()));
    }
    let crypto = |e: protocol::ProtocolError| BenchError::Client(ClientError::Protocol(e));
    let pair = protocol::generate_key_pair(suite).map_err(crypto)?;
    let (mut q_sum, mut oq_sum, mut r_sum, mut or_sum) = (0usize, 0usize, 0usize, 0usize);
    let (mut q_over, mut r_over) = ((usize::MAX, 0), (usize::MAX, 0));
    for (i, d) in domains.iter().enumerate() {
        let q = DnsQuestion::new(d, dns::TYPE_A).map_err(|e| BenchError::ConfigInvalid(format!("{d}: {e}")))?;
        let query = dns::build_query(&q, i as u16, false).expect("validated name");
        let (msg, _) = protocol::seal_query(pair.config(), &query).map_err(crypto)?;
        let sealed_len = msg.to_bytes().len();
        let opened = protocol::open_query(&pair, &msg).map_err(crypto)?;
        let response = dns::build_response(&query, dns::RCODE_NOERROR, &[a_record(q.qname())]).expect("valid response");
        let sealed_resp = protocol::seal_response(&opened.response_key, suite, &response).map_err(crypto)?;
        let resp_len = sealed_resp.encrypted_message.len();

        q_sum += query.len();
        oq_sum += sealed_len;
        r_sum += response.len();
        or_sum += resp_len;
        let qo = sealed_len - query.len();
        let ro = resp_len - response.len();
        q_over = (q_over.0.min(qo), q_over.1.max(qo));
        r_over = (r_over.0.min(ro), r_over.1.max(ro));
    }
    let n = domains.len() as f64;
    Ok(SizeBench {
        suite,
        count: domains.len(),
        mean_query_bytes: q_sum as f64 / n,
        mean_odoh_query_bytes: oq_sum as f64 / n,
        query_overhead: q_over,
        mean_response_bytes: r_sum as f64 / n,
        mean_odoh_response_bytes: or_sum as f64 / n,
        response_overhead: r_over,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(mode: BenchMode, total_ms: f64, ok: bool) -> LatencySample {
        LatencySample {
            timestamp_us: 1,
            mode,
            domain: "example.com".into(),
            total_ms,
            seal_us: 0.0,
            open_us: 0.0,
            http_status: if ok { 200 } else { 502 },
            ok,
        }
    }

    #[test]
    fn nearest_rank_definition() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(nearest_rank(&v, 50.0), Some(2.0));
        assert_eq!(nearest_rank(&v, 75.0), Some(3.0));
        assert_eq!(nearest_rank(&v, 76.0), Some(4.0));
        assert_eq!(nearest_rank(&v, 0.0), Some(1.0));
        for p in [50.0, 90.0, 99.0] {
            assert_eq!(nearest_rank(&[7.0], p), Some(7.0));
        }
        assert_eq!(nearest_rank(&[], 50.0), None);
    }

    #[test]
    fn report_layout() {
        let samples: Vec<_> = [4.0, 1.0, 3.0, 2.0]
            .into_iter()
            .map(|t| sample(BenchMode::Odoh, t, true))
            .chain([sample(BenchMode::Doh, 9.0, false)])
            .collect();
        let r = emit_report(&samples).unwrap();
        assert_eq!(r.csv.lines().next(), Some(CSV_HEADER));
        assert_eq!(r.csv.lines().count(), 6);
        let odoh = r.modes.iter().find(|m| m.mode == BenchMode::Odoh).unwrap();
        assert_eq!((odoh.p50_ms, odoh.mean_ms, odoh.failures), (2.0, 2.5, 0));
        let doh = r.modes.iter().find(|m| m.mode == BenchMode::Doh).unwrap();
        assert_eq!(doh.failure_rate, 1.0);
        assert!(doh.mean_ms.is_nan());
        let (_, table) = r.cdfs.iter().find(|(m, _)| *m == BenchMode::Odoh).unwrap();
        assert_eq!(table.lines().next(), Some(CDF_HEADER));
        assert_eq!(table.lines().last(), Some("4.000,1.000000"));
        assert!(matches!(emit_report(&[]), Err(BenchError::EmptySamples)));
    }

    #[test]
    fn cdf_is_monotone() {
        let c = cdf(&[5.0, 1.0, 3.0, 3.0]);
        assert!(c.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1));
        assert_eq!(c.last().unwrap().1, 1.0);
    }

    #[test]
    fn crypto_bench_needs_enough_iterations() {
        assert!(micro_crypto_bench(CipherSuite::DEFAULT, 0).is_err());
        assert!(micro_crypto_bench(CipherSuite::DEFAULT, 999).is_err());
    }

    #[test]
    fn size_bench_overheads_are_constant() {
        let domains = parse_domains("example.com\n# c\na.b.c.example.org\nx.io\n");
        let s = micro_size_bench(&domains, CipherSuite::DEFAULT).unwrap();
        assert_eq!(s.count, 3);
        assert_eq!(s.query_overhead, (107, 107));
        assert_eq!(s.response_overhead, (16, 16));
        assert!((s.mean_odoh_query_bytes - s.mean_query_bytes - 107.0).abs() < 1e-9);
    }

    #[test]
    fn config_validation() {
        let mut cfg = BenchConfig::new(BenchMode::Doh, 1, 1, 60.0);
        assert!(cfg.validate().is_err(), "no domains");
        cfg.domains = vec!["example.com".into()];
        assert!(cfg.validate().is_ok());
        cfg.clients = 0;
        assert!(cfg.validate().is_err());
        cfg.clients = 1;
        cfg.rate_per_minute = 0.0;
        assert!(cfg.validate().is_err());
        assert_eq!(BenchConfig::new(BenchMode::Doh, 1, 1, 600.0).interval(), Duration::from_millis(100));
        assert_eq!("cleartext-odoh".parse::<BenchMode>().unwrap(), BenchMode::CleartextOdoh);
        assert_eq!(authority("http://127.0.0.1:81/dns-query").unwrap(), "127.0.0.1:81");
        assert_eq!(authority("https://r.example/q").unwrap(), "r.example:443");
        assert_eq!(authority("t.example:8443").unwrap(), "t.example:8443");
    }

    #[tokio::test]
    async fn unreachable_endpoint_aborts_before_spawning() {
        let mut cfg = BenchConfig::new(BenchMode::Doh, 2, 5, 600.0);
        cfg.domains = vec!["example.com".into()];
        cfg.endpoints.resolver = Some("http://127.0.0.1:9/dns-query".into());
        assert!(matches!(run_load(&cfg).await, Err(BenchError::EndpointUnreachable(_))));
        cfg.mode = BenchMode::Odoh;
        assert!(matches!(run_load(&cfg).await, Err(BenchError::ConfigInvalid(_))));
    }
}
