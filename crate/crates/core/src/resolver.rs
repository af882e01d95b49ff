//! Zone-file backed DoH resolver used as a hermetic upstream, either over
//! HTTP (`POST /dns-query`) or in-process for a co-located target.

use std::collections::{HashMap, HashSet};
use std::net::{Ipv4Addr, Ipv6Addr};
use std::path::Path;
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

use crate::dns::{self, Answer, DnsError};
use crate::net::{self, DNS_MESSAGE};

#[derive(Debug, Error)]
pub enum ZoneError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("reading zone file: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZoneRecord {
    pub name: String,
    pub rtype: u16,
    pub ttl: u32,
    pub rdata: Vec<u8>,
}

/// In-memory zone: `name TYPE ttl rdata` per line, `#` comment lines.
///
/// Supported rdata forms: dotted IPv4 for `A`, IPv6 for `AAAA`, a name for
/// `CNAME`/`NS`, free text for `TXT`, and the generic `\# <len> <hex>` form
/// for any type.
/// `(ttl, rdata)` of every record at one name and type.
type RecordSet = Vec<(u32, Vec<u8>)>;

#[derive(Debug, Clone, Default)]
pub struct Zone {
    records: HashMap<(String, u16), RecordSet>,
    names: HashSet<String>,
}

fn encode_text(text: &str) -> Vec<u8> {
    let text = text.trim();
    let text = text.strip_prefix('"').and_then(|t| t.strip_suffix('"')).unwrap_or(text);
    let mut out = Vec::with_capacity(text.len() + 1);
    for chunk in text.as_bytes().chunks(255) {
        out.push(chunk.len() as u8);
        out.extend_from_slice(chunk);
    }
    if text.is_empty() {
        out.push(0);
    }
    out
}

fn encode_name_rdata(name: &str) -> Result<Vec<u8>, String> {
    let q = dns::DnsQuestion::new(name, 0).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    if !q.qname().is_empty() {
        for label in q.qname().split('.') {
            out.push(label.len() as u8);
            out.extend_from_slice(label.as_bytes());
        }
    }
    out.push(0);
    Ok(out)
}

fn decode_hex(s: &str) -> Result<Vec<u8>, String> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if !s.len().is_multiple_of(2) {
        return Err("odd-length hex".into());
    }
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&s[i..i + 2], 16).map_err(|e| e.to_string()))
        .collect()
}

impl Zone {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self, ZoneError> {
        let mut zone = Zone::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            zone.add_line(line).map_err(|reason| ZoneError::Parse { line: i + 1, reason })?;
        }
        Ok(zone)
    }

    pub fn load(path: &Path) -> Result<Self, ZoneError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn add_line(&mut self, line: &str) -> Result<(), String> {
        let mut parts = line.splitn(4, char::is_whitespace).filter(|p| !p.is_empty());
        let name = parts.next().ok_or("missing name")?;
        let rtype_s = parts.next().ok_or("missing type")?;
        let ttl_s = parts.next().ok_or("missing ttl")?;
        let rdata_s = parts.next().ok_or("missing rdata")?.trim();
        let rtype = dns::type_from_name(rtype_s).ok_or_else(|| format!("unknown type {rtype_s}"))?;
        let ttl: u32 = ttl_s.parse().map_err(|_| format!("bad ttl {ttl_s}"))?;
        let rdata = if let Some(generic) = rdata_s.strip_prefix("\\#") {
            let generic = generic.trim();
            let (len_s, hex) = generic.split_once(char::is_whitespace).unwrap_or((generic, ""));
            let len: usize = len_s.parse().map_err(|_| "bad generic rdata length")?;
            let bytes = decode_hex(hex)?;
            if bytes.len() != len {
                return Err("generic rdata length mismatch".into());
            }
            bytes
        } else {
            match rtype {
                dns::TYPE_A => rdata_s
                    .parse::<Ipv4Addr>()
                    .map_err(|e| e.to_string())?
                    .octets()
                    .to_vec(),
                dns::TYPE_AAAA => rdata_s
                    .parse::<Ipv6Addr>()
                    .map_err(|e| e.to_string())?
                    .octets()
                    .to_vec(),
                dns::TYPE_TXT => encode_text(rdata_s),
                dns::TYPE_CNAME | dns::TYPE_NS => encode_name_rdata(rdata_s)?,
                _ => return Err(format!("type {rtype_s} needs generic \\# rdata")),
            }
        };
        self.insert(ZoneRecord {
            name: name.to_string(),
            rtype,
            ttl,
            rdata,
        })
        .map_err(|e| e.to_string())
    }

    pub fn insert(&mut self, record: ZoneRecord) -> Result<(), DnsError> {
        let q = dns::DnsQuestion::new(&record.name, record.rtype)?;
        let name = q.qname().to_string();
        self.names.insert(name.clone());
        self.records
            .entry((name, record.rtype))
            .or_default()
            .push((record.ttl, record.rdata));
        Ok(())
    }

    pub fn add_a(&mut self, name: &str, ttl: u32, ip: Ipv4Addr) -> Result<(), DnsError> {
        self.insert(ZoneRecord {
            name: name.into(),
            rtype: dns::TYPE_A,
            ttl,
            rdata: ip.octets().to_vec(),
        })
    }

    /// Answers `query`: matching records, NOERROR/NODATA for a known name of
    /// another type, NXDOMAIN otherwise. The question is echoed byte-exactly.
    pub fn answer(&self, query: &[u8]) -> Result<Vec<u8>, DnsError> {
        let parsed = dns::parse_query(query)?;
        let (name, qtype, _) = parsed.cache_key();
        match self.records.get(&(name.clone(), qtype)) {
            Some(rrs) => {
                let answers: Vec<Answer> = rrs
                    .iter()
                    .map(|(ttl, rdata)| Answer {
                        name: name.clone(),
                        rtype: qtype,
                        class: dns::CLASS_IN,
                        ttl: *ttl,
                        rdata: rdata.clone(),
                    })
                    .collect();
                dns::build_response(query, dns::RCODE_NOERROR, &answers)
            }
            None if self.names.contains(&name) => dns::build_response(query, dns::RCODE_NOERROR, &[]),
            None => dns::build_response(query, dns::RCODE_NXDOMAIN, &[]),
        }
    }

    pub fn len(&self) -> usize {
        self.records.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// A zone plus a fixed service delay and a query counter.
#[derive(Debug)]
pub struct MockResolver {
    zone: Zone,
    delay: Duration,
    queries: AtomicU64,
}

impl MockResolver {
    pub fn new(zone: Zone, delay: Duration) -> Arc<Self> {
        Arc::new(Self {
            zone,
            delay,
            queries: AtomicU64::new(0),
        })
    }

    pub fn zone(&self) -> &Zone {
        &self.zone
    }

    pub fn delay(&self) -> Duration {
        self.delay
    }

    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    /// Resolves without the service delay.
    pub fn resolve(&self, query: &[u8]) -> Result<Vec<u8>, DnsError> {
        self.queries.fetch_add(1, Ordering::Relaxed);
        self.zone.answer(query)
    }

    pub fn router(self: &Arc<Self>) -> Router {
        Router::new()
            .route("/dns-query", post(doh_query))
            .route("/health", get(|| async { "ok" }))
            .with_state(self.clone())
    }
}

async fn doh_query(State(resolver): State<Arc<MockResolver>>, headers: HeaderMap, body: Bytes) -> Response {
    let ct = headers.get(header::CONTENT_TYPE).and_then(|v| v.to_str().ok());
    if ct != Some(DNS_MESSAGE) {
        return StatusCode::UNSUPPORTED_MEDIA_TYPE.into_response();
    }
    net::hop_delay(resolver.delay).await;
    match resolver.resolve(&body) {
        Ok(resp) => ([(header::CONTENT_TYPE, DNS_MESSAGE)], resp).into_response(),
        Err(_) => StatusCode::BAD_REQUEST.into_response(),
    }
}

/// Loads `zone_file` and serves it on `listen`.
pub async fn mock_resolver_serve(
    zone_file: &Path,
    delay: Duration,
    listen: std::net::SocketAddr,
) -> Result<(Arc<MockResolver>, net::ServerHandle), Box<dyn std::error::Error + Send + Sync>> {
    let resolver = MockResolver::new(Zone::load(zone_file)?, delay);
    let handle = net::bind_and_serve(listen, resolver.router(), net::ServeOptions::default()).await?;
    Ok((resolver, handle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dns::{build_query, parse_response, DnsQuestion};

    const ZONE: &str = "\
# test zone
example.com A 300 93.184.216.34
example.com AAAA 300 2606:2800:220:1:248:1893:25c8:1946
txt.example.com TXT 60 \"hello world\"
odoh.test HTTPS 600 \\# 4 00010000
";

    fn q(name: &str, t: u16) -> Vec<u8> {
        build_query(&DnsQuestion::new(name, t).unwrap(), 77, false).unwrap()
    }

    #[test]
    fn zone_answers() {
        let zone = Zone::parse(ZONE).unwrap();
        assert_eq!(zone.len(), 4);
        let r = parse_response(&zone.answer(&q("example.com", dns::TYPE_A)).unwrap()).unwrap();
        assert_eq!(r.rcode, 0);
        assert_eq!(r.answers[0].rdata_text(), "93.184.216.34");
        assert_eq!(r.answers[0].ttl, 300);
        assert_eq!(r.id, 77);

        let nx = parse_response(&zone.answer(&q("nope.example", dns::TYPE_A)).unwrap()).unwrap();
        assert_eq!(nx.rcode, dns::RCODE_NXDOMAIN);

        let nodata = parse_response(&zone.answer(&q("txt.example.com", dns::TYPE_A)).unwrap()).unwrap();
        assert_eq!((nodata.rcode, nodata.answers.len()), (0, 0));

        let https = parse_response(&zone.answer(&q("odoh.test", dns::TYPE_HTTPS)).unwrap()).unwrap();
        assert_eq!(https.answers[0].rdata, vec![0, 1, 0, 0]);
    }

    #[test]
    fn zone_errors_name_the_line() {
        let err = Zone::parse("ok.com A 1 1.2.3.4\nbad.com A x 1.2.3.4\n").unwrap_err();
        assert!(err.to_string().starts_with("line 2"), "{err}");
        assert!(Zone::parse("a.com HTTPS 5 \\# 3 0001").is_err());
        assert!(Zone::parse("a.com A 5").is_err());
    }

    #[test]
    fn echoes_query_casing() {
        let zone = Zone::parse(ZONE).unwrap();
        let query = build_query(&DnsQuestion::new("ExAmple.COM", dns::TYPE_A).unwrap(), 1, false).unwrap();
        let resp = zone.answer(&query).unwrap();
        assert!(dns::verify_0x20(&query, &resp).unwrap());
    }
}
