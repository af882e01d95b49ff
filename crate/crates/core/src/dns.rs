//! Just enough DNS wire format for ODoH: building queries, parsing answers and
//! TTLs, rewriting cached responses, and checking 0x20 case echoes.

use std::fmt;
use std::net::{Ipv4Addr, Ipv6Addr};

use thiserror::Error;

use crate::hpke;

pub const HEADER_LEN: usize = 12;
pub const MAX_MESSAGE_LEN: usize = 4096;
pub const MAX_NAME_LEN: usize = 253;
pub const MAX_LABEL_LEN: usize = 63;
pub const DEFAULT_NEGATIVE_TTL: u32 = 30;

pub const TYPE_A: u16 = 1;
pub const TYPE_NS: u16 = 2;
pub const TYPE_CNAME: u16 = 5;
pub const TYPE_SOA: u16 = 6;
pub const TYPE_TXT: u16 = 16;
pub const TYPE_AAAA: u16 = 28;
pub const TYPE_HTTPS: u16 = 65;
pub const CLASS_IN: u16 = 1;

pub const RCODE_NOERROR: u8 = 0;
pub const RCODE_FORMERR: u8 = 1;
pub const RCODE_SERVFAIL: u8 = 2;
pub const RCODE_NXDOMAIN: u8 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DnsError {
    #[error("name exceeds 253 bytes")]
    NameTooLong,
    #[error("label exceeds 63 bytes")]
    LabelTooLong,
    #[error("empty label in name")]
    EmptyLabel,
    #[error("name must be ASCII")]
    NonAscii,
    #[error("malformed DNS message: {0}")]
    Malformed(&'static str),
}

pub fn type_from_name(name: &str) -> Option<u16> {
    match name.to_ascii_uppercase().as_str() {
        "A" => Some(TYPE_A),
        "NS" => Some(TYPE_NS),
        "CNAME" => Some(TYPE_CNAME),
        "SOA" => Some(TYPE_SOA),
        "TXT" => Some(TYPE_TXT),
        "AAAA" => Some(TYPE_AAAA),
        "HTTPS" => Some(TYPE_HTTPS),
        other => other.strip_prefix("TYPE").and_then(|n| n.parse().ok()),
    }
}

pub fn type_name(rtype: u16) -> String {
    match rtype {
        TYPE_A => "A".into(),
        TYPE_NS => "NS".into(),
        TYPE_CNAME => "CNAME".into(),
        TYPE_SOA => "SOA".into(),
        TYPE_TXT => "TXT".into(),
        TYPE_AAAA => "AAAA".into(),
        TYPE_HTTPS => "HTTPS".into(),
        n => format!("TYPE{n}"),
    }
}

pub fn rcode_name(rcode: u8) -> &'static str {
    match rcode {
        0 => "NOERROR",
        1 => "FORMERR",
        2 => "SERVFAIL",
        3 => "NXDOMAIN",
        4 => "NOTIMP",
        5 => "REFUSED",
        _ => "UNKNOWN",
    }
}

fn validate_name(name: &str) -> Result<(), DnsError> {
    if !name.is_ascii() {
        return Err(DnsError::NonAscii);
    }
    if name.is_empty() {
        return Ok(());
    }
    if name.len() > MAX_NAME_LEN {
        return Err(DnsError::NameTooLong);
    }
    for label in name.split('.') {
        if label.is_empty() {
            return Err(DnsError::EmptyLabel);
        }
        if label.len() > MAX_LABEL_LEN {
            return Err(DnsError::LabelTooLong);
        }
    }
    Ok(())
}

/// Length of `name` in uncompressed wire form, including the root label.
pub fn encoded_name_len(name: &str) -> usize {
    if name.is_empty() {
        1
    } else {
        name.len() + 2
    }
}

fn encode_name(out: &mut Vec<u8>, name: &str) {
    if !name.is_empty() {
        for label in name.split('.') {
            out.push(label.len() as u8);
            out.extend_from_slice(label.as_bytes());
        }
    }
    out.push(0);
}

/// A single question. `qname` is lowercase without the trailing dot; an
/// optional display casing is kept for the wire.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DnsQuestion {
    qname: String,
    display: Option<String>,
    pub qtype: u16,
    pub qclass: u16,
}

impl DnsQuestion {
    pub fn new(name: &str, qtype: u16) -> Result<Self, DnsError> {
        let trimmed = name.strip_suffix('.').unwrap_or(name);
        validate_name(trimmed)?;
        let lower = trimmed.to_ascii_lowercase();
        let display = (lower != trimmed).then(|| trimmed.to_string());
        Ok(Self {
            qname: lower,
            display,
            qtype,
            qclass: CLASS_IN,
        })
    }

    pub fn qname(&self) -> &str {
        &self.qname
    }

    /// The name as it goes on the wire when 0x20 randomization is off.
    pub fn display_name(&self) -> &str {
        self.display.as_deref().unwrap_or(&self.qname)
    }
}

/// Builds a standard query (RD=1, QDCOUNT=1, no EDNS).
pub fn build_query(q: &DnsQuestion, id: u16, use_0x20: bool) -> Result<Vec<u8>, DnsError> {
    validate_name(q.qname())?;
    let name = if use_0x20 {
        randomize_case(q.qname()).map_err(|_| DnsError::Malformed("rng failure"))?
    } else {
        q.display_name().to_string()
    };
    let mut out = Vec::with_capacity(HEADER_LEN + encoded_name_len(&name) + 4);
    out.extend_from_slice(&id.to_be_bytes());
    out.extend_from_slice(&0x0100u16.to_be_bytes());
    out.extend_from_slice(&[0, 1, 0, 0, 0, 0, 0, 0]);
    encode_name(&mut out, &name);
    out.extend_from_slice(&q.qtype.to_be_bytes());
    out.extend_from_slice(&q.qclass.to_be_bytes());
    Ok(out)
}

fn randomize_case(name: &str) -> Result<String, hpke::HpkeError> {
    let bits = hpke::random_bytes(name.len())?;
    Ok(name
        .chars()
        .zip(bits)
        .map(|(c, b)| if b & 1 == 1 { c.to_ascii_uppercase() } else { c.to_ascii_lowercase() })
        .collect())
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn u8(&mut self) -> Result<u8, DnsError> {
        let b = *self.buf.get(self.pos).ok_or(DnsError::Malformed("truncated"))?;
        self.pos += 1;
        Ok(b)
    }

    fn u16(&mut self) -> Result<u16, DnsError> {
        Ok(u16::from_be_bytes([self.u8()?, self.u8()?]))
    }

    fn u32(&mut self) -> Result<u32, DnsError> {
        Ok(u32::from_be_bytes([self.u8()?, self.u8()?, self.u8()?, self.u8()?]))
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], DnsError> {
        let out = self.buf.get(self.pos..self.pos + n).ok_or(DnsError::Malformed("truncated"))?;
        self.pos += n;
        Ok(out)
    }

    fn name(&mut self) -> Result<String, DnsError> {
        let (name, next) = read_name(self.buf, self.pos)?;
        self.pos = next;
        Ok(name)
    }
}

/// Reads a possibly-compressed name starting at `start`. Returns the dotted
/// name (case preserved) and the offset just past it in the original stream.
/// Pointers must point strictly backwards, which rules out loops.
fn read_name(buf: &[u8], start: usize) -> Result<(String, usize), DnsError> {
    let mut labels: Vec<String> = Vec::new();
    let mut pos = start;
    let mut resume = None;
    let mut wire_len = 0usize;
    loop {
        let len = *buf.get(pos).ok_or(DnsError::Malformed("truncated name"))?;
        match len & 0xC0 {
            0x00 => {
                if len == 0 {
                    pos += 1;
                    break;
                }
                let label = buf
                    .get(pos + 1..pos + 1 + len as usize)
                    .ok_or(DnsError::Malformed("truncated label"))?;
                wire_len += 1 + len as usize;
                if wire_len > MAX_NAME_LEN + 1 {
                    return Err(DnsError::Malformed("name too long"));
                }
                labels.push(escape_label(label));
                pos += 1 + len as usize;
            }
            0xC0 => {
                let lo = *buf.get(pos + 1).ok_or(DnsError::Malformed("truncated pointer"))?;
                let target = (((len & 0x3F) as usize) << 8) | lo as usize;
                if target >= pos {
                    return Err(DnsError::Malformed("compression pointer does not point backwards"));
                }
                if resume.is_none() {
                    resume = Some(pos + 2);
                }
                pos = target;
            }
            _ => return Err(DnsError::Malformed("reserved label type")),
        }
    }
    Ok((labels.join("."), resume.unwrap_or(pos)))
}

fn escape_label(label: &[u8]) -> String {
    let mut s = String::with_capacity(label.len());
    for &b in label {
        if b.is_ascii_graphic() && b != b'.' && b != b'\\' {
            s.push(b as char);
        } else {
            s.push_str(&format!("\\{b:03}"));
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Answer {
    pub name: String,
    pub rtype: u16,
    pub class: u16,
    pub ttl: u32,
    pub rdata: Vec<u8>,
}

impl Answer {
    /// Human-readable rdata for the common types, hex otherwise.
    pub fn rdata_text(&self) -> String {
        match (self.rtype, self.rdata.len()) {
            (TYPE_A, 4) => Ipv4Addr::new(self.rdata[0], self.rdata[1], self.rdata[2], self.rdata[3]).to_string(),
            (TYPE_AAAA, 16) => {
                let octets: [u8; 16] = self.rdata.as_slice().try_into().expect("length checked");
                Ipv6Addr::from(octets).to_string()
            }
            (TYPE_TXT, _) => {
                let mut parts = Vec::new();
                let mut i = 0;
                while i < self.rdata.len() {
                    let n = self.rdata[i] as usize;
                    let end = (i + 1 + n).min(self.rdata.len());
                    parts.push(format!("\"{}\"", String::from_utf8_lossy(&self.rdata[i + 1..end])));
                    i = end;
                }
                parts.join(" ")
            }
            _ => {
                let hex: String = self.rdata.iter().map(|b| format!("{b:02x}")).collect();
                format!("\\# {} {}", self.rdata.len(), hex)
            }
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.\t{}\tIN\t{}\t{}", self.name, self.ttl, type_name(self.rtype), self.rdata_text())
    }
}

/// The question section of a message, case preserved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireQuestion {
    pub name: String,
    pub qtype: u16,
    pub qclass: u16,
    /// Byte range of the encoded name inside the message it was read from.
    pub name_span: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DnsResponseSummary {
    pub id: u16,
    pub rcode: u8,
    pub question: Option<WireQuestion>,
    pub answers: Vec<Answer>,
    pub min_ttl: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Header {
    pub id: u16,
    pub flags: u16,
    pub qdcount: u16,
    pub ancount: u16,
    pub nscount: u16,
    pub arcount: u16,
}

impl Header {
    pub fn is_response(&self) -> bool {
        self.flags & 0x8000 != 0
    }

    pub fn rcode(&self) -> u8 {
        (self.flags & 0x000F) as u8
    }
}

fn read_header(c: &mut Cursor<'_>) -> Result<Header, DnsError> {
    if c.buf.len() < HEADER_LEN {
        return Err(DnsError::Malformed("shorter than header"));
    }
    if c.buf.len() > MAX_MESSAGE_LEN {
        return Err(DnsError::Malformed("message exceeds 4096 bytes"));
    }
    Ok(Header {
        id: c.u16()?,
        flags: c.u16()?,
        qdcount: c.u16()?,
        ancount: c.u16()?,
        nscount: c.u16()?,
        arcount: c.u16()?,
    })
}

fn read_question(c: &mut Cursor<'_>) -> Result<WireQuestion, DnsError> {
    let start = c.pos;
    let name = c.name()?;
    let end = c.pos;
    Ok(WireQuestion {
        name,
        qtype: c.u16()?,
        qclass: c.u16()?,
        name_span: (start, end),
    })
}

pub fn parse_response(bytes: &[u8]) -> Result<DnsResponseSummary, DnsError> {
    parse_response_with_default_ttl(bytes, DEFAULT_NEGATIVE_TTL)
}

/// Parses header, question and answer sections. `default_ttl` becomes
/// `min_ttl` when there are no answers.
pub fn parse_response_with_default_ttl(bytes: &[u8], default_ttl: u32) -> Result<DnsResponseSummary, DnsError> {
    let mut c = Cursor { buf: bytes, pos: 0 };
    let header = read_header(&mut c)?;
    let mut question = None;
    for i in 0..header.qdcount {
        let q = read_question(&mut c)?;
        if i == 0 {
            question = Some(q);
        }
    }
    let mut answers = Vec::with_capacity(header.ancount as usize);
    for _ in 0..header.ancount {
        let name = c.name()?;
        let rtype = c.u16()?;
        let class = c.u16()?;
        let ttl = c.u32()?;
        let rdlen = c.u16()? as usize;
        let rdata = c.take(rdlen)?.to_vec();
        answers.push(Answer { name, rtype, class, ttl, rdata });
    }
    let min_ttl = answers.iter().map(|a| a.ttl).min().unwrap_or(default_ttl);
    Ok(DnsResponseSummary {
        id: header.id,
        rcode: header.rcode(),
        question,
        answers,
        min_ttl,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedQuery {
    pub header: Header,
    pub question: WireQuestion,
}

impl ParsedQuery {
    /// Cache key: lowercase name, type and class.
    pub fn cache_key(&self) -> (String, u16, u16) {
        (self.question.name.to_ascii_lowercase(), self.question.qtype, self.question.qclass)
    }
}

/// Parses a query, requiring exactly one question.
pub fn parse_query(bytes: &[u8]) -> Result<ParsedQuery, DnsError> {
    let mut c = Cursor { buf: bytes, pos: 0 };
    let header = read_header(&mut c)?;
    if header.is_response() {
        return Err(DnsError::Malformed("QR bit set on query"));
    }
    if header.qdcount != 1 {
        return Err(DnsError::Malformed("QDCOUNT must be 1"));
    }
    let question = read_question(&mut c)?;
    Ok(ParsedQuery { header, question })
}

/// Builds a response to `query`, echoing its question bytes exactly (so 0x20
/// casing survives). Answers whose owner equals the question name are written
/// with a compression pointer to it.
pub fn build_response(query: &[u8], rcode: u8, answers: &[Answer]) -> Result<Vec<u8>, DnsError> {
    let parsed = parse_query(query)?;
    let (start, end) = parsed.question.name_span;
    let qname_lower = parsed.question.name.to_ascii_lowercase();
    let mut out = Vec::with_capacity(end + 4 + answers.len() * 32);
    out.extend_from_slice(&parsed.header.id.to_be_bytes());
    // QR=1, opcode from query, RD copied, RA=1.
    let flags = 0x8000 | (parsed.header.flags & 0x7900) | 0x0080 | (rcode as u16 & 0x0F);
    out.extend_from_slice(&flags.to_be_bytes());
    out.extend_from_slice(&1u16.to_be_bytes());
    out.extend_from_slice(&(answers.len() as u16).to_be_bytes());
    out.extend_from_slice(&[0, 0, 0, 0]);
    out.extend_from_slice(&query[start..end + 4]);
    for a in answers {
        if a.name.to_ascii_lowercase() == qname_lower && start < 0x3FFF {
            out.extend_from_slice(&(0xC000u16 | start as u16).to_be_bytes());
        } else {
            validate_name(&a.name)?;
            encode_name(&mut out, &a.name);
        }
        out.extend_from_slice(&a.rtype.to_be_bytes());
        out.extend_from_slice(&a.class.to_be_bytes());
        out.extend_from_slice(&a.ttl.to_be_bytes());
        out.extend_from_slice(&(a.rdata.len() as u16).to_be_bytes());
        out.extend_from_slice(&a.rdata);
    }
    if out.len() > MAX_MESSAGE_LEN {
        return Err(DnsError::Malformed("response exceeds 4096 bytes"));
    }
    Ok(out)
}

/// Adapts a cached response to a new query: copies the query's ID and its
/// question-name bytes (same name up to case) into the template.
pub fn rewrite_for_query(template: &[u8], query: &[u8]) -> Result<Vec<u8>, DnsError> {
    let q = parse_query(query)?;
    let mut c = Cursor { buf: template, pos: 0 };
    let header = read_header(&mut c)?;
    if header.qdcount == 0 {
        return Err(DnsError::Malformed("template has no question"));
    }
    let tq = read_question(&mut c)?;
    let mut out = template.to_vec();
    out[..2].copy_from_slice(&q.header.id.to_be_bytes());
    let (qs, qe) = q.question.name_span;
    let (ts, te) = tq.name_span;
    if qe - qs == te - ts && tq.name.eq_ignore_ascii_case(&q.question.name) {
        out[ts..te].copy_from_slice(&query[qs..qe]);
    }
    Ok(out)
}

/// True iff the response echoes the sent question name byte-for-byte,
/// including the case of every letter.
pub fn verify_0x20(query_sent: &[u8], response: &[u8]) -> Result<bool, DnsError> {
    let sent = parse_query(query_sent)?;
    let resp = parse_response(response)?;
    Ok(match resp.question {
        Some(q) => q.name == sent.question.name && q.qtype == sent.question.qtype,
        None => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a_record(name: &str, ttl: u32, ip: [u8; 4]) -> Answer {
        Answer {
            name: name.into(),
            rtype: TYPE_A,
            class: CLASS_IN,
            ttl,
            rdata: ip.to_vec(),
        }
    }

    #[test]
    fn example_com_is_29_bytes() {
        let q = DnsQuestion::new("example.com", TYPE_A).unwrap();
        let bytes = build_query(&q, 0, false).unwrap();
        assert_eq!(bytes.len(), 29);
        assert_eq!(bytes.len(), HEADER_LEN + encoded_name_len("example.com") + 4);
        assert_eq!(&bytes[12..25], b"\x07example\x03com\x00");
    }

    #[test]
    fn label_limits() {
        let ok = format!("a.{}.com", "b".repeat(63));
        assert!(build_query(&DnsQuestion::new(&ok, TYPE_A).unwrap(), 0, false).is_ok());
        let bad = format!("a.{}.com", "b".repeat(64));
        assert_eq!(DnsQuestion::new(&bad, TYPE_A), Err(DnsError::LabelTooLong));
        let long = vec!["abcdefghi"; 26].join(".");
        assert_eq!(DnsQuestion::new(&long, TYPE_A), Err(DnsError::NameTooLong));
        assert_eq!(DnsQuestion::new("a..b", TYPE_A), Err(DnsError::EmptyLabel));
    }

    #[test]
    fn randomized_case_only_changes_case() {
        let q = DnsQuestion::new("averylongdomainnameforcasebits.example.com", TYPE_A).unwrap();
        let a = build_query(&q, 7, true).unwrap();
        let b = build_query(&q, 7, true).unwrap();
        assert_eq!(a.len(), b.len());
        assert!(a.eq_ignore_ascii_case(&b));
        assert_ne!(a, b, "40 random case bits collided");
        assert_eq!(parse_query(&a).unwrap().cache_key().0, q.qname());
    }

    #[test]
    fn response_min_ttl_and_rcode() {
        let q = build_query(&DnsQuestion::new("example.com", TYPE_A).unwrap(), 9, false).unwrap();
        let answers = [
            a_record("example.com", 300, [1, 1, 1, 1]),
            a_record("example.com", 60, [2, 2, 2, 2]),
            a_record("other.example.com", 600, [3, 3, 3, 3]),
        ];
        let resp = build_response(&q, RCODE_NOERROR, &answers).unwrap();
        let s = parse_response(&resp).unwrap();
        assert_eq!(s.id, 9);
        assert_eq!(s.min_ttl, 60);
        assert_eq!(s.answers.len(), 3);
        assert_eq!(s.answers[0].name, "example.com");
        assert_eq!(s.answers[2].name, "other.example.com");
        assert_eq!(s.answers[0].rdata_text(), "1.1.1.1");

        let nx = parse_response(&build_response(&q, RCODE_NXDOMAIN, &[]).unwrap()).unwrap();
        assert_eq!(nx.rcode, 3);
        assert!(nx.answers.is_empty());
        assert_eq!(nx.min_ttl, DEFAULT_NEGATIVE_TTL);
    }

    #[test]
    fn pointer_loop_rejected() {
        // Header with ANCOUNT=1 and an answer whose name is a pointer to itself.
        let mut msg = vec![0, 1, 0x81, 0x80, 0, 0, 0, 1, 0, 0, 0, 0];
        msg.extend_from_slice(&[0xC0, 12]);
        msg.extend_from_slice(&[0, 1, 0, 1, 0, 0, 0, 60, 0, 4, 1, 2, 3, 4]);
        assert!(matches!(parse_response(&msg), Err(DnsError::Malformed(_))));

        // Two pointers referencing each other.
        let mut msg = vec![0, 1, 0x81, 0x80, 0, 0, 0, 1, 0, 0, 0, 0];
        msg.extend_from_slice(&[0xC0, 14, 0xC0, 12]);
        assert!(matches!(parse_response(&msg), Err(DnsError::Malformed(_))));
    }

    #[test]
    fn short_and_oversized_messages_rejected() {
        assert!(parse_response(&[0; 11]).is_err());
        let mut big = vec![0u8; MAX_MESSAGE_LEN + 1];
        big[2] = 0x80;
        assert!(parse_response(&big).is_err());
    }

    #[test]
    fn verify_case_echo() {
        let sent = build_query(&DnsQuestion::new("ExAmPle.CoM", TYPE_A).unwrap(), 1, false).unwrap();
        let echo = build_response(&sent, 0, &[]).unwrap();
        assert!(verify_0x20(&sent, &echo).unwrap());

        let flat = build_query(&DnsQuestion::new("example.com", TYPE_A).unwrap(), 1, false).unwrap();
        let flat_echo = build_response(&flat, 0, &[]).unwrap();
        assert!(!verify_0x20(&sent, &flat_echo).unwrap());

        let other = build_query(&DnsQuestion::new("example.org", TYPE_A).unwrap(), 1, false).unwrap();
        assert!(!verify_0x20(&sent, &build_response(&other, 0, &[]).unwrap()).unwrap());
    }

    #[test]
    fn rewrite_copies_id_and_casing() {
        let first = build_query(&DnsQuestion::new("example.com", TYPE_A).unwrap(), 1, false).unwrap();
        let template = build_response(&first, 0, &[a_record("example.com", 60, [9, 9, 9, 9])]).unwrap();
        let second = build_query(&DnsQuestion::new("EXAMPLE.com", TYPE_A).unwrap(), 4242, false).unwrap();
        let served = rewrite_for_query(&template, &second).unwrap();
        let s = parse_response(&served).unwrap();
        assert_eq!(s.id, 4242);
        assert!(verify_0x20(&second, &served).unwrap());
        assert_eq!(s.answers[0].rdata, vec![9, 9, 9, 9]);
    }

    #[test]
    fn query_requires_single_question() {
        let mut q = build_query(&DnsQuestion::new("example.com", TYPE_A).unwrap(), 1, false).unwrap();
        q[5] = 2;
        assert!(parse_query(&q).is_err());
    }
}
