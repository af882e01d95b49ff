//! Property tests over the protocol, DNS, cache, rate limiter and report
//! invariants.

use std::collections::HashSet;
use std::net::IpAddr;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use odoh::bench::nearest_rank;
use odoh::cache::{ResponseCache, MAX_TTL, MIN_TTL};
use odoh::dns::{self, DnsQuestion};
use odoh::protocol::{
    generate_key_pair, open_query, open_response, parse_config_list, parse_message, seal_query, seal_query_padded,
    seal_response, serialize_config_list, MessageType, ObliviousMessage, ProtocolError, TargetKeyPair, KEY_ID_LEN,
};
use odoh::proxy::RateLimiter;
use odoh::suite::CipherSuite;
use odoh::target::select_resolver;
use proptest::prelude::*;

fn key_pairs() -> &'static [TargetKeyPair] {
    static PAIRS: OnceLock<Vec<TargetKeyPair>> = OnceLock::new();
    PAIRS.get_or_init(|| CipherSuite::all().map(|s| generate_key_pair(s).unwrap()).collect())
}

fn any_pair() -> impl Strategy<Value = &'static TargetKeyPair> {
    (0..key_pairs().len()).prop_map(|i| &key_pairs()[i])
}

/// A DNS-shaped payload: at least a header's worth of bytes.
fn payload() -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(any::<u8>(), dns::HEADER_LEN..600)
}

fn label() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9]([a-zA-Z0-9-]{0,20}[a-zA-Z0-9])?"
}

fn domain() -> impl Strategy<Value = String> {
    prop::collection::vec(label(), 1..5).prop_map(|l| l.join("."))
}

/// Serialized query size as a function of the suite, DNS size and padding.
fn expected_query_len(suite: CipherSuite, dns_len: usize, padding: usize) -> usize {
    let envelope = 1 + 2 + KEY_ID_LEN + 2;
    let inner = 2 + suite.key_size() + 2 + dns_len + 2 + padding;
    envelope + suite.enc_size() + inner + suite.tag_size()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn query_roundtrip_and_size_law(pair in any_pair(), q in payload(), pad in 0usize..64) {
        let (msg, ctx) = seal_query_padded(pair.config(), &q, pad).unwrap();
        let wire = msg.to_bytes();
        prop_assert_eq!(wire.len(), expected_query_len(pair.config().suite(), q.len(), pad));
        let opened = open_query(pair, &parse_message(&wire).unwrap()).unwrap();
        prop_assert_eq!(&opened.dns_query, &q);
        prop_assert_eq!(opened.response_key.as_slice(), ctx.response_key());
    }

    #[test]
    fn response_roundtrip_adds_one_tag(pair in any_pair(), q in payload(), r in payload()) {
        let suite = pair.config().suite();
        let (msg, mut ctx) = seal_query(pair.config(), &q).unwrap();
        let opened = open_query(pair, &msg).unwrap();
        let sealed = seal_response(&opened.response_key, suite, &r).unwrap();
        prop_assert_eq!(sealed.encrypted_message.len(), r.len() + suite.tag_size());
        let back = open_response(&mut ctx, &parse_message(&sealed.to_bytes()).unwrap()).unwrap();
        prop_assert_eq!(back, r);
        prop_assert_eq!(open_response(&mut ctx, &sealed), Err(ProtocolError::ContextConsumed));
    }

    #[test]
    fn sealing_is_randomized(pair in any_pair(), q in payload()) {
        let (a, ca) = seal_query(pair.config(), &q).unwrap();
        let (b, cb) = seal_query(pair.config(), &q).unwrap();
        prop_assert_ne!(a.encrypted_message, b.encrypted_message);
        prop_assert_ne!(ca.response_key(), cb.response_key());
        prop_assert_eq!(a.key_id, b.key_id);
    }

    #[test]
    fn any_flip_in_sealed_query_fails_decrypt(pair in any_pair(), q in payload(), idx in any::<prop::sample::Index>(), bit in 0u8..8) {
        let (mut msg, _) = seal_query(pair.config(), &q).unwrap();
        let i = idx.index(msg.encrypted_message.len());
        msg.encrypted_message[i] ^= 1 << bit;
        prop_assert_eq!(open_query(pair, &msg), Err(ProtocolError::DecryptFailure));
    }

    #[test]
    fn any_flip_in_sealed_response_fails_decrypt(pair in any_pair(), r in payload(), idx in any::<prop::sample::Index>(), bit in 0u8..8) {
        let suite = pair.config().suite();
        let (msg, mut ctx) = seal_query(pair.config(), &[0u8; 12]).unwrap();
        let opened = open_query(pair, &msg).unwrap();
        let mut sealed = seal_response(&opened.response_key, suite, &r).unwrap();
        let i = idx.index(sealed.encrypted_message.len());
        sealed.encrypted_message[i] ^= 1 << bit;
        prop_assert_eq!(open_response(&mut ctx, &sealed), Err(ProtocolError::DecryptFailure));
    }

    #[test]
    fn message_roundtrip(is_query in any::<bool>(), body in prop::collection::vec(any::<u8>(), 0..300), kid in any::<[u8; 32]>()) {
        let msg = ObliviousMessage {
            message_type: if is_query { MessageType::Query } else { MessageType::Response },
            key_id: if is_query { kid.to_vec() } else { Vec::new() },
            encrypted_message: body,
        };
        let wire = msg.to_bytes();
        prop_assert_eq!(wire.len(), msg.serialized_len());
        prop_assert_eq!(parse_message(&wire).unwrap(), msg);
    }

    #[test]
    fn parsers_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        let _ = parse_message(&bytes);
        let _ = parse_config_list(&bytes);
        let _ = dns::parse_response(&bytes);
        let _ = dns::parse_query(&bytes);
    }

    #[test]
    fn dns_query_roundtrip(name in domain(), qtype in prop::sample::select(vec![dns::TYPE_A, dns::TYPE_AAAA, dns::TYPE_TXT, dns::TYPE_HTTPS]), id in any::<u16>(), rand_case in any::<bool>()) {
        let q = DnsQuestion::new(&name, qtype).unwrap();
        let wire = dns::build_query(&q, id, rand_case).unwrap();
        prop_assert_eq!(wire.len(), dns::HEADER_LEN + dns::encoded_name_len(q.qname()) + 4);
        let parsed = dns::parse_query(&wire).unwrap();
        prop_assert_eq!(parsed.header.id, id);
        prop_assert_eq!(parsed.cache_key(), (q.qname().to_string(), qtype, dns::CLASS_IN));
        let resp = dns::build_response(&wire, dns::RCODE_NXDOMAIN, &[]).unwrap();
        prop_assert!(dns::verify_0x20(&wire, &resp).unwrap());
        let rewritten = dns::rewrite_for_query(&resp, &dns::build_query(&q, id ^ 0xffff, true).unwrap()).unwrap();
        prop_assert_eq!(dns::parse_response(&rewritten).unwrap().id, id ^ 0xffff);
    }

    #[test]
    fn config_list_roundtrip(idx in prop::collection::vec(0..36usize, 1..4)) {
        let configs: Vec<_> = idx.iter().map(|i| key_pairs()[*i].config().clone()).collect();
        let wire = serialize_config_list(&configs).unwrap();
        prop_assert_eq!(parse_config_list(&wire).unwrap(), configs);
    }

    #[test]
    fn resolver_choice_is_key_byte_modulo(key in prop::collection::vec(any::<u8>(), 1..33), n in 1usize..10) {
        let i = select_resolver(&key, n);
        prop_assert!(i < n);
        prop_assert_eq!(i, key[0] as usize % n);
        prop_assert_eq!(select_resolver(&key, n), i);
    }

    #[test]
    fn cache_serves_only_live_entries(ttl in any::<u32>(), offset_ms in 0u64..200_000_000) {
        let cache = ResponseCache::new(8);
        let t0 = Instant::now();
        let key = ("example.com".to_string(), 1, 1);
        cache.put_at(key.clone(), vec![1], ttl, t0);
        let lifetime = Duration::from_secs(ttl.into()).clamp(MIN_TTL, MAX_TTL);
        let at = t0 + Duration::from_millis(offset_ms);
        prop_assert_eq!(cache.get_at(&key, at).is_some(), at < t0 + lifetime);
    }

    #[test]
    fn rate_limiter_bound(rate in 1u32..1000, burst in 1u32..100, gaps in prop::collection::vec(0u64..500, 1..300)) {
        let rl = RateLimiter::new(rate, burst);
        let addr: IpAddr = [192, 0, 2, 1].into();
        let t0 = Instant::now();
        let mut now = t0;
        let mut allowed = 0u64;
        for g in gaps {
            now += Duration::from_millis(g);
            allowed += u64::from(rl.check(addr, now));
        }
        let elapsed = (now - t0).as_secs_f64();
        prop_assert!(allowed as f64 <= burst as f64 + elapsed * rate as f64 / 60.0 + 1e-9);
    }

    #[test]
    fn nearest_rank_is_smallest_covering_sample(mut v in prop::collection::vec(0.0f64..1e4, 1..200), p in 1.0f64..100.0) {
        v.sort_by(f64::total_cmp);
        let x = nearest_rank(&v, p).unwrap();
        let at_or_below = v.iter().filter(|s| **s <= x).count() as f64;
        prop_assert!(at_or_below / v.len() as f64 * 100.0 >= p - 1e-9);
        let strictly_below = v.iter().filter(|s| **s < x).count() as f64;
        prop_assert!(strictly_below / v.len() as f64 * 100.0 < p);
    }
}

#[test]
fn response_keys_are_fresh_over_ten_thousand_seals() {
    let default = generate_key_pair(CipherSuite::DEFAULT).unwrap();
    let q = dns::build_query(&DnsQuestion::new("example.com", dns::TYPE_A).unwrap(), 1, false).unwrap();
    let mut keys = HashSet::new();
    let mut encs = HashSet::new();
    for _ in 0..10_000 {
        let (msg, ctx) = seal_query(default.config(), &q).unwrap();
        assert!(keys.insert(ctx.response_key().to_vec()));
        assert!(encs.insert(msg.encrypted_message[..CipherSuite::DEFAULT.enc_size()].to_vec()));
    }
}
