//! Seals a query to a fresh target key, opens it as the target would, and
//! seals the answer back, printing the wire sizes at each step.
//!
//!     cargo run --example protocol_roundtrip

use odoh::dns::{self, Answer, DnsQuestion};
use odoh::protocol::{self, parse_config_list, serialize_config_list};
use odoh::suite::CipherSuite;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pair = protocol::generate_key_pair(CipherSuite::DEFAULT)?;
    let list = serialize_config_list(&[pair.config().clone()])?;
    let config = parse_config_list(&list)?.remove(0);
    println!("suite {}  config list {} B  key id {}", config.suite(), list.len(), config.key_id());

    let query = dns::build_query(&DnsQuestion::new("example.com", dns::TYPE_A)?, 0x1234, false)?;
    let (sealed, mut ctx) = protocol::seal_query(&config, &query)?;
    let wire = sealed.to_bytes();
    println!("query   {} B -> {} B sealed (+{})", query.len(), wire.len(), wire.len() - query.len());

    let opened = protocol::open_query(&pair, &protocol::parse_message(&wire)?)?;
    assert_eq!(opened.dns_query, query);
    let answer = Answer {
        name: "example.com".into(),
        rtype: dns::TYPE_A,
        class: dns::CLASS_IN,
        ttl: 300,
        rdata: vec![93, 184, 216, 34],
    };
    let response = dns::build_response(&opened.dns_query, dns::RCODE_NOERROR, &[answer])?;
    let sealed_resp = protocol::seal_response(&opened.response_key, config.suite(), &response)?;
    println!(
        "answer  {} B -> {} B encrypted (+{})",
        response.len(),
        sealed_resp.encrypted_message.len(),
        sealed_resp.encrypted_message.len() - response.len()
    );

    let plain = protocol::open_response(&mut ctx, &protocol::parse_message(&sealed_resp.to_bytes())?)?;
    for a in dns::parse_response(&plain)?.answers {
        println!("{a}");
    }
    println!("second open: {}", protocol::open_response(&mut ctx, &sealed_resp).unwrap_err());
    Ok(())
}
