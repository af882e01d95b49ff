//! Starts a resolver, target, co-located target and proxy on loopback, then
//! resolves a few names through the full oblivious path.
//!
//!     cargo run --example local_stack

use std::time::Duration;

use odoh::client::SessionOptions;
use odoh::dns;
use odoh::resolver::Zone;
use odoh::stack::{LocalStack, StackOptions};

const ZONE: &str = "\
example.com A 300 93.184.216.34
example.com AAAA 300 2606:2800:220:1:248:1893:25c8:1946
odoh.test A 60 192.0.2.1
txt.example.com TXT 60 \"hello from the zone\"
";

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let stack = LocalStack::start(StackOptions {
        zone: Zone::parse(ZONE)?,
        proxy_delay: Duration::from_millis(2),
        target_delay: Duration::from_millis(2),
        ..Default::default()
    })
    .await?;
    println!("resolver {}", stack.resolver_url());
    println!("target   {}", stack.target_host());
    println!("proxy    {}", stack.proxy_url());
    println!(
        "\ntry: cargo run --bin odoh-dig -- example.com A --proxy {} --target {} --insecure-http\n",
        stack.proxy_url(),
        stack.target_host()
    );

    let session = stack.session(SessionOptions::default()).await?;
    for (name, qtype) in [
        ("example.com", dns::TYPE_A),
        ("example.com", dns::TYPE_AAAA),
        ("txt.example.com", dns::TYPE_TXT),
        ("missing.example", dns::TYPE_A),
        ("example.com", dns::TYPE_A),
    ] {
        let out = session.query_once(name, qtype).await?;
        println!(
            "{name} {}: {} in {:.2} ms (seal {:.0} us, open {:.0} us)",
            dns::type_name(qtype),
            dns::rcode_name(out.summary.rcode),
            out.timings.total_ms,
            out.timings.seal_us,
            out.timings.open_us
        );
        for a in &out.summary.answers {
            println!("    {a}");
        }
    }
    print!("\ntarget metrics:\n{}", stack.target.metrics_text());
    print!("proxy metrics:\n{}", stack.proxy.metrics_text());
    Ok(())
}
