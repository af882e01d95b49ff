//! Crypto timing and wire-size overhead for every supported cipher suite.
//!
//!     cargo run --release --example micro_bench -- [iterations] [domains-file]

use odoh::bench::{load_domains, micro_crypto_bench, micro_size_bench, MIN_CRYPTO_ITERATIONS};
use odoh::suite::CipherSuite;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let iterations: usize = args.next().map(|a| a.parse()).transpose()?.unwrap_or(MIN_CRYPTO_ITERATIONS);
    let domains = match args.next() {
        Some(path) => load_domains(path.as_ref())?,
        None => ["example.com", "www.wikipedia.org", "news.ycombinator.com", "a.co"]
            .map(String::from)
            .to_vec(),
    };

    println!(
        "{:<42} {:>9} {:>9} {:>9} {:>9} {:>12}",
        "suite", "seal p50", "seal p99", "open p50", "open p99", "lifecycle50"
    );
    for suite in CipherSuite::all() {
        let r = micro_crypto_bench(suite, iterations)?;
        println!(
            "{:<42} {:>9.1} {:>9.1} {:>9.1} {:>9.1} {:>12.1}",
            suite.to_string(),
            r.seal_p50_us,
            r.seal_p99_us,
            r.open_p50_us,
            r.open_p99_us,
            r.lifecycle_p50_us
        );
    }

    let s = micro_size_bench(&domains, CipherSuite::DEFAULT)?;
    println!("\n{} domains, {}", s.count, s.suite);
    println!(
        "query    {:.1} B -> {:.1} B  overhead {}..{} B",
        s.mean_query_bytes, s.mean_odoh_query_bytes, s.query_overhead.0, s.query_overhead.1
    );
    println!(
        "answer   {:.1} B -> {:.1} B  overhead {}..{} B",
        s.mean_response_bytes, s.mean_odoh_response_bytes, s.response_overhead.0, s.response_overhead.1
    );
    Ok(())
}
