//! Load generator: C clients × N queries at R queries/minute per client.
//!
//!     cargo run --release --example odoh-bench -- --mode odoh,pdoh,doh \
//!         -C 5 -N 40 -R 600 --domains domains.txt \
//!         --delay-proxy 10 --delay-target 10 --delay-resolver 5 --out results/
//!
//! Without endpoint flags a loopback stack (resolver, target, co-located
//! target, proxy) is started with the given delays and a zone covering the
//! domain list. With `--proxy/--target/--resolver` the run targets existing
//! services and the delay flags do not apply.

use std::net::Ipv4Addr;
use std::path::PathBuf;
use std::time::Duration;

use clap::Parser;
use odoh::bench::{emit_report, load_domains, run_load, BenchConfig, BenchMode, Endpoints};
use odoh::resolver::{Zone, ZoneRecord};
use odoh::stack::{LocalStack, StackOptions};

#[derive(Debug, Parser)]
#[command(name = "odoh-bench")]
struct Args {
    /// Comma-separated modes; each runs in turn.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "odoh")]
    mode: Vec<BenchMode>,
    #[arg(short = 'C', default_value_t = 5)]
    clients: usize,
    #[arg(short = 'N', default_value_t = 40)]
    queries: usize,
    /// Queries per minute per client.
    #[arg(short = 'R', default_value_t = 600.0)]
    rate: f64,
    #[arg(long)]
    domains: PathBuf,
    #[arg(long)]
    proxy: Option<String>,
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    coloc_target: Option<String>,
    #[arg(long)]
    resolver: Option<String>,
    #[arg(long)]
    no_reuse: bool,
    #[arg(long)]
    insecure_http: bool,
    #[arg(long, default_value_t = 0)]
    delay_proxy: u64,
    #[arg(long, default_value_t = 0)]
    delay_target: u64,
    #[arg(long, default_value_t = 0)]
    delay_resolver: u64,
    /// Target cache size for the loopback stack; 0 disables caching.
    #[arg(long, default_value_t = 0)]
    cache_capacity: usize,
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let args = Args::parse();
    let domains = load_domains(&args.domains)?;
    let external = args.proxy.is_some() || args.target.is_some() || args.resolver.is_some();

    let mut stack = None;
    let endpoints = if external {
        Endpoints {
            proxy: args.proxy.clone(),
            target: args.target.clone(),
            coloc_target: args.coloc_target.clone(),
            resolver: args.resolver.clone(),
        }
    } else {
        let mut zone = Zone::new();
        for (i, d) in domains.iter().enumerate() {
            zone.insert(ZoneRecord {
                name: d.clone(),
                rtype: odoh::dns::TYPE_A,
                ttl: 300,
                rdata: Ipv4Addr::from(0xc000_0200u32 + (i as u32 % 256)).octets().to_vec(),
            })?;
        }
        let s = LocalStack::start(StackOptions {
            zone,
            proxy_delay: Duration::from_millis(args.delay_proxy),
            target_delay: Duration::from_millis(args.delay_target),
            resolver_delay: Duration::from_millis(args.delay_resolver),
            cache_capacity: args.cache_capacity,
            ..Default::default()
        })
        .await?;
        let ep = Endpoints {
            proxy: Some(s.proxy_url()),
            target: Some(s.target_host()),
            coloc_target: Some(s.coloc_target_host()),
            resolver: Some(s.resolver_url()),
        };
        stack = Some(s);
        ep
    };

    let mut samples = Vec::new();
    for mode in &args.mode {
        let mut cfg = BenchConfig::new(*mode, args.clients, args.queries, args.rate);
        cfg.domains = domains.clone();
        cfg.reuse_connections = !args.no_reuse;
        cfg.endpoints = endpoints.clone();
        cfg.insecure_http = args.insecure_http || stack.is_some();
        eprintln!("running {mode}: C={} N={} R={}", cfg.clients, cfg.queries_per_client, cfg.rate_per_minute);
        samples.extend(run_load(&cfg).await?);
    }
    let report = emit_report(&samples)?;
    report.write_to(&args.out)?;
    print!("{}", report.summary);
    eprintln!("wrote {}", args.out.display());
    Ok(())
}
