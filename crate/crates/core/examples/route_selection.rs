//! Two proxies and two targets with uneven injected delays; compares what
//! each selection strategy picks and what it costs per query.
//!
//!     cargo run --example route_selection

use std::time::Duration;

use odoh::client::{discover_config, select_route, ClientSession, NetworkProber, SessionOptions, Strategy};
use odoh::net::{self, ServeOptions};
use odoh::protocol::generate_key_pair;
use odoh::proxy::{Proxy, ProxyConfig};
use odoh::resolver::{MockResolver, Zone};
use odoh::suite::CipherSuite;
use odoh::target::{Target, TargetConfig, Upstream};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let resolver = MockResolver::new(Zone::parse("odoh.test A 60 192.0.2.1\nexample.com A 300 93.184.216.34\n")?, Duration::ZERO);
    let mut servers = Vec::new();
    let mut proxies = Vec::new();
    for delay_ms in [15, 2] {
        let proxy = Proxy::new(ProxyConfig {
            injected_delay: Duration::from_millis(delay_ms),
            insecure_http: true,
            ..Default::default()
        })?;
        let h = net::serve_loopback(proxy.router(), ServeOptions::default()).await?;
        proxies.push(h.base_url());
        servers.push(h);
    }
    let mut targets = Vec::new();
    for delay_ms in [2, 12] {
        let mut cfg = TargetConfig::new(
            vec![generate_key_pair(CipherSuite::DEFAULT)?],
            vec![Upstream::Local(resolver.clone())],
        );
        cfg.injected_delay = Duration::from_millis(delay_ms);
        let h = net::serve_loopback(Target::new(cfg)?.router(), ServeOptions::default()).await?;
        targets.push(h.host());
        servers.push(h);
    }
    println!("proxies {proxies:?} (delays 15, 2 ms)\ntargets {targets:?} (delays 2, 12 ms)\n");

    let opts = SessionOptions {
        insecure_http: true,
        ..Default::default()
    };
    let prober = NetworkProber::new(opts);
    let http = opts.http_client();
    for strategy in Strategy::ALL {
        let sel = select_route(strategy, &proxies, &targets, 3, &prober).await?;
        let config = discover_config(&http, &sel.target, true).await?.config;
        let session = ClientSession::with_client(http.clone(), &sel.proxy, &sel.target, config, opts)?;
        let mut total = 0.0;
        for _ in 0..10 {
            total += session.query_once("example.com", odoh::dns::TYPE_A).await?.timings.total_ms;
        }
        println!(
            "{strategy:<14} -> {} via {}  probe {}  mean {:.1} ms",
            sel.target,
            sel.proxy,
            sel.rtt_ms.map_or("-".into(), |r| format!("{r:.1} ms")),
            total / 10.0
        );
    }
    Ok(())
}
