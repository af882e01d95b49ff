//! Serves a zone file as a DoH resolver.
//!
//!     cargo run --example mock_resolver -- zone.txt 127.0.0.1:8053 [delay_ms]
//!
//! Zone lines are `name TYPE ttl rdata`, e.g. `example.com A 300 93.184.216.34`.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    tracing_subscriber::fmt().with_env_filter("info").init();
    let mut args = std::env::args().skip(1);
    let usage = "usage: mock_resolver <zone-file> <listen-addr> [delay-ms]";
    let zone: PathBuf = args.next().ok_or(usage)?.into();
    let listen: SocketAddr = args.next().ok_or(usage)?.parse()?;
    let delay = Duration::from_millis(args.next().map(|d| d.parse()).transpose()?.unwrap_or(0));

    let (resolver, handle) = odoh::resolver::mock_resolver_serve(&zone, delay, listen).await?;
    tracing::info!(records = resolver.zone().len(), "serving http://{}/dns-query", handle.local_addr());
    std::future::pending::<()>().await;
    Ok(())
}
