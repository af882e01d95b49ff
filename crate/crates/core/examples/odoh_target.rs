//! Runs an oblivious target.
//!
//!     cargo run --example odoh_target -- [config.toml]
//!     cargo run --example odoh_target -- --generate-key keys.txt
//!
//! Settings come from the TOML file and `ODOH_TARGET_*` variables:
//!
//! ```toml
//! listen = "127.0.0.1:8443"
//! upstreams = ["https://resolver.example/dns-query"]
//! cache_capacity = 10000
//! upstream_timeout_ms = 2000
//! key_file = "keys.txt"
//! ```

use std::path::Path;

use odoh::config::{format_key_file, TargetSettings};
use odoh::protocol::generate_key_pair;
use odoh::suite::CipherSuite;
use odoh::target::Target;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    tracing_subscriber::fmt().with_env_filter("info").init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    if let [flag, path] = &args[..] {
        if flag == "--generate-key" {
            std::fs::write(path, format_key_file(&[generate_key_pair(CipherSuite::DEFAULT)?]))?;
            println!("wrote {path}");
            return Ok(());
        }
    }
    let settings = TargetSettings::load(args.first().map(Path::new))?;
    let target = Target::new(settings.to_target_config()?)?;
    let handle = odoh::net::bind_and_serve(settings.listen, target.router(), Default::default()).await?;
    for c in target.configs() {
        tracing::info!(suite = %c.suite(), key_id = %c.key_id(), "active key");
    }
    tracing::info!("target listening on {}", handle.local_addr());
    std::future::pending::<()>().await;
    Ok(())
}
