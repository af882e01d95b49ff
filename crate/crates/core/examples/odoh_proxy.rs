//! Runs an oblivious proxy.
//!
//!     cargo run --example odoh_proxy -- [config.toml] [--insecure-http]
//!
//! Settings come from the TOML file and `ODOH_PROXY_*` variables:
//!
//! ```toml
//! listen = "127.0.0.1:8080"
//! rate_limit = 300
//! burst = 50
//! allowed_targets = ["target.example"]
//! ```

use std::path::Path;

use odoh::config::ProxySettings;
use odoh::proxy::Proxy;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    tracing_subscriber::fmt().with_env_filter("info").init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let insecure = args.iter().any(|a| a == "--insecure-http");
    let file = args.iter().find(|a| !a.starts_with("--"));
    let mut settings = ProxySettings::load(file.map(Path::new))?;
    settings.insecure_http |= insecure;
    let proxy = Proxy::new(settings.to_proxy_config())?;
    let handle = odoh::net::bind_and_serve(settings.listen, proxy.router(), Default::default()).await?;
    tracing::info!(insecure_http = settings.insecure_http, "proxy listening on {}", handle.local_addr());
    std::future::pending::<()>().await;
    Ok(())
}
