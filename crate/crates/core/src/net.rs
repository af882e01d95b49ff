//! HTTP serving and client plumbing shared by the services, the client and
//! the benchmark harness.

use std::io;
use std::net::{IpAddr, SocketAddr};
use std::time::Duration;

use axum::extract::ConnectInfo;
use axum::Router;
use hyper::body::Incoming;
use hyper_util::rt::TokioIo;
use hyper_util::service::TowerToHyperService;
use tokio::net::TcpListener;
use tokio::task::JoinHandle;
use tower::ServiceExt;

pub const DNS_MESSAGE: &str = "application/dns-message";
pub const USER_AGENT: &str = concat!("odoh/", env!("CARGO_PKG_VERSION"));

/// Knobs applied to every accepted connection.
#[derive(Debug, Clone, Copy, Default)]
pub struct ServeOptions {
    /// Stall each new connection this long before serving it; stands in for a
    /// TCP+TLS handshake on loopback.
    pub connection_delay: Duration,
}

/// A running HTTP server. Dropping the handle stops accepting connections.
#[derive(Debug)]
pub struct ServerHandle {
    addr: SocketAddr,
    task: JoinHandle<()>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// `http://ip:port`
    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// `ip:port`, the form used as a proxy `targethost`.
    pub fn host(&self) -> String {
        self.addr.to_string()
    }

    pub fn shutdown(self) {
        self.task.abort();
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.task.abort();
    }
}

/// Serves `router` over HTTP/1.1 on `listener`. Each request carries the
/// peer's [`ConnectInfo<SocketAddr>`] extension.
pub fn serve(listener: TcpListener, router: Router, opts: ServeOptions) -> io::Result<ServerHandle> {
    let addr = listener.local_addr()?;
    let task = tokio::spawn(async move {
        loop {
            let (stream, peer) = match listener.accept().await {
                Ok(conn) => conn,
                Err(e) => {
                    tracing::warn!(error = %e, "accept failed");
                    tokio::time::sleep(Duration::from_millis(5)).await;
                    continue;
                }
            };
            let _ = stream.set_nodelay(true);
            let router = router.clone();
            tokio::spawn(async move {
                if !opts.connection_delay.is_zero() {
                    tokio::time::sleep(opts.connection_delay).await;
                }
                let svc = router.map_request(move |mut req: hyper::Request<Incoming>| {
                    req.extensions_mut().insert(ConnectInfo(peer));
                    req
                });
                let svc = TowerToHyperService::new(svc);
                let _ = hyper::server::conn::http1::Builder::new()
                    .serve_connection(TokioIo::new(stream), svc)
                    .await;
            });
        }
    });
    Ok(ServerHandle { addr, task })
}

/// Binds `addr` and serves `router` on it.
pub async fn bind_and_serve(addr: SocketAddr, router: Router, opts: ServeOptions) -> io::Result<ServerHandle> {
    let listener = TcpListener::bind(addr).await?;
    serve(listener, router, opts)
}

/// Binds an ephemeral loopback port.
pub async fn serve_loopback(router: Router, opts: ServeOptions) -> io::Result<ServerHandle> {
    bind_and_serve(SocketAddr::from(([127, 0, 0, 1], 0)), router, opts).await
}

/// Options for outbound HTTP clients.
#[derive(Debug, Clone, Copy)]
pub struct ClientOptions {
    /// Keep idle connections for reuse across requests.
    pub reuse_connections: bool,
    pub timeout: Duration,
    pub local_address: Option<IpAddr>,
}

impl Default for ClientOptions {
    fn default() -> Self {
        Self {
            reuse_connections: true,
            timeout: Duration::from_secs(5),
            local_address: None,
        }
    }
}

/// Builds a client that never consults proxy environment variables.
pub fn http_client(opts: ClientOptions) -> reqwest::Client {
    let mut b = reqwest::Client::builder()
        .no_proxy()
        .user_agent(USER_AGENT)
        .timeout(opts.timeout)
        .tcp_nodelay(true)
        .local_address(opts.local_address);
    if !opts.reuse_connections {
        b = b.pool_max_idle_per_host(0);
    }
    b.build().expect("static client configuration is valid")
}

/// Sleeps for an emulated one-way hop, if any. The timer wheel rounds up
/// to whole milliseconds, so the last millisecond is spent yielding to hit
/// the deadline without that overshoot.
pub async fn hop_delay(d: Duration) {
    if d.is_zero() {
        return;
    }
    let deadline = tokio::time::Instant::now() + d;
    if let Some(coarse) = d.checked_sub(Duration::from_millis(1)) {
        tokio::time::sleep(coarse.saturating_sub(Duration::from_micros(500))).await;
    }
    while tokio::time::Instant::now() < deadline {
        tokio::task::yield_now().await;
    }
}
