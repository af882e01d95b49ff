//! `odoh-dig`: a dig-like lookup over ODoH.
//!
//! Exit status is 0 for NOERROR and NXDOMAIN, 1 for any other outcome
//! (transport, crypto, or a failing rcode) and 2 for usage errors.

use std::io::Write;
use std::net::IpAddr;
use std::path::PathBuf;
use std::time::Duration;

use clap::Parser;
use serde::Serialize;

use crate::client::{
    self, ClientError, ClientSession, Discovery, NetworkProber, QueryOutcome, RouteSelection, SessionOptions, Strategy,
};
use crate::dns;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "odoh-dig", version, about = "Resolve a name over Oblivious DNS over HTTPS")]
pub struct DigArgs {
    /// Name to resolve.
    pub name: String,
    /// Record type (A, AAAA, TXT, HTTPS, ... or a number).
    pub qtype: Option<String>,
    /// Proxy URL, e.g. https://proxy.example or http://127.0.0.1:8080/proxy.
    #[arg(long, requires = "target", conflicts_with = "routes")]
    pub proxy: Option<String>,
    /// Target host[:port].
    #[arg(long, requires = "proxy", conflicts_with = "routes")]
    pub target: Option<String>,
    /// Route file with [proxies] and [targets] sections.
    #[arg(long)]
    pub routes: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Strategy::RandomPair)]
    pub strategy: Strategy,
    /// Probe queries per measured pair.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    pub probes: u32,
    /// Open a fresh connection for every request.
    #[arg(long)]
    pub no_reuse: bool,
    /// Discover the target config from an HTTPS record for odoh.test,
    /// without DNSSEC validation.
    #[arg(long, requires = "bootstrap_resolver")]
    pub dnssec_less_discovery: bool,
    /// DoH URL used for DNS-based discovery.
    #[arg(long)]
    pub bootstrap_resolver: Option<String>,
    /// Randomize query-name casing and require the answer to echo it.
    #[arg(long = "use-0x20")]
    pub use_0x20: bool,
    #[arg(long)]
    pub json: bool,
    /// Talk plain HTTP to proxies and targets (loopback testing).
    #[arg(long)]
    pub insecure_http: bool,
    /// Source address for outbound connections.
    #[arg(long)]
    pub local_address: Option<IpAddr>,
    #[arg(long, default_value_t = 5000)]
    pub timeout_ms: u64,
}

#[derive(Debug, Serialize)]
struct JsonAnswer {
    name: String,
    #[serde(rename = "type")]
    rtype: String,
    ttl: u32,
    data: String,
}

#[derive(Debug, Serialize)]
struct JsonTimings {
    seal_us: f64,
    rtt_ms: f64,
    open_us: f64,
}

#[derive(Debug, Serialize)]
struct JsonRoute {
    proxy: String,
    target: String,
    strategy: String,
}

#[derive(Debug, Serialize)]
struct JsonOutput {
    name: String,
    qtype: String,
    rcode: String,
    answers: Vec<JsonAnswer>,
    timings: JsonTimings,
    route: JsonRoute,
    discovery: &'static str,
    warnings: Vec<String>,
}

struct Plan {
    proxy: String,
    target: String,
    strategy: String,
    probe_rtt_ms: Option<f64>,
    warnings: Vec<String>,
}

/// Parses `argv` (program name first), runs the lookup and writes the
/// result to `out` and diagnostics to `err`. Returns the exit status.
pub async fn run_dig_async(
    argv: impl IntoIterator<Item = impl Into<std::ffi::OsString> + Clone>,
    out: &mut (dyn Write + Send),
    err: &mut (dyn Write + Send),
) -> i32 {
    let args = match DigArgs::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    if args.routes.is_none() && args.target.is_none() {
        let _ = writeln!(err, "error: either --proxy and --target, or --routes, is required");
        return EXIT_USAGE;
    }
    let Some(qtype) = dns::type_from_name(args.qtype.as_deref().unwrap_or("A")) else {
        let _ = writeln!(err, "error: unknown record type {}", args.qtype.unwrap_or_default());
        return EXIT_USAGE;
    };
    match dig(&args, qtype, out).await {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, ";; error: {e}");
            EXIT_FAILURE
        }
    }
}

/// Blocking wrapper around [`run_dig_async`] using stdout and stderr.
pub fn run_dig(argv: impl IntoIterator<Item = impl Into<std::ffi::OsString> + Clone>) -> i32 {
    let runtime = match tokio::runtime::Builder::new_multi_thread().enable_all().build() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: starting runtime: {e}");
            return EXIT_FAILURE;
        }
    };
    let mut out = std::io::stdout();
    let mut err = std::io::stderr();
    runtime.block_on(run_dig_async(argv, &mut out, &mut err))
}

async fn plan_route(args: &DigArgs, opts: SessionOptions) -> Result<Plan, ClientError> {
    if let (Some(proxy), Some(target)) = (&args.proxy, &args.target) {
        return Ok(Plan {
            proxy: proxy.clone(),
            target: target.clone(),
            strategy: "fixed".into(),
            probe_rtt_ms: None,
            warnings: Vec::new(),
        });
    }
    let path = args.routes.as_ref().expect("checked by caller");
    let text = std::fs::read_to_string(path).map_err(|e| ClientError::Route(format!("{}: {e}", path.display())))?;
    let routes = client::parse_route_file(&text)?;
    let prober = NetworkProber::new(opts);
    let sel: RouteSelection =
        client::select_route(args.strategy, &routes.proxies, &routes.targets, args.probes as usize, &prober).await?;
    Ok(Plan {
        proxy: sel.proxy,
        target: sel.target,
        strategy: sel.strategy.to_string(),
        probe_rtt_ms: sel.rtt_ms,
        warnings: sel.warning.into_iter().collect(),
    })
}

async fn dig(args: &DigArgs, qtype: u16, out: &mut (dyn Write + Send)) -> Result<i32, ClientError> {
    let opts = SessionOptions {
        reuse_connections: !args.no_reuse,
        timeout: Duration::from_millis(args.timeout_ms),
        local_address: args.local_address,
        use_0x20: args.use_0x20,
        insecure_http: args.insecure_http,
    };
    let mut plan = plan_route(args, opts).await?;
    let http = opts.http_client();
    let discovery: Discovery = if args.dnssec_less_discovery {
        let url = args.bootstrap_resolver.as_deref().expect("required by clap");
        client::discover_config_dns(&http, url).await?
    } else {
        client::discover_config(&http, &plan.target, args.insecure_http).await?
    };
    plan.warnings.extend(discovery.warnings.iter().cloned());
    let session = ClientSession::with_client(http, &plan.proxy, &plan.target, discovery.config, opts)?;
    let outcome = session.query_once(&args.name, qtype).await?;
    let rcode = outcome.summary.rcode;
    if args.json {
        write_json(out, args, qtype, &plan, discovery.unverified, &outcome);
    } else {
        write_text(out, args, qtype, &plan, discovery.unverified, &outcome);
    }
    Ok(if matches!(rcode, dns::RCODE_NOERROR | dns::RCODE_NXDOMAIN) {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}

fn write_json(out: &mut dyn Write, args: &DigArgs, qtype: u16, plan: &Plan, unverified: bool, o: &QueryOutcome) {
    let doc = JsonOutput {
        name: args.name.clone(),
        qtype: dns::type_name(qtype),
        rcode: dns::rcode_name(o.summary.rcode).to_string(),
        answers: o
            .summary
            .answers
            .iter()
            .map(|a| JsonAnswer {
                name: a.name.clone(),
                rtype: dns::type_name(a.rtype),
                ttl: a.ttl,
                data: a.rdata_text(),
            })
            .collect(),
        timings: JsonTimings {
            seal_us: o.timings.seal_us,
            rtt_ms: o.timings.rtt_ms,
            open_us: o.timings.open_us,
        },
        route: JsonRoute {
            proxy: plan.proxy.clone(),
            target: plan.target.clone(),
            strategy: plan.strategy.clone(),
        },
        discovery: if unverified { "unverified" } else { "well-known" },
        warnings: plan.warnings.clone(),
    };
    let _ = serde_json::to_writer_pretty(&mut *out, &doc);
    let _ = writeln!(out);
}

fn write_text(out: &mut dyn Write, args: &DigArgs, qtype: u16, plan: &Plan, unverified: bool, o: &QueryOutcome) {
    let _ = writeln!(out, "; <<>> odoh-dig <<>> {} {}", args.name, dns::type_name(qtype));
    for w in &plan.warnings {
        let _ = writeln!(out, ";; warning: {w}");
    }
    let probe = plan.probe_rtt_ms.map(|r| format!(", probe median {r:.1} ms")).unwrap_or_default();
    let _ = writeln!(
        out,
        ";; route: proxy {} target {} (strategy {}{probe})",
        plan.proxy, plan.target, plan.strategy
    );
    if unverified {
        let _ = writeln!(out, ";; discovery: unverified (no DNSSEC)");
    }
    let _ = writeln!(
        out,
        ";; status: {}, id: {}, answers: {}",
        dns::rcode_name(o.summary.rcode),
        o.summary.id,
        o.summary.answers.len()
    );
    if !o.summary.answers.is_empty() {
        let _ = writeln!(out, "\n;; ANSWER SECTION:");
        for a in &o.summary.answers {
            let _ = writeln!(out, "{a}");
        }
    }
    let _ = writeln!(
        out,
        "\n;; seal {:.0} us, network {:.2} ms, open {:.0} us",
        o.timings.seal_us, o.timings.rtt_ms, o.timings.open_us
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    async fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_dig_async(args.iter().copied(), &mut out, &mut err).await;
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[tokio::test]
    async fn usage_errors_exit_2() {
        assert_eq!(run(&["odoh-dig", "example.com"]).await.0, EXIT_USAGE);
        assert_eq!(run(&["odoh-dig", "example.com", "--proxy", "http://p"]).await.0, EXIT_USAGE);
        assert_eq!(run(&["odoh-dig", "example.com", "--routes", "r", "--probes", "0"]).await.0, EXIT_USAGE);
        assert_eq!(run(&["odoh-dig", "example.com", "BOGUS", "--routes", "r"]).await.0, EXIT_USAGE);
        let (code, _, err) = run(&["odoh-dig", "--strategy", "slowest"]).await;
        assert_eq!(code, EXIT_USAGE);
        assert!(!err.is_empty());
        let (code, out, _) = run(&["odoh-dig", "--help"]).await;
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("--dnssec-less-discovery"));
    }

    #[tokio::test]
    async fn unreachable_route_exits_1() {
        let (code, _, err) = run(&[
            "odoh-dig",
            "example.com",
            "--proxy",
            "http://127.0.0.1:9",
            "--target",
            "127.0.0.1:9",
            "--insecure-http",
            "--timeout-ms",
            "500",
        ])
        .await;
        assert_eq!(code, EXIT_FAILURE);
        assert!(err.contains("discovery failed"), "{err}");
    }
}
