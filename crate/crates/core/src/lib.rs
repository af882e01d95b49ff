//! Oblivious DNS over HTTPS: wire format and HPKE sealing, an oblivious
//! proxy and target, a dig-like client with route selection, and a
//! measurement harness that runs the whole path over loopback.
//!
//! A query is sealed to the target's public key and posted to a proxy,
//! which relays it without the client's address. The target opens it,
//! answers from its cache or an upstream DoH resolver, and seals the answer
//! under a one-shot key that only the client holds.

pub mod bench;
pub mod cache;
pub mod client;
pub mod config;
pub mod dig;
pub mod dns;
pub mod hpke;
pub mod net;
pub mod protocol;
pub mod proxy;
pub mod resolver;
pub mod stack;
pub mod suite;
pub mod target;
