//! TTL-aware LRU cache of DNS responses, keyed by (lowercase qname, qtype, qclass).

use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use lru::LruCache;
use parking_lot::Mutex;

pub const DEFAULT_CAPACITY: usize = 10_000;
pub const MIN_TTL: Duration = Duration::from_secs(1);
pub const MAX_TTL: Duration = Duration::from_secs(86_400);

pub type CacheKey = (String, u16, u16);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheEntry {
    pub response: Vec<u8>,
    pub expires_at: Instant,
}

/// Shared response cache. A capacity of zero disables caching (every lookup
/// is a miss).
pub struct ResponseCache {
    entries: Option<Mutex<LruCache<CacheKey, CacheEntry>>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl ResponseCache {
    pub fn new(capacity: usize) -> Self {
        Self {
            entries: NonZeroUsize::new(capacity).map(|c| Mutex::new(LruCache::new(c))),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    pub fn get(&self, key: &CacheKey) -> Option<CacheEntry> {
        self.get_at(key, Instant::now())
    }

    pub fn get_at(&self, key: &CacheKey, now: Instant) -> Option<CacheEntry> {
        let found = self.entries.as_ref().and_then(|m| {
            let mut lru = m.lock();
            match lru.get(key) {
                Some(e) if now < e.expires_at => Some(e.clone()),
                Some(_) => {
                    lru.pop(key);
                    None
                }
                None => None,
            }
        });
        let counter = if found.is_some() { &self.hits } else { &self.misses };
        counter.fetch_add(1, Ordering::Relaxed);
        found
    }

    pub fn put(&self, key: CacheKey, response: Vec<u8>, min_ttl: u32) {
        self.put_at(key, response, min_ttl, Instant::now())
    }

    /// Stores `response` until `now + clamp(min_ttl, 1s, 86400s)`.
    pub fn put_at(&self, key: CacheKey, response: Vec<u8>, min_ttl: u32, now: Instant) {
        if let Some(m) = &self.entries {
            let ttl = Duration::from_secs(min_ttl.into()).clamp(MIN_TTL, MAX_TTL);
            m.lock().put(
                key,
                CacheEntry {
                    response,
                    expires_at: now + ttl,
                },
            );
        }
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.entries.as_ref().map_or(0, |m| m.lock().len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Default for ResponseCache {
    fn default() -> Self {
        Self::new(DEFAULT_CAPACITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(name: &str) -> CacheKey {
        (name.to_string(), 1, 1)
    }

    #[test]
    fn hit_within_ttl_miss_after() {
        let cache = ResponseCache::new(4);
        let t0 = Instant::now();
        cache.put_at(key("a"), vec![1], 60, t0);
        assert!(cache.get_at(&key("a"), t0 + Duration::from_secs(59)).is_some());
        assert!(cache.get_at(&key("a"), t0 + Duration::from_secs(60)).is_none());
        assert_eq!((cache.hits(), cache.misses()), (1, 1));
        assert!(cache.is_empty());
    }

    #[test]
    fn ttl_is_clamped() {
        let cache = ResponseCache::new(4);
        let t0 = Instant::now();
        cache.put_at(key("zero"), vec![], 0, t0);
        cache.put_at(key("huge"), vec![], u32::MAX, t0);
        assert_eq!(cache.get_at(&key("zero"), t0).unwrap().expires_at, t0 + MIN_TTL);
        assert_eq!(cache.get_at(&key("huge"), t0).unwrap().expires_at, t0 + MAX_TTL);
    }

    #[test]
    fn lru_eviction() {
        let cache = ResponseCache::new(1);
        cache.put(key("first"), vec![1], 60);
        cache.put(key("second"), vec![2], 60);
        assert!(cache.get(&key("first")).is_none());
        assert_eq!(cache.get(&key("second")).unwrap().response, vec![2]);

        let cache = ResponseCache::new(2);
        cache.put(key("a"), vec![], 60);
        cache.put(key("b"), vec![], 60);
        cache.get(&key("a"));
        cache.put(key("c"), vec![], 60);
        assert!(cache.get(&key("a")).is_some());
        assert!(cache.get(&key("b")).is_none());
    }

    #[test]
    fn zero_capacity_never_hits() {
        let cache = ResponseCache::new(0);
        cache.put(key("a"), vec![1], 60);
        assert!(cache.get(&key("a")).is_none());
        assert_eq!(cache.misses(), 1);
    }
}
