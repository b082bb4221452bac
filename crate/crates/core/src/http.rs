//! Blocking HTTP client with a per-endpoint rate limiter and bounded retries
//! with exponential backoff. Shared by the SPARQL client and the model adapters.

use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use reqwest::blocking::{Client, RequestBuilder, Response};
use reqwest::StatusCode;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_USER_AGENT: &str = concat!(
    "tempofact/",
    env!("CARGO_PKG_VERSION"),
    " (time-sensitive knowledge evaluation toolkit)"
);

/// Retry and rate configuration for one endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpPolicy {
    pub max_retries: u32,
    pub backoff_base_ms: u64,
    pub backoff_max_ms: u64,
    /// Minimum spacing between two requests to the same endpoint.
    pub min_interval_ms: u64,
    pub timeout_secs: u64,
    pub user_agent: String,
}

impl Default for HttpPolicy {
    fn default() -> Self {
        HttpPolicy {
            max_retries: 4,
            backoff_base_ms: 500,
            backoff_max_ms: 30_000,
            min_interval_ms: 250,
            timeout_secs: 60,
            user_agent: DEFAULT_USER_AGENT.to_string(),
        }
    }
}

impl HttpPolicy {
    pub fn backoff(&self, attempt: u32) -> Duration {
        let factor = 1u64.checked_shl(attempt.min(32)).unwrap_or(u64::MAX);
        Duration::from_millis(self.backoff_base_ms.saturating_mul(factor).min(self.backoff_max_ms))
    }
}

/// Hands out request slots no closer together than `min_interval`.
#[derive(Debug)]
pub struct RateLimiter {
    min_interval: Duration,
    next_slot: Mutex<Option<Instant>>,
}

impl RateLimiter {
    pub fn new(min_interval: Duration) -> Self {
        RateLimiter {
            min_interval,
            next_slot: Mutex::new(None),
        }
    }

    /// Blocks until the caller may send; returns the granted instant.
    pub fn acquire(&self) -> Instant {
        let slot = {
            let mut next = self.next_slot.lock().expect("rate limiter poisoned");
            let now = Instant::now();
            let slot = match *next {
                Some(t) if t > now => t,
                _ => now,
            };
            *next = Some(slot + self.min_interval);
            slot
        };
        let now = Instant::now();
        if slot > now {
            thread::sleep(slot - now);
        }
        slot
    }
}

#[derive(Debug, Clone)]
pub struct HttpReply {
    pub status: u16,
    pub body: String,
    /// Number of retries spent before this reply.
    pub retries: u32,
}

#[derive(Debug, Clone)]
pub struct HttpClient {
    client: Client,
    policy: HttpPolicy,
    limiter: Arc<RateLimiter>,
}

fn retryable(status: StatusCode) -> bool {
    status == StatusCode::TOO_MANY_REQUESTS || status.is_server_error()
}

fn retry_after(resp: &Response) -> Option<Duration> {
    resp.headers()
        .get(reqwest::header::RETRY_AFTER)?
        .to_str()
        .ok()?
        .trim()
        .parse::<u64>()
        .ok()
        .map(Duration::from_secs)
}

impl HttpClient {
    pub fn new(policy: HttpPolicy) -> Result<Self> {
        let limiter = Arc::new(RateLimiter::new(Duration::from_millis(policy.min_interval_ms)));
        Self::with_limiter(policy, limiter)
    }

    /// Builds a client that shares `limiter` with other clients of the same endpoint.
    pub fn with_limiter(policy: HttpPolicy, limiter: Arc<RateLimiter>) -> Result<Self> {
        let client = Client::builder()
            .timeout(Duration::from_secs(policy.timeout_secs.max(1)))
            .user_agent(policy.user_agent.clone())
            .build()
            .map_err(|e| Error::Network(format!("cannot build http client: {e}")))?;
        Ok(HttpClient {
            client,
            policy,
            limiter,
        })
    }

    pub fn policy(&self) -> &HttpPolicy {
        &self.policy
    }

    /// Sends the request built by `make`, retrying transport failures, 429 and
    /// 5xx responses. Any other status is returned to the caller verbatim.
    pub fn execute(&self, make: &dyn Fn(&Client) -> RequestBuilder) -> Result<HttpReply> {
        let mut retries = 0u32;
        loop {
            self.limiter.acquire();
            match make(&self.client).send() {
                Ok(resp) => {
                    let status = resp.status();
                    if retryable(status) {
                        if retries < self.policy.max_retries {
                            let wait = retry_after(&resp)
                                .map(|d| d.max(self.policy.backoff(retries)))
                                .unwrap_or_else(|| self.policy.backoff(retries))
                                .min(Duration::from_millis(self.policy.backoff_max_ms));
                            log::warn!(
                                "HTTP {status} from {}, retry {} in {:?}",
                                resp.url(),
                                retries + 1,
                                wait
                            );
                            thread::sleep(wait);
                            retries += 1;
                            continue;
                        }
                        return Err(Error::Network(format!(
                            "giving up after {retries} retries: HTTP {status} from {}",
                            resp.url()
                        )));
                    }
                    let body = resp
                        .text()
                        .map_err(|e| Error::Network(format!("reading response body: {e}")))?;
                    return Ok(HttpReply {
                        status: status.as_u16(),
                        body,
                        retries,
                    });
                }
                Err(e) => {
                    if retries < self.policy.max_retries {
                        let wait = self.policy.backoff(retries);
                        log::warn!("request failed ({e}), retry {} in {:?}", retries + 1, wait);
                        thread::sleep(wait);
                        retries += 1;
                        continue;
                    }
                    return Err(Error::Network(format!(
                        "giving up after {retries} retries: {e}"
                    )));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backoff_doubles_and_caps() {
        let policy = HttpPolicy {
            backoff_base_ms: 100,
            backoff_max_ms: 1000,
            ..HttpPolicy::default()
        };
        assert_eq!(policy.backoff(0), Duration::from_millis(100));
        assert_eq!(policy.backoff(1), Duration::from_millis(200));
        assert_eq!(policy.backoff(3), Duration::from_millis(800));
        assert_eq!(policy.backoff(4), Duration::from_millis(1000));
        assert_eq!(policy.backoff(60), Duration::from_millis(1000));
    }

    #[test]
    fn limiter_spaces_grants() {
        let limiter = RateLimiter::new(Duration::from_millis(20));
        let grants: Vec<Instant> = (0..4).map(|_| limiter.acquire()).collect();
        for pair in grants.windows(2) {
            assert!(pair[1] - pair[0] >= Duration::from_millis(20));
        }
    }

    #[test]
    fn limiter_is_shared_across_threads() {
        let limiter = Arc::new(RateLimiter::new(Duration::from_millis(15)));
        let mut grants: Vec<Instant> = thread::scope(|s| {
            let handles: Vec<_> = (0..4)
                .map(|_| {
                    let l = Arc::clone(&limiter);
                    s.spawn(move || (0..3).map(|_| l.acquire()).collect::<Vec<_>>())
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
        });
        grants.sort();
        for pair in grants.windows(2) {
            assert!(pair[1] - pair[0] >= Duration::from_millis(15));
        }
    }
}
