//! Blocking HTTP client and fixtures for driving a live service.
#![allow(dead_code)]

use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::routing::post;
use axum::{Json, Router};
use disco_core::audio::encode_wav_16bit;
use disco_core::AudioClip;
use disco_core::BackendDescriptor;
use disco_service::fake_backend::{fake_backend_router, FakeBackendControl};
use disco_service::{spawn_background, ServiceConfig};
use serde_json::{json, Value};

pub struct Client {
    base: String,
    agent: ureq::Agent,
}

pub struct Reply {
    pub status: u16,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap_or(Value::Null)
    }
}

impl Client {
    pub fn new(base: String) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(120)))
            .build()
            .new_agent();
        Self { base, agent }
    }

    pub fn start(config: ServiceConfig) -> Self {
        let addr = spawn_background(disco_service::app(config)).expect("service starts");
        Self::new(format!("http://{addr}"))
    }

    fn finish(resp: Result<ureq::http::Response<ureq::Body>, ureq::Error>) -> Reply {
        let mut resp = resp.expect("request reaches the server");
        let status = resp.status().as_u16();
        let body = resp.body_mut().with_config().limit(1 << 30).read_to_vec().unwrap_or_default();
        Reply { status, body }
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    pub fn get(&self, path: &str) -> Reply {
        Self::finish(self.agent.get(&self.url(path)).call())
    }

    pub fn delete(&self, path: &str) -> Reply {
        Self::finish(self.agent.delete(&self.url(path)).call())
    }

    pub fn post(&self, path: &str, body: Value) -> Reply {
        Self::finish(self.agent.post(&self.url(path)).send_json(body))
    }

    pub fn patch(&self, path: &str, body: Value) -> Reply {
        Self::finish(self.agent.patch(&self.url(path)).send_json(body))
    }

    pub fn post_bytes(&self, path: &str, bytes: &[u8]) -> Reply {
        Self::finish(self.agent.post(&self.url(path)).send(bytes))
    }

    pub fn put_bytes(&self, path: &str, bytes: &[u8]) -> Reply {
        Self::finish(self.agent.put(&self.url(path)).send(bytes))
    }

    pub fn upload(&self, clip: &AudioClip) -> Reply {
        self.post_bytes("/audio", &encode_wav_16bit(clip))
    }

    /// Poll until terminal; returns the final record and every distinct
    /// status observed in order.
    pub fn wait_job(&self, job_id: u64) -> (Value, Vec<String>) {
        let started = Instant::now();
        let mut seen: Vec<String> = Vec::new();
        loop {
            let job = self.get(&format!("/jobs/{job_id}")).json();
            let status = job["status"].as_str().unwrap_or("?").to_owned();
            if seen.last() != Some(&status) {
                seen.push(status.clone());
            }
            if status == "done" || status == "failed" {
                return (job, seen);
            }
            assert!(started.elapsed() < Duration::from_secs(120), "job {job_id} stuck in {status}");
            std::thread::sleep(Duration::from_millis(2));
        }
    }

    pub fn job_id(reply: &Reply) -> u64 {
        assert_eq!(reply.status, 202, "{}", String::from_utf8_lossy(&reply.body));
        reply.json()["job_id"].as_u64().expect("job id")
    }
}

/// Observed statuses form a path through queued -> running -> done|failed.
pub fn monotone(seen: &[String]) -> bool {
    let rank = |s: &str| match s {
        "queued" => Some(0),
        "running" => Some(1),
        "done" | "failed" => Some(2),
        _ => None,
    };
    let ranks: Option<Vec<_>> = seen.iter().map(|s| rank(s)).collect();
    match ranks {
        Some(r) => r.windows(2).all(|w| w[0] < w[1]) && r.last() == Some(&2),
        None => false,
    }
}

/// Start a fake remote backend; returns its base URL and control block.
pub fn fake_remote() -> (String, Arc<FakeBackendControl>) {
    let control = Arc::new(FakeBackendControl::default());
    let addr = spawn_background(fake_backend_router(Arc::clone(&control))).expect("fake backend starts");
    (format!("http://{addr}"), control)
}

pub fn remote_config(url: &str) -> ServiceConfig {
    let mut config = ServiceConfig::with_backend(&BackendDescriptor::remote(url)).unwrap();
    config.seed = Some(99);
    config.frame_size = disco_core::FrameSize::new(32, 32);
    config.work_dir = tempfile::tempdir().unwrap().keep();
    config
}

/// Fake completion endpoint; records every request body.
pub fn fake_llm() -> (String, Arc<Mutex<Vec<Value>>>) {
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    let app = Router::new().route(
        "/complete",
        post(move |Json(body): Json<Value>| {
            let log = Arc::clone(&log);
            async move {
                log.lock().unwrap().push(body);
                Json(json!({"text": "1. Robot DJs, neon dance floor\n2. Groovy dancers\n3. Colorful disco ball"}))
            }
        }),
    );
    let addr = spawn_background(app).expect("fake llm starts");
    (format!("http://{addr}/complete"), seen)
}

pub fn silence(seconds: f64, rate: u32) -> AudioClip {
    AudioClip::new(vec![0.0; (seconds * rate as f64) as usize], rate).unwrap()
}

pub fn clicks(seconds: f64, rate: u32, positions_sec: &[f64]) -> AudioClip {
    let n = (seconds * rate as f64) as usize;
    let mut s = vec![0.0f32; n];
    for p in positions_sec {
        s[(p * rate as f64) as usize] = 0.9;
    }
    AudioClip::new(s, rate).unwrap()
}
