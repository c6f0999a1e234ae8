use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use base64::Engine;
use serde::de::DeserializeOwned;
use serde::Serialize;

use super::wire::{ErrorResponse, GenerateRequest, ImageResponse, InterpolateRequest, SeededPrompt};
use super::{check_weight, BackendError, ImageBackend, ImageFrame};
use crate::timeline::ImageSpec;

/// Counting semaphore bounding concurrent requests.
#[derive(Debug)]
struct InFlight {
    limit: usize,
    active: Mutex<usize>,
    released: Condvar,
}

struct Permit<'a>(&'a InFlight);

impl InFlight {
    fn acquire(&self) -> Permit<'_> {
        let mut active = self.active.lock().unwrap_or_else(|e| e.into_inner());
        while *active >= self.limit {
            active = self.released.wait(active).unwrap_or_else(|e| e.into_inner());
        }
        *active += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut active = self.0.active.lock().unwrap_or_else(|e| e.into_inner());
        *active -= 1;
        self.0.released.notify_one();
    }
}

/// Client for a generation server speaking the `/v1/generate` and
/// `/v1/interpolate` protocol.
#[derive(Debug, Clone)]
pub struct RemoteBackend {
    endpoint: String,
    agent: ureq::Agent,
    in_flight: Arc<InFlight>,
}

impl RemoteBackend {
    pub fn new(endpoint: impl Into<String>, timeout: Duration, max_in_flight: usize) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .new_agent();
        Self {
            endpoint: endpoint.into().trim_end_matches('/').to_owned(),
            agent,
            in_flight: Arc::new(InFlight {
                limit: max_in_flight.max(1),
                active: Mutex::new(0),
                released: Condvar::new(),
            }),
        }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn post<B: Serialize, R: DeserializeOwned>(&self, path: &str, body: &B) -> Result<R, BackendError> {
        let _permit = self.in_flight.acquire();
        let url = format!("{}{path}", self.endpoint);
        let mut resp = self
            .agent
            .post(&url)
            .send_json(body)
            .map_err(|e| BackendError::BackendUnavailable(format!("{url}: {e}")))?;
        let status = resp.status();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| BackendError::BackendUnavailable(format!("{url}: {e}")))?;
        if !status.is_success() {
            return Err(match serde_json::from_str::<ErrorResponse>(&text) {
                Ok(err) => BackendError::GenerationFailed {
                    code: err.error.code,
                    message: err.error.message,
                },
                Err(_) => BackendError::GenerationFailed {
                    code: format!("http_{}", status.as_u16()),
                    message: text,
                },
            });
        }
        serde_json::from_str(&text).map_err(|e| BackendError::InvalidImage(format!("bad response body: {e}")))
    }

    fn decode(resp: ImageResponse, width: u32, height: u32) -> Result<ImageFrame, BackendError> {
        let png = base64::engine::general_purpose::STANDARD
            .decode(resp.png_base64.as_bytes())
            .map_err(|e| BackendError::InvalidImage(e.to_string()))?;
        let frame = ImageFrame::from_png(&png)?;
        if (frame.width(), frame.height()) != (width, height) {
            return Err(BackendError::SizeMismatch);
        }
        Ok(frame)
    }
}

impl ImageBackend for RemoteBackend {
    fn generate(&self, spec: &ImageSpec) -> Result<ImageFrame, BackendError> {
        let seed = spec.seed.ok_or(BackendError::MissingSeed)?;
        let resp = self.post(
            "/v1/generate",
            &GenerateRequest {
                prompt: spec.prompt.clone(),
                seed,
                width: spec.width,
                height: spec.height,
            },
        )?;
        Self::decode(resp, spec.width, spec.height)
    }

    fn interpolate(&self, start: &ImageSpec, end: &ImageSpec, t: f64) -> Result<ImageFrame, BackendError> {
        check_weight(t)?;
        let (Some(s0), Some(s1)) = (start.seed, end.seed) else {
            return Err(BackendError::MissingSeed);
        };
        if start.size() != end.size() {
            return Err(BackendError::SizeMismatch);
        }
        let resp = self.post(
            "/v1/interpolate",
            &InterpolateRequest {
                start: SeededPrompt {
                    prompt: start.prompt.clone(),
                    seed: s0,
                },
                end: SeededPrompt {
                    prompt: end.prompt.clone(),
                    seed: s1,
                },
                t,
                width: start.width,
                height: start.height,
            },
        )?;
        Self::decode(resp, start.width, start.height)
    }
}
