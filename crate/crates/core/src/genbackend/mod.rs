//! Image generation backends behind one contract: a deterministic image per
//! spec, and the frame at interpolation weight `t` between two specs.

mod frame;
mod mock;
mod remote;

pub use frame::{png_digest, ImageFrame};
pub use mock::{crossfade, mock_image, mock_key, MockBackend};
pub use remote::RemoteBackend;

use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::timeline::ImageSpec;

pub const DEFAULT_REMOTE_TIMEOUT_SEC: f64 = 120.0;
pub const DEFAULT_MAX_IN_FLIGHT: usize = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BackendError {
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("generation failed ({code}): {message}")]
    GenerationFailed { code: String, message: String },
    #[error("image spec has no seed")]
    MissingSeed,
    #[error("interpolation weight {0} is outside [0, 1]")]
    InvalidWeight(f64),
    #[error("start and end images differ in size")]
    SizeMismatch,
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("invalid backend descriptor: {0}")]
    InvalidDescriptor(String),
}

pub trait ImageBackend: Send + Sync {
    fn generate(&self, spec: &ImageSpec) -> Result<ImageFrame, BackendError>;

    /// `t = 0` must equal `generate(start)` and `t = 1` must equal
    /// `generate(end)`.
    fn interpolate(&self, start: &ImageSpec, end: &ImageSpec, t: f64) -> Result<ImageFrame, BackendError>;
}

impl<T: ImageBackend + ?Sized> ImageBackend for Arc<T> {
    fn generate(&self, spec: &ImageSpec) -> Result<ImageFrame, BackendError> {
        (**self).generate(spec)
    }

    fn interpolate(&self, start: &ImageSpec, end: &ImageSpec, t: f64) -> Result<ImageFrame, BackendError> {
        (**self).interpolate(start, end, t)
    }
}

pub(crate) fn check_weight(t: f64) -> Result<(), BackendError> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(BackendError::InvalidWeight(t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Mock,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendDescriptor {
    pub kind: BackendKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_sec: f64,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
}

fn default_timeout() -> f64 {
    DEFAULT_REMOTE_TIMEOUT_SEC
}

fn default_in_flight() -> usize {
    DEFAULT_MAX_IN_FLIGHT
}

impl BackendDescriptor {
    pub fn mock() -> Self {
        Self {
            kind: BackendKind::Mock,
            endpoint: None,
            timeout_sec: DEFAULT_REMOTE_TIMEOUT_SEC,
            max_in_flight: DEFAULT_MAX_IN_FLIGHT,
        }
    }

    pub fn remote(endpoint: impl Into<String>) -> Self {
        Self {
            kind: BackendKind::Remote,
            endpoint: Some(endpoint.into()),
            ..Self::mock()
        }
    }

    pub fn build(&self) -> Result<Arc<dyn ImageBackend>, BackendError> {
        match self.kind {
            BackendKind::Mock => Ok(Arc::new(MockBackend)),
            BackendKind::Remote => {
                let endpoint = self
                    .endpoint
                    .as_deref()
                    .filter(|e| !e.trim().is_empty())
                    .ok_or_else(|| BackendError::InvalidDescriptor("remote backend requires an endpoint".into()))?;
                if !(self.timeout_sec > 0.0 && self.timeout_sec.is_finite()) {
                    return Err(BackendError::InvalidDescriptor(format!("timeout {} must be positive", self.timeout_sec)));
                }
                Ok(Arc::new(RemoteBackend::new(
                    endpoint,
                    Duration::from_secs_f64(self.timeout_sec),
                    self.max_in_flight,
                )))
            }
        }
    }
}

/// JSON bodies of the remote generation protocol.
pub mod wire {
    use serde::{Deserialize, Serialize};

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct GenerateRequest {
        pub prompt: String,
        pub seed: u64,
        pub width: u32,
        pub height: u32,
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct SeededPrompt {
        pub prompt: String,
        pub seed: u64,
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct InterpolateRequest {
        pub start: SeededPrompt,
        pub end: SeededPrompt,
        pub t: f64,
        pub width: u32,
        pub height: u32,
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct ImageResponse {
        pub png_base64: String,
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct ErrorDetail {
        pub code: String,
        pub message: String,
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct ErrorResponse {
        pub error: ErrorDetail,
    }
}
