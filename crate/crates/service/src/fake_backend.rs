//! A stand-in remote generation server speaking the wire protocol, backed
//! by the mock generator. Used for conformance tests and offline demos.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::{Json, Router};
use base64::Engine;

use disco_core::genbackend::wire::{ErrorDetail, ErrorResponse, GenerateRequest, ImageResponse, InterpolateRequest};
use disco_core::genbackend::{BackendError, ImageBackend, ImageFrame, MockBackend};
use disco_core::timeline::ImageSpec;

/// Knobs and counters shared with the test driving the server.
#[derive(Debug, Default)]
pub struct FakeBackendControl {
    /// While set, every request answers 503.
    pub down: AtomicBool,
    pub requests: AtomicUsize,
    in_flight: AtomicUsize,
    pub peak_in_flight: AtomicUsize,
}

struct InFlight<'a>(&'a FakeBackendControl);

impl<'a> InFlight<'a> {
    fn enter(c: &'a FakeBackendControl) -> Self {
        c.requests.fetch_add(1, Ordering::SeqCst);
        let now = c.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        c.peak_in_flight.fetch_max(now, Ordering::SeqCst);
        Self(c)
    }
}

impl Drop for InFlight<'_> {
    fn drop(&mut self) {
        self.0.in_flight.fetch_sub(1, Ordering::SeqCst);
    }
}

fn wire_error(status: StatusCode, code: &str, message: impl Into<String>) -> Response {
    let body = ErrorResponse {
        error: ErrorDetail {
            code: code.into(),
            message: message.into(),
        },
    };
    (status, Json(body)).into_response()
}

fn respond(control: &FakeBackendControl, result: Result<ImageFrame, BackendError>) -> Response {
    if control.down.load(Ordering::SeqCst) {
        return wire_error(StatusCode::SERVICE_UNAVAILABLE, "unavailable", "backend is down");
    }
    match result {
        Ok(frame) => Json(ImageResponse {
            png_base64: base64::engine::general_purpose::STANDARD.encode(frame.to_png()),
        })
        .into_response(),
        Err(e) => wire_error(StatusCode::UNPROCESSABLE_ENTITY, "invalid_request", e.to_string()),
    }
}

fn spec(prompt: String, seed: u64, width: u32, height: u32) -> Result<ImageSpec, BackendError> {
    ImageSpec::new(prompt, Some(seed), width, height).map_err(|e| BackendError::InvalidImage(e.to_string()))
}

async fn generate(State(c): State<Arc<FakeBackendControl>>, body: Result<Json<GenerateRequest>, JsonRejection>) -> Response {
    let _guard = InFlight::enter(&c);
    let Ok(Json(req)) = body else {
        return wire_error(StatusCode::BAD_REQUEST, "bad_request", "malformed generate request");
    };
    let result = tokio::task::spawn_blocking(move || MockBackend.generate(&spec(req.prompt, req.seed, req.width, req.height)?))
        .await
        .expect("generation task");
    respond(&c, result)
}

async fn interpolate(
    State(c): State<Arc<FakeBackendControl>>,
    body: Result<Json<InterpolateRequest>, JsonRejection>,
) -> Response {
    let _guard = InFlight::enter(&c);
    let Ok(Json(req)) = body else {
        return wire_error(StatusCode::BAD_REQUEST, "bad_request", "malformed interpolate request");
    };
    let result = tokio::task::spawn_blocking(move || {
        let start = spec(req.start.prompt, req.start.seed, req.width, req.height)?;
        let end = spec(req.end.prompt, req.end.seed, req.width, req.height)?;
        MockBackend.interpolate(&start, &end, req.t)
    })
    .await
    .expect("interpolation task");
    respond(&c, result)
}

pub fn fake_backend_router(control: Arc<FakeBackendControl>) -> Router {
    Router::new()
        .route("/v1/generate", post(generate))
        .route("/v1/interpolate", post(interpolate))
        .with_state(control)
}
