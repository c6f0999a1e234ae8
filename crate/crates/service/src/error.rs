use axum::extract::rejection::{BytesRejection, JsonRejection, QueryRejection};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};

use disco_core::analysis::AnalysisError;
use disco_core::audio::AudioError;
use disco_core::genbackend::BackendError;
use disco_core::prompting::{BrainstormError, PromptError};
use disco_core::renderer::RenderError;
use disco_core::timeline::TimelineError;

/// `{code, message}` as carried in error bodies and failed jobs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                code: code.into(),
                message: message.into(),
            },
        }
    }

    pub fn not_found(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, message)
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn no_audio() -> Self {
        Self::new(StatusCode::CONFLICT, "no_audio", "no audio has been uploaded")
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    error: &'a ErrorBody,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(Envelope { error: &self.body })).into_response()
    }
}

impl From<TimelineError> for ApiError {
    fn from(e: TimelineError) -> Self {
        let (status, code) = match &e {
            TimelineError::Overlap(_) => (StatusCode::CONFLICT, "overlap"),
            TimelineError::UnknownInterval(_) => (StatusCode::NOT_FOUND, "unknown_interval"),
            TimelineError::OutOfRange(_) => (StatusCode::UNPROCESSABLE_ENTITY, "out_of_range"),
            TimelineError::InvalidSpec(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_spec"),
            TimelineError::MissingSeed(_) => (StatusCode::UNPROCESSABLE_ENTITY, "missing_seed"),
            TimelineError::MalformedProject(_) => (StatusCode::BAD_REQUEST, "malformed_project"),
            TimelineError::SchemaVersionMismatch { .. } => (StatusCode::BAD_REQUEST, "schema_version_mismatch"),
        };
        Self::new(status, code, e.to_string())
    }
}

impl From<AudioError> for ApiError {
    fn from(e: AudioError) -> Self {
        let (status, code) = match &e {
            AudioError::MalformedWav(_) => (StatusCode::BAD_REQUEST, "malformed_wav"),
            AudioError::UnsupportedEncoding(_) => (StatusCode::UNSUPPORTED_MEDIA_TYPE, "unsupported_encoding"),
            AudioError::ClipTooShort { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "clip_too_short"),
            AudioError::IntervalOutOfRange { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "interval_out_of_range"),
            AudioError::InvalidParameter(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_parameter"),
            AudioError::InvalidClip(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_clip"),
        };
        Self::new(status, code, e.to_string())
    }
}

impl From<PromptError> for ApiError {
    fn from(e: PromptError) -> Self {
        let code = match e {
            PromptError::Empty => "empty_prompt",
            PromptError::EmptyPhrase(_) => "empty_phrase",
            PromptError::MissingSeed => "missing_seed",
        };
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, code, e.to_string())
    }
}

impl From<BrainstormError> for ApiError {
    fn from(e: BrainstormError) -> Self {
        let (status, code) = match &e {
            BrainstormError::EmptyDescription => (StatusCode::BAD_REQUEST, "empty_description"),
            BrainstormError::BackendUnavailable(_) => (StatusCode::BAD_GATEWAY, "backend_unavailable"),
            BrainstormError::UnparseableResponse(_) => (StatusCode::BAD_GATEWAY, "unparseable_response"),
            BrainstormError::InvalidLexicon(_) => (StatusCode::INTERNAL_SERVER_ERROR, "invalid_lexicon"),
            BrainstormError::InvalidSampleSize(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_sample_size"),
        };
        Self::new(status, code, e.to_string())
    }
}

impl From<BackendError> for ApiError {
    fn from(e: BackendError) -> Self {
        let (status, code) = match &e {
            BackendError::BackendUnavailable(_) => (StatusCode::BAD_GATEWAY, "backend_unavailable"),
            BackendError::GenerationFailed { .. } => (StatusCode::BAD_GATEWAY, "generation_failed"),
            BackendError::MissingSeed => (StatusCode::UNPROCESSABLE_ENTITY, "missing_seed"),
            BackendError::InvalidWeight(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_weight"),
            BackendError::SizeMismatch { .. } => (StatusCode::BAD_GATEWAY, "size_mismatch"),
            BackendError::InvalidImage(_) => (StatusCode::BAD_GATEWAY, "invalid_image"),
            BackendError::InvalidDescriptor(_) => (StatusCode::INTERNAL_SERVER_ERROR, "invalid_descriptor"),
        };
        Self::new(status, code, e.to_string())
    }
}

impl From<RenderError> for ApiError {
    fn from(e: RenderError) -> Self {
        let (status, code) = match e {
            RenderError::Audio(e) => return e.into(),
            RenderError::Timeline(e) => return e.into(),
            RenderError::Backend { ref source, .. } => return Self::new(ApiError::from(source.clone()).status, "backend_failed", e.to_string()),
            RenderError::MissingSeed(_) => (StatusCode::UNPROCESSABLE_ENTITY, "missing_seed"),
            RenderError::MissingInterval(_) => (StatusCode::CONFLICT, "missing_interval"),
            RenderError::StaleRender(_) => (StatusCode::CONFLICT, "stale_render"),
            RenderError::SizeMismatch { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "size_mismatch"),
            RenderError::AudioMismatch { .. } => (StatusCode::CONFLICT, "audio_mismatch"),
            RenderError::EmptyProject => (StatusCode::CONFLICT, "empty_project"),
            RenderError::NoFrames(_) => (StatusCode::CONFLICT, "no_frames"),
            RenderError::IoFailure { .. } => (StatusCode::INTERNAL_SERVER_ERROR, "io_failure"),
            RenderError::EncoderMissing { .. } => (StatusCode::INTERNAL_SERVER_ERROR, "encoder_missing"),
            RenderError::EncoderFailed { .. } => (StatusCode::INTERNAL_SERVER_ERROR, "encoder_failed"),
            RenderError::InvalidTemplate(_) => (StatusCode::INTERNAL_SERVER_ERROR, "invalid_template"),
        };
        Self::new(status, code, e.to_string())
    }
}

impl From<AnalysisError> for ApiError {
    fn from(e: AnalysisError) -> Self {
        let code = match e {
            AnalysisError::EmptyCorpus => "empty_corpus",
            AnalysisError::InvalidLexicons(_) => "invalid_lexicons",
            AnalysisError::MalformedCorpus(_) => "malformed_corpus",
        };
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, code, e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", e.body_text())
    }
}

impl From<BytesRejection> for ApiError {
    fn from(e: BytesRejection) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", e.body_text())
    }
}
