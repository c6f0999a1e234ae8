//! Route table and handlers. Each handler validates transport concerns and
//! delegates to one engine operation.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::{BytesRejection, JsonRejection, QueryRejection};
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use disco_core::analysis::{self, CorpusPair};
use disco_core::audio::{self, HpssConfig, TimeRange};
use disco_core::prompting::{self, brainstorm, resolve_seeds, variation_specs, BrainstormResult};
use disco_core::renderer::{self, RenderError};
use disco_core::timeline::{self, Endpoint, ImageSpec, Interval, IntervalId};

use crate::error::ApiError;
use crate::jobs::{JobKind, JobRecord};
use crate::state::AppState;

type Shared = State<Arc<AppState>>;
type ApiResult<T> = Result<T, ApiError>;

const MAX_UPLOAD_BYTES: usize = 512 * 1024 * 1024;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(|| async { Json(json!({"status": "ok"})) }))
        .route("/audio", post(upload_audio))
        .route("/peaks", get(peaks))
        .route("/percussive", get(percussive))
        .route("/project", get(get_project).put(put_project))
        .route("/intervals", get(list_intervals).post(add_interval))
        .route("/intervals/{id}", get(get_interval).patch(edit_interval).delete(delete_interval))
        .route("/intervals/{id}/endpoint", post(set_endpoint))
        .route("/intervals/{id}/schedule", get(interval_schedule))
        .route("/intervals/{id}/classification", get(interval_classification))
        .route("/intervals/{id}/render", post(render_interval))
        .route("/preview", post(preview))
        .route("/variations", post(variations))
        .route("/brainstorm", post(brainstorm_handler))
        .route("/classify", post(classify))
        .route("/classify/corpus", post(classify_corpus))
        .route("/stitch", post(stitch))
        .route("/jobs/{id}", get(get_job))
        .route("/artifacts/{digest}", get(get_artifact))
        .route("/video", get(get_video))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .with_state(state)
}

fn json_body<T>(body: Result<Json<T>, JsonRejection>) -> ApiResult<T> {
    Ok(body?.0)
}

fn interval_id(raw: &str) -> ApiResult<IntervalId> {
    raw.parse::<u32>()
        .map(IntervalId)
        .map_err(|_| ApiError::not_found("unknown_interval", format!("no interval {raw:?}")))
}

#[derive(Serialize)]
struct AudioInfo {
    duration_sec: f64,
    sample_rate: u32,
    samples: usize,
}

#[derive(Deserialize)]
struct AudioQuery {
    name: Option<String>,
}

/// Replaces the clip and clears the timeline.
async fn upload_audio(
    State(state): Shared,
    query: Result<Query<AudioQuery>, QueryRejection>,
    body: Result<Bytes, BytesRejection>,
) -> ApiResult<Json<AudioInfo>> {
    let name = query?.0.name.unwrap_or_else(|| "upload.wav".into());
    let bytes = body?;
    let clip = tokio::task::spawn_blocking(move || audio::decode_wav(&bytes))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    let info = AudioInfo {
        duration_sec: clip.duration_sec(),
        sample_rate: clip.sample_rate(),
        samples: clip.len(),
    };
    let mut session = state.session();
    let mut project = session.project.clone();
    project.reset_audio(name, clip.duration_sec());
    session.replace_project(project);
    session.clip = Some(Arc::new(clip));
    Ok(Json(info))
}

#[derive(Deserialize)]
struct PeaksQuery {
    buckets: Option<usize>,
}

async fn peaks(State(state): Shared, query: Result<Query<PeaksQuery>, QueryRejection>) -> ApiResult<Json<Value>> {
    let buckets = query?.0.buckets.unwrap_or(1000);
    if buckets == 0 {
        return Err(ApiError::bad_request("buckets must be positive"));
    }
    let clip = state.clip()?;
    let peaks = tokio::task::spawn_blocking(move || audio::waveform_peaks(&clip, buckets))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?;
    Ok(Json(json!({ "buckets": peaks.len(), "peaks": peaks })))
}

#[derive(Deserialize)]
struct SpanQuery {
    begin_sec: Option<f64>,
    end_sec: Option<f64>,
}

/// HPSS percussive power share over a span of the clip (whole clip by default).
async fn percussive(State(state): Shared, query: Result<Query<SpanQuery>, QueryRejection>) -> ApiResult<Json<Value>> {
    let q = query?.0;
    let clip = state.clip()?;
    let range = TimeRange::new(q.begin_sec.unwrap_or(0.0), q.end_sec.unwrap_or(clip.duration_sec()));
    let fraction = state
        .run_blocking(move |_| Ok(audio::percussive_energy_fraction(&clip, range, &HpssConfig::default())?))
        .await?;
    Ok(Json(json!({ "percussive_fraction": fraction, "begin_sec": range.begin_sec, "end_sec": range.end_sec })))
}

async fn get_project(State(state): Shared) -> Response {
    let bytes = timeline::save_project(&state.session().project);
    ([(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

async fn put_project(State(state): Shared, body: Result<Bytes, BytesRejection>) -> ApiResult<Response> {
    let project = timeline::load_project(&body?)?;
    let mut session = state.session();
    session.replace_project(project);
    let bytes = timeline::save_project(&session.project);
    Ok(([(header::CONTENT_TYPE, "application/json")], bytes).into_response())
}

async fn list_intervals(State(state): Shared) -> Json<Vec<Interval>> {
    Json(state.session().project.intervals().to_vec())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Bounds {
    begin_sec: f64,
    end_sec: f64,
}

async fn add_interval(State(state): Shared, body: Result<Json<Bounds>, JsonRejection>) -> ApiResult<(StatusCode, Json<Interval>)> {
    let b = json_body(body)?;
    let mut session = state.session();
    let iv = session.project.add_interval(b.begin_sec, b.end_sec)?;
    session.touch(iv.id);
    Ok((StatusCode::CREATED, Json(iv)))
}

async fn get_interval(State(state): Shared, Path(id): Path<String>) -> ApiResult<Json<Interval>> {
    let id = interval_id(&id)?;
    Ok(Json(state.session().project.interval(id)?.clone()))
}

async fn edit_interval(
    State(state): Shared,
    Path(id): Path<String>,
    body: Result<Json<Bounds>, JsonRejection>,
) -> ApiResult<Json<Interval>> {
    let id = interval_id(&id)?;
    let b = json_body(body)?;
    let mut session = state.session();
    let iv = session.project.edit_interval(id, b.begin_sec, b.end_sec)?;
    session.touch(id);
    Ok(Json(iv))
}

async fn delete_interval(State(state): Shared, Path(id): Path<String>) -> ApiResult<StatusCode> {
    let id = interval_id(&id)?;
    let mut session = state.session();
    session.project.delete_interval(id)?;
    session.touch(id);
    Ok(StatusCode::NO_CONTENT)
}

/// A prompt/seed pair, sized to the project frame unless overridden.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecRequest {
    prompt: String,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    width: Option<u32>,
    #[serde(default)]
    height: Option<u32>,
}

impl SpecRequest {
    fn into_spec(self, state: &AppState) -> ApiResult<ImageSpec> {
        let size = state.session().project.frame_size;
        Ok(ImageSpec::new(
            self.prompt,
            self.seed,
            self.width.unwrap_or(size.width),
            self.height.unwrap_or(size.height),
        )?)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EndpointRequest {
    which: Endpoint,
    prompt: String,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    width: Option<u32>,
    #[serde(default)]
    height: Option<u32>,
}

async fn set_endpoint(
    State(state): Shared,
    Path(id): Path<String>,
    body: Result<Json<EndpointRequest>, JsonRejection>,
) -> ApiResult<Json<Interval>> {
    let id = interval_id(&id)?;
    let req = json_body(body)?;
    let spec = SpecRequest {
        prompt: req.prompt,
        seed: req.seed,
        width: req.width,
        height: req.height,
    }
    .into_spec(&state)?;
    let mut session = state.session();
    let iv = session.project.set_endpoint(id, req.which, spec)?;
    session.touch(id);
    Ok(Json(iv))
}

async fn interval_schedule(State(state): Shared, Path(id): Path<String>) -> ApiResult<Json<renderer::FrameSchedule>> {
    let id = interval_id(&id)?;
    let (project, clip) = {
        let session = state.session();
        (session.project.clone(), session.clip.clone().ok_or_else(ApiError::no_audio)?)
    };
    let interval = project.interval(id)?.clone();
    let schedule = state
        .run_blocking(move |_| Ok(renderer::schedule(&project, &interval, &clip)?))
        .await?;
    Ok(Json(schedule))
}

async fn interval_classification(State(state): Shared, Path(id): Path<String>) -> ApiResult<Json<analysis::IntervalClassification>> {
    let id = interval_id(&id)?;
    let session = state.session();
    let iv = session.project.interval(id)?;
    let (Some(start), Some(end)) = (&iv.start, &iv.end) else {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "missing_endpoint",
            format!("interval {id} needs both endpoints to be classified"),
        ));
    };
    Ok(Json(analysis::classify(start, end, &state.config.lexicons)))
}

#[derive(Serialize)]
struct ImageRef {
    image_ref: String,
    spec: ImageSpec,
}

fn generate_refs(state: &AppState, specs: Vec<ImageSpec>) -> ApiResult<Vec<ImageRef>> {
    specs
        .into_iter()
        .map(|spec| {
            let frame = state.config.backend.generate(&spec)?;
            Ok(ImageRef {
                image_ref: state.store_frame(&frame),
                spec,
            })
        })
        .collect()
}

async fn preview(State(state): Shared, body: Result<Json<SpecRequest>, JsonRejection>) -> ApiResult<(StatusCode, Json<Value>)> {
    let spec = json_body(body)?.into_spec(&state)?;
    prompting::Prompt::parse(&spec.prompt)?;
    let specs = resolve_seeds(&spec, &mut state.seeds());
    let id = state.spawn_job(JobKind::Preview, move |state| {
        Ok(json!({ "images": generate_refs(state, specs)? }))
    });
    Ok((StatusCode::ACCEPTED, Json(json!({ "job_id": id }))))
}

async fn variations(State(state): Shared, body: Result<Json<SpecRequest>, JsonRejection>) -> ApiResult<Json<Value>> {
    let spec = json_body(body)?.into_spec(&state)?;
    let specs = variation_specs(&spec, prompting::DEFAULT_VARIATION_COUNT)?;
    let images = state.run_blocking(move |state| generate_refs(state, specs)).await?;
    Ok(Json(json!({ "images": images })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BrainstormRequest {
    description: String,
    #[serde(default)]
    styles: Option<usize>,
}

async fn brainstorm_handler(
    State(state): Shared,
    body: Result<Json<BrainstormRequest>, JsonRejection>,
) -> ApiResult<Json<BrainstormResult>> {
    let req = json_body(body)?;
    let n_styles = req.styles.unwrap_or(state.config.style_suggestions);
    let result = tokio::task::spawn_blocking(move || {
        let mut seeds = state.seeds();
        brainstorm(&req.description, state.config.llm.as_ref(), &state.config.styles, n_styles, seeds.rng())
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    Ok(Json(result))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassifyRequest {
    start: analysis::PromptSeed,
    end: analysis::PromptSeed,
}

async fn classify(State(state): Shared, body: Result<Json<ClassifyRequest>, JsonRejection>) -> ApiResult<Json<analysis::IntervalClassification>> {
    let req = json_body(body)?;
    Ok(Json(analysis::classify_pair(&req.start, &req.end, &state.config.lexicons)))
}

async fn classify_corpus(State(state): Shared, body: Result<Json<Vec<CorpusPair>>, JsonRejection>) -> ApiResult<Json<Value>> {
    let pairs = json_body(body)?;
    let (report, results) = analysis::corpus_report(&pairs, &state.config.lexicons)?;
    Ok(Json(json!({ "report": report, "results": results })))
}

async fn render_interval(State(state): Shared, Path(id): Path<String>) -> ApiResult<(StatusCode, Json<Value>)> {
    let id = interval_id(&id)?;
    state.session().project.interval(id)?;
    let job = state.spawn_job(JobKind::Render, move |state| render_job(state, id));
    Ok((StatusCode::ACCEPTED, Json(json!({ "job_id": job }))))
}

/// Render from a snapshot, then commit only if the interval was not edited
/// in the meantime.
fn render_job(state: &AppState, id: IntervalId) -> ApiResult<Value> {
    let (project, clip, revision) = {
        let session = state.session();
        let clip = session.clip.clone().ok_or_else(ApiError::no_audio)?;
        (session.project.clone(), clip, session.revision(id))
    };
    let interval = project.interval(id)?.clone();
    if interval.seeded_endpoints().is_none() {
        return Err(RenderError::MissingSeed(id).into());
    }
    let schedule = renderer::schedule(&project, &interval, &clip)?;
    let rendered = renderer::render_interval(&project, &interval, &schedule, state.config.backend.as_ref())?;
    let frame_refs: Vec<String> = rendered.frames.iter().map(|f| state.store_frame(f)).collect();

    let mut session = state.session();
    let orphaned = session.revision(id) != revision;
    if !orphaned {
        session.project.mark_generated(id)?;
        session.rendered.insert(id, rendered);
        session.video = None;
    }
    Ok(json!({
        "interval_id": id,
        "frame_count": frame_refs.len(),
        "frame_refs": frame_refs,
        "weights": schedule.weights,
        "orphaned": orphaned,
    }))
}

async fn stitch(State(state): Shared) -> (StatusCode, Json<Value>) {
    let job = state.spawn_job(JobKind::Stitch, stitch_job);
    (StatusCode::ACCEPTED, Json(json!({ "job_id": job })))
}

fn stitch_job(state: &AppState) -> ApiResult<Value> {
    let (project, rendered, clip) = {
        let session = state.session();
        let rendered: Vec<_> = session.rendered.values().cloned().collect();
        (session.project.clone(), rendered, session.clip.clone())
    };
    let video = renderer::stitch(&project, &rendered)?;
    let dir = state.config.work_dir.join(format!("stitch-{}", next_stitch_id()));
    let manifest = renderer::export_frames(&video, &dir)?;
    let video_file = match (&state.config.encoder, clip) {
        (Some(template), Some(clip)) => Some(renderer::encode_video(&dir, &clip, &dir.join("video.mp4"), template)?),
        (Some(_), None) => return Err(ApiError::no_audio()),
        (None, _) => None,
    };

    let mut session = state.session();
    let still_current = session.project.intervals() == project.intervals();
    if still_current {
        session.video = video_file.clone();
    }
    Ok(json!({
        "frame_count": manifest.count,
        "frames_dir": dir,
        "manifest": manifest,
        "video": video_file.map(|_| "/video"),
        "orphaned": !still_current,
    }))
}

fn next_stitch_id() -> u64 {
    use std::sync::atomic::{AtomicU64, Ordering};
    static NEXT: AtomicU64 = AtomicU64::new(1);
    NEXT.fetch_add(1, Ordering::Relaxed)
}

async fn get_job(State(state): Shared, Path(id): Path<String>) -> ApiResult<Json<JobRecord>> {
    let job = id
        .parse::<u64>()
        .ok()
        .and_then(|id| state.jobs().get(id).cloned())
        .ok_or_else(|| ApiError::not_found("unknown_job", format!("no job {id:?}")))?;
    Ok(Json(job))
}

async fn get_artifact(State(state): Shared, Path(digest): Path<String>) -> ApiResult<Response> {
    let png = state
        .artifact(&digest)
        .ok_or_else(|| ApiError::not_found("unknown_artifact", format!("no artifact {digest}")))?;
    Ok((
        [
            (header::CONTENT_TYPE, "image/png"),
            (header::CACHE_CONTROL, "public, max-age=31536000, immutable"),
        ],
        png.as_ref().clone(),
    )
        .into_response())
}

async fn get_video(State(state): Shared) -> ApiResult<Response> {
    let path = state
        .session()
        .video
        .clone()
        .ok_or_else(|| ApiError::not_found("no_video", "no encoded video; stitch first"))?;
    let bytes = tokio::fs::read(&path)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "io_failure", e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, "video/mp4")], bytes).into_response())
}
