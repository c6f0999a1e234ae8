use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard};

use serde_json::Value;
use tokio::sync::Semaphore;

use disco_core::analysis::DimensionLexicons;
use disco_core::genbackend::{png_digest, BackendError, ImageBackend, ImageFrame};
use disco_core::prompting::{LlmClient, SeedSource, StubLlmClient, StyleLexicon};
use disco_core::timeline::{FrameSize, IntervalId, Project};
use disco_core::{AudioClip, BackendDescriptor, RenderedInterval};

use crate::error::{ApiError, ErrorBody};
use crate::jobs::{JobKind, JobTable};

pub const DEFAULT_FRAME_SIZE: u32 = 512;
pub const DEFAULT_STYLE_SUGGESTIONS: usize = 6;
pub const DEFAULT_WORKERS: usize = 2;

pub struct ServiceConfig {
    pub backend: Arc<dyn ImageBackend>,
    pub llm: Arc<dyn LlmClient>,
    /// `None` stops stitching at the exported PNG sequence.
    pub encoder: Option<String>,
    pub styles: StyleLexicon,
    pub style_suggestions: usize,
    pub lexicons: DimensionLexicons,
    /// Fixed seed for the seed source; wall-clock seeded when absent.
    pub seed: Option<u64>,
    pub workers: usize,
    pub work_dir: PathBuf,
    pub frame_size: FrameSize,
}

impl ServiceConfig {
    pub fn with_backend(backend: &BackendDescriptor) -> Result<Self, BackendError> {
        Ok(Self {
            backend: backend.build()?,
            llm: Arc::new(StubLlmClient),
            encoder: None,
            styles: StyleLexicon::default(),
            style_suggestions: DEFAULT_STYLE_SUGGESTIONS,
            lexicons: DimensionLexicons::default(),
            seed: None,
            workers: DEFAULT_WORKERS,
            work_dir: std::env::temp_dir().join(format!("disco-{}", std::process::id())),
            frame_size: FrameSize::new(DEFAULT_FRAME_SIZE, DEFAULT_FRAME_SIZE),
        })
    }
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self::with_backend(&BackendDescriptor::mock()).expect("mock backend always builds")
    }
}

pub struct Session {
    pub project: Project,
    pub clip: Option<Arc<AudioClip>>,
    pub rendered: HashMap<IntervalId, RenderedInterval>,
    pub video: Option<PathBuf>,
    /// Bumped for an interval whenever it changes; a render commits only if
    /// its revision is unchanged.
    revisions: HashMap<IntervalId, u64>,
    clock: u64,
}

impl Session {
    fn new(frame_size: FrameSize) -> Self {
        Self {
            project: Project::new("", None, frame_size),
            clip: None,
            rendered: HashMap::new(),
            video: None,
            revisions: HashMap::new(),
            clock: 0,
        }
    }

    pub fn revision(&self, id: IntervalId) -> u64 {
        self.revisions.get(&id).copied().unwrap_or(0)
    }

    /// Invalidate one interval's render.
    pub fn touch(&mut self, id: IntervalId) {
        self.clock += 1;
        self.revisions.insert(id, self.clock);
        self.rendered.remove(&id);
        self.video = None;
    }

    /// Replace the whole project; every outstanding render is orphaned.
    pub fn replace_project(&mut self, project: Project) {
        let ids: Vec<_> = self.project.intervals().iter().chain(project.intervals()).map(|i| i.id).collect();
        for id in ids {
            self.touch(id);
        }
        self.project = project;
        self.rendered.clear();
    }
}

pub struct AppState {
    pub config: ServiceConfig,
    session: Mutex<Session>,
    jobs: Mutex<JobTable>,
    artifacts: Mutex<HashMap<String, Arc<Vec<u8>>>>,
    seeds: Mutex<SeedSource>,
    pub pool: Arc<Semaphore>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Arc<Self> {
        let seeds = config.seed.map_or_else(SeedSource::from_time, SeedSource::from_seed);
        Arc::new(Self {
            session: Mutex::new(Session::new(config.frame_size)),
            jobs: Mutex::new(JobTable::default()),
            artifacts: Mutex::new(HashMap::new()),
            seeds: Mutex::new(seeds),
            pool: Arc::new(Semaphore::new(config.workers.max(1))),
            config,
        })
    }

    pub fn session(&self) -> MutexGuard<'_, Session> {
        lock(&self.session)
    }

    pub fn jobs(&self) -> MutexGuard<'_, JobTable> {
        lock(&self.jobs)
    }

    pub fn seeds(&self) -> MutexGuard<'_, SeedSource> {
        lock(&self.seeds)
    }

    pub fn clip(&self) -> Result<Arc<AudioClip>, ApiError> {
        self.session().clip.clone().ok_or_else(ApiError::no_audio)
    }

    /// Store a frame as PNG under its content digest.
    pub fn store_frame(&self, frame: &ImageFrame) -> String {
        let png = frame.to_png();
        let digest = png_digest(&png);
        lock(&self.artifacts).entry(digest.clone()).or_insert_with(|| Arc::new(png));
        digest
    }

    pub fn artifact(&self, digest: &str) -> Option<Arc<Vec<u8>>> {
        lock(&self.artifacts).get(digest).cloned()
    }

    /// Queue blocking work on the bounded pool and return its job id.
    pub fn spawn_job<F>(self: &Arc<Self>, kind: JobKind, work: F) -> u64
    where
        F: FnOnce(&AppState) -> Result<Value, ApiError> + Send + 'static,
    {
        let id = self.jobs().create(kind);
        let state = Arc::clone(self);
        tokio::spawn(async move {
            let _permit = state.pool.clone().acquire_owned().await.expect("pool is never closed");
            state.jobs().start(id);
            let worker = Arc::clone(&state);
            let outcome = match tokio::task::spawn_blocking(move || work(&worker)).await {
                Ok(Ok(value)) => Ok(value),
                Ok(Err(e)) => Err(e.body),
                Err(e) => Err(ErrorBody {
                    code: "internal".into(),
                    message: format!("job aborted: {e}"),
                }),
            };
            state.jobs().finish(id, outcome);
        });
        id
    }

    /// Run blocking work on the pool and wait for it.
    pub async fn run_blocking<T, F>(self: &Arc<Self>, work: F) -> Result<T, ApiError>
    where
        T: Send + 'static,
        F: FnOnce(&AppState) -> Result<T, ApiError> + Send + 'static,
    {
        let _permit = self.pool.clone().acquire_owned().await.expect("pool is never closed");
        let state = Arc::clone(self);
        tokio::task::spawn_blocking(move || work(&state))
            .await
            .map_err(|e| ApiError::new(axum::http::StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
    }
}
