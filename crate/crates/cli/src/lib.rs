//! Command implementations behind the `disco` binary.

use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use disco_core::analysis::{corpus_report, parse_corpus, DimensionLexicons};
use disco_core::audio::{compute_energy_curve_with, decode_wav, waveform_peaks, HpssConfig};
use disco_core::prompting::{llm_client_from_env, StyleLexicon};
use disco_core::renderer::{encode_video, export_frames, render_and_commit, stitch, DEFAULT_ENCODER_TEMPLATE};
use disco_core::timeline::{frame_count_for, load_project, DEFAULT_FPS};
use disco_core::{AudioClip, BackendDescriptor, FrameSize, ImageBackend, TimeRange};
use disco_service::fake_backend::{fake_backend_router, FakeBackendControl};
use disco_service::ServiceConfig;

#[derive(Debug, Parser)]
#[command(name = "disco", version, about = "Audio-reactive text-to-video toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-frame interpolation weights for a span of a WAV file, as CSV.
    Analyze(AnalyzeArgs),
    /// Min/max waveform peaks per bucket, as CSV.
    Peaks(PeaksArgs),
    /// Classify a corpus of prompt pairs as holds or transitions.
    Classify(ClassifyArgs),
    /// Render a project file to a PNG sequence, optionally encoding a video.
    Render(RenderArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Run a stand-in remote generation server backed by the mock generator.
    FakeBackend(FakeBackendArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub audio: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub begin: f64,
    /// Defaults to the end of the clip.
    #[arg(long)]
    pub end: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_FPS)]
    pub fps: u32,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PeaksArgs {
    pub audio: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub buckets: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// JSON array of `{start: {prompt, seed?}, end: {...}}` pairs.
    pub corpus: PathBuf,
    /// JSON file with `color_terms`, `time_terms` and `style_terms`.
    #[arg(long)]
    pub lexicons: Option<PathBuf>,
    /// Per-pair CSV table; stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Summary JSON; printed to stderr when absent.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BackendArgs {
    /// Backend descriptor JSON (`{"kind": "mock"}` or `{"kind": "remote", "endpoint": ...}`).
    #[arg(long, env = "DISCO_BACKEND", conflicts_with = "remote")]
    pub backend: Option<PathBuf>,
    /// Shorthand for a remote backend at this base URL.
    #[arg(long, env = "DISCO_REMOTE")]
    pub remote: Option<String>,
}

impl BackendArgs {
    pub fn descriptor(&self) -> Result<BackendDescriptor> {
        if let Some(path) = &self.backend {
            let text = read_text(path)?;
            return serde_json::from_str(&text).with_context(|| format!("parsing backend descriptor {}", path.display()));
        }
        Ok(match &self.remote {
            Some(url) => BackendDescriptor::remote(url.clone()),
            None => BackendDescriptor::mock(),
        })
    }
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    pub project: PathBuf,
    /// Defaults to the project's audio path, relative to the project file.
    #[arg(long)]
    pub audio: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub backend: BackendArgs,
    /// Encode the frames into this video file.
    #[arg(long)]
    pub video: Option<PathBuf>,
    /// Encoder command with {fps}, {frames_dir}, {audio} and {out} placeholders.
    #[arg(long, env = "DISCO_ENCODER", default_value = DEFAULT_ENCODER_TEMPLATE)]
    pub encoder: String,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "DISCO_HOST", default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, env = "DISCO_PORT", default_value_t = 8080)]
    pub port: u16,
    #[command(flatten)]
    pub backend: BackendArgs,
    /// Encoder command template; stitching stops at PNG frames when absent.
    #[arg(long, env = "DISCO_ENCODER")]
    pub encoder: Option<String>,
    #[arg(long, env = "DISCO_LEXICONS")]
    pub lexicons: Option<PathBuf>,
    /// Style keyword list, one per line.
    #[arg(long, env = "DISCO_STYLES")]
    pub styles: Option<PathBuf>,
    /// Fixed seed for preview seeds and style sampling.
    #[arg(long, env = "DISCO_SEED")]
    pub seed: Option<u64>,
    #[arg(long, env = "DISCO_WORK_DIR")]
    pub work_dir: Option<PathBuf>,
    /// Square frame size for new projects.
    #[arg(long, default_value_t = disco_service::state::DEFAULT_FRAME_SIZE)]
    pub frame_size: u32,
    #[arg(long, default_value_t = disco_service::state::DEFAULT_WORKERS)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct FakeBackendArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 7860)]
    pub port: u16,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_clip(path: &Path) -> Result<AudioClip> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    decode_wav(&bytes).with_context(|| format!("decoding {}", path.display()))
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => Ok(std::io::stdout().write_all(bytes)?),
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze(a) => analyze(&a),
        Command::Peaks(a) => peaks(&a),
        Command::Classify(a) => classify(&a),
        Command::Render(a) => render(&a),
        Command::Serve(a) => serve(a),
        Command::FakeBackend(a) => fake_backend(&a),
    }
}

pub fn energy_csv(clip: &AudioClip, range: TimeRange, fps: u32) -> Result<String> {
    if fps == 0 {
        bail!("fps must be positive");
    }
    let n = frame_count_for(range.duration(), fps);
    let curve = compute_energy_curve_with(clip, range, n, &HpssConfig::default())?;
    Ok(curve.weights().iter().map(|w| format!("{w:.6}\n")).collect())
}

fn analyze(a: &AnalyzeArgs) -> Result<()> {
    let clip = read_clip(&a.audio)?;
    let range = TimeRange::new(a.begin, a.end.unwrap_or(clip.duration_sec()));
    emit(a.output.as_deref(), energy_csv(&clip, range, a.fps)?.as_bytes())
}

fn peaks(a: &PeaksArgs) -> Result<()> {
    if a.buckets == 0 {
        bail!("buckets must be positive");
    }
    let clip = read_clip(&a.audio)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["min", "max"])?;
    for (lo, hi) in waveform_peaks(&clip, a.buckets) {
        w.write_record([format!("{lo:.6}"), format!("{hi:.6}")])?;
    }
    emit(a.output.as_deref(), &w.into_inner()?)
}

fn load_lexicons(path: Option<&Path>) -> Result<DimensionLexicons> {
    match path {
        Some(p) => DimensionLexicons::from_json(&read_text(p)?).with_context(|| format!("loading lexicons {}", p.display())),
        None => Ok(DimensionLexicons::default()),
    }
}

fn classify(a: &ClassifyArgs) -> Result<()> {
    let lex = load_lexicons(a.lexicons.as_deref())?;
    let pairs = parse_corpus(&read_text(&a.corpus)?)?;
    let (report, results) = corpus_report(&pairs, &lex)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["index", "start_prompt", "end_prompt", "kind", "hold_rule", "dimensions", "evidence"])?;
    for (i, (pair, c)) in pairs.iter().zip(&results).enumerate() {
        let dims: Vec<&str> = c.dimensions.iter().map(|d| d.as_str()).collect();
        let evidence: Vec<String> = c.evidence.iter().map(|e| format!("{}={}", e.rule, e.terms.join("|"))).collect();
        w.write_record([
            i.to_string(),
            pair.start.prompt.clone(),
            pair.end.prompt.clone(),
            serde_json::to_value(c.kind)?.as_str().unwrap_or_default().to_owned(),
            c.hold_rule.map(|r| serde_json::to_value(r)).transpose()?.and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
            dims.join(";"),
            evidence.join(";"),
        ])?;
    }
    emit(a.output.as_deref(), &w.into_inner()?)?;

    let summary = serde_json::to_string_pretty(&report)?;
    match &a.summary {
        Some(path) => fs::write(path, summary + "\n").with_context(|| format!("writing {}", path.display())),
        None => {
            eprintln!("{summary}");
            Ok(())
        }
    }
}

fn render(a: &RenderArgs) -> Result<()> {
    let mut project = load_project(&fs::read(&a.project).with_context(|| format!("reading {}", a.project.display()))?)?;
    let audio = a.audio.clone().unwrap_or_else(|| {
        let base = a.project.parent().unwrap_or(Path::new("."));
        base.join(&project.audio_path)
    });
    let clip = read_clip(&audio)?;
    let backend = a.backend.descriptor()?.build()?;
    let ids: Vec<_> = project.intervals().iter().map(|i| i.id).collect();
    let mut rendered = Vec::with_capacity(ids.len());
    for id in ids {
        let r = render_and_commit(&mut project, id, &clip, backend.as_ref() as &dyn ImageBackend)
            .with_context(|| format!("rendering interval {id}"))?;
        eprintln!("interval {id}: {} frames", r.frames.len());
        rendered.push(r);
    }
    let video = stitch(&project, &rendered)?;
    let manifest = export_frames(&video, &a.out_dir)?;
    eprintln!("wrote {} frames to {}", manifest.count, a.out_dir.display());
    if let Some(out) = &a.video {
        let path = encode_video(&a.out_dir, &clip, out, &a.encoder)?;
        eprintln!("encoded {}", path.display());
    }
    Ok(())
}

fn runtime() -> Result<tokio::runtime::Runtime> {
    Ok(tokio::runtime::Builder::new_multi_thread().enable_all().build()?)
}

fn serve_router(host: &str, port: u16, app: disco_service::Router, what: &str) -> Result<()> {
    let addr: SocketAddr = format!("{host}:{port}").parse().with_context(|| format!("bad address {host}:{port}"))?;
    runtime()?.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
        eprintln!("{what} listening on http://{}", listener.local_addr()?);
        disco_service::serve(listener, app).await?;
        Ok(())
    })
}

pub fn service_config(a: &ServeArgs) -> Result<ServiceConfig> {
    let mut config = ServiceConfig::with_backend(&a.backend.descriptor()?)?;
    config.llm = std::sync::Arc::from(llm_client_from_env(std::time::Duration::from_secs(60)));
    config.encoder = a.encoder.clone();
    config.lexicons = load_lexicons(a.lexicons.as_deref())?;
    if let Some(path) = &a.styles {
        config.styles = StyleLexicon::from_text(&read_text(path)?)?;
    }
    config.seed = a.seed;
    if let Some(dir) = &a.work_dir {
        config.work_dir = dir.clone();
    }
    config.frame_size = FrameSize::new(a.frame_size, a.frame_size);
    config.workers = a.workers;
    Ok(config)
}

fn serve(a: ServeArgs) -> Result<()> {
    let config = service_config(&a)?;
    serve_router(&a.host, a.port, disco_service::app(config), "disco service")
}

fn fake_backend(a: &FakeBackendArgs) -> Result<()> {
    let app = fake_backend_router(std::sync::Arc::new(FakeBackendControl::default()));
    serve_router(&a.host, a.port, app, "fake backend")
}
