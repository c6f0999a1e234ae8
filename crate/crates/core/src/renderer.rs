//! Turns generated intervals into energy-paced frame sequences and stitches
//! them into a numbered PNG sequence with a manifest.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::Command;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio::{self, AudioClip, AudioError, EnergyCurve, TimeRange};
use crate::genbackend::{png_digest, BackendError, ImageBackend, ImageFrame};
use crate::timeline::{interval_frame_count, Interval, IntervalId, IntervalState, Project, TimelineError};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: &str = "1";
pub const AUDIO_FILE: &str = "audio.wav";
pub const DEFAULT_ENCODER_TEMPLATE: &str =
    "ffmpeg -y -loglevel error -framerate {fps} -i {frames_dir}/frame_%06d.png -i {audio} \
     -c:v libx264 -pix_fmt yuv420p -c:a aac -shortest {out}";

#[derive(Debug, Error)]
pub enum RenderError {
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Timeline(#[from] TimelineError),
    #[error("interval {interval}: {source}")]
    Backend {
        interval: IntervalId,
        #[source]
        source: BackendError,
    },
    #[error("interval {0} needs seeded start and end images")]
    MissingSeed(IntervalId),
    #[error("interval {0} has not been rendered")]
    MissingInterval(IntervalId),
    #[error("rendered frames for interval {0} are stale")]
    StaleRender(IntervalId),
    #[error("frame size mismatch: expected {expected:?}, found {found:?}")]
    SizeMismatch { expected: (u32, u32), found: (u32, u32) },
    #[error("clip duration {clip_sec} s does not match project audio ({project_sec} s)")]
    AudioMismatch { clip_sec: f64, project_sec: f64 },
    #[error("project has no intervals")]
    EmptyProject,
    #[error("no frames to encode in {0}")]
    NoFrames(PathBuf),
    #[error("I/O failure on {path}: {message}")]
    IoFailure { path: PathBuf, message: String },
    #[error("encoder `{program}` not found; {hint}")]
    EncoderMissing { program: String, hint: String },
    #[error("encoder exited with {status}: {stderr}")]
    EncoderFailed { status: String, stderr: String },
    #[error("invalid encoder template: {0}")]
    InvalidTemplate(String),
}

fn io_failure(path: &Path, err: impl std::fmt::Display) -> RenderError {
    RenderError::IoFailure {
        path: path.to_path_buf(),
        message: err.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSchedule {
    pub interval_id: IntervalId,
    pub weights: EnergyCurve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedInterval {
    pub interval_id: IntervalId,
    pub frames: Vec<ImageFrame>,
    pub fps: u32,
}

fn check_clip(project: &Project, clip: &AudioClip) -> Result<(), RenderError> {
    if let Some(project_sec) = project.audio_duration_sec {
        let tolerance = 1.0 / clip.sample_rate() as f64;
        if (project_sec - clip.duration_sec()).abs() > tolerance {
            return Err(RenderError::AudioMismatch {
                clip_sec: clip.duration_sec(),
                project_sec,
            });
        }
    }
    Ok(())
}

/// Energy-paced weights for one interval at the project frame rate.
pub fn schedule(project: &Project, interval: &Interval, clip: &AudioClip) -> Result<FrameSchedule, RenderError> {
    project.interval(interval.id)?;
    check_clip(project, clip)?;
    let n_frames = interval_frame_count(interval, project.fps);
    let weights = audio::compute_energy_curve(clip, interval.range(), n_frames)?;
    Ok(FrameSchedule {
        interval_id: interval.id,
        weights,
    })
}

/// Frame `i` is `interpolate(start, end, weights[i])`. Frames render in
/// parallel; any backend failure discards the whole interval.
pub fn render_interval(
    project: &Project,
    interval: &Interval,
    schedule: &FrameSchedule,
    backend: &dyn ImageBackend,
) -> Result<RenderedInterval, RenderError> {
    let (start, end) = interval.seeded_endpoints().ok_or(RenderError::MissingSeed(interval.id))?;
    let expected = (project.frame_size.width, project.frame_size.height);
    for spec in [start, end] {
        if (spec.width, spec.height) != expected {
            return Err(RenderError::SizeMismatch {
                expected,
                found: (spec.width, spec.height),
            });
        }
    }
    if schedule.interval_id != interval.id || schedule.weights.len() != interval_frame_count(interval, project.fps) {
        return Err(RenderError::StaleRender(interval.id));
    }

    let frames = schedule
        .weights
        .weights()
        .par_iter()
        .map(|&t| backend.interpolate(start, end, t))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|source| RenderError::Backend {
            interval: interval.id,
            source,
        })?;
    Ok(RenderedInterval {
        interval_id: interval.id,
        frames,
        fps: project.fps,
    })
}

/// Schedule, render and mark the interval generated, or leave it untouched.
pub fn render_and_commit(
    project: &mut Project,
    id: IntervalId,
    clip: &AudioClip,
    backend: &dyn ImageBackend,
) -> Result<RenderedInterval, RenderError> {
    let interval = project.interval(id)?.clone();
    let plan = schedule(project, &interval, clip)?;
    let rendered = render_interval(project, &interval, &plan, backend)?;
    project.mark_generated(id)?;
    Ok(rendered)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub interval_id: IntervalId,
    pub first_frame: usize,
    pub frame_count: usize,
    pub begin_sec: f64,
    pub end_sec: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VideoOutput {
    pub fps: u32,
    pub frames: Vec<ImageFrame>,
    pub segments: Vec<Segment>,
    /// From the first interval's begin to the last interval's end.
    pub audio_span: TimeRange,
}

/// Concatenate rendered intervals in timeline order. Gaps between intervals
/// become hard cuts.
pub fn stitch(project: &Project, rendered: &[RenderedInterval]) -> Result<VideoOutput, RenderError> {
    let intervals = project.intervals();
    let (Some(first), Some(last)) = (intervals.first(), intervals.last()) else {
        return Err(RenderError::EmptyProject);
    };
    let expected = (project.frame_size.width, project.frame_size.height);
    let mut frames = Vec::new();
    let mut segments = Vec::with_capacity(intervals.len());
    for iv in intervals {
        if iv.state != IntervalState::Generated {
            return Err(RenderError::MissingInterval(iv.id));
        }
        let r = rendered
            .iter()
            .find(|r| r.interval_id == iv.id)
            .ok_or(RenderError::MissingInterval(iv.id))?;
        if r.fps != project.fps || r.frames.len() != interval_frame_count(iv, project.fps) {
            return Err(RenderError::StaleRender(iv.id));
        }
        if let Some(f) = r.frames.iter().find(|f| (f.width(), f.height()) != expected) {
            return Err(RenderError::SizeMismatch {
                expected,
                found: (f.width(), f.height()),
            });
        }
        segments.push(Segment {
            interval_id: iv.id,
            first_frame: frames.len(),
            frame_count: r.frames.len(),
            begin_sec: iv.begin_sec,
            end_sec: iv.end_sec,
        });
        frames.extend(r.frames.iter().cloned());
    }
    Ok(VideoOutput {
        fps: project.fps,
        frames,
        segments,
        audio_span: TimeRange::new(first.begin_sec, last.end_sec),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub fps: u32,
    pub count: usize,
    pub audio_span: TimeRange,
    pub intervals: Vec<Segment>,
    pub frames: Vec<FrameEntry>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self, RenderError> {
        let path = dir.join(MANIFEST_FILE);
        let bytes = fs::read(&path).map_err(|e| io_failure(&path, e))?;
        serde_json::from_slice(&bytes).map_err(|e| io_failure(&path, e))
    }
}

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:06}.png")
}

/// Write `frame_000000.png`, ... and `manifest.json` into `dir`.
pub fn export_frames(video: &VideoOutput, dir: &Path) -> Result<Manifest, RenderError> {
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    let encoded: Vec<Vec<u8>> = video.frames.par_iter().map(ImageFrame::to_png).collect();
    let mut entries = Vec::with_capacity(encoded.len());
    for (i, png) in encoded.iter().enumerate() {
        let file = frame_file_name(i);
        let path = dir.join(&file);
        fs::write(&path, png).map_err(|e| io_failure(&path, e))?;
        entries.push(FrameEntry {
            file,
            sha256: png_digest(png),
        });
    }
    let manifest = Manifest {
        version: MANIFEST_VERSION.into(),
        fps: video.fps,
        count: entries.len(),
        audio_span: video.audio_span,
        intervals: video.segments.clone(),
        frames: entries,
    };
    let path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json).map_err(|e| io_failure(&path, e))?;
    Ok(manifest)
}

/// Run the external encoder over an exported frame directory.
///
/// The template is split shell-style, then `{frames_dir}`, `{fps}`,
/// `{audio}` and `{out}` are substituted inside each argument. The covered
/// audio span is written next to the frames as `audio.wav`.
pub fn encode_video(frames_dir: &Path, clip: &AudioClip, out: &Path, template: &str) -> Result<PathBuf, RenderError> {
    let manifest = Manifest::load(frames_dir)?;
    if manifest.count == 0 || manifest.frames.is_empty() {
        return Err(RenderError::NoFrames(frames_dir.to_path_buf()));
    }
    if let Some(missing) = manifest.frames.iter().find(|f| !frames_dir.join(&f.file).is_file()) {
        return Err(io_failure(&frames_dir.join(&missing.file), "frame listed in manifest is missing"));
    }

    let audio_path = frames_dir.join(AUDIO_FILE);
    let span = clip.slice(manifest.audio_span)?;
    fs::write(&audio_path, audio::encode_wav_16bit(&span)).map_err(|e| io_failure(&audio_path, e))?;

    let args = expand_template(template, frames_dir, manifest.fps, &audio_path, out)?;
    let (program, rest) = args.split_first().expect("template has a program");
    let output = match Command::new(program).args(rest).output() {
        Ok(o) => o,
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            return Err(RenderError::EncoderMissing {
                program: program.clone(),
                hint: "install ffmpeg or pass a different encoder template".into(),
            })
        }
        Err(e) => return Err(io_failure(Path::new(program), e)),
    };
    if !output.status.success() {
        return Err(RenderError::EncoderFailed {
            status: output.status.to_string(),
            stderr: String::from_utf8_lossy(&output.stderr).trim().to_owned(),
        });
    }
    Ok(out.to_path_buf())
}

fn expand_template(template: &str, frames_dir: &Path, fps: u32, audio: &Path, out: &Path) -> Result<Vec<String>, RenderError> {
    let tokens = shlex::split(template).ok_or_else(|| RenderError::InvalidTemplate("unbalanced quotes".into()))?;
    if tokens.is_empty() {
        return Err(RenderError::InvalidTemplate("empty template".into()));
    }
    let frames_dir = frames_dir.to_string_lossy();
    let audio = audio.to_string_lossy();
    let out = out.to_string_lossy();
    Ok(tokens
        .into_iter()
        .map(|t| {
            t.replace("{frames_dir}", &frames_dir)
                .replace("{fps}", &fps.to_string())
                .replace("{audio}", &audio)
                .replace("{out}", &out)
        })
        .collect())
}
