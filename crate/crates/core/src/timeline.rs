//! The project model: an audio reference, a sorted set of non-overlapping
//! half-open intervals, and render settings.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompting::Prompt;

pub const PROJECT_SCHEMA_VERSION: &str = "1";
pub const DEFAULT_FPS: u32 = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TimelineError {
    #[error("interval overlaps interval {0}")]
    Overlap(IntervalId),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("unknown interval {0}")]
    UnknownInterval(IntervalId),
    #[error("invalid image spec: {0}")]
    InvalidSpec(String),
    #[error("interval {0} needs both endpoints with concrete seeds")]
    MissingSeed(IntervalId),
    #[error("malformed project: {0}")]
    MalformedProject(String),
    #[error("project schema version {found:?} is not supported (expected {PROJECT_SCHEMA_VERSION:?})")]
    SchemaVersionMismatch { found: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntervalId(pub u32);

impl fmt::Display for IntervalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Identity of one generation: prompt text, seed and raster size.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageSpec {
    pub prompt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub width: u32,
    pub height: u32,
}

impl ImageSpec {
    pub fn new(prompt: impl Into<String>, seed: Option<u64>, width: u32, height: u32) -> Result<Self, TimelineError> {
        let spec = Self {
            prompt: prompt.into(),
            seed,
            width,
            height,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), TimelineError> {
        Prompt::parse(&self.prompt).map_err(|e| TimelineError::InvalidSpec(e.to_string()))?;
        validate_size(self.width, self.height).map_err(TimelineError::InvalidSpec)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed: Some(seed),
            ..self.clone()
        }
    }

    pub fn with_prompt(&self, prompt: impl Into<String>) -> Self {
        Self {
            prompt: prompt.into(),
            ..self.clone()
        }
    }

    pub fn size(&self) -> FrameSize {
        FrameSize {
            width: self.width,
            height: self.height,
        }
    }
}

fn validate_size(width: u32, height: u32) -> Result<(), String> {
    for (name, v) in [("width", width), ("height", height)] {
        if v < 8 || v % 8 != 0 {
            return Err(format!("{name} {v} must be a multiple of 8 and at least 8"));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSize {
    #[serde(rename = "w")]
    pub width: u32,
    #[serde(rename = "h")]
    pub height: u32,
}

impl FrameSize {
    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalState {
    #[default]
    Draft,
    Generated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Start,
    End,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub id: IntervalId,
    pub begin_sec: f64,
    pub end_sec: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<ImageSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<ImageSpec>,
    #[serde(default)]
    pub state: IntervalState,
}

impl Interval {
    pub fn duration(&self) -> f64 {
        self.end_sec - self.begin_sec
    }

    pub fn range(&self) -> crate::audio::TimeRange {
        crate::audio::TimeRange::new(self.begin_sec, self.end_sec)
    }

    /// Both endpoint specs, when both are set and seeded.
    pub fn seeded_endpoints(&self) -> Option<(&ImageSpec, &ImageSpec)> {
        match (&self.start, &self.end) {
            (Some(s), Some(e)) if s.seed.is_some() && e.seed.is_some() => Some((s, e)),
            _ => None,
        }
    }

    pub fn endpoint(&self, which: Endpoint) -> Option<&ImageSpec> {
        match which {
            Endpoint::Start => self.start.as_ref(),
            Endpoint::End => self.end.as_ref(),
        }
    }
}

/// Frames needed for an interval: `round(duration * fps)`, at least 2.
pub fn interval_frame_count(interval: &Interval, fps: u32) -> usize {
    frame_count_for(interval.duration(), fps)
}

pub fn frame_count_for(duration_sec: f64, fps: u32) -> usize {
    let n = (duration_sec * fps as f64).round();
    if n.is_finite() && n >= 2.0 {
        n as usize
    } else {
        2
    }
}

/// Serialized through [`save_project`]; loaded only through [`load_project`],
/// which validates every invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Project {
    pub audio_path: String,
    /// Known once audio is attached; bounds every interval's end.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audio_duration_sec: Option<f64>,
    pub fps: u32,
    pub frame_size: FrameSize,
    intervals: Vec<Interval>,
}

fn default_fps() -> u32 {
    DEFAULT_FPS
}

#[derive(Serialize)]
struct ProjectFileOut<'a> {
    version: &'static str,
    #[serde(flatten)]
    project: &'a Project,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProjectFileIn {
    #[allow(dead_code)]
    version: String,
    audio_path: String,
    #[serde(default)]
    audio_duration_sec: Option<f64>,
    #[serde(default = "default_fps")]
    fps: u32,
    frame_size: FrameSize,
    #[serde(default)]
    intervals: Vec<Interval>,
}

impl Project {
    pub fn new(audio_path: impl Into<String>, audio_duration_sec: Option<f64>, frame_size: FrameSize) -> Self {
        Self {
            audio_path: audio_path.into(),
            audio_duration_sec,
            fps: DEFAULT_FPS,
            frame_size,
            intervals: Vec::new(),
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn interval(&self, id: IntervalId) -> Result<&Interval, TimelineError> {
        self.intervals
            .iter()
            .find(|iv| iv.id == id)
            .ok_or(TimelineError::UnknownInterval(id))
    }

    fn position(&self, id: IntervalId) -> Result<usize, TimelineError> {
        self.intervals
            .iter()
            .position(|iv| iv.id == id)
            .ok_or(TimelineError::UnknownInterval(id))
    }

    /// Replace the audio reference and drop every interval.
    pub fn reset_audio(&mut self, audio_path: impl Into<String>, duration_sec: f64) {
        self.audio_path = audio_path.into();
        self.audio_duration_sec = Some(duration_sec);
        self.intervals.clear();
    }

    fn check_range(&self, begin: f64, end: f64) -> Result<(), TimelineError> {
        if !begin.is_finite() || !end.is_finite() || begin < 0.0 || begin >= end {
            return Err(TimelineError::OutOfRange(format!(
                "[{begin}, {end}) is not a forward range starting at or after 0"
            )));
        }
        if let Some(d) = self.audio_duration_sec {
            if end > d {
                return Err(TimelineError::OutOfRange(format!(
                    "end {end} exceeds audio duration {d}"
                )));
            }
        }
        Ok(())
    }

    fn check_overlap(&self, begin: f64, end: f64, ignore: Option<IntervalId>) -> Result<(), TimelineError> {
        match self
            .intervals
            .iter()
            .filter(|iv| Some(iv.id) != ignore)
            .find(|iv| begin < iv.end_sec && iv.begin_sec < end)
        {
            Some(iv) => Err(TimelineError::Overlap(iv.id)),
            None => Ok(()),
        }
    }

    fn next_id(&self) -> IntervalId {
        IntervalId(self.intervals.iter().map(|iv| iv.id.0 + 1).max().unwrap_or(1))
    }

    fn sort(&mut self) {
        self.intervals.sort_by(|a, b| a.begin_sec.total_cmp(&b.begin_sec));
    }

    pub fn add_interval(&mut self, begin_sec: f64, end_sec: f64) -> Result<Interval, TimelineError> {
        self.check_range(begin_sec, end_sec)?;
        self.check_overlap(begin_sec, end_sec, None)?;
        let interval = Interval {
            id: self.next_id(),
            begin_sec,
            end_sec,
            start: None,
            end: None,
            state: IntervalState::Draft,
        };
        self.intervals.push(interval.clone());
        self.sort();
        Ok(interval)
    }

    pub fn edit_interval(&mut self, id: IntervalId, begin_sec: f64, end_sec: f64) -> Result<Interval, TimelineError> {
        let idx = self.position(id)?;
        self.check_range(begin_sec, end_sec)?;
        self.check_overlap(begin_sec, end_sec, Some(id))?;
        let iv = &mut self.intervals[idx];
        iv.begin_sec = begin_sec;
        iv.end_sec = end_sec;
        iv.state = IntervalState::Draft;
        let out = iv.clone();
        self.sort();
        Ok(out)
    }

    pub fn delete_interval(&mut self, id: IntervalId) -> Result<(), TimelineError> {
        let idx = self.position(id)?;
        self.intervals.remove(idx);
        Ok(())
    }

    pub fn set_endpoint(&mut self, id: IntervalId, which: Endpoint, spec: ImageSpec) -> Result<Interval, TimelineError> {
        let idx = self.position(id)?;
        spec.validate()?;
        if spec.size() != self.frame_size {
            return Err(TimelineError::InvalidSpec(format!(
                "spec is {}x{} but the project renders {}x{}",
                spec.width, spec.height, self.frame_size.width, self.frame_size.height
            )));
        }
        let iv = &mut self.intervals[idx];
        match which {
            Endpoint::Start => iv.start = Some(spec),
            Endpoint::End => iv.end = Some(spec),
        }
        iv.state = IntervalState::Draft;
        Ok(iv.clone())
    }

    /// Record a successful render.
    pub fn mark_generated(&mut self, id: IntervalId) -> Result<(), TimelineError> {
        let idx = self.position(id)?;
        let iv = &mut self.intervals[idx];
        if iv.seeded_endpoints().is_none() {
            return Err(TimelineError::MissingSeed(id));
        }
        iv.state = IntervalState::Generated;
        Ok(())
    }

    /// Check every structural invariant. Used when loading untrusted files.
    pub fn validate(&self) -> Result<(), TimelineError> {
        let bad = |msg: String| Err(TimelineError::MalformedProject(msg));
        if self.fps < 1 {
            return bad("fps must be at least 1".into());
        }
        if let Err(e) = validate_size(self.frame_size.width, self.frame_size.height) {
            return bad(format!("frame_size: {e}"));
        }
        if let Some(d) = self.audio_duration_sec {
            if !(d.is_finite() && d > 0.0) {
                return bad(format!("audio duration {d} must be positive"));
            }
        }
        let mut ids = std::collections::HashSet::new();
        for iv in &self.intervals {
            if !ids.insert(iv.id) {
                return bad(format!("duplicate interval id {}", iv.id));
            }
            if let Err(e) = self.check_range(iv.begin_sec, iv.end_sec) {
                return bad(format!("interval {}: {e}", iv.id));
            }
            for spec in [&iv.start, &iv.end].into_iter().flatten() {
                if let Err(e) = spec.validate() {
                    return bad(format!("interval {}: {e}", iv.id));
                }
            }
            if iv.state == IntervalState::Generated && iv.seeded_endpoints().is_none() {
                return bad(format!("interval {} is generated without seeded endpoints", iv.id));
            }
        }
        for pair in self.intervals.windows(2) {
            if pair[0].end_sec > pair[1].begin_sec {
                return bad(format!("intervals {} and {} overlap or are unsorted", pair[0].id, pair[1].id));
            }
        }
        Ok(())
    }
}

pub fn save_project(project: &Project) -> Vec<u8> {
    serde_json::to_vec_pretty(&ProjectFileOut {
        version: PROJECT_SCHEMA_VERSION,
        project,
    })
    .expect("project serializes")
}

pub fn load_project(bytes: &[u8]) -> Result<Project, TimelineError> {
    let value: serde_json::Value =
        serde_json::from_slice(bytes).map_err(|e| TimelineError::MalformedProject(e.to_string()))?;
    match value.get("version") {
        None => return Err(TimelineError::MalformedProject("missing version".into())),
        Some(serde_json::Value::String(v)) if v == PROJECT_SCHEMA_VERSION => {}
        Some(other) => {
            let found = other.as_str().map_or_else(|| other.to_string(), str::to_owned);
            return Err(TimelineError::SchemaVersionMismatch { found });
        }
    }
    let file: ProjectFileIn =
        serde_json::from_value(value).map_err(|e| TimelineError::MalformedProject(e.to_string()))?;
    let project = Project {
        audio_path: file.audio_path,
        audio_duration_sec: file.audio_duration_sec,
        fps: file.fps,
        frame_size: file.frame_size,
        intervals: file.intervals,
    };
    project.validate()?;
    Ok(project)
}
