//! Audio-reactive text-to-video engine: energy analysis over music
//! intervals, a non-overlapping interval timeline, prompt tooling, image
//! backends, frame rendering and a hold/transition classifier.

pub mod analysis;
pub mod audio;
pub mod genbackend;
mod hash;
pub mod prompting;
pub mod renderer;
pub mod timeline;

pub use analysis::{classify, DimensionLexicons, IntervalClassification};
pub use audio::{AudioClip, EnergyCurve, Spectrogram, TimeRange};
pub use genbackend::{BackendDescriptor, ImageBackend, ImageFrame, MockBackend};
pub use prompting::{Prompt, SeedSource};
pub use renderer::{FrameSchedule, RenderedInterval, VideoOutput};
pub use timeline::{FrameSize, ImageSpec, Interval, IntervalId, Project, DEFAULT_FPS};
