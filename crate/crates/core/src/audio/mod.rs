//! Audio analysis: WAV decoding, spectrograms, harmonic/percussive
//! separation and the cumulative-energy interpolation curve.
//!
//! Everything here is a pure function of its inputs.

mod energy;
mod hpss;
mod peaks;
mod stft;
mod wav;

pub use energy::{compute_energy_curve, compute_energy_curve_with, percussive_signal, percussive_signal_with, EnergyCurve};
pub use hpss::{hpss, percussive_energy_fraction, HpssConfig, HpssMasks};
pub use peaks::waveform_peaks;
pub use stft::{stft, Spectrogram};
pub use wav::{decode_wav, encode_wav_16bit};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AudioError {
    #[error("malformed WAV: {0}")]
    MalformedWav(String),
    #[error("unsupported WAV encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("clip has {samples} samples, shorter than the {window_size}-sample window")]
    ClipTooShort { samples: usize, window_size: usize },
    #[error("interval [{begin_sec}, {end_sec}) is outside the clip (duration {duration_sec} s)")]
    IntervalOutOfRange {
        begin_sec: f64,
        end_sec: f64,
        duration_sec: f64,
    },
    #[error("invalid analysis parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid clip: {0}")]
    InvalidClip(String),
}

/// Decoded mono audio with samples in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f32>,
    sample_rate: u32,
}

impl AudioClip {
    pub fn new(samples: Vec<f32>, sample_rate: u32) -> Result<Self, AudioError> {
        if sample_rate == 0 {
            return Err(AudioError::InvalidClip("sample rate must be positive".into()));
        }
        if let Some(bad) = samples.iter().find(|s| !s.is_finite() || s.abs() > 1.0) {
            return Err(AudioError::InvalidClip(format!(
                "sample {bad} outside [-1, 1]"
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_sec(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Sample index range covering `range`, rounded to the nearest sample.
    pub fn sample_span(&self, range: TimeRange) -> Result<std::ops::Range<usize>, AudioError> {
        let out_of_range = || AudioError::IntervalOutOfRange {
            begin_sec: range.begin_sec,
            end_sec: range.end_sec,
            duration_sec: self.duration_sec(),
        };
        // Half a sample of slack absorbs float error on the closing edge.
        let slack = 0.5 / self.sample_rate as f64;
        if !range.begin_sec.is_finite()
            || !range.end_sec.is_finite()
            || range.begin_sec < 0.0
            || range.begin_sec >= range.end_sec
            || range.end_sec > self.duration_sec() + slack
        {
            return Err(out_of_range());
        }
        let rate = self.sample_rate as f64;
        let begin = (range.begin_sec * rate).round() as usize;
        let end = ((range.end_sec * rate).round() as usize).min(self.samples.len());
        if begin >= end {
            return Err(out_of_range());
        }
        Ok(begin..end)
    }

    pub fn slice(&self, range: TimeRange) -> Result<AudioClip, AudioError> {
        let span = self.sample_span(range)?;
        Ok(AudioClip {
            samples: self.samples[span].to_vec(),
            sample_rate: self.sample_rate,
        })
    }
}

/// Half-open time range `[begin_sec, end_sec)` in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeRange {
    pub begin_sec: f64,
    pub end_sec: f64,
}

impl TimeRange {
    pub fn new(begin_sec: f64, end_sec: f64) -> Self {
        Self { begin_sec, end_sec }
    }

    pub fn duration(&self) -> f64 {
        self.end_sec - self.begin_sec
    }
}
