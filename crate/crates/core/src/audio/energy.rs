use serde::{Deserialize, Serialize};

use super::hpss::{hpss, HpssConfig};
use super::stft::ComplexStft;
use super::{AudioClip, AudioError, TimeRange};

/// Per-frame interpolation weights: start at 0, end at 1, never decrease.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EnergyCurve {
    weights: Vec<f64>,
}

impl EnergyCurve {
    /// Uniform pacing `i / (n - 1)`.
    pub fn linear(n_frames: usize) -> Result<Self, AudioError> {
        check_frames(n_frames)?;
        let last = (n_frames - 1) as f64;
        Ok(Self {
            weights: (0..n_frames).map(|i| i as f64 / last).collect(),
        })
    }

    pub fn from_weights(weights: Vec<f64>) -> Result<Self, AudioError> {
        check_frames(weights.len())?;
        let bad = |why: &str| Err(AudioError::InvalidParameter(format!("energy curve {why}")));
        if weights[0] != 0.0 || weights[weights.len() - 1] != 1.0 {
            return bad("must start at 0 and end at 1");
        }
        if weights.windows(2).any(|w| !(w[0] <= w[1])) {
            return bad("must be nondecreasing");
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Index of the first weight strictly above `threshold`.
    pub fn first_index_above(&self, threshold: f64) -> Option<usize> {
        self.weights.iter().position(|&w| w > threshold)
    }
}

impl TryFrom<Vec<f64>> for EnergyCurve {
    type Error = AudioError;
    fn try_from(weights: Vec<f64>) -> Result<Self, Self::Error> {
        Self::from_weights(weights)
    }
}

impl From<EnergyCurve> for Vec<f64> {
    fn from(curve: EnergyCurve) -> Self {
        curve.weights
    }
}

fn check_frames(n_frames: usize) -> Result<(), AudioError> {
    if n_frames < 2 {
        return Err(AudioError::InvalidParameter(format!(
            "need at least 2 frames, got {n_frames}"
        )));
    }
    Ok(())
}

pub fn percussive_signal(clip: &AudioClip, interval: TimeRange) -> Result<AudioClip, AudioError> {
    percussive_signal_with(clip, interval, &HpssConfig::default())
}

/// Percussive component of `clip` over `interval`, same length as the slice.
///
/// Slices shorter than the analysis window are zero-extended for analysis
/// and trimmed afterwards.
pub fn percussive_signal_with(clip: &AudioClip, interval: TimeRange, config: &HpssConfig) -> Result<AudioClip, AudioError> {
    config.validate()?;
    let slice = clip.slice(interval)?;
    let len = slice.len();
    let mut samples = slice.samples().to_vec();
    if samples.len() < config.window_size {
        samples.resize(config.window_size, 0.0);
    }

    let mut complex = ComplexStft::analyze(&samples, config.window_size, config.hop_length)?;
    let masks = hpss(&complex.magnitude(), config.harmonic_kernel, config.percussive_kernel)?;
    for (f, frame) in complex.frames.iter_mut().enumerate() {
        for (b, cell) in frame.iter_mut().enumerate() {
            *cell *= masks.percussive_mask[b][f];
        }
    }
    let out = complex
        .inverse(samples.len())
        .into_iter()
        .take(len)
        .map(|v| v.clamp(-1.0, 1.0) as f32)
        .collect();
    AudioClip::new(out, clip.sample_rate())
}

pub fn compute_energy_curve(clip: &AudioClip, interval: TimeRange, n_frames: usize) -> Result<EnergyCurve, AudioError> {
    compute_energy_curve_with(clip, interval, n_frames, &HpssConfig::default())
}

/// Normalized cumulative percussive energy over `interval`, resampled to
/// `n_frames` points.
///
/// Energy is the mean absolute amplitude of each hop-length window. A silent
/// interval yields the linear ramp.
pub fn compute_energy_curve_with(
    clip: &AudioClip,
    interval: TimeRange,
    n_frames: usize,
    config: &HpssConfig,
) -> Result<EnergyCurve, AudioError> {
    check_frames(n_frames)?;
    let perc = percussive_signal_with(clip, interval, config)?;

    let mut cumulative = Vec::with_capacity(perc.len() / config.hop_length + 2);
    cumulative.push(0.0);
    let mut running = 0.0;
    for chunk in perc.samples().chunks(config.hop_length) {
        running += chunk.iter().map(|s| s.abs() as f64).sum::<f64>() / chunk.len() as f64;
        cumulative.push(running);
    }
    let total = running;
    if !(total > 0.0) || !total.is_finite() {
        return EnergyCurve::linear(n_frames);
    }
    for c in cumulative.iter_mut() {
        *c /= total;
    }

    let m = (cumulative.len() - 1) as f64;
    let last = (n_frames - 1) as f64;
    let mut weights = Vec::with_capacity(n_frames);
    let mut floor = 0.0f64;
    for i in 0..n_frames {
        let x = i as f64 * m / last;
        let j = (x.floor() as usize).min(cumulative.len() - 2);
        let frac = x - j as f64;
        let v = cumulative[j] + frac * (cumulative[j + 1] - cumulative[j]);
        floor = floor.max(v.clamp(0.0, 1.0));
        weights.push(floor);
    }
    weights[0] = 0.0;
    weights[n_frames - 1] = 1.0;
    Ok(EnergyCurve { weights })
}
