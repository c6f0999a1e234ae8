use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::{AudioClip, AudioError};

/// Magnitude spectrogram, indexed `[frequency_bin][time_frame]`.
///
/// Frames are centered: the signal is reflect-padded by `window_size / 2` on
/// both ends, so a clip of `n` samples yields `n / hop_length + 1` frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub magnitudes: Vec<Vec<f64>>,
    pub hop_length: usize,
    pub window_size: usize,
}

impl Spectrogram {
    pub fn n_bins(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn n_frames(&self) -> usize {
        self.magnitudes.first().map_or(0, Vec::len)
    }
}

pub fn stft(clip: &AudioClip, window_size: usize, hop_length: usize) -> Result<Spectrogram, AudioError> {
    let complex = ComplexStft::analyze(clip.samples(), window_size, hop_length)?;
    Ok(complex.magnitude())
}

/// Complex STFT frames, indexed `[time_frame][frequency_bin]`.
#[derive(Debug, Clone)]
pub(crate) struct ComplexStft {
    pub frames: Vec<Vec<Complex64>>,
    pub window_size: usize,
    pub hop_length: usize,
}

pub(crate) fn validate_params(window_size: usize, hop_length: usize) -> Result<(), AudioError> {
    if window_size < 64 || !window_size.is_power_of_two() {
        return Err(AudioError::InvalidParameter(format!(
            "window size {window_size} must be a power of two >= 64"
        )));
    }
    if hop_length == 0 || hop_length > window_size {
        return Err(AudioError::InvalidParameter(format!(
            "hop length {hop_length} must be in 1..={window_size}"
        )));
    }
    Ok(())
}

/// Periodic Hann window.
pub(crate) fn hann(size: usize) -> Vec<f64> {
    (0..size)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / size as f64).cos())
        .collect()
}

fn reflect_pad(samples: &[f32], pad: usize) -> Vec<f64> {
    let n = samples.len();
    let mut out = Vec::with_capacity(n + 2 * pad);
    out.extend((1..=pad).rev().map(|i| samples[i] as f64));
    out.extend(samples.iter().map(|&s| s as f64));
    out.extend((0..pad).map(|i| samples[n - 2 - i] as f64));
    out
}

impl ComplexStft {
    pub fn analyze(samples: &[f32], window_size: usize, hop_length: usize) -> Result<Self, AudioError> {
        validate_params(window_size, hop_length)?;
        if samples.len() < window_size {
            return Err(AudioError::ClipTooShort {
                samples: samples.len(),
                window_size,
            });
        }
        let padded = reflect_pad(samples, window_size / 2);
        let window = hann(window_size);
        let n_frames = samples.len() / hop_length + 1;
        let n_bins = window_size / 2 + 1;
        let fft = FftPlanner::new().plan_fft_forward(window_size);

        let mut buf = vec![Complex64::new(0.0, 0.0); window_size];
        let frames = (0..n_frames)
            .map(|f| {
                let start = f * hop_length;
                for (i, slot) in buf.iter_mut().enumerate() {
                    *slot = Complex64::new(padded[start + i] * window[i], 0.0);
                }
                fft.process(&mut buf);
                buf[..n_bins].to_vec()
            })
            .collect();
        Ok(Self {
            frames,
            window_size,
            hop_length,
        })
    }

    pub fn magnitude(&self) -> Spectrogram {
        let n_bins = self.window_size / 2 + 1;
        let magnitudes = (0..n_bins)
            .map(|b| self.frames.iter().map(|frame| frame[b].norm()).collect())
            .collect();
        Spectrogram {
            magnitudes,
            hop_length: self.hop_length,
            window_size: self.window_size,
        }
    }

    /// Weighted overlap-add inverse, trimmed back to `len` samples.
    pub fn inverse(&self, len: usize) -> Vec<f64> {
        let w = self.window_size;
        let pad = w / 2;
        let window = hann(w);
        let ifft = FftPlanner::new().plan_fft_inverse(w);
        let total = (self.frames.len() - 1) * self.hop_length + w;
        let mut out = vec![0.0; total];
        let mut norm = vec![0.0; total];
        let mut buf = vec![Complex64::new(0.0, 0.0); w];
        let n_bins = w / 2 + 1;

        for (f, frame) in self.frames.iter().enumerate() {
            buf[..n_bins].copy_from_slice(frame);
            for k in 1..w - n_bins + 1 {
                buf[w - k] = frame[k].conj();
            }
            ifft.process(&mut buf);
            let start = f * self.hop_length;
            for i in 0..w {
                out[start + i] += buf[i].re / w as f64 * window[i];
                norm[start + i] += window[i] * window[i];
            }
        }
        out.iter()
            .zip(&norm)
            .skip(pad)
            .take(len)
            .map(|(&v, &n)| if n > 1e-10 { v / n } else { 0.0 })
            .collect()
    }
}
