use super::{stft, AudioClip, AudioError, Spectrogram, TimeRange};

/// Analysis settings for median-filter HPSS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HpssConfig {
    pub window_size: usize,
    pub hop_length: usize,
    /// Median length along time, in frames. Odd.
    pub harmonic_kernel: usize,
    /// Median length along frequency, in bins. Odd.
    pub percussive_kernel: usize,
}

impl Default for HpssConfig {
    fn default() -> Self {
        Self {
            window_size: 2048,
            hop_length: 512,
            harmonic_kernel: 31,
            percussive_kernel: 31,
        }
    }
}

impl HpssConfig {
    pub fn validate(&self) -> Result<(), AudioError> {
        super::stft::validate_params(self.window_size, self.hop_length)?;
        validate_kernel(self.harmonic_kernel)?;
        validate_kernel(self.percussive_kernel)
    }
}

fn validate_kernel(k: usize) -> Result<(), AudioError> {
    if k < 3 || k % 2 == 0 {
        return Err(AudioError::InvalidParameter(format!(
            "median kernel {k} must be odd and >= 3"
        )));
    }
    Ok(())
}

/// Soft masks, same `[bin][frame]` layout as the source spectrogram.
#[derive(Debug, Clone, PartialEq)]
pub struct HpssMasks {
    pub harmonic_mask: Vec<Vec<f64>>,
    pub percussive_mask: Vec<Vec<f64>>,
}

impl HpssMasks {
    /// Share of the spectrogram's power assigned to the percussive mask.
    pub fn percussive_fraction(&self, spec: &Spectrogram) -> f64 {
        let mut total = 0.0;
        let mut perc = 0.0;
        for (mag_row, mask_row) in spec.magnitudes.iter().zip(&self.percussive_mask) {
            for (&m, &p) in mag_row.iter().zip(mask_row) {
                total += m * m;
                perc += p * m * m;
            }
        }
        if total == 0.0 {
            0.5
        } else {
            perc / total
        }
    }
}

/// Median-filter HPSS with power-2 soft masks.
///
/// Time-axis medians estimate the harmonic part, frequency-axis medians the
/// percussive part. Filters are zero-padded at the grid edges. Cells where
/// both estimates vanish get 0.5 in each mask.
pub fn hpss(spec: &Spectrogram, harmonic_kernel: usize, percussive_kernel: usize) -> Result<HpssMasks, AudioError> {
    validate_kernel(harmonic_kernel)?;
    validate_kernel(percussive_kernel)?;
    let n_bins = spec.n_bins();
    let n_frames = spec.n_frames();

    let harmonic = median_along_time(&spec.magnitudes, harmonic_kernel);
    let percussive = median_along_frequency(&spec.magnitudes, percussive_kernel);

    let mut harmonic_mask = vec![vec![0.0; n_frames]; n_bins];
    let mut percussive_mask = vec![vec![0.0; n_frames]; n_bins];
    for b in 0..n_bins {
        for f in 0..n_frames {
            let h2 = harmonic[b][f] * harmonic[b][f];
            let p2 = percussive[b][f] * percussive[b][f];
            let denom = h2 + p2;
            let (hm, pm) = if denom > 0.0 {
                (h2 / denom, p2 / denom)
            } else {
                (0.5, 0.5)
            };
            harmonic_mask[b][f] = hm;
            percussive_mask[b][f] = pm;
        }
    }
    Ok(HpssMasks {
        harmonic_mask,
        percussive_mask,
    })
}

fn median_of(scratch: &mut [f64]) -> f64 {
    let mid = scratch.len() / 2;
    *scratch
        .select_nth_unstable_by(mid, |a, b| a.total_cmp(b))
        .1
}

fn median_along_time(grid: &[Vec<f64>], kernel: usize) -> Vec<Vec<f64>> {
    let half = kernel / 2;
    let mut scratch = vec![0.0; kernel];
    grid.iter()
        .map(|row| {
            let n = row.len();
            (0..n)
                .map(|f| {
                    for (j, slot) in scratch.iter_mut().enumerate() {
                        let idx = (f + j).checked_sub(half).filter(|&i| i < n);
                        *slot = idx.map_or(0.0, |i| row[i]);
                    }
                    median_of(&mut scratch)
                })
                .collect()
        })
        .collect()
}

fn median_along_frequency(grid: &[Vec<f64>], kernel: usize) -> Vec<Vec<f64>> {
    let half = kernel / 2;
    let n_bins = grid.len();
    let n_frames = grid.first().map_or(0, Vec::len);
    let mut out = vec![vec![0.0; n_frames]; n_bins];
    let mut scratch = vec![0.0; kernel];
    for f in 0..n_frames {
        for (b, out_row) in out.iter_mut().enumerate() {
            for (j, slot) in scratch.iter_mut().enumerate() {
                let idx = (b + j).checked_sub(half).filter(|&i| i < n_bins);
                *slot = idx.map_or(0.0, |i| grid[i][f]);
            }
            out_row[f] = median_of(&mut scratch);
        }
    }
    out
}

/// Share of the power in `interval` that HPSS assigns to the percussive
/// part. Slices shorter than the window are zero-extended.
pub fn percussive_energy_fraction(clip: &AudioClip, interval: TimeRange, config: &HpssConfig) -> Result<f64, AudioError> {
    config.validate()?;
    let slice = clip.slice(interval)?;
    let mut samples = slice.samples().to_vec();
    if samples.len() < config.window_size {
        samples.resize(config.window_size, 0.0);
    }
    let spec = stft(&AudioClip::new(samples, clip.sample_rate())?, config.window_size, config.hop_length)?;
    Ok(hpss(&spec, config.harmonic_kernel, config.percussive_kernel)?.percussive_fraction(&spec))
}
