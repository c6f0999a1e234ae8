use super::AudioClip;

/// Per-bucket `(min, max)` sample values, buckets split evenly over the clip.
///
/// Bucket `i` covers samples `[i * n / buckets, (i + 1) * n / buckets)`. When
/// there are more buckets than samples, a bucket that would be empty reports
/// the nearest sample instead.
pub fn waveform_peaks(clip: &AudioClip, n_buckets: usize) -> Vec<(f32, f32)> {
    let samples = clip.samples();
    let n = samples.len();
    if n == 0 || n_buckets == 0 {
        return vec![(0.0, 0.0); n_buckets];
    }
    (0..n_buckets)
        .map(|i| {
            let start = i * n / n_buckets;
            let end = ((i + 1) * n / n_buckets).max(start + 1).min(n);
            let start = start.min(n - 1);
            samples[start..end]
                .iter()
                .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &s| (lo.min(s), hi.max(s)))
        })
        .collect()
}
