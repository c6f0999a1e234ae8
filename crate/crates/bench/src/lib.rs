//! Shared fixtures for the criterion benches.

use disco_core::timeline::{Endpoint, FrameSize, ImageSpec, Project};
use disco_core::AudioClip;

/// A 220 Hz tone with a click on every beat at 120 bpm.
pub fn beat_clip(seconds: f64, rate: u32) -> AudioClip {
    let n = (seconds * rate as f64) as usize;
    let beat = rate as usize / 2;
    let samples = (0..n)
        .map(|i| {
            let tone = 0.3 * (2.0 * std::f64::consts::PI * 220.0 * i as f64 / rate as f64).sin() as f32;
            if i % beat == 0 {
                (tone + 0.6).min(1.0)
            } else {
                tone
            }
        })
        .collect();
    AudioClip::new(samples, rate).expect("valid clip")
}

/// One seeded interval covering `[0, seconds)` of a matching clip.
pub fn single_interval_project(seconds: f64, size: u32) -> Project {
    let mut p = Project::new("bench.wav", Some(seconds), FrameSize::new(size, size));
    let id = p.add_interval(0.0, seconds).expect("fits").id;
    p.set_endpoint(id, Endpoint::Start, ImageSpec::new("neon city, synthwave", Some(1), size, size).unwrap())
        .unwrap();
    p.set_endpoint(id, Endpoint::End, ImageSpec::new("misty forest, watercolor", Some(2), size, size).unwrap())
        .unwrap();
    p
}
