//! Test-only reference implementations and signal builders.
#![allow(dead_code)]

use disco_core::audio::AudioClip;

pub mod oracle {
    //! Direct-DFT, sort-median HPSS. Shares no code with the crate.

    use std::f64::consts::PI;

    pub struct Params {
        pub window: usize,
        pub hop: usize,
        pub time_kernel: usize,
        pub freq_kernel: usize,
    }

    impl Default for Params {
        fn default() -> Self {
            Self {
                window: 2048,
                hop: 512,
                time_kernel: 31,
                freq_kernel: 31,
            }
        }
    }

    /// Magnitudes `[frame][bin]` of the centered, reflect-padded Hann STFT.
    pub fn magnitudes(signal: &[f32], window: usize, hop: usize) -> Vec<Vec<f64>> {
        let half = window / 2;
        let n = signal.len() as isize;
        let at = |i: isize| -> f64 {
            let j = if i < 0 {
                -i
            } else if i >= n {
                2 * (n - 1) - i
            } else {
                i
            };
            signal[j as usize] as f64
        };
        let cos: Vec<f64> = (0..window).map(|k| (2.0 * PI * k as f64 / window as f64).cos()).collect();
        let sin: Vec<f64> = (0..window).map(|k| (2.0 * PI * k as f64 / window as f64).sin()).collect();
        let hann: Vec<f64> = (0..window).map(|i| 0.5 * (1.0 - cos[i])).collect();
        let frames = signal.len() / hop + 1;
        (0..frames)
            .map(|f| {
                let centre = (f * hop) as isize;
                let x: Vec<f64> = (0..window)
                    .map(|i| at(centre - half as isize + i as isize) * hann[i])
                    .collect();
                (0..=half)
                    .map(|k| {
                        let (mut re, mut im) = (0.0, 0.0);
                        for (i, &v) in x.iter().enumerate() {
                            let idx = (k * i) % window;
                            re += v * cos[idx];
                            im -= v * sin[idx];
                        }
                        (re * re + im * im).sqrt()
                    })
                    .collect()
            })
            .collect()
    }

    fn median(mut values: Vec<f64>) -> f64 {
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values[values.len() / 2]
    }

    /// Fraction of spectral power the percussive soft mask keeps.
    pub fn percussive_fraction(signal: &[f32], p: &Params) -> f64 {
        let mags = magnitudes(signal, p.window, p.hop);
        let frames = mags.len();
        let bins = mags[0].len();
        let get = |f: isize, b: isize| -> f64 {
            if f < 0 || b < 0 || f >= frames as isize || b >= bins as isize {
                0.0
            } else {
                mags[f as usize][b as usize]
            }
        };
        let (ht, hf) = ((p.time_kernel / 2) as isize, (p.freq_kernel / 2) as isize);
        let mut total = 0.0;
        let mut perc = 0.0;
        for f in 0..frames as isize {
            for b in 0..bins as isize {
                let h = median((-ht..=ht).map(|d| get(f + d, b)).collect());
                let q = median((-hf..=hf).map(|d| get(f, b + d)).collect());
                let mask = if h * h + q * q == 0.0 {
                    0.5
                } else {
                    q * q / (h * h + q * q)
                };
                let m = get(f, b);
                total += m * m;
                perc += mask * m * m;
            }
        }
        perc / total
    }
}

pub fn sine(freq: f64, amplitude: f32, seconds: f64, rate: u32) -> Vec<f32> {
    let n = (seconds * rate as f64).round() as usize;
    (0..n)
        .map(|i| amplitude * (2.0 * std::f64::consts::PI * freq * i as f64 / rate as f64).sin() as f32)
        .collect()
}

/// Unit-ish impulses at the given sample positions.
pub fn click_train(len: usize, positions: &[usize], amplitude: f32) -> Vec<f32> {
    let mut s = vec![0.0; len];
    for &p in positions {
        s[p] = amplitude;
    }
    s
}

pub fn mix(a: &[f32], b: &[f32]) -> Vec<f32> {
    a.iter().zip(b).map(|(x, y)| (x + y).clamp(-1.0, 1.0)).collect()
}

pub fn energy(s: &[f32]) -> f64 {
    s.iter().map(|&v| (v as f64) * (v as f64)).sum()
}

pub fn clip(samples: Vec<f32>, rate: u32) -> AudioClip {
    AudioClip::new(samples, rate).unwrap()
}

/// Brute-force cumulative mean-absolute amplitude per hop, normalized, with a
/// leading zero. Used to derive expected pacing from a known signal.
pub fn cumulative_abs(samples: &[f32], hop: usize) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut acc = 0.0;
    for chunk in samples.chunks(hop) {
        acc += chunk.iter().map(|v| v.abs() as f64).sum::<f64>() / chunk.len() as f64;
        out.push(acc);
    }
    out.iter().map(|v| v / acc).collect()
}

/// Three seeded intervals of 0.5, 1.0 and 2.5 s with a gap after the
/// first, over an 8 kHz click track.
pub fn three_interval_project(size: u32) -> (disco_core::Project, AudioClip) {
    use disco_core::timeline::{Endpoint, FrameSize, ImageSpec, Project};
    let rate = 8000;
    let total = 5.0;
    let n = (total * rate as f64) as usize;
    let positions: Vec<usize> = (0..n).step_by(rate as usize / 4).map(|p| p + 37).collect();
    let clip = clip(click_train(n, &positions, 0.9), rate);
    let mut project = Project::new("track.wav", Some(clip.duration_sec()), FrameSize::new(size, size));
    let spans = [(0.0, 0.5), (1.0, 2.0), (2.0, 4.5)];
    let prompts = [("grayscale city", "neon city at night"), ("blue hour beach", "sunset beach"), ("robot djs", "robot djs, glitch")];
    for (i, (&(b, e), (ps, pe))) in spans.iter().zip(prompts).enumerate() {
        let id = project.add_interval(b, e).unwrap().id;
        let seed = 10 + i as u64;
        project.set_endpoint(id, Endpoint::Start, ImageSpec::new(ps, Some(seed), size, size).unwrap()).unwrap();
        project.set_endpoint(id, Endpoint::End, ImageSpec::new(pe, Some(seed + 100), size, size).unwrap()).unwrap();
    }
    (project, clip)
}

pub mod timeline_fuzz {
    //! Random timeline workloads shared by the integration and acceptance
    //! suites.

    use disco_core::timeline::{load_project, save_project, Endpoint, FrameSize, ImageSpec, Project};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Sorted by begin and pairwise disjoint, checked directly.
    pub fn well_formed(p: &Project) -> Result<(), String> {
        for pair in p.intervals().windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if a.begin_sec > b.begin_sec {
                return Err(format!("unsorted: {} before {}", a.begin_sec, b.begin_sec));
            }
            if a.end_sec > b.begin_sec {
                return Err(format!("overlap: [{}, {}) and [{}, {})", a.begin_sec, a.end_sec, b.begin_sec, b.end_sec));
            }
        }
        for iv in p.intervals() {
            if !(iv.begin_sec < iv.end_sec) {
                return Err(format!("empty interval {}", iv.id));
            }
        }
        Ok(())
    }

    fn time(rng: &mut ChaCha8Rng, duration: f64) -> f64 {
        // Snapped to a coarse grid so shared boundaries actually happen.
        (rng.random_range(0.0..duration) * 4.0).round() / 4.0
    }

    /// `ops` random add/edit/delete calls; every state along the way must be
    /// well formed. Returns how many calls were accepted.
    pub fn random_operations(seed: u64, ops: usize) -> Result<usize, String> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let duration = 60.0;
        let mut p = Project::new("fuzz.wav", Some(duration), FrameSize::new(8, 8));
        let mut accepted = 0;
        for _ in 0..ops {
            let (a, b) = (time(&mut rng, duration + 1.0), time(&mut rng, duration + 1.0));
            let ids: Vec<_> = p.intervals().iter().map(|i| i.id).collect();
            let target = if ids.is_empty() || rng.random_bool(0.1) {
                disco_core::IntervalId(rng.random_range(1..500))
            } else {
                ids[rng.random_range(0..ids.len())]
            };
            let ok = match rng.random_range(0..10) {
                0..=4 => p.add_interval(a.min(b), a.max(b)).is_ok(),
                5..=7 => p.edit_interval(target, a.min(b), a.max(b)).is_ok(),
                _ => p.delete_interval(target).is_ok(),
            };
            accepted += ok as usize;
            well_formed(&p)?;
        }
        Ok(accepted)
    }

    pub fn random_project(rng: &mut ChaCha8Rng) -> Project {
        let duration = rng.random_range(1.0..120.0);
        let size = FrameSize::new(8 * rng.random_range(1..128), 8 * rng.random_range(1..128));
        let mut p = Project::new(format!("song-{}.wav", rng.random::<u16>()), Some(duration), size);
        p.fps = rng.random_range(1..61);
        for _ in 0..rng.random_range(0..12) {
            let a = rng.random_range(0.0..duration);
            let b = rng.random_range(0.0..duration);
            let Ok(iv) = p.add_interval(a.min(b), a.max(b)) else { continue };
            for which in [Endpoint::Start, Endpoint::End] {
                if rng.random_bool(0.7) {
                    let seed = rng.random_bool(0.8).then(|| rng.random::<u64>());
                    let prompt = format!("prompt {}, phrase \"{}\"", rng.random::<u32>(), rng.random::<f64>());
                    let spec = ImageSpec::new(prompt, seed, size.width, size.height).unwrap();
                    p.set_endpoint(iv.id, which, spec).unwrap();
                }
            }
            if p.interval(iv.id).unwrap().seeded_endpoints().is_some() && rng.random_bool(0.3) {
                p.mark_generated(iv.id).unwrap();
            }
        }
        p
    }

    pub fn round_trips(seed: u64, count: usize) -> Result<(), String> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..count {
            let p = random_project(&mut rng);
            let loaded = load_project(&save_project(&p)).map_err(|e| format!("project {i}: {e}"))?;
            if loaded != p {
                return Err(format!("project {i} changed across save/load:\n{p:?}\n{loaded:?}"));
            }
        }
        Ok(())
    }
}
