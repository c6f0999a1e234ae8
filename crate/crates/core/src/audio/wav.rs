use std::io::Cursor;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::{AudioClip, AudioError};

/// Decode a PCM WAV file into a mono clip.
///
/// Integer samples are scaled by `2^(bits - 1)`; stereo frames are averaged.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioClip, AudioError> {
    if let Some(tag) = format_tag(bytes) {
        if !matches!(tag, 1 | 3 | 0xFFFE) {
            return Err(AudioError::UnsupportedEncoding(format!("format tag {tag:#06x}")));
        }
    }
    let reader = WavReader::new(Cursor::new(bytes)).map_err(map_hound)?;
    let spec = reader.spec();
    if !(1..=2).contains(&spec.channels) {
        return Err(AudioError::UnsupportedEncoding(format!(
            "{} channels",
            spec.channels
        )));
    }
    let interleaved: Vec<f32> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(|v| if v.is_finite() { v.clamp(-1.0, 1.0) } else { 0.0 }))
            .collect::<Result<_, _>>()
            .map_err(map_hound)?,
        (SampleFormat::Int, bits @ (8 | 16 | 24 | 32)) => {
            let scale = 1.0 / (1u64 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| (v as f64 * scale) as f32))
                .collect::<Result<_, _>>()
                .map_err(map_hound)?
        }
        (format, bits) => {
            return Err(AudioError::UnsupportedEncoding(format!(
                "{bits}-bit {format:?}"
            )))
        }
    };

    let channels = spec.channels as usize;
    if interleaved.len() % channels != 0 {
        return Err(AudioError::MalformedWav("partial sample frame".into()));
    }
    let mono = if channels == 1 {
        interleaved
    } else {
        interleaved
            .chunks_exact(2)
            .map(|frame| 0.5 * (frame[0] + frame[1]))
            .collect()
    };
    AudioClip::new(mono, spec.sample_rate)
}

/// Encode a clip as 16-bit mono PCM.
pub fn encode_wav_16bit(clip: &AudioClip) -> Vec<u8> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate(),
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut cursor = Cursor::new(Vec::new());
    {
        let mut writer = WavWriter::new(&mut cursor, spec).expect("in-memory WAV writer");
        for &s in clip.samples() {
            let v = (s as f64 * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
            writer.write_sample(v).expect("in-memory write");
        }
        writer.finalize().expect("in-memory finalize");
    }
    cursor.into_inner()
}

/// Format tag of the first `fmt ` chunk, if the RIFF layout gets that far.
fn format_tag(bytes: &[u8]) -> Option<u16> {
    if bytes.len() < 12 || &bytes[..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return None;
    }
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().ok()?) as usize;
        if id == b"fmt " {
            let tag = bytes.get(pos + 8..pos + 10)?;
            return Some(u16::from_le_bytes([tag[0], tag[1]]));
        }
        pos = pos.checked_add(8 + size + (size & 1))?;
    }
    None
}

fn map_hound(err: hound::Error) -> AudioError {
    match err {
        hound::Error::Unsupported => AudioError::UnsupportedEncoding("non-PCM format".into()),
        hound::Error::FormatError(msg) => AudioError::MalformedWav(msg.to_string()),
        hound::Error::IoError(e) => AudioError::MalformedWav(e.to_string()),
        other => AudioError::MalformedWav(other.to_string()),
    }
}
