use sha2::{Digest, Sha256};

use super::BackendError;

/// Row-major RGB8 raster.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ImageFrame {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl ImageFrame {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, BackendError> {
        let expected = width as usize * height as usize * 3;
        if pixels.len() != expected {
            return Err(BackendError::InvalidImage(format!(
                "{width}x{height} RGB8 needs {expected} bytes, got {}",
                pixels.len()
            )));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    /// Mean RGB over the whole frame.
    pub fn mean_color(&self) -> [f64; 3] {
        let mut sum = [0.0; 3];
        for px in self.pixels.chunks_exact(3) {
            for c in 0..3 {
                sum[c] += px[c] as f64;
            }
        }
        let n = (self.width as f64) * (self.height as f64);
        sum.map(|s| s / n)
    }

    /// Deterministic PNG: 8-bit RGB, default compression, no ancillary chunks.
    pub fn to_png(&self) -> Vec<u8> {
        let mut out = Vec::new();
        {
            let mut encoder = png::Encoder::new(&mut out, self.width, self.height);
            encoder.set_color(png::ColorType::Rgb);
            encoder.set_depth(png::BitDepth::Eight);
            let mut writer = encoder.write_header().expect("PNG header to memory");
            writer.write_image_data(&self.pixels).expect("PNG data to memory");
        }
        out
    }

    pub fn from_png(bytes: &[u8]) -> Result<Self, BackendError> {
        let invalid = |e: png::DecodingError| BackendError::InvalidImage(e.to_string());
        let mut decoder = png::Decoder::new(std::io::Cursor::new(bytes));
        decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
        let mut reader = decoder.read_info().map_err(invalid)?;
        let mut buf = vec![0; reader.output_buffer_size().unwrap_or(0)];
        let info = reader.next_frame(&mut buf).map_err(invalid)?;
        buf.truncate(info.buffer_size());
        let pixels = match info.color_type {
            png::ColorType::Rgb => buf,
            png::ColorType::Rgba => buf.chunks_exact(4).flat_map(|p| [p[0], p[1], p[2]]).collect(),
            png::ColorType::Grayscale => buf.iter().flat_map(|&g| [g, g, g]).collect(),
            png::ColorType::GrayscaleAlpha => buf.chunks_exact(2).flat_map(|p| [p[0], p[0], p[0]]).collect(),
            other => return Err(BackendError::InvalidImage(format!("unsupported PNG color type {other:?}"))),
        };
        Self::new(info.width, info.height, pixels)
    }

    /// Hex SHA-256 of the PNG encoding.
    pub fn digest(&self) -> String {
        png_digest(&self.to_png())
    }
}

pub fn png_digest(png_bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(png_bytes))
}
