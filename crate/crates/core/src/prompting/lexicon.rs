use std::collections::HashSet;

use rand::Rng;

use super::brainstorm::BrainstormError;

pub const STYLE_LEXICON_SIZE: usize = 100;

/// Videography and composition vocabulary offered as style suggestions.
pub const DEFAULT_STYLE_KEYWORDS: [&str; STYLE_LEXICON_SIZE] = [
    "glitch", "slow motion", "kaleidoscope", "timelapse", "long exposure",
    "wide angle", "close-up", "aerial view", "bird's eye view", "low angle",
    "dutch angle", "fisheye lens", "tilt-shift", "bokeh", "shallow depth of field",
    "motion blur", "lens flare", "film grain", "35mm film", "polaroid",
    "vhs", "cinematic lighting", "volumetric lighting", "rim lighting", "chiaroscuro",
    "silhouette", "backlit", "high contrast", "low key", "high key",
    "symmetrical", "rule of thirds", "centered composition", "minimalist", "maximalist",
    "surreal", "psychedelic", "vaporwave", "synthwave", "cyberpunk",
    "steampunk", "art deco", "art nouveau", "bauhaus", "pop art",
    "impressionist", "expressionist", "cubist", "abstract", "watercolor",
    "oil painting", "pastel drawing", "charcoal sketch", "ink wash", "woodcut",
    "linocut", "collage", "pixel art", "low poly", "isometric",
    "3d render", "claymation", "stop motion", "anime", "comic book",
    "graffiti", "stained glass", "mosaic", "origami", "holographic",
    "iridescent", "chromatic aberration", "double exposure", "infrared", "thermal imaging",
    "x-ray", "macro photography", "drone shot", "tracking shot", "dolly zoom",
    "panning shot", "handheld camera", "split screen", "mirror reflection", "fractal",
    "geometric", "liquid", "smoke", "particles", "light trails",
    "strobe", "laser beams", "fog", "underwater", "dreamlike",
    "ethereal", "gritty", "noir", "retro", "futuristic",
];

/// Exactly 100 unique lowercase style keywords.
#[derive(Debug, Clone, PartialEq)]
pub struct StyleLexicon {
    keywords: Vec<String>,
}

impl Default for StyleLexicon {
    fn default() -> Self {
        Self {
            keywords: DEFAULT_STYLE_KEYWORDS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl StyleLexicon {
    pub fn new(keywords: Vec<String>) -> Result<Self, BrainstormError> {
        let invalid = |msg: String| Err(BrainstormError::InvalidLexicon(msg));
        if keywords.len() != STYLE_LEXICON_SIZE {
            return invalid(format!("expected {STYLE_LEXICON_SIZE} keywords, got {}", keywords.len()));
        }
        let mut seen = HashSet::new();
        for k in &keywords {
            if k.trim().is_empty() || k.trim() != k {
                return invalid(format!("keyword {k:?} is blank or padded"));
            }
            if k.to_lowercase() != *k {
                return invalid(format!("keyword {k:?} is not lowercase"));
            }
            if !seen.insert(k.as_str()) {
                return invalid(format!("duplicate keyword {k:?}"));
            }
        }
        Ok(Self { keywords })
    }

    /// One keyword per line; blank lines and `#` comments are skipped.
    pub fn from_text(text: &str) -> Result<Self, BrainstormError> {
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_owned)
                .collect(),
        )
    }

    pub fn keywords(&self) -> &[String] {
        &self.keywords
    }
}

/// `n` distinct keywords drawn uniformly without replacement.
pub fn sample_styles<R: Rng + ?Sized>(lexicon: &StyleLexicon, n: usize, rng: &mut R) -> Result<Vec<String>, BrainstormError> {
    let size = lexicon.keywords.len();
    if n == 0 || n > size {
        return Err(BrainstormError::InvalidSampleSize(n));
    }
    let mut order: Vec<usize> = (0..size).collect();
    for i in 0..n {
        let j = rng.random_range(i..size);
        order.swap(i, j);
    }
    Ok(order[..n].iter().map(|&i| lexicon.keywords[i].clone()).collect())
}
