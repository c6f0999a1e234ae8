use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{AnalysisError, Dimension};
use crate::prompting::DEFAULT_STYLE_KEYWORDS;

pub const DEFAULT_COLOR_TERMS: &[&str] = &[
    "red", "orange", "yellow", "green", "blue", "purple", "violet", "pink", "magenta", "cyan",
    "teal", "turquoise", "crimson", "scarlet", "emerald", "amber", "gold", "silver", "black", "white",
    "gray", "grey", "brown", "beige", "grayscale", "greyscale", "monochrome", "black and white", "sepia",
    "saturated", "desaturated", "oversaturated", "neon", "colorful", "colourful", "vibrant", "vivid",
    "pastel", "rainbow", "multicolored", "technicolor", "muted colors",
];

// "night" and "day" are left out: they read as subject matter as often as
// they read as time of day.
pub const DEFAULT_TIME_TERMS: &[&str] = &[
    "timelapse", "time-lapse", "time lapse", "speedramp", "speed ramp", "slow motion", "nocturnal glow",
    "blue hour", "golden hour", "sunset", "sunrise", "dawn", "dusk", "twilight", "midnight", "noon",
    "midday", "morning", "afternoon", "evening", "daybreak", "nightfall", "daytime", "moonrise",
];

/// Color, time and style vocabularies. Terms are lowercase and may span
/// several words; the three sets are disjoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LexiconsFile", into = "LexiconsFile")]
pub struct DimensionLexicons {
    color: BTreeSet<String>,
    time: BTreeSet<String>,
    style: BTreeSet<String>,
    index: HashMap<Vec<String>, Dimension>,
    longest: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LexiconsFile {
    color_terms: Vec<String>,
    time_terms: Vec<String>,
    style_terms: Vec<String>,
}

impl TryFrom<LexiconsFile> for DimensionLexicons {
    type Error = AnalysisError;

    fn try_from(f: LexiconsFile) -> Result<Self, Self::Error> {
        Self::new(f.color_terms, f.time_terms, f.style_terms)
    }
}

impl From<DimensionLexicons> for LexiconsFile {
    fn from(l: DimensionLexicons) -> Self {
        Self {
            color_terms: l.color.into_iter().collect(),
            time_terms: l.time.into_iter().collect(),
            style_terms: l.style.into_iter().collect(),
        }
    }
}

impl Default for DimensionLexicons {
    /// The style set is the brainstorming keyword list minus anything already
    /// claimed by color or time.
    fn default() -> Self {
        let owned = |terms: &[&str]| terms.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let taken: BTreeSet<&str> = DEFAULT_COLOR_TERMS.iter().chain(DEFAULT_TIME_TERMS).copied().collect();
        let style = DEFAULT_STYLE_KEYWORDS.iter().filter(|k| !taken.contains(*k)).map(|s| s.to_string()).collect();
        Self::new(owned(DEFAULT_COLOR_TERMS), owned(DEFAULT_TIME_TERMS), style).expect("default lexicons are valid")
    }
}

impl DimensionLexicons {
    pub fn new(color: Vec<String>, time: Vec<String>, style: Vec<String>) -> Result<Self, AnalysisError> {
        let mut index = HashMap::new();
        let mut sets = [BTreeSet::new(), BTreeSet::new(), BTreeSet::new()];
        let groups = [(Dimension::Color, color), (Dimension::Time, time), (Dimension::Style, style)];
        for (slot, (dim, terms)) in groups.into_iter().enumerate() {
            if terms.is_empty() {
                return Err(AnalysisError::InvalidLexicons(format!("{dim} terms are empty")));
            }
            for term in terms {
                let words = tokenize(&term);
                if words.is_empty() {
                    return Err(AnalysisError::InvalidLexicons(format!("blank {dim} term {term:?}")));
                }
                match index.get(&words) {
                    Some(other) if *other != dim => {
                        return Err(AnalysisError::InvalidLexicons(format!(
                            "term {term:?} appears in both {other} and {dim}"
                        )))
                    }
                    _ => {}
                }
                sets[slot].insert(words.join(" "));
                index.insert(words, dim);
            }
        }
        let longest = index.keys().map(Vec::len).max().unwrap_or(1);
        let [color, time, style] = sets;
        Ok(Self {
            color,
            time,
            style,
            index,
            longest,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, AnalysisError> {
        serde_json::from_str(text).map_err(|e| AnalysisError::InvalidLexicons(e.to_string()))
    }

    pub fn color_terms(&self) -> &BTreeSet<String> {
        &self.color
    }

    pub fn time_terms(&self) -> &BTreeSet<String> {
        &self.time
    }

    pub fn style_terms(&self) -> &BTreeSet<String> {
        &self.style
    }

    /// Greedy longest-match scan of one phrase. Returns the matched terms
    /// and the words left over.
    pub(super) fn scan(&self, phrase: &str) -> (Vec<(Dimension, String)>, Vec<String>) {
        let words = tokenize(phrase);
        let mut matched = Vec::new();
        let mut rest = Vec::new();
        let mut i = 0;
        'outer: while i < words.len() {
            for len in (1..=self.longest.min(words.len() - i)).rev() {
                if let Some(&dim) = self.index.get(&words[i..i + len]) {
                    matched.push((dim, words[i..i + len].join(" ")));
                    i += len;
                    continue 'outer;
                }
            }
            rest.push(words[i].clone());
            i += 1;
        }
        (matched, rest)
    }
}

/// Lowercase words; punctuation other than apostrophes and hyphens splits.
pub(super) fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '-'))
        .map(|w| w.trim_matches(['\'', '-']))
        .filter(|w| !w.is_empty())
        .map(str::to_owned)
        .collect()
}
