//! Hold/transition classification of interval endpoint pairs, with
//! transitions tagged along color, time, subject and style.

mod lexicons;

pub use lexicons::{DimensionLexicons, DEFAULT_COLOR_TERMS, DEFAULT_TIME_TERMS};

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::timeline::ImageSpec;

/// Subjects count as changed when the Jaccard overlap of their content
/// words falls below this.
pub const SUBJECT_OVERLAP_THRESHOLD: f64 = 0.5;

const STOPWORDS: &[&str] = &[
    "a", "an", "the", "of", "in", "on", "at", "with", "and", "or", "by", "for", "to", "from", "over", "under",
    "into", "onto", "during", "as", "is", "are", "very", "some", "its", "his", "her", "their", "while",
    "through", "near", "above", "below", "photo", "image", "picture",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("invalid lexicons: {0}")]
    InvalidLexicons(String),
    #[error("malformed corpus: {0}")]
    MalformedCorpus(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Color,
    Time,
    Subject,
    Style,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [Dimension::Color, Dimension::Time, Dimension::Subject, Dimension::Style];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Color => "color",
            Dimension::Time => "time",
            Dimension::Subject => "subject",
            Dimension::Style => "style",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassificationKind {
    Hold,
    Transition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoldRule {
    SameSeed,
    SameKeywords,
}

pub const UNCLASSIFIED: &str = "unclassified";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    /// A dimension name, a hold rule name, or `unclassified`.
    pub rule: String,
    pub terms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalClassification {
    pub kind: ClassificationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hold_rule: Option<HoldRule>,
    /// Sorted in `Dimension` order.
    pub dimensions: Vec<Dimension>,
    pub evidence: Vec<Evidence>,
}

impl IntervalClassification {
    pub fn is_hold(&self) -> bool {
        self.kind == ClassificationKind::Hold
    }

    pub fn is_unclassified(&self) -> bool {
        self.kind == ClassificationKind::Transition && self.dimensions.is_empty()
    }

    pub fn has(&self, dim: Dimension) -> bool {
        self.dimensions.contains(&dim)
    }
}

/// The part of an endpoint the classifier looks at.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptSeed {
    pub prompt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl PromptSeed {
    pub fn new(prompt: impl Into<String>, seed: Option<u64>) -> Self {
        Self {
            prompt: prompt.into(),
            seed,
        }
    }
}

impl From<&ImageSpec> for PromptSeed {
    fn from(spec: &ImageSpec) -> Self {
        Self::new(spec.prompt.clone(), spec.seed)
    }
}

/// Lowercased, whitespace-collapsed phrases, sorted.
fn phrase_multiset(prompt: &str) -> Vec<String> {
    let mut phrases: Vec<String> = prompt
        .split(',')
        .map(|p| p.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase())
        .filter(|p| !p.is_empty())
        .collect();
    phrases.sort();
    phrases
}

struct PromptTerms {
    color: BTreeSet<String>,
    time: BTreeSet<String>,
    style: BTreeSet<String>,
    content: BTreeSet<String>,
}

fn stem(word: &str) -> String {
    if word.len() > 3 && word.ends_with('s') && !word.ends_with("ss") {
        word[..word.len() - 1].to_owned()
    } else {
        word.to_owned()
    }
}

fn extract(prompt: &str, lex: &DimensionLexicons) -> PromptTerms {
    let mut terms = PromptTerms {
        color: BTreeSet::new(),
        time: BTreeSet::new(),
        style: BTreeSet::new(),
        content: BTreeSet::new(),
    };
    for phrase in prompt.split(',') {
        let (matched, rest) = lex.scan(phrase);
        for (dim, term) in matched {
            match dim {
                Dimension::Color => terms.color.insert(term),
                Dimension::Time => terms.time.insert(term),
                Dimension::Style => terms.style.insert(term),
                Dimension::Subject => unreachable!("lexicons hold no subject terms"),
            };
        }
        terms
            .content
            .extend(rest.iter().filter(|w| !STOPWORDS.contains(&w.as_str())).map(|w| stem(w)));
    }
    terms
}

fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

fn symmetric_difference(a: &BTreeSet<String>, b: &BTreeSet<String>) -> Vec<String> {
    a.symmetric_difference(b).cloned().collect::<BTreeSet<_>>().into_iter().collect()
}

/// Hold when both seeds are concrete and equal, or when the prompts share
/// the same phrase multiset. Everything else is a transition, tagged with
/// every dimension that fires.
///
/// Subject words come from every phrase with lexicon terms and stopwords
/// removed, so phrase order never matters.
pub fn classify_pair(start: &PromptSeed, end: &PromptSeed, lex: &DimensionLexicons) -> IntervalClassification {
    if let (Some(a), Some(b)) = (start.seed, end.seed) {
        if a == b {
            return IntervalClassification {
                kind: ClassificationKind::Hold,
                hold_rule: Some(HoldRule::SameSeed),
                dimensions: Vec::new(),
                evidence: vec![Evidence {
                    rule: "same_seed".into(),
                    terms: vec![a.to_string()],
                }],
            };
        }
    }
    let phrases = phrase_multiset(&start.prompt);
    if phrases == phrase_multiset(&end.prompt) {
        return IntervalClassification {
            kind: ClassificationKind::Hold,
            hold_rule: Some(HoldRule::SameKeywords),
            dimensions: Vec::new(),
            evidence: vec![Evidence {
                rule: "same_keywords".into(),
                terms: phrases,
            }],
        };
    }

    let a = extract(&start.prompt, lex);
    let b = extract(&end.prompt, lex);
    let mut dimensions = Vec::new();
    let mut evidence = Vec::new();
    let mut flag = |dim: Dimension, terms: Vec<String>| {
        dimensions.push(dim);
        evidence.push(Evidence {
            rule: dim.as_str().into(),
            terms,
        });
    };
    let union = |x: &BTreeSet<String>, y: &BTreeSet<String>| x.union(y).cloned().collect::<Vec<_>>();

    if !a.color.is_empty() || !b.color.is_empty() {
        flag(Dimension::Color, union(&a.color, &b.color));
    }
    if !a.time.is_empty() || !b.time.is_empty() {
        flag(Dimension::Time, union(&a.time, &b.time));
    }
    if jaccard(&a.content, &b.content) < SUBJECT_OVERLAP_THRESHOLD {
        flag(Dimension::Subject, symmetric_difference(&a.content, &b.content));
    }
    if a.style != b.style {
        flag(Dimension::Style, symmetric_difference(&a.style, &b.style));
    }
    if dimensions.is_empty() {
        evidence.push(Evidence {
            rule: UNCLASSIFIED.into(),
            terms: Vec::new(),
        });
    }
    IntervalClassification {
        kind: ClassificationKind::Transition,
        hold_rule: None,
        dimensions,
        evidence,
    }
}

pub fn classify(start: &ImageSpec, end: &ImageSpec, lex: &DimensionLexicons) -> IntervalClassification {
    classify_pair(&start.into(), &end.into(), lex)
}

/// Expected verdict attached to a hand-labeled corpus entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Label {
    pub kind: ClassificationKind,
    #[serde(default)]
    pub dimensions: Vec<Dimension>,
}

impl Label {
    pub fn matches(&self, c: &IntervalClassification) -> bool {
        let expected: BTreeSet<_> = self.dimensions.iter().collect();
        let found: BTreeSet<_> = c.dimensions.iter().collect();
        self.kind == c.kind && expected == found
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusPair {
    pub start: PromptSeed,
    pub end: PromptSeed,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Label>,
}

/// A JSON array of `{start: {prompt, seed?}, end: {...}, expected?}`.
pub fn parse_corpus(text: &str) -> Result<Vec<CorpusPair>, AnalysisError> {
    serde_json::from_str(text).map_err(|e| AnalysisError::MalformedCorpus(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub pairs: usize,
    pub hold_fraction: f64,
    pub same_seed_fraction: f64,
    pub same_keywords_fraction: f64,
    pub transition_fraction: f64,
    pub color_fraction: f64,
    pub time_fraction: f64,
    pub subject_fraction: f64,
    pub style_fraction: f64,
    pub unclassified_fraction: f64,
    /// Present when at least one pair carries a label.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agreement: Option<Agreement>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub labeled: usize,
    pub agreed: usize,
    pub fraction: f64,
    /// Corpus indices whose verdict differs from the label.
    pub disagreements: Vec<usize>,
}

/// All fractions are over the whole corpus. Pairs that hold under both
/// rules count as same-seed.
pub fn corpus_report(
    pairs: &[CorpusPair],
    lex: &DimensionLexicons,
) -> Result<(CorpusReport, Vec<IntervalClassification>), AnalysisError> {
    if pairs.is_empty() {
        return Err(AnalysisError::EmptyCorpus);
    }
    let results: Vec<_> = pairs.iter().map(|p| classify_pair(&p.start, &p.end, lex)).collect();
    let n = pairs.len() as f64;
    let frac = |f: &dyn Fn(&IntervalClassification) -> bool| results.iter().filter(|c| f(c)).count() as f64 / n;

    let mut labeled = 0;
    let mut disagreements = Vec::new();
    for (i, (pair, c)) in pairs.iter().zip(&results).enumerate() {
        if let Some(label) = &pair.expected {
            labeled += 1;
            if !label.matches(c) {
                disagreements.push(i);
            }
        }
    }
    let agreement = (labeled > 0).then(|| Agreement {
        labeled,
        agreed: labeled - disagreements.len(),
        fraction: (labeled - disagreements.len()) as f64 / labeled as f64,
        disagreements,
    });

    let report = CorpusReport {
        pairs: pairs.len(),
        hold_fraction: frac(&|c| c.is_hold()),
        same_seed_fraction: frac(&|c| c.hold_rule == Some(HoldRule::SameSeed)),
        same_keywords_fraction: frac(&|c| c.hold_rule == Some(HoldRule::SameKeywords)),
        transition_fraction: frac(&|c| !c.is_hold()),
        color_fraction: frac(&|c| c.has(Dimension::Color)),
        time_fraction: frac(&|c| c.has(Dimension::Time)),
        subject_fraction: frac(&|c| c.has(Dimension::Subject)),
        style_fraction: frac(&|c| c.has(Dimension::Style)),
        unclassified_fraction: frac(&|c| c.is_unclassified()),
        agreement,
    };
    Ok((report, results))
}
