//! Prompt manipulation and ideation: phrase-shuffle variations, seed
//! resolution for unseeded specs, and LLM-backed brainstorming.

mod brainstorm;
mod lexicon;

pub use brainstorm::{
    brainstorm, brainstorm_prompt, brainstorm_subjects, llm_client_from_env, parse_suggestions, BrainstormError,
    BrainstormResult, HttpLlmClient, LlmClient, StubLlmClient, BRAINSTORM_TEMPLATE, MAX_SUBJECT_WORDS,
};
pub use lexicon::{sample_styles, StyleLexicon, DEFAULT_STYLE_KEYWORDS, STYLE_LEXICON_SIZE};

use std::collections::HashSet;
use std::fmt;
use std::time::{SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::hash::fnv1a64;
use crate::timeline::ImageSpec;

pub const DEFAULT_VARIATION_COUNT: usize = 3;
/// Unseeded specs expand to this many seeded copies.
pub const FALLBACK_SEED_COUNT: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PromptError {
    #[error("prompt is empty")]
    Empty,
    #[error("prompt has an empty phrase at position {0}")]
    EmptyPhrase(usize),
    #[error("variations need a concrete seed")]
    MissingSeed,
}

/// A prompt as an ordered list of comma-delimited phrases.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Prompt {
    phrases: Vec<String>,
}

impl Prompt {
    pub fn parse(text: &str) -> Result<Self, PromptError> {
        if text.trim().is_empty() {
            return Err(PromptError::Empty);
        }
        let phrases = text
            .split(',')
            .enumerate()
            .map(|(i, p)| {
                let p = p.trim();
                if p.is_empty() {
                    Err(PromptError::EmptyPhrase(i))
                } else {
                    Ok(p.to_owned())
                }
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { phrases })
    }

    pub fn phrases(&self) -> &[String] {
        &self.phrases
    }

    /// Phrases sorted, for multiset comparison.
    pub fn phrase_multiset(&self) -> Vec<String> {
        let mut v = self.phrases.clone();
        v.sort();
        v
    }

    fn from_order(phrases: &[String], order: &[usize]) -> Self {
        Self {
            phrases: order.iter().map(|&i| phrases[i].clone()).collect(),
        }
    }
}

impl fmt::Display for Prompt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.phrases.join(", "))
    }
}

/// Permutations above this count are sampled instead of enumerated.
const ENUMERATION_LIMIT: u128 = 40_320;

/// Up to `k` reorderings of the prompt's phrases, each distinct from the
/// input and from one another.
///
/// The choice is deterministic in the prompt text. When fewer than `k`
/// distinct reorderings exist, all of them are returned.
pub fn shuffle_variations(prompt: &Prompt, k: usize) -> Vec<Prompt> {
    let phrases = &prompt.phrases;
    if k == 0 || phrases.len() < 2 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(fnv1a64(prompt.to_string().as_bytes()));

    // Label identical phrases with one class so duplicates collapse.
    let mut classes: Vec<usize> = Vec::with_capacity(phrases.len());
    for p in phrases {
        let class = phrases.iter().position(|q| q == p).expect("phrase is present");
        classes.push(class);
    }

    if distinct_arrangements(&classes) <= ENUMERATION_LIMIT {
        let mut all = Vec::new();
        let mut arrangement = classes.clone();
        arrangement.sort_unstable();
        loop {
            if arrangement != classes {
                all.push(arrangement.clone());
            }
            if !next_permutation(&mut arrangement) {
                break;
            }
        }
        // Partial Fisher-Yates picks k of them uniformly.
        let take = k.min(all.len());
        for i in 0..take {
            let j = rng.random_range(i..all.len());
            all.swap(i, j);
        }
        all.truncate(take);
        return all.iter().map(|order| Prompt::from_order(phrases, order)).collect();
    }

    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    seen.insert(classes.clone());
    let mut out = Vec::with_capacity(k);
    let mut order = classes.clone();
    while out.len() < k {
        for i in (1..order.len()).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        if seen.insert(order.clone()) {
            out.push(Prompt::from_order(phrases, &order));
        }
    }
    out
}

/// Multinomial coefficient `n! / prod(count_i!)`, saturating.
fn distinct_arrangements(classes: &[usize]) -> u128 {
    let mut counts = std::collections::HashMap::new();
    for &c in classes {
        *counts.entry(c).or_insert(0u32) += 1;
    }
    let mut result: u128 = 1;
    let mut placed: u128 = 0;
    for &count in counts.values() {
        for i in 1..=count as u128 {
            placed += 1;
            // result * placed / i stays integral at each step.
            result = match result.checked_mul(placed) {
                Some(v) => v / i,
                None => return u128::MAX,
            };
        }
    }
    result
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Deterministic source of generation seeds.
#[derive(Debug, Clone)]
pub struct SeedSource {
    rng: ChaCha8Rng,
}

impl SeedSource {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Seeded from the current wall-clock time.
    pub fn from_time() -> Self {
        let nanos = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or_default();
        Self::from_seed(nanos)
    }

    /// Next seed, in the 32-bit range diffusion front-ends accept.
    pub fn next_seed(&mut self) -> u64 {
        self.rng.random::<u32>() as u64
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// `[spec]` when seeded; otherwise three copies with pairwise-distinct seeds.
pub fn resolve_seeds(spec: &ImageSpec, source: &mut SeedSource) -> Vec<ImageSpec> {
    if spec.seed.is_some() {
        return vec![spec.clone()];
    }
    let mut seeds: Vec<u64> = Vec::with_capacity(FALLBACK_SEED_COUNT);
    while seeds.len() < FALLBACK_SEED_COUNT {
        let s = source.next_seed();
        if !seeds.contains(&s) {
            seeds.push(s);
        }
    }
    seeds.into_iter().map(|s| spec.with_seed(s)).collect()
}

/// Shuffled-phrase variants of a seeded spec, all keeping its seed.
pub fn variation_specs(spec: &ImageSpec, k: usize) -> Result<Vec<ImageSpec>, PromptError> {
    if spec.seed.is_none() {
        return Err(PromptError::MissingSeed);
    }
    let prompt = Prompt::parse(&spec.prompt)?;
    Ok(shuffle_variations(&prompt, k)
        .into_iter()
        .map(|p| spec.with_prompt(p.to_string()))
        .collect())
}
