//! N-gram statistics and BLEU-4.
//!
//! Scores are on the 0–100 scale. Sentence-level BLEU is unsmoothed: any
//! zero modified precision makes the score 0. Corpus-level BLEU sums clipped
//! hits, n-gram totals and lengths over all pairs before combining them once.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest n-gram order used by BLEU-4.
pub const MAX_ORDER: usize = 4;

/// Contiguous n-gram counts of one token sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NgramProfile<'a, T: Hash + Eq> {
    pub n: usize,
    pub counts: HashMap<&'a [T], u32>,
}

impl<T: Hash + Eq> NgramProfile<'_, T> {
    pub fn total(&self) -> u64 {
        self.counts.values().map(|&c| u64::from(c)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Sliding-window counts of the contiguous `n`-grams of `tokens`.
///
/// A sequence shorter than `n` yields an empty profile.
pub fn ngram_counts<T: Hash + Eq>(tokens: &[T], n: usize) -> Result<NgramProfile<'_, T>> {
    if !(1..=MAX_ORDER).contains(&n) {
        return Err(Error::InvalidOrder(n));
    }
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    Ok(NgramProfile { n, counts })
}

/// Clipped n-gram hits of `candidate` against `reference`, and the number of
/// candidate n-grams.
fn clipped_hits<T: Hash + Eq>(
    candidate: &NgramProfile<'_, T>,
    reference: &NgramProfile<'_, T>,
) -> (u64, u64) {
    let mut hits = 0u64;
    let mut total = 0u64;
    for (gram, &count) in &candidate.counts {
        let allowed = reference.counts.get(gram).copied().unwrap_or(0);
        hits += u64::from(count.min(allowed));
        total += u64::from(count);
    }
    (hits, total)
}

/// Modified n-gram precision summed over index-paired sequences.
///
/// Returns `(clipped_hits, total)`; `p_n` is their ratio, or 0 when `total`
/// is 0.
pub fn modified_precision<C, R, T>(
    candidates: &[C],
    references: &[R],
    n: usize,
) -> Result<(u64, u64)>
where
    C: AsRef<[T]>,
    R: AsRef<[T]>,
    T: Hash + Eq,
{
    if candidates.len() != references.len() {
        return Err(Error::LengthMismatch {
            candidates: candidates.len(),
            references: references.len(),
        });
    }
    let mut hits = 0;
    let mut total = 0;
    for (cand, refr) in candidates.iter().zip(references) {
        let (h, t) = clipped_hits(
            &ngram_counts(cand.as_ref(), n)?,
            &ngram_counts(refr.as_ref(), n)?,
        );
        hits += h;
        total += t;
    }
    Ok((hits, total))
}

/// Brevity penalty for candidate length `c` and reference length `r`.
pub fn brevity_penalty(c: usize, r: usize) -> Result<f64> {
    if r == 0 {
        return Err(Error::EmptyReference);
    }
    if c == 0 {
        return Ok(0.0);
    }
    if c > r {
        Ok(1.0)
    } else {
        Ok((1.0 - r as f64 / c as f64).exp())
    }
}

/// Modified precisions, brevity penalty and composite BLEU-4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BleuBreakdown {
    /// p_1..p_4, each in [0, 1].
    pub precisions: [f64; MAX_ORDER],
    pub hits: [u64; MAX_ORDER],
    pub totals: [u64; MAX_ORDER],
    pub brevity_penalty: f64,
    /// BLEU-4 on the 0–100 scale.
    pub score: f64,
    pub candidate_len: usize,
    pub reference_len: usize,
}

impl BleuBreakdown {
    fn from_counts(
        hits: [u64; MAX_ORDER],
        totals: [u64; MAX_ORDER],
        candidate_len: usize,
        reference_len: usize,
    ) -> Result<Self> {
        let bp = brevity_penalty(candidate_len, reference_len)?;
        let mut precisions = [0.0; MAX_ORDER];
        for i in 0..MAX_ORDER {
            if totals[i] > 0 {
                precisions[i] = hits[i] as f64 / totals[i] as f64;
            }
        }
        let score = if bp == 0.0 || precisions.contains(&0.0) {
            0.0
        } else {
            let log_sum: f64 = precisions.iter().map(|p| p.ln()).sum();
            100.0 * bp * (log_sum / MAX_ORDER as f64).exp()
        };
        Ok(BleuBreakdown {
            precisions,
            hits,
            totals,
            brevity_penalty: bp,
            score,
            candidate_len,
            reference_len,
        })
    }
}

/// Precomputed 1..4-gram profiles of one sequence, for scoring the same
/// sequence against many others.
pub struct NgramProfiles<'a, T: Hash + Eq> {
    len: usize,
    orders: [NgramProfile<'a, T>; MAX_ORDER],
}

impl<'a, T: Hash + Eq> NgramProfiles<'a, T> {
    pub fn new(tokens: &'a [T]) -> Self {
        let orders = [1, 2, 3, 4].map(|n| ngram_counts(tokens, n).expect("order in range"));
        NgramProfiles {
            len: tokens.len(),
            orders,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// Sentence BLEU-4 from precomputed profiles.
pub fn bleu4_profiles<T: Hash + Eq>(
    candidate: &NgramProfiles<'_, T>,
    reference: &NgramProfiles<'_, T>,
) -> Result<BleuBreakdown> {
    let mut hits = [0; MAX_ORDER];
    let mut totals = [0; MAX_ORDER];
    for i in 0..MAX_ORDER {
        (hits[i], totals[i]) = clipped_hits(&candidate.orders[i], &reference.orders[i]);
    }
    BleuBreakdown::from_counts(hits, totals, candidate.len, reference.len)
}

/// Unsmoothed sentence-level BLEU-4 of `candidate` against a single
/// `reference`.
pub fn bleu4_sentence<T: Hash + Eq>(candidate: &[T], reference: &[T]) -> Result<BleuBreakdown> {
    if reference.is_empty() {
        return Err(Error::EmptyReference);
    }
    bleu4_profiles(
        &NgramProfiles::new(candidate),
        &NgramProfiles::new(reference),
    )
}

/// Corpus-level BLEU-4 over index-paired candidates and references.
pub fn bleu4_corpus<C, R, T>(candidates: &[C], references: &[R]) -> Result<BleuBreakdown>
where
    C: AsRef<[T]>,
    R: AsRef<[T]>,
    T: Hash + Eq,
{
    if candidates.len() != references.len() {
        return Err(Error::LengthMismatch {
            candidates: candidates.len(),
            references: references.len(),
        });
    }
    if references.iter().any(|r| r.as_ref().is_empty()) {
        return Err(Error::EmptyReference);
    }
    let mut hits = [0; MAX_ORDER];
    let mut totals = [0; MAX_ORDER];
    for i in 0..MAX_ORDER {
        (hits[i], totals[i]) = modified_precision(candidates, references, i + 1)?;
    }
    let c = candidates.iter().map(|s| s.as_ref().len()).sum();
    let r = references.iter().map(|s| s.as_ref().len()).sum();
    BleuBreakdown::from_counts(hits, totals, c, r)
}
