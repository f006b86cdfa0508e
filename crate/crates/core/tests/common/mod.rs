//! Test-only reference implementations and corpus builders.
//!
//! The oracle shares no code with the library's retrieval or metric paths:
//! it ranks the whole pool by exact rational cosine, takes the first `k`,
//! scores them with its own BLEU-4 and keeps the first maximum.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::HashMap;

use nngen::corpus::{Commit, Corpus, Split};
use nngen::ScopePolicy;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_owned).collect()
}

fn counts(tokens: &[String]) -> HashMap<&str, i128> {
    let mut m = HashMap::new();
    for t in tokens {
        *m.entry(t.as_str()).or_insert(0i128) += 1;
    }
    m
}

/// (dot, squared norm of a, squared norm of b)
pub fn oracle_dot(a: &[String], b: &[String]) -> (i128, i128, i128) {
    let ca = counts(a);
    let cb = counts(b);
    let dot = ca
        .iter()
        .map(|(t, x)| x * cb.get(t).copied().unwrap_or(0))
        .sum();
    let na = ca.values().map(|x| x * x).sum();
    let nb = cb.values().map(|x| x * x).sum();
    (dot, na, nb)
}

pub fn oracle_cosine(a: &[String], b: &[String]) -> f64 {
    let (dot, na, nb) = oracle_dot(a, b);
    dot as f64 / ((na * nb) as f64).sqrt()
}

fn grams(tokens: &[String], n: usize) -> HashMap<Vec<String>, u64> {
    let mut m = HashMap::new();
    if tokens.len() >= n {
        for i in 0..=tokens.len() - n {
            *m.entry(tokens[i..i + n].to_vec()).or_insert(0) += 1;
        }
    }
    m
}

/// Unsmoothed BLEU-4 on the 0–100 scale, plus p_1..p_4.
pub fn oracle_bleu(candidate: &[String], reference: &[String]) -> (f64, [f64; 4]) {
    let mut p = [0.0; 4];
    for n in 1..=4 {
        let c = grams(candidate, n);
        let r = grams(reference, n);
        let total: u64 = c.values().sum();
        let hit: u64 = c
            .iter()
            .map(|(g, k)| (*k).min(r.get(g).copied().unwrap_or(0)))
            .sum();
        p[n - 1] = if total == 0 {
            0.0
        } else {
            hit as f64 / total as f64
        };
    }
    let (cl, rl) = (candidate.len() as f64, reference.len() as f64);
    let bp = if cl == 0.0 {
        0.0
    } else if cl > rl {
        1.0
    } else {
        (1.0 - rl / cl).exp()
    };
    if bp == 0.0 || p.contains(&0.0) {
        return (0.0, p);
    }
    let mut log_sum = 0.0;
    for x in p {
        log_sum += x.ln();
    }
    (100.0 * bp * (log_sum / 4.0).exp(), p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome {
    pub neighbor_index: usize,
    pub cosine: f64,
    pub stage2_bleu: f64,
}

/// Brute-force two-stage retrieval; `None` when the scope is empty.
pub fn oracle_generate(
    test: &Commit,
    train: &Corpus,
    policy: ScopePolicy,
    k: usize,
) -> Option<OracleOutcome> {
    let pool: Vec<&Commit> = match (policy, test.repo.as_deref()) {
        (ScopePolicy::Global, _) => train.commits().iter().collect(),
        (_, None) => return None,
        (ScopePolicy::SameRepo, Some(r)) => train
            .commits()
            .iter()
            .filter(|c| c.repo.as_deref() == Some(r))
            .collect(),
        (ScopePolicy::ExcludeRepo, Some(r)) => train
            .commits()
            .iter()
            .filter(|c| c.repo.as_deref() != Some(r))
            .collect(),
    };
    if pool.is_empty() {
        return None;
    }
    let mut ranked: Vec<(&Commit, i128, i128)> = pool
        .into_iter()
        .map(|c| {
            let (dot, _, nc) = oracle_dot(&test.diff_tokens, &c.diff_tokens);
            (c, dot, nc)
        })
        .collect();
    // cos_a > cos_b  <=>  dot_a² · |b|² > dot_b² · |a|²
    ranked.sort_by(|a, b| {
        let lhs = a.1 * a.1 * b.2;
        let rhs = b.1 * b.1 * a.2;
        match rhs.cmp(&lhs) {
            Ordering::Equal => a.0.index.cmp(&b.0.index),
            o => o,
        }
    });
    let mut best: Option<(&Commit, f64)> = None;
    for (c, _, _) in ranked.iter().take(k) {
        let (score, _) = oracle_bleu(&test.diff_tokens, &c.diff_tokens);
        if best.is_none() || score > best.unwrap().1 {
            best = Some((c, score));
        }
    }
    let (c, score) = best?;
    Some(OracleOutcome {
        neighbor_index: c.index,
        cosine: oracle_cosine(&test.diff_tokens, &c.diff_tokens),
        stage2_bleu: score,
    })
}

/// Small random corpora with a tiny vocabulary so that cosine and BLEU ties
/// are common, plus deliberate exact duplicates and unknown repositories.
pub struct TieHeavyCorpus {
    pub train: Corpus,
    pub test: Corpus,
    pub k: usize,
}

pub fn tie_heavy_corpus(seed: u64) -> TieHeavyCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab_size = rng.random_range(3..=8);
    let vocab: Vec<String> = (0..vocab_size).map(|i| format!("t{i}")).collect();
    let n_repos = rng.random_range(2..=6);
    let repos: Vec<String> = (0..n_repos).map(|r| format!("repo{r}")).collect();
    let n_train = rng.random_range(1..=200);
    let n_test = rng.random_range(1..=20);

    let seq = |rng: &mut ChaCha8Rng, max: usize| -> Vec<String> {
        let len = rng.random_range(1..=max);
        (0..len)
            .map(|_| vocab.choose(rng).unwrap().clone())
            .collect()
    };
    let repo_of = |rng: &mut ChaCha8Rng| -> Option<String> {
        if rng.random_bool(0.1) {
            None
        } else {
            Some(repos.choose(rng).unwrap().clone())
        }
    };

    let mut train_commits: Vec<Commit> = Vec::with_capacity(n_train);
    for i in 0..n_train {
        let diff_tokens = if i > 0 && rng.random_bool(0.2) {
            train_commits[rng.random_range(0..i)].diff_tokens.clone()
        } else {
            seq(&mut rng, 8)
        };
        train_commits.push(Commit {
            index: i,
            diff_tokens,
            msg_tokens: seq(&mut rng, 6),
            repo: repo_of(&mut rng),
            split: Split::Train,
        });
    }
    let mut test_commits = Vec::with_capacity(n_test);
    for i in 0..n_test {
        let diff_tokens = if rng.random_bool(0.3) {
            train_commits.choose(&mut rng).unwrap().diff_tokens.clone()
        } else {
            seq(&mut rng, 8)
        };
        test_commits.push(Commit {
            index: i,
            diff_tokens,
            msg_tokens: seq(&mut rng, 6),
            repo: if rng.random_bool(0.05) {
                Some("repo-without-training".into())
            } else {
                repo_of(&mut rng)
            },
            split: Split::Test,
        });
    }
    TieHeavyCorpus {
        train: Corpus::new(Split::Train, train_commits).unwrap(),
        test: Corpus::new(Split::Test, test_commits).unwrap(),
        k: rng.random_range(1..=6),
    }
}

/// Random token sequence over `vocab` distinct tokens.
pub fn random_tokens(
    rng: &mut ChaCha8Rng,
    min: usize,
    max: usize,
    vocab: usize,
    prefix: &str,
) -> Vec<String> {
    let len = rng.random_range(min..=max);
    (0..len)
        .map(|_| format!("{prefix}{}", rng.random_range(0..vocab)))
        .collect()
}
