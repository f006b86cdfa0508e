//! Sentence and corpus BLEU-4 with the full n-gram breakdown.
//!
//! ```bash
//! cargo run -p nngen --example bleu_scoring
//! ```

use nngen::corpus::tokenize;
use nngen::textmetrics::{bleu4_corpus, bleu4_sentence, brevity_penalty};

fn main() -> nngen::Result<()> {
    let pairs = [
        ("a b c d e", "a b c d f"),
        ("fix typo in readme", "fix typo in readme"),
        ("update version", "bump version to 2 . 0"),
        (
            "remove unused imports from util package",
            "remove unused imports",
        ),
    ];

    println!(
        "{:<60} {:>7}  {:>5} {:>5} {:>5} {:>5}  {:>5}",
        "candidate | reference", "BLEU", "p1", "p2", "p3", "p4", "BP"
    );
    let mut cands = Vec::new();
    let mut refs = Vec::new();
    for (c, r) in pairs {
        let (c, r) = (tokenize(c), tokenize(r));
        let b = bleu4_sentence(&c, &r)?;
        let label = format!("{} | {}", c.join(" "), r.join(" "));
        let p = b.precisions.map(|x| 100.0 * x);
        println!(
            "{label:<60} {:>7.2}  {:>5.1} {:>5.1} {:>5.1} {:>5.1}  {:>5.3}",
            b.score, p[0], p[1], p[2], p[3], b.brevity_penalty
        );
        cands.push(c);
        refs.push(r);
    }

    // Corpus BLEU pools n-gram counts before taking the geometric mean, so a
    // pair with no 4-gram match no longer zeroes the whole score.
    let corpus = bleu4_corpus(&cands, &refs)?;
    println!(
        "\ncorpus BLEU-4 = {:.2} (hits {:?} / totals {:?})",
        corpus.score, corpus.hits, corpus.totals
    );
    println!("BP(5, 10) = {:.6}", brevity_penalty(5, 10)?);
    Ok(())
}
