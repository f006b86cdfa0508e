//! Two-stage retrieval for a single test diff: cosine top-k, then BLEU-4
//! re-ranking. Prints both stages so the re-ranking step is visible.
//!
//! ```bash
//! cargo run -p nngen --example nearest_neighbor
//! ```

use nngen::corpus::{tokenize, Commit, Corpus, Split};
use nngen::retrieval::{top_k_cosine, vectorize};
use nngen::textmetrics::bleu4_sentence;
use nngen::{Retriever, ScopePolicy};

fn commit(index: usize, diff: &str, msg: &str, repo: &str, split: Split) -> Commit {
    Commit {
        index,
        diff_tokens: tokenize(diff),
        msg_tokens: tokenize(msg),
        repo: Some(repo.to_string()),
        split,
    }
}

fn main() -> nngen::Result<()> {
    let train = Corpus::new(
        Split::Train,
        vec![
            commit(
                0,
                "- import java . util . List ;",
                "remove unused import",
                "acme/core",
                Split::Train,
            ),
            commit(
                1,
                "+ import java . util . List ; + import java . util . Map ;",
                "add imports",
                "acme/core",
                Split::Train,
            ),
            commit(
                2,
                "List ; import . java util",
                "reorder imports",
                "acme/web",
                Split::Train,
            ),
            commit(
                3,
                "+ return null ;",
                "return null when missing",
                "acme/web",
                Split::Train,
            ),
            commit(
                4,
                "<nl> - version = 1 . 2 <nl> + version = 1 . 3",
                "bump version",
                "acme/core",
                Split::Train,
            ),
        ],
    )?;
    let test = commit(
        0,
        "+ import java . util . List ;",
        "add list import",
        "acme/core",
        Split::Test,
    );

    let q = vectorize(&test.diff_tokens)?;
    let vectors: Vec<_> = train
        .commits()
        .iter()
        .map(|c| vectorize(&c.diff_tokens))
        .collect::<Result<_, _>>()?;
    println!("stage 1, cosine top 3:");
    for (pos, cos) in top_k_cosine(&q, vectors.iter().enumerate(), 3) {
        let c = &train.commits()[pos];
        let bleu = bleu4_sentence(&test.diff_tokens, &c.diff_tokens)?.score;
        println!(
            "  #{:<2} cos {cos:.4}  BLEU {bleu:6.2}  {:?}",
            c.index,
            c.message()
        );
    }

    let retriever = Retriever::new(&train).with_k(3);
    for policy in ScopePolicy::ALL {
        match retriever.generate(&test, policy) {
            Ok(o) => println!(
                "{:<13} -> #{} {:?} ({}, pool {})",
                policy.method_name(),
                o.neighbor_index,
                o.generated_msg_tokens.join(" "),
                o.origin.label(),
                o.candidate_pool_size
            ),
            Err(e) => println!("{:<13} -> {e}", policy.method_name()),
        }
    }
    Ok(())
}
