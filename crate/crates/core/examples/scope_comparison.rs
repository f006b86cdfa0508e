//! Compares the three retrieval scopes on a synthetic multi-repository
//! corpus and prints a ranked BLEU-4 table.
//!
//! ```bash
//! cargo run -p nngen --example scope_comparison -- [seed]
//! ```

use nngen::evaluation::{compare, method_report, origin_analysis};
use nngen::synthetic::{generate, SyntheticConfig};
use nngen::{Retriever, ScopePolicy};

fn main() -> nngen::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(42);
    let data = generate(&SyntheticConfig {
        seed,
        ..SyntheticConfig::default()
    });
    println!(
        "{} training commits, {} test commits, {} repositories\n",
        data.train.len(),
        data.test.len(),
        data.train.by_repo().len()
    );

    let retriever = Retriever::new(&data.train);
    let mut reports = Vec::new();
    for policy in ScopePolicy::ALL {
        let batch = retriever.run_batch(&data.test, policy, None)?;
        if policy == ScopePolicy::Global {
            let origins = origin_analysis(&batch.outcomes, &data.test)?;
            println!(
                "Where the global neighbours come from:\n{}",
                origins.render_text()
            );
        }
        reports.push(method_report(policy.method_name(), &batch, &data.test)?);
    }
    print!("{}", compare(&reports).render_text());
    Ok(())
}
