//! Where do global nearest neighbours come from? Runs unrestricted retrieval
//! on a synthetic corpus, some of whose training commits have no known
//! repository, and breaks BLEU-4 down by neighbour origin.
//!
//! ```bash
//! cargo run -p nngen --example origin_analysis
//! ```

use nngen::evaluation::origin_analysis;
use nngen::synthetic::{generate, SyntheticConfig};
use nngen::{Origin, Retriever, ScopePolicy};

fn main() -> nngen::Result<()> {
    let data = generate(&SyntheticConfig {
        seed: 11,
        unknown_train: 40,
        ..SyntheticConfig::default()
    });
    let batch = Retriever::new(&data.train).run_batch(&data.test, ScopePolicy::Global, None)?;
    let breakdown = origin_analysis(&batch.outcomes, &data.test)?;
    print!("{}", breakdown.render_text());

    let same = breakdown.entry(Origin::SameRepo).mbleu.unwrap_or(0.0);
    let other = breakdown.entry(Origin::OtherRepo).mbleu.unwrap_or(0.0);
    println!("\nMBLEU of same-repository neighbours {same:.2} vs other repositories {other:.2}");
    Ok(())
}
