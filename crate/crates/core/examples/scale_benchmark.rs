//! Times each retrieval scope at the size of the public dataset:
//! about 22k training and 2.4k test commits over a few hundred repositories.
//!
//! ```bash
//! cargo run --release -p nngen --example scale_benchmark -- [workers]
//! ```

use std::time::Instant;

use nngen::synthetic::{generate, SyntheticConfig};
use nngen::{Retriever, ScopePolicy};

fn main() -> nngen::Result<()> {
    let workers = std::env::args().nth(1).and_then(|s| s.parse().ok());
    let t = Instant::now();
    let data = generate(&SyntheticConfig {
        seed: 0,
        repos: 201,
        train_per_repo: 110,
        test_per_repo: 12,
        unknown_train: 2,
        topics_per_repo: 20,
        boilerplate_len: 60,
        ..SyntheticConfig::default()
    });
    println!(
        "generated {} train / {} test commits in {:.1}s",
        data.train.len(),
        data.test.len(),
        t.elapsed().as_secs_f64()
    );

    let t = Instant::now();
    let retriever = Retriever::new(&data.train);
    println!("indexed in {:.2}s", t.elapsed().as_secs_f64());
    for policy in ScopePolicy::ALL {
        let t = Instant::now();
        let batch = retriever.run_batch(&data.test, policy, workers)?;
        println!(
            "{:<13} {} outcomes in {:.2}s",
            policy.method_name(),
            batch.outcomes.len(),
            t.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
