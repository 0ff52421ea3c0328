//! Writes the synthetic 5-class feature corpus shipped as
//! `data/synthetic_digits.txt`.
//!
//! ```sh
//! cargo run --example synthetic_corpus -- data/synthetic_digits.txt
//! ```

use delay_rc::tasks::{synthetic_corpus, SyntheticCorpusSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "data/synthetic_digits.txt".into());
    let mut corpus = synthetic_corpus(&SyntheticCorpusSpec {
        classes: 5,
        per_class: 20,
        channels: 12,
        min_steps: 20,
        max_steps: 40,
        jitter: 0.1,
        seed: 46,
    })?;
    // four decimals keep the file small and are far below the jitter
    for v in corpus.utterances.iter_mut().flat_map(|u| u.frames.iter_mut().flatten()) {
        *v = (*v * 1e4).round() / 1e4;
    }
    std::fs::write(&path, corpus.to_text())?;
    println!("wrote {} utterances to {path}", corpus.utterances.len());
    Ok(())
}
