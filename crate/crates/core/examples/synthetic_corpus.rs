//! Generates a corpus, writes it as JSON lines plus an edge list, and reads
//! it back.

use threadlab::corpus::{generate_synthetic_corpus, load_corpus, save_corpus, LengthDistribution, SynthConfig};
use threadlab::genmodels::ArrivalModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = SynthConfig {
        posters: 30,
        posts_per_poster: 10,
        model: ArrivalModel::urn(4.0, 1.0),
        lengths: LengthDistribution::Uniform { min: 1, max: 60 },
        seed: 42,
        ..SynthConfig::default()
    };
    let corpus = generate_synthetic_corpus(&config)?;
    let longest = corpus.threads().iter().map(|t| t.len()).max().unwrap_or(0);
    println!(
        "{} threads, {} users, {} friendships, longest thread {longest}",
        corpus.len(),
        corpus.graph().vertex_count(),
        corpus.graph().edge_count()
    );

    let dir = std::env::temp_dir().join(format!("threadlab-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let (threads, edges) = (dir.join("threads.jsonl"), dir.join("edges.csv"));
    save_corpus(&corpus, &threads, &edges)?;
    let reloaded = load_corpus(&threads, &edges)?;
    println!("round trip identical: {}", reloaded.threads() == corpus.threads());
    std::fs::remove_dir_all(&dir)?;

    let t = &corpus.threads()[0];
    println!("first thread {} by {}:", t.thread_id, t.poster_id);
    for c in t.comments.iter().take(5) {
        println!("  t={:>6} {:<10} {}", c.time, c.author_id, c.text);
    }
    Ok(())
}
