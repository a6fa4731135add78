//! Path quality decomposition: coherence, length penalty, and the
//! mixture-of-experts score, combined as w1*C + w2*L + w3*M.
//!
//! Run with: `cargo run --example score_paths`

use thought_colony::graph::{augment, NodeId, Path, ThoughtTree};
use thought_colony::providers::mock::{HashEmbedder, PlantedExpert};
use thought_colony::providers::{ExpertProvider, ExpertRole};
use thought_colony::scoring::{coherence, length_penalty, moe_score, quality, QualityWeights};

fn main() {
    // A tree with one focused route and one meandering route.
    let mut tree = ThoughtTree::new("How many pages does the book have?");
    let root = tree.add_root("count the chapters first");
    let a = tree.add_child(root, "count the pages per chapter next");
    tree.add_child(a, "count the total pages from both counts");
    let b = tree.add_child(root, "weigh the book on a scale");
    tree.add_child(b, "convert grams to an unrelated figure");
    let g = augment(&tree).unwrap();

    let focused = Path::new(vec![g.s0(), NodeId(0), NodeId(1), NodeId(3), g.sf()]);
    let meander = Path::new(vec![g.s0(), NodeId(0), NodeId(2), NodeId(4), g.sf()]);

    let embedder = HashEmbedder::default();
    let experts: Vec<PlantedExpert> = (0..3)
        .map(|k| {
            PlantedExpert::new(
                [
                    "count the chapters first".to_string(),
                    "count the pages per chapter next".to_string(),
                    "count the total pages from both counts".to_string(),
                ],
                0.9,
                0.2,
                0.02,
                k,
                ExpertRole::ALL[k as usize % 5],
            )
            .unwrap()
        })
        .collect();
    let refs: Vec<&dyn ExpertProvider> =
        experts.iter().map(|e| e as &dyn ExpertProvider).collect();
    let weights = QualityWeights::default();

    println!(
        "weights: coherence {}, length {}, experts {}\n",
        weights.w1, weights.w2, weights.w3
    );
    for (name, path) in [("focused", &focused), ("meandering", &meander)] {
        let c = coherence(path, &g, &embedder).unwrap();
        let l = length_penalty(path);
        let m = moe_score(path, &g, &refs).unwrap();
        let q = quality(path, &g, &weights, &embedder, &refs).unwrap();
        println!("{name} route ({} thoughts):", path.thought_count());
        for text in g.chain_texts(path).unwrap() {
            println!("    {text}");
        }
        println!("  coherence      C = {c:.4}");
        println!("  length penalty L = {l:.4}");
        println!("  expert score   M = {m:.4}");
        println!("  total          Q = {:.4}\n", q.total);
    }

    // Shorter is better under the length term alone.
    let mut tiny = ThoughtTree::new("p");
    tiny.add_root("single step");
    let tiny_g = augment(&tiny).unwrap();
    let tiny_path = Path::new(vec![tiny_g.s0(), NodeId(0), tiny_g.sf()]);
    println!(
        "a single-thought path has L = {:.4} and C = {:.1} by definition",
        length_penalty(&tiny_path),
        coherence(&tiny_path, &tiny_g, &embedder).unwrap()
    );
}
