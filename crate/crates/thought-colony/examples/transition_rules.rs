//! The ant transition rule: pheromone and heuristic combine as
//! tau^alpha * h^beta, normalized over the available successors.
//!
//! Run with: `cargo run --example transition_rules`

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use thought_colony::colony::{
    sample_next_state, transition_probabilities, ColonyConfig, PheromoneMatrix,
};
use thought_colony::graph::{augment, NodeId, ThoughtTree};

fn main() {
    // A root with three candidate next steps.
    let mut tree = ThoughtTree::new("pick the best next step");
    let root = tree.add_root("analyze the problem");
    tree.add_child(root, "try algebra");
    tree.add_child(root, "try a table");
    tree.add_child(root, "guess and check");
    let g = augment(&tree).unwrap();
    let root = NodeId(0);

    let mut ph = PheromoneMatrix::new(&g, 1.0, 1e-4).unwrap();
    let cfg = ColonyConfig::default(); // alpha 1, beta 2

    // Heuristics favor algebra; pheromones are still flat.
    let mut h = BTreeMap::new();
    h.insert(NodeId(1), 0.9);
    h.insert(NodeId(2), 0.5);
    h.insert(NodeId(3), 0.2);

    let dist = transition_probabilities(&g, &ph, root, &h, &cfg).unwrap();
    println!("fresh pheromones, heuristic-driven (beta = 2):");
    for &(node, p) in dist.items() {
        println!("  -> node {node}: {p:.4}");
    }

    // Now the colony has reinforced "try a table".
    ph.set_level(root, NodeId(2), 6.0).unwrap();
    let dist = transition_probabilities(&g, &ph, root, &h, &cfg).unwrap();
    println!("\nafter a 6x pheromone trail on 'try a table' (alpha = 1):");
    for &(node, p) in dist.items() {
        println!("  -> node {node}: {p:.4}");
    }

    // Sampling is seeded and reproducible.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut counts: BTreeMap<NodeId, usize> = BTreeMap::new();
    let draws = 10_000;
    for _ in 0..draws {
        *counts.entry(sample_next_state(&dist, &mut rng)).or_insert(0) += 1;
    }
    println!("\n{draws} seeded draws:");
    for (node, count) in &counts {
        let freq = *count as f64 / draws as f64;
        let expected = dist.probability_of(*node).unwrap();
        println!("  node {node}: {freq:.4} (expected {expected:.4})");
    }

    // The probabilities always sum to one.
    let total: f64 = dist.items().iter().map(|(_, p)| p).sum();
    println!("\nsum of probabilities: {total:.12}");
}
