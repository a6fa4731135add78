//! Tree-of-thought generation with the deterministic mock generator.
//!
//! Builds a depth-3 tree with three branches per node, shows the layer
//! structure and the start/end augmentation, and round-trips the graph
//! through its JSON document.
//!
//! Run with: `cargo run --example generate_tree`

use thought_colony::graph::{generate_tot, ReasoningGraph, ToTGenConfig};
use thought_colony::providers::mock::MockGenerator;

fn main() {
    let problem = "A tank holds 120 liters and drains 8 liters per hour. \
                   When is it half full?";
    let generator = MockGenerator::new(42);
    let cfg = ToTGenConfig {
        max_depth: 3,
        branches: 3,
        node_cap: 10_000,
    };

    let graph = generate_tot(problem, &generator, &cfg).expect("generation succeeds");

    println!("problem: {problem}");
    println!(
        "graph: {} thoughts + 2 sentinels, {} edges",
        graph.thought_count(),
        graph.edge_count()
    );
    println!("s0 = node {}, sf = node {}\n", graph.s0(), graph.sf());

    // Nodes per layer.
    let max_depth = graph
        .nodes()
        .iter()
        .filter(|t| !graph.is_sentinel(t.id))
        .map(|t| t.depth)
        .max()
        .unwrap();
    for depth in 0..=max_depth {
        let layer: Vec<String> = graph
            .nodes()
            .iter()
            .filter(|t| !graph.is_sentinel(t.id) && t.depth == depth)
            .map(|t| format!("{}", t.id))
            .collect();
        println!("depth {depth}: {} nodes [{}]", layer.len(), layer.join(", "));
    }

    // Every path must end at sf; count the fan-in.
    let leaves = graph.predecessors(graph.sf()).expect("sf exists").len();
    println!("\n{leaves} leaves feed the end node");

    // Ancestor chain of one deep node.
    let deep = graph
        .nodes()
        .iter()
        .filter(|t| !graph.is_sentinel(t.id))
        .max_by_key(|t| t.depth)
        .unwrap();
    let state = graph.state_of(deep.id).expect("reachable");
    println!("\nstate of node {} (depth {}):", deep.id, deep.depth);
    for (i, step) in state.chain.iter().enumerate() {
        println!("  {}. {step}", i + 1);
    }

    // Serialization round-trip is bit-exact.
    let json = graph.to_json();
    let back = ReasoningGraph::from_json(&json).expect("round trip");
    assert_eq!(back.to_json(), json);
    println!("\nJSON round-trip: {} bytes, bit-exact", json.len());
}
