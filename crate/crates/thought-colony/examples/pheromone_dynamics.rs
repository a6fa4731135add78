//! Evaporation and deposits: how trails decay and how good paths reinforce
//! their edges across iterations.
//!
//! Run with: `cargo run --example pheromone_dynamics`

use thought_colony::colony::{ColonyConfig, PheromoneMatrix};
use thought_colony::graph::{augment, NodeId, Path, ThoughtTree};

fn main() {
    // Two routes from the root: a "good" one and a "bad" one.
    let mut tree = ThoughtTree::new("p");
    let root = tree.add_root("start");
    let good = tree.add_child(root, "good step");
    let bad = tree.add_child(root, "bad step");
    tree.add_child(good, "good finish");
    tree.add_child(bad, "bad finish");
    let g = augment(&tree).unwrap();

    let cfg = ColonyConfig {
        ants: 2,
        ..ColonyConfig::default()
    };
    let mut ph = PheromoneMatrix::new(&g, cfg.tau0, cfg.tau_min).unwrap();

    // Node ids are breadth-first: start=0, good=1, bad=2, finishes 3/4.
    let good_path = Path::new(vec![g.s0(), NodeId(0), NodeId(1), NodeId(3), g.sf()]);
    let bad_path = Path::new(vec![g.s0(), NodeId(0), NodeId(2), NodeId(4), g.sf()]);

    println!("iteration | tau(good edge) | tau(bad edge) | ratio");
    for t in 1..=8 {
        // Both ants walk; the good path scores 0.6, the bad one 0.05.
        ph.evaporate(cfg.rho).unwrap();
        ph.deposit(
            &[good_path.clone(), bad_path.clone()],
            &[0.6, 0.05],
            &cfg,
        )
        .unwrap();
        let tau_good = ph.level(NodeId(0), NodeId(1)).unwrap();
        let tau_bad = ph.level(NodeId(0), NodeId(2)).unwrap();
        println!(
            "{t:>9} | {tau_good:>14.4} | {tau_bad:>13.4} | {:>5.2}",
            tau_good / tau_bad
        );
    }

    // Pure decay obeys the closed form (1 - rho)^t down to the floor.
    let mut decay = PheromoneMatrix::new(&g, 1.0, 1e-4).unwrap();
    for _ in 0..50 {
        decay.evaporate(0.1).unwrap();
    }
    println!(
        "\nafter 50 deposit-free evaporations at rho = 0.1: tau = {:.6} \
         (closed form {:.6})",
        decay.level(NodeId(0), NodeId(1)).unwrap(),
        0.9f64.powi(50).max(1e-4)
    );

    // Snapshots export as an edge-keyed map.
    println!("\nfinal snapshot of the reinforced matrix:");
    for (edge, tau) in ph.snapshot() {
        println!("  {edge:<8} {tau:.4}");
    }
}
