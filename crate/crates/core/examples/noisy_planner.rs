//! Exact versus noisy A* on a sampled scenario.

use std::sync::Arc;

use goalrec::gridworld::{sample_scenario, synthetic_map};
use goalrec::planner::{astar_noisy, truncate, NoisyHeuristicParams};

fn main() -> goalrec::Result<()> {
    let map = Arc::new(synthetic_map(32, 0.42, 3));
    let sc = sample_scenario(map, 11)?;
    let goal = sc.goals()[sc.true_goal()];
    println!("start {} -> goal {}", sc.start(), goal);

    let exact = astar_noisy(sc.map(), sc.start(), goal, &NoisyHeuristicParams::exact(0))?;
    println!("exact cost {}", exact.cost());

    let costs: Vec<usize> = (0..20)
        .map(|s| astar_noisy(sc.map(), sc.start(), goal, &NoisyHeuristicParams::standard(s)).map(|p| p.cost()))
        .collect::<Result<_, _>>()?;
    let mean = costs.iter().sum::<usize>() as f64 / costs.len() as f64;
    println!("noisy costs {costs:?} (mean {mean:.2})");

    for pct in goalrec::OBSERVABILITIES {
        let prefix = truncate(&exact, pct as f64)?;
        println!(
            "{pct:>3}% observed: {} cells, ends at {}",
            prefix.len(),
            prefix[prefix.len() - 1]
        );
    }
    Ok(())
}
