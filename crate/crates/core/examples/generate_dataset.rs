//! Generate a labelled dataset and a few-shot set, save them as GRD1 and
//! print their hashes.

use std::sync::Arc;

use goalrec::dataset::{self, label_histogram, make_shots, DatasetSpec};
use goalrec::gridworld::{sample_scenario, synthetic_map};
use goalrec::planner::NoisyHeuristicParams;

fn main() -> goalrec::Result<()> {
    let sc = sample_scenario(Arc::new(synthetic_map(32, 0.42, 21)), 4)?;
    let spec = DatasetSpec::new(sc.clone(), 10, 99);
    let examples = dataset::generate(&spec)?;
    println!("{} examples (expected {})", examples.len(), spec.total());
    println!("labels {:?}", label_histogram(&examples));

    let bytes = dataset::save(&examples)?;
    assert_eq!(bytes.len(), dataset::encoded_len(examples.len(), 32));
    assert_eq!(dataset::load(&bytes)?, examples);
    println!(
        "GRD1 {} bytes, sha256 {}",
        bytes.len(),
        dataset::dataset_hash(&examples)?
    );

    for n in [0, 1, 5] {
        let shots = make_shots(&sc, n, &NoisyHeuristicParams::standard(0), 5)?;
        println!("{n}-shot set: {} examples", shots.len());
    }
    Ok(())
}
