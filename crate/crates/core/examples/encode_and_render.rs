//! Encode a partial trajectory as a 5-channel bitmap and write it as PPM.
//!
//! `cargo run --example encode_and_render [out.ppm]`

use std::sync::Arc;

use goalrec::encoder::{encode, render_ppm, Channel};
use goalrec::gridworld::{sample_scenario, synthetic_map};
use goalrec::planner::{astar_noisy, truncate, NoisyHeuristicParams};

fn main() -> goalrec::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "trail.ppm".into());
    let sc = sample_scenario(Arc::new(synthetic_map(64, 0.42, 5)), 9)?;
    let goal = sc.goals()[sc.true_goal()];
    let path = astar_noisy(sc.map(), sc.start(), goal, &NoisyHeuristicParams::standard(1))?;
    let seen = truncate(&path, 50.0)?;
    let bitmap = encode(&sc, &seen)?;
    for ch in Channel::ALL {
        println!("{ch:?}: {}", bitmap.count(ch));
    }
    std::fs::write(&out, render_ppm(&bitmap)).map_err(|e| goalrec::Error::io(out.clone(), e))?;
    println!("wrote {out}");
    Ok(())
}
