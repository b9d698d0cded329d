//! Parse a MovingAI map, downscale it and keep the largest open region.
//!
//! `cargo run --example parse_and_downscale [path/to/file.map]`

use goalrec::gridworld::{downscale, parse_movingai, synthetic_map};

fn main() -> goalrec::Result<()> {
    let map = match std::env::args().nth(1) {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| goalrec::Error::io(path.clone(), e))?;
            parse_movingai(&text, &path)?
        }
        None => {
            // Round-trip a synthetic cave through the text format.
            let text = synthetic_map(128, 0.42, 7).to_movingai();
            parse_movingai(&text, "cave")?
        }
    };
    println!(
        "{}: {}x{}, {} blocked",
        map.name(),
        map.width(),
        map.height(),
        map.blocked_count()
    );
    for target in [64, 32, 16] {
        let small = downscale(&map, target)?;
        println!(
            "  {target}x{target}: {} blocked, largest component {} cells",
            small.blocked_count(),
            small.largest_component().len()
        );
    }
    let tiny = downscale(&map, 16)?;
    print!("{}", tiny.to_movingai());
    Ok(())
}
