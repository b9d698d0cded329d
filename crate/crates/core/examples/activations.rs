//! Dump first- and last-block activation maps of a briefly trained
//! network as PGM images.

use std::path::PathBuf;

use goalrec::harness::{dump_activations, run_base, write_activations, RunConfig};

fn main() -> goalrec::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "activations".into()));
    let cfg = RunConfig {
        grid_size: 32,
        epochs: 2,
        plain: true,
        ..RunConfig::default()
    };
    let run = run_base(&cfg)?;
    let example = &run.test[0];
    for layer in [1, 7] {
        let images = dump_activations(&run.network, &example.bitmap, layer)?;
        let files = write_activations(&images, layer, &out)?;
        println!(
            "layer {layer}: {} images of {}x{}",
            files.len(),
            images[0].width,
            images[0].height
        );
    }
    Ok(())
}
