//! Generate a small labelled dataset and read it back.
//!
//! `cargo run --example generate_dataset -- [out_dir]`

use std::path::PathBuf;

use tfnet::dataset::{self, Dataset, SignalClass};
use tfnet::NoiseLevel;

fn main() -> tfnet::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("tfnet-dataset"));
    for class in SignalClass::ALL {
        let dir = out.join(class.to_string());
        let manifest = dataset::generate_dataset(class, NoiseLevel::db(10.0), 20, 42, &dir)?;
        println!("{class}: {} train / {} val pairs in {}", manifest.train_count, manifest.val_count, dir.display());

        let data = Dataset::load(&dir)?;
        let first = &data.manifest.samples[0];
        println!("  sample 0: {:?}", first.spec.model);
        let train = data.train_samples();
        let energy: f32 = train[0].label.data.iter().map(|v| v * v).sum();
        println!("  label energy of the first training pair: {energy:.3}");
    }
    Ok(())
}
